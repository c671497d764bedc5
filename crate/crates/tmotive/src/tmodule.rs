//! Anderson t-modules given by phi_t, and the explicit families used here:
//! Drinfeld modules, Carlitz tensor powers, the modules E_e and extensions.

use crate::ring::{Mat, Twist};
use crate::skew::{coefficient_matrices, SkewMat, SkewPoly, Var};

#[derive(Clone, Debug)]
pub struct TModuleDef<R> {
    pub phi_t: SkewMat<R>,
}

impl<R: Twist> TModuleDef<R> {
    pub fn new(phi_t: SkewMat<R>) -> Self {
        assert_eq!(phi_t.rows(), phi_t.cols(), "phi_t must be square");
        TModuleDef { phi_t }
    }

    pub fn dim(&self) -> usize {
        self.phi_t.rows()
    }

    /// Coefficient matrices A_0 = d phi_t, A_1, ..., A_l.
    pub fn coeff_mats(&self) -> Vec<Mat<R>> {
        coefficient_matrices(&self.phi_t)
    }

    pub fn dphi(&self) -> Mat<R> {
        self.coeff_mats().swap_remove(0)
    }

    /// d phi_t - theta Id, given theta.
    pub fn nilpotent_part(&self, theta: &R) -> Mat<R> {
        self.dphi().sub(&Mat::scalar_like(theta, self.dim()))
    }

    /// N^d = 0 for N = d phi_t - theta Id.
    pub fn is_nilpotent_shape(&self, theta: &R) -> bool {
        let n = self.nilpotent_part(theta);
        n.pow(self.dim() as u32).is_zero()
    }

    pub fn phi_power(&self, k: u32) -> SkewMat<R> {
        self.phi_t.pow(k)
    }
}

fn tau<R: Twist>(c: Vec<R>) -> SkewPoly<R> {
    SkewPoly::new(Var::Tau, c)
}

/// rho_t = theta + kappa_1 tau + ... + kappa_r tau^r.
pub fn drinfeld<R: Twist>(theta: &R, kappa: &[R]) -> TModuleDef<R> {
    let mut c = vec![theta.clone()];
    c.extend(kappa.iter().cloned());
    TModuleDef::new(Mat::from_rows(vec![vec![tau(c)]]))
}

/// [t]_n: theta on the diagonal, 1 on the superdiagonal, tau bottom-left.
pub fn carlitz_tensor<R: Twist>(theta: &R, n: usize) -> TModuleDef<R> {
    let z = theta.zero_like();
    let one = theta.one_like();
    TModuleDef::new(Mat::from_fn(n, n, |i, j| {
        let mut c = vec![z.clone(), z.clone()];
        if i == j {
            c[0] = theta.clone();
        }
        if j == i + 1 {
            c[0] = c[0].add(&one);
        }
        if i == n - 1 && j == 0 {
            c[1] = one.clone();
        }
        tau(c)
    }))
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// psi_e for E_e = C^{(x)e} (x) wedge^{r-1} E; `kappa = [kappa_1..kappa_r]`.
pub fn build_ee<R: Twist>(r: usize, e: usize, theta: &R, kappa: &[R]) -> TModuleDef<R> {
    assert!(r >= 2 && kappa.len() == r);
    let z = theta.zero_like();
    let k = |i: usize| kappa[i - 1].clone();
    let s = theta.from_int_like(sign(r - 1));
    if e == 0 {
        let d = r - 1;
        // (-1)^{r-1} M1 tau + M2 tau^2
        let mut m1 = Mat::zeros_like(&z, d, d);
        for i in 1..d {
            m1.set(i - 1, 0, k(r - i).neg());
            m1.set(i - 1, i, k(r));
        }
        m1.set(d - 1, 0, k(1).neg());
        let mut m2 = Mat::zeros_like(&z, d, d);
        m2.set(d - 1, 0, k(r));
        return TModuleDef::new(Mat::from_fn(d, d, |i, j| {
            let c0 = if i == j { theta.clone() } else { z.clone() };
            tau(vec![c0, s.mul(m1.get(i, j)), m2.get(i, j).clone()])
        }));
    }
    let d = r * e + r - 1;
    let mut n = Mat::zeros_like(&z, d, d);
    for i in 0..(r * e - 1) {
        n.set(i, i + r, theta.one_like());
    }
    let mut b = Mat::zeros_like(&z, d, d);
    b.set(r * e - 1, 0, theta.one_like());
    for kk in 1..r {
        b.set(r * e - 1 + kk, 0, k(r - kk).neg());
        b.set(r * e - 1 + kk, kk, k(r));
    }
    TModuleDef::new(Mat::from_fn(d, d, |i, j| {
        let mut c0 = n.get(i, j).clone();
        if i == j {
            c0 = c0.add(theta);
        }
        tau(vec![c0, s.mul(b.get(i, j))])
    }))
}

/// Biderivation data: delta(t) as an n x d skew matrix.
#[derive(Clone, Debug)]
pub struct BiderivationDef<R> {
    pub n: usize,
    pub delta_t: SkewMat<R>,
}

impl<R: Twist> BiderivationDef<R> {
    pub fn new(delta_t: SkewMat<R>) -> Self {
        BiderivationDef { n: delta_t.rows(), delta_t }
    }

    /// delta(t) = beta_1 tau + ... + beta_m tau^m into C^{(x)n}'s last row.
    pub fn from_betas(n: usize, d: usize, betas: &[R], proto: &R) -> Self {
        let mut c = vec![proto.zero_like()];
        c.extend(betas.iter().cloned());
        let z = tau(vec![proto.zero_like()]);
        let m = Mat::from_fn(n, d, |i, j| if i == n - 1 && j == 0 { tau(c.clone()) } else { z.clone() });
        BiderivationDef::new(m)
    }

    /// No constant term: delta(t) in Mat(K[tau]) tau.
    pub fn is_partial(&self) -> bool {
        self.delta_t.entries().all(|p| p.coeff(0).is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.delta_t.is_zero()
    }
}

/// The t-module G_delta with phi_t = [[phi_t, 0], [delta(t), [t]_n]].
#[derive(Clone, Debug)]
pub struct ExtensionDef<R> {
    pub base: TModuleDef<R>,
    pub delta: BiderivationDef<R>,
    pub module: TModuleDef<R>,
}

pub fn extension_module<R: Twist>(base: &TModuleDef<R>, delta: &BiderivationDef<R>, theta: &R) -> ExtensionDef<R> {
    let d = base.dim();
    assert_eq!(delta.delta_t.cols(), d, "biderivation source dimension");
    let n = delta.n;
    let ct = carlitz_tensor(theta, n);
    let z = tau(vec![theta.zero_like()]);
    let phi = Mat::from_fn(d + n, d + n, |i, j| match (i < d, j < d) {
        (true, true) => base.phi_t.get(i, j).clone(),
        (true, false) => z.clone(),
        (false, true) => delta.delta_t.get(i - d, j).clone(),
        (false, false) => ct.phi_t.get(i - d, j - d).clone(),
    });
    ExtensionDef { base: base.clone(), delta: delta.clone(), module: TModuleDef::new(phi) }
}
