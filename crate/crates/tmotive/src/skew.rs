//! Twisted polynomials R[tau] (tau a = a^{(1)} tau) and R[sigma]
//! (sigma a = a^{(-1)} sigma), their matrices and the star map between them.

use crate::cinf::CInf;
use crate::ring::{Mat, Ring, Twist};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Tau,
    Sigma,
}

impl Var {
    fn step(self) -> i64 {
        match self {
            Var::Tau => 1,
            Var::Sigma => -1,
        }
    }
}

/// `sum_i c[i] v^i` with `v` in {tau, sigma}; `c` is never empty.
#[derive(Clone, Debug)]
pub struct SkewPoly<R> {
    var: Var,
    c: Vec<R>,
}

impl<R: Twist> SkewPoly<R> {
    pub fn new(var: Var, mut c: Vec<R>) -> Self {
        assert!(!c.is_empty(), "skew polynomial needs a coefficient prototype");
        while c.len() > 1 && c.last().unwrap().is_zero() {
            c.pop();
        }
        SkewPoly { var, c }
    }

    pub fn tau(c: Vec<R>) -> Self {
        Self::new(Var::Tau, c)
    }

    pub fn sigma(c: Vec<R>) -> Self {
        Self::new(Var::Sigma, c)
    }

    pub fn constant(var: Var, a: R) -> Self {
        Self::new(var, vec![a])
    }

    /// `a * v^k`.
    pub fn monomial(var: Var, a: R, k: usize) -> Self {
        let mut c = vec![a.zero_like(); k + 1];
        c[k] = a;
        Self::new(var, c)
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn coeffs(&self) -> &[R] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> R {
        self.c.get(i).cloned().unwrap_or_else(|| self.c[0].zero_like())
    }

    /// Index of the top nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    /// Star map: `(sum b_i tau^i)^* = sum b_i^{(-i)} sigma^i` and back.
    pub fn star(&self) -> Self {
        let (var, sgn) = match self.var {
            Var::Tau => (Var::Sigma, -1),
            Var::Sigma => (Var::Tau, 1),
        };
        let c = self.c.iter().enumerate().map(|(i, b)| b.twist(sgn * i as i64)).collect();
        Self::new(var, c)
    }

    /// Coefficientwise twist (a ring endomorphism commuting with v).
    pub fn twist_coeffs(&self, n: i64) -> Self {
        Self::new(self.var, self.c.iter().map(|x| x.twist(n)).collect())
    }
}

impl<R: Twist> Ring for SkewPoly<R> {
    fn zero_like(&self) -> Self {
        Self::new(self.var, vec![self.c[0].zero_like()])
    }
    fn one_like(&self) -> Self {
        Self::new(self.var, vec![self.c[0].one_like()])
    }
    fn from_int_like(&self, k: i64) -> Self {
        Self::new(self.var, vec![self.c[0].from_int_like(k)])
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.var, other.var, "mixing tau and sigma polynomials");
        let n = self.c.len().max(other.c.len());
        let c = (0..n)
            .map(|i| match (self.c.get(i), other.c.get(i)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                _ => unreachable!(),
            })
            .collect();
        Self::new(self.var, c)
    }
    fn neg(&self) -> Self {
        Self::new(self.var, self.c.iter().map(|x| x.neg()).collect())
    }
    fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.var, other.var, "mixing tau and sigma polynomials");
        let step = self.var.step();
        let n = self.c.len() + other.c.len() - 1;
        let mut out: Vec<Option<R>> = vec![None; n];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                // a v^i b v^j = a b^{(step i)} v^{i+j}
                let term = a.mul(&b.twist(step * i as i64));
                out[i + j] = Some(match out[i + j].take() {
                    None => term,
                    Some(x) => x.add(&term),
                });
            }
        }
        let z = self.c[0].zero_like();
        Self::new(self.var, out.into_iter().map(|x| x.unwrap_or_else(|| z.clone())).collect())
    }
}

impl<R: Twist> Twist for SkewPoly<R> {
    fn twist(&self, n: i64) -> Self {
        self.twist_coeffs(n)
    }
}

pub type SkewMat<R> = Mat<SkewPoly<R>>;

/// Entrywise star with transpose: `B^* = (b_{ji}^*)`.
pub fn star_mat<R: Twist>(b: &SkewMat<R>) -> SkewMat<R> {
    Mat::from_fn(b.cols(), b.rows(), |i, j| b.get(j, i).star())
}

/// Split a skew matrix into coefficient matrices `M = sum_k M_k v^k`.
pub fn coefficient_matrices<R: Twist>(m: &SkewMat<R>) -> Vec<Mat<R>> {
    let top = m.entries().map(|x| x.degree()).max().unwrap_or(0);
    (0..=top).map(|k| m.map(|x| x.coeff(k))).collect()
}

/// Assemble `sum_k M_k v^k`.
pub fn from_coefficient_matrices<R: Twist>(var: Var, ms: &[Mat<R>]) -> SkewMat<R> {
    let (r, c) = (ms[0].rows(), ms[0].cols());
    Mat::from_fn(r, c, |i, j| SkewPoly::new(var, ms.iter().map(|m| m.get(i, j).clone()).collect()))
}

/// `(sum_i A_i tau^i)(z) = sum_i A_i z^{(i)}` for a column vector `z`.
pub fn skew_apply(a: &SkewMat<CInf>, z: &[CInf]) -> Vec<CInf> {
    assert_eq!(a.cols(), z.len(), "skew_apply dimension");
    let top = a.entries().map(|x| x.degree()).max().unwrap_or(0);
    let twists: Vec<Vec<CInf>> = (0..=top).map(|i| z.iter().map(|x| x.twist(i as i64)).collect()).collect();
    (0..a.rows())
        .map(|i| {
            let mut acc = z[0].zero_like();
            for j in 0..a.cols() {
                let p = a.get(i, j);
                assert_eq!(p.var(), Var::Tau, "skew_apply needs tau polynomials");
                for (k, c) in p.coeffs().iter().enumerate() {
                    if !c.is_zero() {
                        acc = acc.add(&c.mul(&twists[k][j]));
                    }
                }
            }
            acc
        })
        .collect()
}

/// Scalar version of [`skew_apply`].
pub fn skew_apply_scalar(a: &SkewPoly<CInf>, z: &CInf) -> CInf {
    let mut acc = z.zero_like();
    for (k, c) in a.coeffs().iter().enumerate() {
        if !c.is_zero() {
            acc = acc.add(&c.mul(&z.twist(k as i64)));
        }
    }
    acc
}
