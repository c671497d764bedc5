//! Drinfeld modules from A-lattices in C_infinity via the lattice exponential.
//!
//! e_V(z) = z prod_{0 != v in V} (1 - z/v) is built one generator at a time
//! with e_{V+Fu}(z) = e_V(z) - e_V(z)^q / e_V(u)^{q-1}, over
//! V = span_Fq { theta^k w_i : deg(theta^k w_i) <= D }.

use crate::analytic::AnalyticModule;
use crate::cinf::{max_deg, CInf};
use crate::error::MathError;
use crate::Rat;

#[derive(Clone, Debug)]
pub struct LatticeDef {
    pub basis: Vec<CInf>,
}

#[derive(Clone, Debug)]
pub struct LatticeReport {
    /// Final enumeration bound D.
    pub bound: i64,
    pub generators: usize,
    /// Largest non-q-power coefficient of the product expansion over a small subspace.
    pub linearity_defect: Option<Rat>,
    /// Product expansion against the recursive q-polynomial on that subspace.
    pub product_vs_recursive: Option<Rat>,
    /// Degrees of kappa_{r+1}, kappa_{r+2}.
    pub extra_kappa_degs: Vec<Option<Rat>>,
    /// Change of the kappa's between bounds D - 1 and D.
    pub stability_defect: Option<Rat>,
    /// Degrees of Exp_phi(w_j) for the resulting Drinfeld module.
    pub exp_residuals: Vec<Option<Rat>>,
    /// Largest relative defect between lattice Exp coefficients and the
    /// Sylvester recursion from the kappa's.
    pub coeff_defect_rel: Option<Rat>,
}

#[derive(Clone, Debug)]
pub struct LatticeDrinfeld {
    /// kappa_1 .. kappa_r.
    pub kappa: Vec<CInf>,
    /// alpha_0 = 1, alpha_1, ..., alpha_{r+2}: Exp_Lambda(z) = sum alpha_h z^{q^h}.
    pub exp_coeffs: Vec<CInf>,
    pub report: LatticeReport,
}

fn frac(x: Rat) -> Rat {
    x - x.floor()
}

fn check_basis(basis: &[CInf]) -> Result<Vec<Rat>, MathError> {
    if basis.is_empty() {
        return Err(MathError::DimensionMismatch("empty lattice basis".into()));
    }
    let degs: Vec<Rat> =
        basis.iter().map(|w| w.deg().ok_or(MathError::DivisionByZeroToPrecision)).collect::<Result<_, _>>()?;
    for i in 0..degs.len() {
        for j in 0..i {
            if frac(degs[i]) == frac(degs[j]) {
                return Err(MathError::BasisDegreesNotDistinct(format!(
                    "w_{} and w_{} have degrees {} and {}",
                    j + 1,
                    i + 1,
                    degs[j],
                    degs[i]
                )));
            }
        }
    }
    Ok(degs)
}

fn generators(basis: &[CInf], degs: &[Rat], bound: i64) -> Vec<CInf> {
    let field = basis[0].field();
    let mut g: Vec<(Rat, CInf)> = Vec::new();
    for (w, d) in basis.iter().zip(degs) {
        let mut k = 0i64;
        while *d + Rat::from_integer(k) <= Rat::from_integer(bound) {
            g.push((*d + Rat::from_integer(k), w.mul(&CInf::theta_pow(field, Rat::from_integer(k)))));
            k += 1;
        }
    }
    g.sort_by(|a, b| a.0.cmp(&b.0));
    g.into_iter().map(|x| x.1).collect()
}

/// alpha_0..alpha_h of e_V for V spanned by `gens`.
fn lattice_exp_coeffs(gens: &[CInf], h: usize) -> Result<Vec<CInf>, MathError> {
    let field = gens[0].field();
    let q = field.q();
    let mut alpha = vec![CInf::one(field)];
    alpha.resize(h + 1, CInf::zero(field));
    let mut vals: Vec<CInf> = gens.to_vec();
    for idx in 0..gens.len() {
        let c = vals[idx].clone();
        if c.is_zero() {
            return Err(MathError::LinearitySanityFailed(format!(
                "generator {idx} lies in the span of the previous ones to precision"
            )));
        }
        let cinv = c.pow(q - 1).inv()?;
        for k in (1..=h).rev() {
            let corr = alpha[k - 1].twist(1).mul(&cinv);
            alpha[k] = alpha[k].sub(&corr);
        }
        for v in vals.iter_mut().skip(idx + 1) {
            *v = v.sub(&v.twist(1).mul(&cinv));
        }
    }
    Ok(alpha)
}

/// kappa_h from alpha_h (theta^{q^h} - theta) = sum_{i=1}^h kappa_i alpha_{h-i}^{q^i}.
fn kappas_from_alpha(theta: &CInf, alpha: &[CInf]) -> Vec<CInf> {
    let mut kappa: Vec<CInf> = Vec::new();
    for h in 1..alpha.len() {
        let mut k = alpha[h].mul(&theta.twist(h as i64).sub(theta));
        for i in 1..h {
            k = k.sub(&kappa[i - 1].mul(&alpha[h - i].twist(i as i64)));
        }
        kappa.push(k);
    }
    kappa
}

/// Ordinary power series coefficients of z prod_{0 != v in V} (1 - z/v) over
/// V spanned by `gens`, and the largest degree at a non-q-power index.
fn product_expansion(gens: &[CInf]) -> Result<(Vec<CInf>, Option<Rat>), MathError> {
    let field = gens[0].field();
    let scalars: Vec<_> = field.elements().filter(|x| field.in_fq(*x)).collect();
    let mut span = vec![CInf::zero(field)];
    for g in gens {
        let mut next = Vec::with_capacity(span.len() * scalars.len());
        for s in &scalars {
            for v in &span {
                next.push(v.add(&g.scale(*s)));
            }
        }
        span = next;
    }
    let mut poly = vec![CInf::zero(field), CInf::one(field)];
    for v in span.iter().skip(1) {
        let vi = v.inv()?.neg();
        let mut next = poly.clone();
        next.push(CInf::zero(field));
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] = next[i + 1].add(&c.mul(&vi));
        }
        poly = next;
    }
    let q = field.q() as usize;
    let mut bad = None;
    for (m, c) in poly.iter().enumerate().skip(1) {
        let mut k = m;
        while k % q == 0 {
            k /= q;
        }
        if k != 1 {
            bad = max_deg(bad, c.deg_bound());
        }
    }
    Ok((poly, bad))
}

fn kappa_defect(a: &[CInf], b: &[CInf]) -> Option<Rat> {
    a.iter().zip(b).fold(None, |acc, (x, y)| max_deg(acc, x.defect(y)))
}

fn linear_check(gens: &[CInf]) -> Result<(Option<Rat>, Option<Rat>), MathError> {
    let q = gens[0].field().q();
    let k = if q == 2 { 3 } else { 2 }.min(gens.len());
    let sub = &gens[..k];
    let (poly, bad) = product_expansion(sub)?;
    let alpha = lattice_exp_coeffs(sub, k)?;
    let mut d = None;
    let mut idx = 1usize;
    for a in &alpha {
        d = max_deg(d, a.sub(&poly[idx]).deg_bound());
        idx *= q as usize;
    }
    Ok((bad, d))
}

/// Drinfeld module with period lattice `A w_1 + ... + A w_r`, with kappa's to
/// absolute precision `prec`.
pub fn lattice_to_drinfeld(lat: &LatticeDef, prec: i64) -> Result<LatticeDrinfeld, MathError> {
    let degs = check_basis(&lat.basis)?;
    let r = lat.basis.len();
    let field = lat.basis[0].field().clone();
    let theta = CInf::theta(&field);
    let h = r + 2;
    let top = degs.iter().max().unwrap().ceil().to_integer();
    let start = top + 1;
    let cap = start + 16;
    let mut prev: Option<Vec<CInf>> = None;
    let mut bound = start;
    let mut result = None;
    while bound <= cap {
        let gens = generators(&lat.basis, &degs, bound);
        let alpha = lattice_exp_coeffs(&gens, h)?;
        let kappa = kappas_from_alpha(&theta, &alpha);
        if let Some(p) = &prev {
            let d = kappa_defect(p, &kappa);
            if d.map_or(true, |x| x < Rat::from_integer(-prec)) {
                result = Some((gens, alpha, kappa, d));
                break;
            }
        }
        prev = Some(kappa);
        bound += 1;
    }
    let (gens, alpha, kappa, stability) = result.ok_or_else(|| {
        MathError::EnumerationBoundTooSmall(format!("kappa's did not stabilize to precision {prec} up to bound {cap}"))
    })?;
    for k in &kappa[..r] {
        if k.prec().map_or(false, |p| p < Rat::from_integer(prec)) {
            return Err(MathError::EnumerationBoundTooSmall(format!(
                "kappa known only to precision {:?}; raise the basis precision",
                k.prec()
            )));
        }
    }
    let (linearity_defect, product_vs_recursive) = linear_check(&gens)?;
    let kr: Vec<CInf> = kappa[..r].iter().map(|k| k.truncate(Rat::from_integer(prec))).collect();
    let extra_kappa_degs = kappa[r..].iter().map(|k| k.deg_bound()).collect();
    let module = AnalyticModule::drinfeld(&theta, &kr, prec + 20);
    let mut exp_residuals = Vec::new();
    for w in &lat.basis {
        let v = module.exp_eval(std::slice::from_ref(w), Rat::from_integer(prec))?;
        exp_residuals.push(v.scalar().deg_bound());
    }
    let mut coeff_defect_rel = None;
    for (i, a) in alpha.iter().enumerate().skip(1) {
        let b = module.exp_coeff(i)?;
        let b = b.get(0, 0);
        let rel = match (a.defect(b), b.deg()) {
            (Some(d), Some(db)) => Some(d - db),
            (d, _) => d,
        };
        coeff_defect_rel = max_deg(coeff_defect_rel, rel);
    }
    Ok(LatticeDrinfeld {
        kappa: kr,
        exp_coeffs: alpha,
        report: LatticeReport {
            bound,
            generators: gens.len(),
            linearity_defect,
            product_vs_recursive,
            extra_kappa_degs,
            stability_defect: stability,
            exp_residuals,
            coeff_defect_rel,
        },
    })
}
