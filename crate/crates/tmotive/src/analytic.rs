//! Exponential and logarithm series of t-modules over C_infinity,
//! quasi-periodic functions of biderivations and the Carlitz period.

use std::sync::Mutex;

use crate::cinf::{cmp_deg, max_deg, CInf};
use crate::error::MathError;
use crate::field::FieldConfig;
use crate::ring::{Mat, Ring};
use crate::skew::coefficient_matrices;
use crate::tmodule::{drinfeld, BiderivationDef, TModuleDef};
use crate::Rat;

/// Largest number of series terms; keeps `q^i` exponent scaling in range.
fn max_terms(q: u64) -> usize {
    let mut n = 0usize;
    let mut v: u64 = 1;
    while v <= (1u64 << 34) / q {
        v *= q;
        n += 1;
    }
    n
}

pub fn mat_vec(a: &Mat<CInf>, z: &[CInf]) -> Vec<CInf> {
    assert_eq!(a.cols(), z.len(), "matrix-vector dimension");
    (0..a.rows())
        .map(|i| {
            let mut acc = z[0].zero_like();
            for (j, zj) in z.iter().enumerate() {
                let c = a.get(i, j);
                if !c.is_zero() {
                    acc = acc.add(&c.mul(zj));
                }
            }
            acc
        })
        .collect()
}

pub fn vec_deg(v: &[CInf]) -> Option<Rat> {
    v.iter().fold(None, |acc, x| max_deg(acc, x.deg_bound()))
}

pub fn mat_deg(m: &Mat<CInf>) -> Option<Rat> {
    m.entries().fold(None, |acc, x| max_deg(acc, x.deg_bound()))
}

/// Solve `X (theta^{q^i} + N1) - (theta + N2) X = R` for nilpotent N1, N2 by
/// `X <- (R - X N1 + N2 X) / (theta^{q^i} - theta)`.
fn sylvester(r: &Mat<CInf>, inv: &CInf, n1: &Mat<CInf>, n2: &Mat<CInf>) -> Mat<CInf> {
    let steps = n1.rows() + n2.rows();
    let mut x = r.map(|e| e.mul(inv));
    let trivial = n1.is_zero() && n2.is_zero();
    if trivial {
        return x;
    }
    for _ in 0..steps {
        let next = r.sub(&x.mul(n1)).add(&n2.mul(&x)).map(|e| e.mul(inv));
        x = next;
    }
    x
}

/// Value of a truncated series with its certificate.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: Vec<CInf>,
    /// Number of terms summed (including index 0).
    pub terms: usize,
    /// Degree bound of each summed term.
    pub term_degs: Vec<Option<Rat>>,
    /// Degree of the last computed term; the dropped tail is below it.
    pub tail_deg: Option<Rat>,
}

impl SeriesValue {
    pub fn scalar(&self) -> &CInf {
        &self.value[0]
    }
}

fn fmt_degs(d: &[Option<Rat>]) -> String {
    d.iter().map(|x| x.map_or("-inf".to_string(), crate::cinf::fmt_rat)).collect::<Vec<_>>().join(", ")
}

/// A t-module over C_infinity with memoized Exp and Log coefficients.
#[derive(Debug)]
pub struct AnalyticModule {
    pub module: TModuleDef<CInf>,
    pub theta: CInf,
    /// Relative theta-precision used when dividing by theta^{q^i} - theta.
    pub rel: i64,
    a: Vec<Mat<CInf>>,
    nil: Mat<CInf>,
    exp: Mutex<Vec<Mat<CInf>>>,
    log: Mutex<Vec<Mat<CInf>>>,
}

impl Clone for AnalyticModule {
    fn clone(&self) -> Self {
        AnalyticModule {
            module: self.module.clone(),
            theta: self.theta.clone(),
            rel: self.rel,
            a: self.a.clone(),
            nil: self.nil.clone(),
            exp: Mutex::new(self.exp.lock().unwrap().clone()),
            log: Mutex::new(self.log.lock().unwrap().clone()),
        }
    }
}

pub fn theta_gap_inv(theta: &CInf, i: usize, rel: i64) -> Result<CInf, MathError> {
    let lam = theta.twist(i as i64);
    lam.sub(theta).inv_rel(Rat::from_integer(rel))
}

impl AnalyticModule {
    pub fn new(module: TModuleDef<CInf>, theta: &CInf, rel: i64) -> Self {
        let a = module.coeff_mats();
        let nil = module.nilpotent_part(theta);
        let d = module.dim();
        let id = Mat::identity_like(theta, d);
        AnalyticModule {
            module,
            theta: theta.clone(),
            rel,
            a,
            nil,
            exp: Mutex::new(vec![id.clone()]),
            log: Mutex::new(vec![id]),
        }
    }

    pub fn drinfeld(theta: &CInf, kappa: &[CInf], rel: i64) -> Self {
        AnalyticModule::new(drinfeld(theta, kappa), theta, rel)
    }

    pub fn carlitz(field: &FieldConfig, rel: i64) -> Self {
        let theta = CInf::theta(field);
        AnalyticModule::drinfeld(&theta, &[CInf::one(field)], rel)
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn field(&self) -> &FieldConfig {
        self.theta.field()
    }

    pub fn q(&self) -> u64 {
        self.field().q()
    }

    /// A_0 = d phi_t, A_1, ...
    pub fn coeff_mats(&self) -> &[Mat<CInf>] {
        &self.a
    }

    pub fn nilpotent(&self) -> &Mat<CInf> {
        &self.nil
    }

    /// B_i with Exp(z) = sum_i B_i z^{(i)}.
    pub fn exp_coeff(&self, i: usize) -> Result<Mat<CInf>, MathError> {
        let mut cache = self.exp.lock().unwrap();
        while cache.len() <= i {
            let k = cache.len();
            let mut r = Mat::zeros_like(&self.theta, self.dim(), self.dim());
            for j in 1..self.a.len().min(k + 1) {
                r = r.add(&self.a[j].mul(&cache[k - j].twist(j as i64)));
            }
            let inv = theta_gap_inv(&self.theta, k, self.rel)?;
            let x = sylvester(&r, &inv, &self.nil.twist(k as i64), &self.nil);
            cache.push(x);
        }
        Ok(cache[i].clone())
    }

    pub fn exp_coeffs(&self, n: usize) -> Result<Vec<Mat<CInf>>, MathError> {
        (0..=n).map(|i| self.exp_coeff(i)).collect()
    }

    /// P_i with Log(z) = sum_i P_i z^{(i)}.
    pub fn log_coeff(&self, i: usize) -> Result<Mat<CInf>, MathError> {
        let mut cache = self.log.lock().unwrap();
        while cache.len() <= i {
            let k = cache.len();
            let mut r = Mat::zeros_like(&self.theta, self.dim(), self.dim());
            for j in 1..self.a.len().min(k + 1) {
                r = r.sub(&cache[k - j].mul(&self.a[j].twist((k - j) as i64)));
            }
            let inv = theta_gap_inv(&self.theta, k, self.rel)?;
            let x = sylvester(&r, &inv, &self.nil.twist(k as i64), &self.nil);
            cache.push(x);
        }
        Ok(cache[i].clone())
    }

    pub fn log_coeffs(&self, n: usize) -> Result<Vec<Mat<CInf>>, MathError> {
        (0..=n).map(|i| self.log_coeff(i)).collect()
    }

    /// Exp(z) summed until two consecutive decreasing terms lie below
    /// `theta^{-target}`.
    pub fn exp_eval(&self, z: &[CInf], target: Rat) -> Result<SeriesValue, MathError> {
        entire_eval(self.q(), z, target, |i| self.exp_coeff(i))
    }

    /// Log(z), accepted only when the term degrees decrease strictly over
    /// the last three terms and the last one is below `theta^{-target}`.
    pub fn log_eval(&self, z: &[CInf], target: Rat) -> Result<SeriesValue, MathError> {
        let mut value = z.to_vec();
        let mut degs = vec![vec_deg(z)];
        if degs[0].is_none() {
            return Ok(SeriesValue { value, terms: 1, term_degs: degs, tail_deg: None });
        }
        let cap = max_terms(self.q());
        let mut rising = 0;
        for i in 1..cap {
            let zi: Vec<CInf> = z.iter().map(|x| x.twist(i as i64)).collect();
            let term = mat_vec(&self.log_coeff(i)?, &zi);
            let d = vec_deg(&term);
            let prev = *degs.last().unwrap();
            degs.push(d);
            value = value.iter().zip(&term).map(|(a, b)| a.add(b)).collect();
            if cmp_deg(d, prev) != std::cmp::Ordering::Less {
                rising += 1;
                if rising >= 3 {
                    return Err(MathError::OutsideLogRadius(fmt_degs(&degs)));
                }
            } else {
                rising = 0;
            }
            let n = degs.len();
            if n >= 4 {
                let dec = (n - 3..n).all(|k| cmp_deg(degs[k], degs[k - 1]) == std::cmp::Ordering::Less);
                if dec && cmp_deg(d, Some(-target)) == std::cmp::Ordering::Less {
                    let value = cut_tail(value, d);
                    return Ok(SeriesValue { value, terms: n, term_degs: degs, tail_deg: d });
                }
            }
        }
        Err(MathError::OutsideLogRadius(fmt_degs(&degs)))
    }
}

/// The dropped terms lie below the last one summed.
fn cut_tail(v: Vec<CInf>, last: Option<Rat>) -> Vec<CInf> {
    match last {
        Some(d) => v.into_iter().map(|x| x.truncate(-d)).collect(),
        None => v,
    }
}

/// Sum `sum_i C_i z^{(i)}` for an entire series with coefficient source `coeff`.
fn entire_eval(
    q: u64,
    z: &[CInf],
    target: Rat,
    coeff: impl Fn(usize) -> Result<Mat<CInf>, MathError>,
) -> Result<SeriesValue, MathError> {
    let c0 = coeff(0)?;
    let mut value = mat_vec(&c0, z);
    let mut degs = vec![vec_deg(&value)];
    if vec_deg(z).is_none() {
        return Ok(SeriesValue { value, terms: 1, term_degs: degs, tail_deg: None });
    }
    let cap = max_terms(q);
    let below = |d: Option<Rat>| cmp_deg(d, Some(-target)) == std::cmp::Ordering::Less;
    for i in 1..cap {
        let zi: Vec<CInf> = z.iter().map(|x| x.twist(i as i64)).collect();
        let term = mat_vec(&coeff(i)?, &zi);
        let d = vec_deg(&term);
        let prev = *degs.last().unwrap();
        degs.push(d);
        value = value.iter().zip(&term).map(|(a, b)| a.add(b)).collect();
        if i >= 2 && below(d) && below(prev) && cmp_deg(d, prev) != std::cmp::Ordering::Greater {
            let value = cut_tail(value, d);
            return Ok(SeriesValue { value, terms: degs.len(), term_degs: degs, tail_deg: d });
        }
    }
    let tail = *degs.last().unwrap();
    Ok(SeriesValue { value, terms: degs.len(), term_degs: degs, tail_deg: tail })
}

/// The target t-module of a biderivation: `[t]_n`, or `theta` on G_a for n = 0.
#[derive(Clone, Debug)]
pub enum Target {
    Trivial,
    Module(TModuleDef<CInf>),
}

/// Quasi-periodic function F_delta with
/// `F(d phi_t z) = [t](F(z)) + delta(t)(Exp_phi(z))` and `F = O(z^q)`.
#[derive(Debug)]
pub struct QuasiPeriodic<'a> {
    pub base: &'a AnalyticModule,
    t0: Mat<CInf>,
    t_hi: Vec<Mat<CInf>>,
    nil_t: Mat<CInf>,
    d: Vec<Mat<CInf>>,
    coeffs: Mutex<Vec<Mat<CInf>>>,
}

impl<'a> QuasiPeriodic<'a> {
    pub fn new(base: &'a AnalyticModule, target: &Target, delta: &BiderivationDef<CInf>) -> Result<Self, MathError> {
        if delta.delta_t.cols() != base.dim() {
            return Err(MathError::DimensionMismatch("biderivation source".into()));
        }
        if !delta.is_partial() {
            return Err(MathError::NotInvertible("biderivation has a constant term".into()));
        }
        let theta = &base.theta;
        let n = delta.n;
        let (t0, t_hi) = match target {
            Target::Trivial => {
                if n != 1 {
                    return Err(MathError::DimensionMismatch("trivial target is one-dimensional".into()));
                }
                (Mat::scalar_like(theta, 1), Vec::new())
            }
            Target::Module(m) => {
                if m.dim() != n {
                    return Err(MathError::DimensionMismatch("target dimension".into()));
                }
                let mut a = m.coeff_mats();
                let t0 = a.remove(0);
                (t0, a)
            }
        };
        let nil_t = t0.sub(&Mat::scalar_like(theta, n));
        let d = coefficient_matrices(&delta.delta_t);
        let zero = Mat::zeros_like(theta, n, base.dim());
        Ok(QuasiPeriodic { base, t0, t_hi, nil_t, d, coeffs: Mutex::new(vec![zero]) })
    }

    pub fn target_dphi(&self) -> &Mat<CInf> {
        &self.t0
    }

    /// C_i with F(z) = sum_i C_i z^{(i)}.
    pub fn coeff(&self, i: usize) -> Result<Mat<CInf>, MathError> {
        let mut cache = self.coeffs.lock().unwrap();
        let base = self.base;
        while cache.len() <= i {
            let k = cache.len();
            let mut r = Mat::zeros_like(&base.theta, self.t0.rows(), base.dim());
            for (j, tj) in self.t_hi.iter().enumerate() {
                let j = j + 1;
                if j <= k {
                    r = r.add(&tj.mul(&cache[k - j].twist(j as i64)));
                }
            }
            for (j, dj) in self.d.iter().enumerate().skip(1) {
                if j <= k {
                    r = r.add(&dj.mul(&base.exp_coeff(k - j)?.twist(j as i64)));
                }
            }
            let inv = theta_gap_inv(&base.theta, k, base.rel)?;
            let x = sylvester(&r, &inv, &base.nilpotent().twist(k as i64), &self.nil_t);
            cache.push(x);
        }
        Ok(cache[i].clone())
    }

    pub fn eval(&self, z: &[CInf], target: Rat) -> Result<SeriesValue, MathError> {
        entire_eval(self.base.q(), z, target, |i| self.coeff(i))
    }
}

/// The Carlitz period `-(-theta)^{q/(q-1)} prod_{i>=1} (1 - theta^{1-q^i})^{-1}`
/// to absolute precision `prec`.
pub fn carlitz_pi(field: &FieldConfig, prec: i64) -> Result<CInf, MathError> {
    let q = field.q();
    let neg_theta = CInf::theta(field).neg();
    let root = neg_theta.root(q - 1)?;
    let lead = neg_theta.mul(&root).neg();
    let deg = Rat::new(q as i64, q as i64 - 1);
    let rel = Rat::from_integer(prec) + deg;
    let mut prod = CInf::one(field);
    let one = CInf::one(field);
    let mut qi: i64 = q as i64;
    while qi - 1 <= *rel.ceil().numer() + 1 {
        let f = one.sub(&CInf::theta_pow(field, Rat::from_integer(1 - qi)));
        prod = prod.mul(&f.inv_rel(rel)?);
        qi *= q as i64;
    }
    let prod = prod.truncate(rel);
    Ok(lead.mul(&prod))
}

/// Defect degree of two vectors; `None` when both agree exactly.
pub fn vec_defect(a: &[CInf], b: &[CInf]) -> Option<Rat> {
    a.iter().zip(b).fold(None, |acc, (x, y)| max_deg(acc, x.sub(y).deg_bound()))
}

/// Guard test: degree bound strictly below `-p/2`.
pub fn below_guard(d: Option<Rat>, p: i64) -> bool {
    match d {
        None => true,
        Some(x) => x < -Rat::new(p, 2),
    }
}
