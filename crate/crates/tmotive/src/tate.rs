//! Elements of the Tate algebra in two forms: a finite t-polynomial plus
//! principal parts c/(t - theta^{q^n})^m, or a power series in t known up to
//! a fixed t-degree.

use std::collections::BTreeMap;

use crate::cinf::{max_deg, CInf};
use crate::error::MathError;
use crate::field::FieldConfig;
use crate::ring::{Mat, Ring, Twist};
use crate::skew::{coefficient_matrices, SkewMat};
use crate::tpoly::TPoly;
use crate::Rat;

/// Relative theta-digits used when an exact coefficient has to be divided by
/// a pole gap theta^{q^i} - theta^{q^j}.
pub const EXACT_REL: i64 = 400;

#[derive(Clone, Debug)]
pub struct TateElem {
    field: FieldConfig,
    poly: Vec<CInf>,
    /// `None`: `poly` is a finite polynomial. `Some(T)`: power series known
    /// modulo t^{T+1}; then `pfrac` is empty.
    trunc: Option<usize>,
    /// (level n, multiplicity m) -> c for c/(t - theta^{q^n})^m.
    pfrac: BTreeMap<(u32, u32), CInf>,
}

pub type TateMat = Mat<TateElem>;

/// Side of a Frobenius difference equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// X^{(-1)} = Phi X
    Dual,
    /// X = Phi X^{(-1)}
    Motive,
}

/// Value at t = theta and residue of the simple pole there.
#[derive(Clone, Debug)]
pub struct ThetaEval {
    pub value: Option<CInf>,
    pub residue: CInf,
}

fn rel_digits(c: &CInf) -> Rat {
    match (c.prec(), c.deg()) {
        (Some(p), Some(d)) => p + d,
        (Some(p), None) => p,
        (None, _) => Rat::from_integer(EXACT_REL),
    }
}

fn pole(field: &FieldConfig, level: u32) -> CInf {
    CInf::theta(field).twist(level as i64)
}

fn qpow(field: &FieldConfig, n: u32) -> i64 {
    (field.q() as i64).checked_pow(n).expect("pole level overflow")
}

/// binom(n, k) mod p.
fn binom_mod(n: u64, k: u64, p: u64) -> i64 {
    // Lucas
    let (mut n, mut k) = (n, k);
    let mut acc: u128 = 1;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        let mut c: u128 = 1;
        for i in 0..b {
            c = c * (a - i) as u128 / (i + 1) as u128;
        }
        acc = acc * (c % p as u128) % p as u128;
        n /= p;
        k /= p;
    }
    acc as i64
}

fn is_exact_zero(c: &CInf) -> bool {
    c.is_exact() && c.is_zero()
}

impl TateElem {
    pub fn zero(field: &FieldConfig) -> Self {
        TateElem { field: field.clone(), poly: Vec::new(), trunc: None, pfrac: BTreeMap::new() }
    }

    pub fn one(field: &FieldConfig) -> Self {
        TateElem::constant(&CInf::one(field))
    }

    pub fn constant(c: &CInf) -> Self {
        TateElem { field: c.field().clone(), poly: vec![c.clone()], trunc: None, pfrac: BTreeMap::new() }
    }

    pub fn from_tpoly(p: &TPoly<CInf>) -> Self {
        let field = p.coeffs()[0].field().clone();
        TateElem { field, poly: p.coeffs().to_vec(), trunc: None, pfrac: BTreeMap::new() }.trimmed()
    }

    /// c / (t - theta^{q^level})^mult.
    pub fn pole_term(level: u32, mult: u32, c: &CInf) -> Self {
        assert!(mult >= 1, "pole multiplicity must be positive");
        let mut e = TateElem::zero(c.field());
        e.pfrac.insert((level, mult), c.clone());
        e
    }

    /// Power series sum c_i t^i known modulo t^{T+1}.
    pub fn series(field: &FieldConfig, coeffs: Vec<CInf>, t_deg: usize) -> Self {
        let mut poly = coeffs;
        poly.resize(t_deg + 1, CInf::zero(field));
        TateElem { field: field.clone(), poly, trunc: Some(t_deg), pfrac: BTreeMap::new() }
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn poly(&self) -> &[CInf] {
        &self.poly
    }

    pub fn trunc(&self) -> Option<usize> {
        self.trunc
    }

    pub fn is_series(&self) -> bool {
        self.trunc.is_some()
    }

    pub fn has_pfrac(&self) -> bool {
        !self.pfrac.is_empty()
    }

    pub fn pfrac_terms(&self) -> impl Iterator<Item = (u32, u32, &CInf)> + '_ {
        self.pfrac.iter().map(|(&(l, m), c)| (l, m, c))
    }

    /// Coefficient of t^i in the series form (`None` beyond the truncation).
    pub fn series_coeff(&self, i: usize) -> Option<CInf> {
        match self.trunc {
            Some(t) if i > t => None,
            _ if self.has_pfrac() => None,
            _ => Some(self.poly.get(i).cloned().unwrap_or_else(|| CInf::zero(&self.field))),
        }
    }

    fn trimmed(mut self) -> Self {
        if self.trunc.is_none() {
            while self.poly.last().map_or(false, is_exact_zero) {
                self.poly.pop();
            }
        }
        self.pfrac.retain(|_, c| !is_exact_zero(c));
        self
    }

    fn coeff0(&self, i: usize) -> CInf {
        self.poly.get(i).cloned().unwrap_or_else(|| CInf::zero(&self.field))
    }

    /// Series form modulo t^{T+1}; principal parts expand as
    /// c/(t-a)^m = c (-1)^m sum_k binom(m+k-1, k) a^{-m-k} t^k.
    pub fn to_series(&self, t_deg: usize) -> TateElem {
        let t_deg = self.trunc.map_or(t_deg, |t| t.min(t_deg));
        let mut coeffs: Vec<CInf> = (0..=t_deg).map(|i| self.coeff0(i)).collect();
        let p = self.field.p() as u64;
        for (&(l, m), c) in &self.pfrac {
            let ql = qpow(&self.field, l);
            for (k, slot) in coeffs.iter_mut().enumerate() {
                let b = binom_mod((m as u64) + k as u64 - 1, k as u64, p);
                if b == 0 {
                    continue;
                }
                let sign = if m % 2 == 0 { b } else { -b };
                let e = -ql * (m as i64 + k as i64);
                let term = c.shift(Rat::from_integer(e)).scale(self.field.from_int(sign));
                *slot = slot.add(&term);
            }
        }
        TateElem { field: self.field.clone(), poly: coeffs, trunc: Some(t_deg), pfrac: BTreeMap::new() }
    }

    fn common_trunc(&self, other: &TateElem) -> Option<usize> {
        match (self.trunc, other.trunc) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }

    pub fn scale(&self, c: &CInf) -> TateElem {
        TateElem {
            field: self.field.clone(),
            poly: self.poly.iter().map(|x| x.mul(c)).collect(),
            trunc: self.trunc,
            pfrac: self.pfrac.iter().map(|(k, x)| (*k, x.mul(c))).collect(),
        }
        .trimmed()
    }

    /// t * self.
    pub fn mul_t(&self) -> TateElem {
        let mut poly = Vec::with_capacity(self.poly.len() + 1);
        poly.push(CInf::zero(&self.field));
        poly.extend(self.poly.iter().cloned());
        if let Some(t) = self.trunc {
            poly.truncate(t + 1);
            return TateElem { field: self.field.clone(), poly, trunc: self.trunc, pfrac: BTreeMap::new() };
        }
        let mut out = TateElem { field: self.field.clone(), poly, trunc: None, pfrac: BTreeMap::new() };
        for (&(l, m), c) in &self.pfrac {
            // t c/(t-a)^m = c/(t-a)^{m-1} + a c/(t-a)^m
            let a = pole(&self.field, l);
            out.add_term(l, m, &c.mul(&a));
            if m == 1 {
                out.add_poly_coeff(0, c);
            } else {
                out.add_term(l, m - 1, c);
            }
        }
        out.trimmed()
    }

    fn add_term(&mut self, l: u32, m: u32, c: &CInf) {
        let e = self.pfrac.entry((l, m)).or_insert_with(|| CInf::zero(&self.field));
        *e = e.add(c);
    }

    fn add_poly_coeff(&mut self, i: usize, c: &CInf) {
        if self.poly.len() <= i {
            self.poly.resize(i + 1, CInf::zero(&self.field));
        }
        self.poly[i] = self.poly[i].add(c);
    }

    /// self / (t - theta^{q^b}) in partial-fraction form.
    pub fn mul_simple_pole(&self, b: u32) -> Result<TateElem, MathError> {
        if self.trunc.is_some() {
            return Err(MathError::Representation("division by a pole needs the partial-fraction form".into()));
        }
        let bv = pole(&self.field, b);
        let mut out = TateElem::zero(&self.field);
        // p(t)/(t-b) = quotient + p(b)/(t-b)
        if !self.poly.is_empty() {
            let n = self.poly.len();
            let mut quo = vec![CInf::zero(&self.field); n.saturating_sub(1)];
            let mut acc = self.poly[n - 1].clone();
            for i in (0..n - 1).rev() {
                quo[i] = acc.clone();
                acc = acc.mul(&bv).add(&self.poly[i]);
            }
            out.poly = quo;
            out.add_term(b, 1, &acc);
        }
        for (&(l, m), c) in &self.pfrac {
            if l == b {
                out.add_term(l, m + 1, c);
                continue;
            }
            // c/((t-a)^m (t-b)) = c/(a-b) [1/(t-a)^m - 1/((t-a)^{m-1}(t-b))]
            let a = pole(&self.field, l);
            let g = a.sub(&bv).inv_rel(rel_digits(c))?;
            let mut cur = c.clone();
            for k in (1..=m).rev() {
                let x = cur.mul(&g);
                out.add_term(l, k, &x);
                cur = x.neg();
            }
            out.add_term(b, 1, &cur);
        }
        Ok(out.trimmed())
    }

    fn mul_tpoly_coeffs(&self, p: &[CInf]) -> TateElem {
        let mut acc = TateElem::zero(&self.field);
        if let Some(t) = self.trunc {
            acc = TateElem::series(&self.field, Vec::new(), t);
        }
        for c in p.iter().rev() {
            acc = acc.mul_t().add(&self.scale(c));
        }
        acc
    }

    fn pfrac_only(&self) -> TateElem {
        TateElem { field: self.field.clone(), poly: Vec::new(), trunc: None, pfrac: self.pfrac.clone() }
    }

    fn mul_exact(&self, other: &TateElem) -> Result<TateElem, MathError> {
        let mut poly = vec![CInf::zero(&self.field); (self.poly.len() + other.poly.len()).saturating_sub(1)];
        for (i, a) in self.poly.iter().enumerate() {
            for (j, b) in other.poly.iter().enumerate() {
                poly[i + j] = poly[i + j].add(&a.mul(b));
            }
        }
        let mut acc = TateElem { field: self.field.clone(), poly, trunc: None, pfrac: BTreeMap::new() };
        if other.has_pfrac() && !self.poly.is_empty() {
            acc = acc.add(&other.pfrac_only().mul_tpoly_coeffs(&self.poly));
        }
        if self.has_pfrac() && !other.poly.is_empty() {
            acc = acc.add(&self.pfrac_only().mul_tpoly_coeffs(&other.poly));
        }
        if self.has_pfrac() {
            let left = self.pfrac_only();
            for (&(l, m), c) in &other.pfrac {
                let mut part = left.scale(c);
                for _ in 0..m {
                    part = part.mul_simple_pole(l)?;
                }
                acc = acc.add(&part);
            }
        }
        Ok(acc.trimmed())
    }

    fn mul_series(&self, other: &TateElem, t_deg: usize) -> TateElem {
        let a = self.to_series(t_deg);
        let b = other.to_series(t_deg);
        let t_deg = a.trunc.unwrap().min(b.trunc.unwrap());
        let mut c = vec![CInf::zero(&self.field); t_deg + 1];
        for i in 0..=t_deg {
            if a.poly[i].is_exact() && a.poly[i].is_zero() {
                continue;
            }
            for j in 0..=t_deg - i {
                c[i + j] = c[i + j].add(&a.poly[i].mul(&b.poly[j]));
            }
        }
        TateElem::series(&self.field, c, t_deg)
    }

    pub fn try_mul(&self, other: &TateElem) -> Result<TateElem, MathError> {
        match self.common_trunc(other) {
            None => self.mul_exact(other),
            Some(t) => Ok(self.mul_series(other, t)),
        }
    }

    /// Power-series inverse modulo t^{T+1}.
    pub fn inv_series(&self, t_deg: usize) -> Result<TateElem, MathError> {
        let a = self.to_series(t_deg);
        let t_deg = a.trunc.unwrap();
        let c0 = &a.poly[0];
        let u0 = if c0.is_exact() { c0.inv_rel(Rat::from_integer(EXACT_REL))? } else { c0.inv()? };
        let mut u = vec![u0.clone()];
        for k in 1..=t_deg {
            let mut s = CInf::zero(&self.field);
            for j in 1..=k {
                s = s.add(&a.poly[j].mul(&u[k - j]));
            }
            u.push(s.mul(&u0).neg());
        }
        Ok(TateElem::series(&self.field, u, t_deg))
    }

    /// Coefficientwise twist; a principal part at level n moves to n + k.
    pub fn try_twist(&self, k: i64) -> Result<TateElem, MathError> {
        let mut pfrac = BTreeMap::new();
        for (&(l, m), c) in &self.pfrac {
            let nl = l as i64 + k;
            if nl < 0 {
                return Err(MathError::NegativePoleLevel(nl));
            }
            pfrac.insert((nl as u32, m), c.twist(k));
        }
        Ok(TateElem {
            field: self.field.clone(),
            poly: self.poly.iter().map(|c| c.twist(k)).collect(),
            trunc: self.trunc,
            pfrac,
        })
    }

    /// Value and residue at t = theta.
    pub fn eval_theta(&self) -> Result<ThetaEval, MathError> {
        if self.trunc.is_some() {
            return Err(MathError::Representation("a truncated series cannot be evaluated at theta".into()));
        }
        let theta = CInf::theta(&self.field);
        let mut value = CInf::zero(&self.field);
        for c in self.poly.iter().rev() {
            value = value.mul(&theta).add(c);
        }
        let mut residue = CInf::zero(&self.field);
        for (&(l, m), c) in &self.pfrac {
            if l == 0 {
                if m == 1 {
                    residue = residue.add(c);
                } else if !c.is_zero() {
                    return Err(MathError::PoleAtTheta(format!("order {m}, coefficient degree {:?}", c.deg())));
                }
                continue;
            }
            let gap = theta.sub(&pole(&self.field, l)).pow(m as u64);
            value = value.add(&c.mul(&gap.inv_rel(rel_digits(c))?));
        }
        let value = if residue.is_zero() { Some(value) } else { None };
        Ok(ThetaEval { value, residue })
    }

    /// Degree (log_q) of the Gauss norm; `None` for an exact zero. For the
    /// series form this is the norm of the known part.
    pub fn gauss_deg(&self) -> Option<Rat> {
        let mut d = self.poly.iter().fold(None, |acc, c| max_deg(acc, c.deg_bound()));
        for (&(l, m), c) in &self.pfrac {
            let shift = Rat::from_integer(m as i64 * qpow(&self.field, l));
            d = max_deg(d, c.deg_bound().map(|x| x - shift));
        }
        d
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "poly": self.poly.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "t_degree": self.trunc,
            "pfrac": self.pfrac.iter().map(|(&(l, m), c)| serde_json::json!({
                "level": l,
                "mult": m,
                "coeff": c.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl Ring for TateElem {
    fn zero_like(&self) -> Self {
        TateElem::zero(&self.field)
    }
    fn one_like(&self) -> Self {
        TateElem::one(&self.field)
    }
    fn from_int_like(&self, c: i64) -> Self {
        TateElem::constant(&CInf::from_int(&self.field, c))
    }
    fn is_zero(&self) -> bool {
        self.poly.iter().all(|c| c.is_zero()) && self.pfrac.values().all(|c| c.is_zero())
    }
    fn add(&self, other: &Self) -> Self {
        if let Some(t) = self.common_trunc(other) {
            let a = self.to_series(t);
            let b = other.to_series(t);
            let t = a.trunc.unwrap().min(b.trunc.unwrap());
            let c = (0..=t).map(|i| a.poly[i].add(&b.poly[i])).collect();
            return TateElem::series(&self.field, c, t);
        }
        let n = self.poly.len().max(other.poly.len());
        let poly = (0..n).map(|i| self.coeff0(i).add(&other.coeff0(i))).collect();
        let mut out = TateElem { field: self.field.clone(), poly, trunc: None, pfrac: self.pfrac.clone() };
        for (&(l, m), c) in &other.pfrac {
            out.add_term(l, m, c);
        }
        out.trimmed()
    }
    fn neg(&self) -> Self {
        TateElem {
            field: self.field.clone(),
            poly: self.poly.iter().map(|c| c.neg()).collect(),
            trunc: self.trunc,
            pfrac: self.pfrac.iter().map(|(k, c)| (*k, c.neg())).collect(),
        }
    }
    /// Panics only if a pole gap cannot be inverted, which needs a zero
    /// coefficient of unknown degree; use [`TateElem::try_mul`] to handle it.
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("Tate product")
    }
}

impl Twist for TateElem {
    /// Panics when a pole would leave the family theta^{q^n}, n >= 0; use
    /// [`TateElem::try_twist`] to get `NegativePoleLevel` instead.
    fn twist(&self, n: i64) -> Self {
        self.try_twist(n).expect("Tate twist")
    }
}

pub fn tate_mat_from_tpoly(m: &Mat<TPoly<CInf>>) -> TateMat {
    m.map(TateElem::from_tpoly)
}

pub fn tate_mat_from_cinf(m: &Mat<CInf>) -> TateMat {
    m.map(TateElem::constant)
}

pub fn try_twist_mat(m: &TateMat, n: i64) -> Result<TateMat, MathError> {
    let mut rows = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        rows.push((0..m.cols()).map(|j| m.get(i, j).try_twist(n)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(Mat::from_rows(rows))
}

pub fn mat_to_series(m: &TateMat, t_deg: usize) -> TateMat {
    m.map(|x| x.to_series(t_deg))
}

pub fn mat_gauss_deg(m: &TateMat) -> Option<Rat> {
    m.entries().fold(None, |acc, x| max_deg(acc, x.gauss_deg()))
}

/// <B | F> = sum_i B_i F^{(i)}.
pub fn inner_product(b: &SkewMat<CInf>, f: &TateMat) -> Result<TateMat, MathError> {
    if b.cols() != f.rows() {
        return Err(MathError::DimensionMismatch(format!(
            "<B|F>: {}x{} against {}x{}",
            b.rows(),
            b.cols(),
            f.rows(),
            f.cols()
        )));
    }
    let proto = f.get(0, 0).zero_like();
    let mut acc = Mat::zeros_like(&proto, b.rows(), f.cols());
    for (i, bi) in coefficient_matrices(b).iter().enumerate() {
        if bi.is_zero() {
            continue;
        }
        let fi = try_twist_mat(f, i as i64)?;
        acc = acc.add(&tate_mat_from_cinf(bi).mul(&fi));
    }
    Ok(acc)
}

/// Gauss degree of the defect of `X^{(-1)} = Phi X` (dual) or
/// `X = Phi X^{(-1)}` (motive), for t-coefficients up to `t_deg` when series
/// are involved.
pub fn check_frobenius_equation(
    phi: &TateMat,
    x: &TateMat,
    side: Side,
    t_deg: usize,
) -> Result<Option<Rat>, MathError> {
    if phi.cols() != x.rows() || phi.rows() != x.rows() {
        return Err(MathError::DimensionMismatch("Frobenius equation".into()));
    }
    let xm = try_twist_mat(x, -1)?;
    let defect = match side {
        Side::Dual => xm.sub(&phi.mul(x)),
        Side::Motive => x.sub(&phi.mul(&xm)),
    };
    let defect = if defect.entries().any(|e| e.is_series()) { mat_to_series(&defect, t_deg) } else { defect };
    Ok(mat_gauss_deg(&defect))
}
