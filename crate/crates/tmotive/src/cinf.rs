//! Truncated Laurent series in theta^{-1} with rational exponents.
//!
//! `CInf` approximates an element of C_infty as `sum c_e theta^e` with an
//! absolute precision `P`: every term with `e > -P` is known and stored.
//! Exponents share one denominator `ram`. `prec == None` marks an exact value.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::MathError;
use crate::field::{FieldConfig, FqElem};
use crate::Rat;

#[derive(Clone)]
pub struct CInf {
    field: FieldConfig,
    ram: i64,
    // descending exponent numerators over `ram`
    terms: Vec<(i64, FqElem)>,
    prec: Option<i64>,
}

fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

fn checked_scale(x: i64, k: i64) -> i64 {
    x.checked_mul(k).expect("exponent overflow in series arithmetic")
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Sum of two descending term lists, keeping exponents above `cutoff`.
fn merge_add(field: &FieldConfig, a: &[(i64, FqElem)], b: &[(i64, FqElem)], cutoff: Option<i64>) -> Vec<(i64, FqElem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i].0 > b[j].0) {
            i += 1;
            a[i - 1]
        } else if i >= a.len() || b[j].0 > a[i].0 {
            j += 1;
            b[j - 1]
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, field.add(a[i - 1].1, b[j - 1].1))
        };
        if let Some(c) = cutoff {
            if next.0 <= c {
                break;
            }
        }
        if !next.1.is_zero() {
            out.push(next);
        }
    }
    out
}

/// Product of two descending term lists, keeping exponents above `cutoff`.
fn mul_terms(field: &FieldConfig, a: &[(i64, FqElem)], b: &[(i64, FqElem)], cutoff: Option<i64>) -> Vec<(i64, FqElem)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len() == 1 || b.len() == 1 {
        let (single, other) = if a.len() == 1 { (a[0], b) } else { (b[0], a) };
        return other
            .iter()
            .map(|&(e, c)| (e + single.0, field.mul(c, single.1)))
            .take_while(|&(e, _)| cutoff.map_or(true, |k| e > k))
            .collect();
    }
    let mut raw: Vec<(i64, FqElem)> = Vec::with_capacity(a.len() * b.len().min(64));
    for &(ea, ca) in a {
        if let Some(k) = cutoff {
            if ea + b[0].0 <= k {
                break;
            }
        }
        for &(eb, cb) in b {
            let e = ea + eb;
            if let Some(k) = cutoff {
                if e <= k {
                    break;
                }
            }
            raw.push((e, field.mul(ca, cb)));
        }
    }
    raw.sort_unstable_by(|x, y| y.0.cmp(&x.0));
    let mut out: Vec<(i64, FqElem)> = Vec::with_capacity(raw.len());
    for (e, c) in raw {
        match out.last_mut() {
            Some(last) if last.0 == e => last.1 = field.add(last.1, c),
            _ => {
                if let Some(last) = out.last() {
                    if last.1.is_zero() {
                        out.pop();
                    }
                }
                out.push((e, c));
            }
        }
    }
    if let Some(last) = out.last() {
        if last.1.is_zero() {
            out.pop();
        }
    }
    out
}

impl CInf {
    fn raw(field: FieldConfig, ram: i64, terms: Vec<(i64, FqElem)>, prec: Option<i64>) -> Self {
        let mut x = CInf { field, ram, terms, prec };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if let Some(p) = self.prec {
            let cut = self.terms.partition_point(|&(e, _)| e > -p);
            self.terms.truncate(cut);
        }
        self.terms.retain(|t| !t.1.is_zero());
        let mut g = self.ram;
        for &(e, _) in &self.terms {
            if g == 1 {
                break;
            }
            g = g.gcd(&e);
        }
        if let Some(p) = self.prec {
            g = g.gcd(&p);
        }
        if g > 1 {
            self.ram /= g;
            for t in &mut self.terms {
                t.0 /= g;
            }
            if let Some(p) = self.prec.as_mut() {
                *p /= g;
            }
        }
    }

    fn at_ram(&self, ram: i64) -> (Vec<(i64, FqElem)>, Option<i64>) {
        let k = ram / self.ram;
        if k == 1 {
            return (self.terms.clone(), self.prec);
        }
        (self.terms.iter().map(|&(e, c)| (checked_scale(e, k), c)).collect(), self.prec.map(|p| checked_scale(p, k)))
    }

    pub fn zero(field: &FieldConfig) -> Self {
        CInf { field: field.clone(), ram: 1, terms: Vec::new(), prec: None }
    }

    /// Zero known up to `theta^{-prec}`.
    pub fn zero_to(field: &FieldConfig, prec: Rat) -> Self {
        Self::raw(field.clone(), *prec.denom(), Vec::new(), Some(*prec.numer()))
    }

    pub fn one(field: &FieldConfig) -> Self {
        Self::constant(field, FqElem::ONE)
    }

    pub fn constant(field: &FieldConfig, c: FqElem) -> Self {
        Self::monomial(field, c, Rat::zero())
    }

    pub fn from_int(field: &FieldConfig, c: i64) -> Self {
        Self::constant(field, field.from_int(c))
    }

    pub fn monomial(field: &FieldConfig, c: FqElem, e: Rat) -> Self {
        let terms = if c.is_zero() { vec![] } else { vec![(*e.numer(), c)] };
        Self::raw(field.clone(), *e.denom(), terms, None)
    }

    pub fn theta(field: &FieldConfig) -> Self {
        Self::theta_pow(field, Rat::from_integer(1))
    }

    pub fn theta_pow(field: &FieldConfig, e: Rat) -> Self {
        Self::monomial(field, FqElem::ONE, e)
    }

    /// Build from (exponent, coefficient) pairs in any order.
    pub fn from_terms(field: &FieldConfig, terms: &[(Rat, FqElem)], prec: Option<Rat>) -> Self {
        let mut ram = prec.map_or(1, |p| *p.denom());
        for (e, _) in terms {
            ram = lcm(ram, *e.denom());
        }
        let mut v: Vec<(i64, FqElem)> = Vec::new();
        for &(e, c) in terms {
            v.push((*(e * ram).numer(), c));
        }
        v.sort_by(|a, b| b.0.cmp(&a.0));
        let mut merged: Vec<(i64, FqElem)> = Vec::new();
        for (e, c) in v {
            match merged.last_mut() {
                Some(l) if l.0 == e => l.1 = field.add(l.1, c),
                _ => merged.push((e, c)),
            }
        }
        Self::raw(field.clone(), ram, merged, prec.map(|p| *(p * ram).numer()))
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn ram(&self) -> i64 {
        self.ram
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Rat, FqElem)> + '_ {
        self.terms.iter().map(move |&(e, c)| (Rat::new(e, self.ram), c))
    }

    /// Degree of the leading known term; `None` for zero (to precision).
    pub fn deg(&self) -> Option<Rat> {
        self.terms.first().map(|&(e, _)| Rat::new(e, self.ram))
    }

    /// Degree bound usable in precision estimates: the degree, or `-prec` for
    /// zero-to-precision, or `None` for exact zero.
    pub fn deg_bound(&self) -> Option<Rat> {
        self.deg().or_else(|| self.prec().map(|p| -p))
    }

    pub fn leading(&self) -> Option<(Rat, FqElem)> {
        self.terms.first().map(|&(e, c)| (Rat::new(e, self.ram), c))
    }

    pub fn prec(&self) -> Option<Rat> {
        self.prec.map(|p| Rat::new(p, self.ram))
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// True when no known term is nonzero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: Rat) -> FqElem {
        let scaled = e * self.ram;
        if !scaled.is_integer() {
            return FqElem::ZERO;
        }
        let n = *scaled.numer();
        self.terms.binary_search_by(|t| n.cmp(&t.0)).map(|i| self.terms[i].1).unwrap_or(FqElem::ZERO)
    }

    /// Lower the precision to at most `p`.
    pub fn truncate(&self, p: Rat) -> Self {
        let ram = lcm(self.ram, *p.denom());
        let (terms, prec) = self.at_ram(ram);
        let pn = *(p * ram).numer();
        Self::raw(self.field.clone(), ram, terms, Some(prec.map_or(pn, |x| x.min(pn))))
    }

    pub fn add(&self, other: &CInf) -> CInf {
        let ram = lcm(self.ram, other.ram);
        let (a, pa) = self.at_ram(ram);
        let (b, pb) = other.at_ram(ram);
        let prec = min_opt(pa, pb);
        let terms = merge_add(&self.field, &a, &b, prec.map(|p| -p));
        Self::raw(self.field.clone(), ram, terms, prec)
    }

    pub fn neg(&self) -> CInf {
        let terms = self.terms.iter().map(|&(e, c)| (e, self.field.neg(c))).collect();
        CInf { field: self.field.clone(), ram: self.ram, terms, prec: self.prec }
    }

    pub fn sub(&self, other: &CInf) -> CInf {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: FqElem) -> CInf {
        if c.is_zero() {
            return match self.prec {
                None => CInf::zero(&self.field),
                Some(p) => Self::raw(self.field.clone(), self.ram, vec![], Some(p)),
            };
        }
        let terms = self.terms.iter().map(|&(e, x)| (e, self.field.mul(x, c))).collect();
        CInf { field: self.field.clone(), ram: self.ram, terms, prec: self.prec }
    }

    /// Multiply by `theta^e` (exact shift of exponents and precision).
    pub fn shift(&self, e: Rat) -> CInf {
        let ram = lcm(self.ram, *e.denom());
        let (terms, prec) = self.at_ram(ram);
        let k = *(e * ram).numer();
        let terms = terms.into_iter().map(|(x, c)| (x + k, c)).collect();
        Self::raw(self.field.clone(), ram, terms, prec.map(|p| p - k))
    }

    pub fn mul(&self, other: &CInf) -> CInf {
        let ram = lcm(self.ram, other.ram);
        let (a, pa) = self.at_ram(ram);
        let (b, pb) = other.at_ram(ram);
        let da = a.first().map(|t| t.0);
        let db = b.first().map(|t| t.0);
        // error of (a + ea)(b + eb) - ab: a*eb, ea*b, ea*eb
        let mut prec: Option<i64> = None;
        let mut exact_zero = false;
        if let Some(pb) = pb {
            if let Some(da) = da {
                prec = min_opt(prec, Some(pb - da));
            }
        }
        if let Some(pa) = pa {
            if let Some(db) = db {
                prec = min_opt(prec, Some(pa - db));
            }
        }
        if let (Some(x), Some(y)) = (pa, pb) {
            prec = min_opt(prec, Some(x + y));
        }
        if prec.is_none() && (a.is_empty() || b.is_empty()) {
            exact_zero = true;
        }
        if exact_zero {
            return CInf::zero(&self.field);
        }
        let terms = mul_terms(&self.field, &a, &b, prec.map(|p| -p));
        Self::raw(self.field.clone(), ram, terms, prec)
    }

    pub fn square(&self) -> CInf {
        self.mul(self)
    }

    pub fn pow(&self, n: u64) -> CInf {
        let mut result = CInf::one(&self.field);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        result
    }

    /// Split `x = c theta^D (1 + u)`, returning (c, D, terms of u at ram).
    fn normalized_unit(&self) -> Result<(FqElem, i64, Vec<(i64, FqElem)>), MathError> {
        let &(d, c) = self.terms.first().ok_or(MathError::DivisionByZeroToPrecision)?;
        let ci = self.field.inv(c);
        let u = self.terms[1..].iter().map(|&(e, x)| (e - d, self.field.mul(x, ci))).collect();
        Ok((c, d, u))
    }

    /// 1/(1+u) with terms above `-rel` (numerator units), u of negative degree.
    fn inv_one_plus(field: &FieldConfig, u: &[(i64, FqElem)], rel: i64) -> Vec<(i64, FqElem)> {
        let one = vec![(0i64, FqElem::ONE)];
        if u.is_empty() || rel <= 0 {
            return one;
        }
        let v = merge_add(field, &one, u, Some(-rel));
        let gap = -u[0].0;
        let mut w = one.clone();
        let mut known = gap;
        loop {
            // w <- w + w(1 - v w)
            let vw = mul_terms(field, &v, &w, Some(-rel));
            let neg_vw: Vec<_> = vw.iter().map(|&(e, c)| (e, field.neg(c))).collect();
            let err = merge_add(field, &one, &neg_vw, Some(-rel));
            if err.is_empty() {
                break;
            }
            let corr = mul_terms(field, &w, &err, Some(-rel));
            w = merge_add(field, &w, &corr, Some(-rel));
            if known >= rel {
                break;
            }
            known = known.saturating_mul(2);
        }
        w
    }

    /// Multiplicative inverse with precision `P + 2 deg x`.
    ///
    /// Exact inputs that are not monomials have infinite expansions; use
    /// [`CInf::inv_capped`] for them.
    pub fn inv(&self) -> Result<CInf, MathError> {
        if self.prec.is_none() && self.terms.len() > 1 {
            return Err(MathError::UnboundedInverse);
        }
        self.inv_inner(None)
    }

    /// Inverse whose absolute precision is at most `cap`.
    pub fn inv_capped(&self, cap: Rat) -> Result<CInf, MathError> {
        self.inv_inner(Some(cap))
    }

    /// Inverse known to relative precision `rel` (absolute `rel + deg x`).
    pub fn inv_rel(&self, rel: Rat) -> Result<CInf, MathError> {
        let d = self.deg().ok_or(MathError::DivisionByZeroToPrecision)?;
        self.inv_inner(Some(rel + d))
    }

    fn inv_inner(&self, cap: Option<Rat>) -> Result<CInf, MathError> {
        let ram = match cap {
            Some(c) => lcm(self.ram, *c.denom()),
            None => self.ram,
        };
        let x = if ram == self.ram { self.clone() } else { self.rescaled(ram) };
        let (c, d, u) = x.normalized_unit()?;
        let from_prec = x.prec.map(|p| p + 2 * d);
        let from_cap = cap.map(|cp| *(cp * ram).numer());
        let prec = min_opt(from_prec, from_cap);
        let ci = x.field.inv(c);
        let terms = match prec {
            None => vec![(-d, ci)],
            Some(p) => {
                let rel = p - d;
                Self::inv_one_plus(&x.field, &u, rel).into_iter().map(|(e, y)| (e - d, x.field.mul(y, ci))).collect()
            }
        };
        Ok(Self::raw(x.field.clone(), ram, terms, prec))
    }

    fn rescaled(&self, ram: i64) -> CInf {
        let (terms, prec) = self.at_ram(ram);
        CInf { field: self.field.clone(), ram, terms, prec }
    }

    pub fn div(&self, other: &CInf) -> Result<CInf, MathError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Frobenius twist x -> x^{q^n}; negative n takes q^{|n|}-th roots.
    pub fn twist(&self, n: i64) -> CInf {
        if n == 0 {
            return self.clone();
        }
        let q = self.field.q() as i64;
        let qn = q.checked_pow(n.unsigned_abs() as u32).expect("twist overflow");
        if n > 0 {
            let terms = self.terms.iter().map(|&(e, c)| (checked_scale(e, qn), self.field.frob(c, n))).collect();
            Self::raw(self.field.clone(), self.ram, terms, self.prec.map(|p| checked_scale(p, qn)))
        } else {
            let terms = self.terms.iter().map(|&(e, c)| (e, self.field.frob(c, n))).collect();
            Self::raw(self.field.clone(), checked_scale(self.ram, qn), terms, self.prec)
        }
    }

    /// x -> x^{p^k} for k possibly negative.
    fn frob_p(&self, k: i64) -> CInf {
        if k == 0 {
            return self.clone();
        }
        let p = self.field.p() as i64;
        let pk = p.checked_pow(k.unsigned_abs() as u32).expect("twist overflow");
        if k > 0 {
            let terms = self.terms.iter().map(|&(e, c)| (checked_scale(e, pk), self.field.frob_p(c, k))).collect();
            Self::raw(self.field.clone(), self.ram, terms, self.prec.map(|x| checked_scale(x, pk)))
        } else {
            let terms = self.terms.iter().map(|&(e, c)| (e, self.field.frob_p(c, k))).collect();
            Self::raw(self.field.clone(), checked_scale(self.ram, pk), terms, self.prec)
        }
    }

    /// Canonical m-th root: the leading coefficient's root is the smallest
    /// code in F_{q^s}; the tail is the unique root of `1 + u` with constant
    /// term one.
    pub fn root(&self, m: u64) -> Result<CInf, MathError> {
        self.root_capped(m, None)
    }

    pub fn root_capped(&self, m: u64, cap: Option<Rat>) -> Result<CInf, MathError> {
        assert!(m > 0);
        let p = self.field.p() as u64;
        let mut m0 = m;
        let mut a = 0i64;
        while m0 % p == 0 {
            m0 /= p;
            a += 1;
        }
        let y = self.root_coprime(m0, cap.map(|c| c * Rat::from_integer(p.pow(a as u32) as i64)))?;
        Ok(y.frob_p(-a))
    }

    fn root_coprime(&self, m: u64, cap: Option<Rat>) -> Result<CInf, MathError> {
        if self.terms.is_empty() {
            return match self.prec {
                None => Ok(self.clone()),
                Some(_) => Err(MathError::DivisionByZeroToPrecision),
            };
        }
        if m == 1 {
            return Ok(match cap {
                Some(c) => self.truncate(c),
                None => self.clone(),
            });
        }
        let mi = m as i64;
        let ram = lcm(self.ram * mi, cap.map_or(1, |c| *c.denom()));
        let x = self.rescaled(ram);
        let (c, d, u) = x.normalized_unit()?;
        let croot = x.field.root(c, m)?;
        let dm = d / mi;
        // relative precision of x, then of the root
        let rel_x = x.prec.map(|p| p + d);
        let rel_cap = cap.map(|cp| *(cp * ram).numer() + dm);
        let rel = min_opt(rel_x, rel_cap);
        let f = &x.field;
        let terms = match rel {
            None if u.is_empty() => vec![(dm, croot)],
            None => return Err(MathError::UnboundedInverse),
            Some(rel) => {
                let one = vec![(0i64, FqElem::ONE)];
                let v = merge_add(f, &one, &u, Some(-rel));
                let minv = f.inv(f.from_int((m % f.p() as u64) as i64));
                // inverse root z ~ v^{-1/m}: z <- z + z(1 - v z^m)/m
                let mut z = one.clone();
                let gap = if u.is_empty() { rel } else { -u[0].0 };
                let mut known = gap;
                loop {
                    let mut zm = one.clone();
                    for _ in 0..m {
                        zm = mul_terms(f, &zm, &z, Some(-rel));
                    }
                    let vzm = mul_terms(f, &v, &zm, Some(-rel));
                    let neg: Vec<_> = vzm.iter().map(|&(e, c)| (e, f.neg(c))).collect();
                    let err = merge_add(f, &one, &neg, Some(-rel));
                    if err.is_empty() {
                        break;
                    }
                    let corr: Vec<_> =
                        mul_terms(f, &z, &err, Some(-rel)).into_iter().map(|(e, c)| (e, f.mul(c, minv))).collect();
                    z = merge_add(f, &z, &corr, Some(-rel));
                    if known >= rel {
                        break;
                    }
                    known = known.saturating_mul(2);
                }
                let mut w = v.clone();
                for _ in 1..m {
                    w = mul_terms(f, &w, &z, Some(-rel));
                }
                w.into_iter().map(|(e, y)| (e + dm, f.mul(y, croot))).collect()
            }
        };
        let prec = rel.map(|r| r - dm);
        Ok(Self::raw(x.field.clone(), ram, terms, prec))
    }

    /// `self - other` is zero to the common precision.
    pub fn approx_eq(&self, other: &CInf) -> bool {
        self.sub(other).is_zero()
    }

    /// Degree of `self - other`, or `-prec` bound when it vanishes.
    pub fn defect(&self, other: &CInf) -> Option<Rat> {
        self.sub(other).deg_bound()
    }

    pub fn parse(field: &FieldConfig, s: &str) -> Result<CInf, MathError> {
        crate::parse::parse_series(field, s)
    }
}

impl PartialEq for CInf {
    /// Structural equality: same terms and same precision.
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.ram == other.ram && self.terms == other.terms && self.prec == other.prec
    }
}

pub fn fmt_rat(r: Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_exp(e: Rat) -> String {
    if e.is_integer() && !e.is_negative() {
        e.numer().to_string()
    } else {
        format!("({})", fmt_rat(e))
    }
}

impl fmt::Display for CInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms()
            .map(|(e, c)| {
                let cs = self.field.fmt_elem(c);
                if e.is_zero() {
                    cs
                } else {
                    format!("{cs}*T^{}", fmt_exp(e))
                }
            })
            .collect();
        if let Some(p) = self.prec() {
            parts.push(format!("O(T^{})", fmt_exp(-p)));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for CInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Compare two optional degrees with `None` as minus infinity.
pub fn cmp_deg(a: Option<Rat>, b: Option<Rat>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Less,
        (_, None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(&y),
    }
}

pub fn max_deg(a: Option<Rat>, b: Option<Rat>) -> Option<Rat> {
    if cmp_deg(a, b) == Ordering::Less {
        b
    } else {
        a
    }
}
