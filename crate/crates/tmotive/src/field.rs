//! Finite fields F_{q^s} with q = p^f, stored as lookup tables.
//!
//! An element is a code `c = sum coords[i] * p^i` over the power basis of the
//! defining modulus. Code 0 is zero, code 1 is one and codes `0..p` are the
//! prime field.

use std::fmt;
use std::sync::Arc;

use crate::error::MathError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FqElem(pub u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Tables {
    p: u32,
    f: u32,
    s: u32,
    degree: u32,
    size: u32,
    q: u64,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
}

/// Shared, immutable description of F_{q^s}.
#[derive(Clone)]
pub struct FieldConfig(Arc<Tables>);

impl PartialEq for FieldConfig {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.f == other.0.f
                && self.0.s == other.0.s
                && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldConfig {}

impl fmt::Debug for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (q = {}, s = {}, modulus {:?})", self.0.p, self.0.degree, self.0.q, self.0.s, self.0.modulus)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomials over F_p, low degree first, no trailing zeros.
fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let inv_lead = inv_mod(b[db], p);
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = (r[r.len() - 1] as u64 * inv_lead as u64 % p as u64) as u32;
        for (i, &bi) in b.iter().enumerate() {
            let sub = (c as u64 * bi as u64 % p as u64) as u32;
            r[k + i] = (r[k + i] + p - sub) % p;
        }
        trim(&mut r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

fn code_to_poly(mut c: u32, p: u32, n: u32) -> Vec<u32> {
    let mut v = Vec::with_capacity(n as usize);
    for _ in 0..n {
        v.push(c % p);
        c /= p;
    }
    v
}

fn poly_to_code(a: &[u32], p: u32) -> u32 {
    a.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let n = modulus.len() as u32 - 1;
    if n == 0 {
        return false;
    }
    for d in 1..=n / 2 {
        let count = p.pow(d);
        for low in 0..count {
            let mut cand = code_to_poly(low, p, d);
            cand.push(1);
            if poly_rem(modulus, &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn poly_mulmod(a: u32, b: u32, modulus: &[u32], p: u32, n: u32) -> u32 {
    let pa = code_to_poly(a, p, n);
    let pb = code_to_poly(b, p, n);
    let mut prod = vec![0u32; 2 * n as usize];
    for (i, &x) in pa.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in pb.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let mut r = poly_rem(&prod, modulus, p);
    r.resize(n as usize, 0);
    poly_to_code(&r, p)
}

impl FieldConfig {
    /// F_{q^s} with the smallest monic irreducible modulus of degree f*s
    /// (ordered by code of its lower coefficients).
    pub fn new(p: u32, f: u32, s: u32) -> Result<Self, MathError> {
        if !is_prime(p) || f == 0 || s == 0 {
            return Err(MathError::InvalidField(format!("p = {p}, f = {f}, s = {s}")));
        }
        let n = f * s;
        let count = p
            .checked_pow(n)
            .filter(|&c| c <= 1 << 16)
            .ok_or_else(|| MathError::InvalidField(format!("field p^{n} too large")))?;
        for low in 0..count {
            let mut m = code_to_poly(low, p, n);
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::with_modulus(p, f, s, m);
            }
        }
        Err(MathError::InvalidField("no irreducible modulus".into()))
    }

    /// `modulus` is low degree first and must be monic of degree f*s.
    pub fn with_modulus(p: u32, f: u32, s: u32, modulus: Vec<u32>) -> Result<Self, MathError> {
        let n = f * s;
        if !is_prime(p) || modulus.len() as u32 != n + 1 || modulus[n as usize] != 1 {
            return Err(MathError::InvalidField(format!("bad modulus {modulus:?}")));
        }
        if modulus.iter().any(|&c| c >= p) || !is_irreducible(&modulus, p) {
            return Err(MathError::InvalidField(format!("reducible modulus {modulus:?}")));
        }
        let size = p.pow(n);
        let order = size - 1;
        let mut exp = vec![0u32; order as usize];
        let mut log = vec![0u32; size as usize];
        let mut found = false;
        for g in 2..size {
            let mut x = 1u32;
            let mut ok = true;
            for (i, slot) in exp.iter_mut().enumerate() {
                *slot = x;
                x = poly_mulmod(x, g, &modulus, p, n);
                if x == 1 && i + 1 < order as usize {
                    ok = false;
                    break;
                }
            }
            if ok {
                found = true;
                break;
            }
        }
        if size == 2 {
            exp[0] = 1;
            found = true;
        }
        if !found {
            return Err(MathError::InvalidField("no primitive element".into()));
        }
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u32;
        }
        let add_digits = |a: u32, b: u32| -> u32 {
            let (mut a, mut b, mut out, mut pw) = (a, b, 0u32, 1u32);
            for _ in 0..n {
                out += ((a % p + b % p) % p) * pw;
                a /= p;
                b /= p;
                pw *= p;
            }
            out
        };
        let add = if p != 2 && size <= 1024 {
            let mut t = vec![0u32; (size * size) as usize];
            for a in 0..size {
                for b in 0..size {
                    t[(a * size + b) as usize] = add_digits(a, b);
                }
            }
            Some(t)
        } else {
            None
        };
        let neg = (0..size)
            .map(|a| {
                let d = code_to_poly(a, p, n);
                poly_to_code(&d.iter().map(|&x| (p - x) % p).collect::<Vec<_>>(), p)
            })
            .collect();
        Ok(FieldConfig(Arc::new(Tables {
            p,
            f,
            s,
            degree: n,
            size,
            q: (p as u64).pow(f),
            modulus,
            exp,
            log,
            add,
            neg,
        })))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn f(&self) -> u32 {
        self.0.f
    }
    pub fn s(&self) -> u32 {
        self.0.s
    }
    pub fn q(&self) -> u64 {
        self.0.q
    }
    pub fn size(&self) -> u32 {
        self.0.size
    }
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// Smallest s such that -1 has a (q-1)-th root in F_{q^s}.
    pub fn min_s_for_neg_one_root(p: u32, f: u32) -> u32 {
        let q = (p as u64).pow(f);
        if q == 2 {
            return 1;
        }
        let m = q - 1;
        // -1 = g^{(N-1)/2}; need (N-1)/2 divisible by gcd(m, N-1)
        (1..8)
            .find(|&s| {
                let big = q.pow(s) - 1;
                let g = num_integer::gcd(m, big);
                if p == 2 {
                    return true;
                }
                (big / 2) % g == 0
            })
            .unwrap_or(8) as u32
    }

    pub fn elem(&self, code: u32) -> FqElem {
        debug_assert!(code < self.0.size);
        FqElem(code)
    }

    pub fn from_int(&self, c: i64) -> FqElem {
        FqElem(c.rem_euclid(self.0.p as i64) as u32)
    }

    pub fn from_coords(&self, coords: &[u32]) -> Result<FqElem, MathError> {
        if coords.len() > self.0.degree as usize || coords.iter().any(|&c| c >= self.0.p) {
            return Err(MathError::Parse(format!("bad coordinates {coords:?}")));
        }
        Ok(FqElem(poly_to_code(coords, self.0.p)))
    }

    pub fn coords(&self, x: FqElem) -> Vec<u32> {
        code_to_poly(x.0, self.0.p, self.0.degree)
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.0.size).map(FqElem)
    }

    /// Image of the prime field element as an integer in 0..p if x lies in F_p.
    pub fn as_prime(&self, x: FqElem) -> Option<u32> {
        (x.0 < self.0.p).then_some(x.0)
    }

    pub fn in_fq(&self, x: FqElem) -> bool {
        self.frob(x, 1) == x
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.0.p == 2 {
            return FqElem(a.0 ^ b.0);
        }
        match &self.0.add {
            Some(t) => FqElem(t[(a.0 * self.0.size + b.0) as usize]),
            None => {
                let p = self.0.p;
                let (mut x, mut y, mut out, mut pw) = (a.0, b.0, 0u32, 1u32);
                while x > 0 || y > 0 {
                    out += ((x % p + y % p) % p) * pw;
                    x /= p;
                    y /= p;
                    pw *= p;
                }
                FqElem(out)
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        FqElem(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.0 == 0 || b.0 == 0 {
            return FqElem::ZERO;
        }
        let order = self.0.size - 1;
        let l = self.0.log[a.0 as usize] + self.0.log[b.0 as usize];
        FqElem(self.0.exp[(l % order) as usize])
    }

    pub fn inv(&self, a: FqElem) -> FqElem {
        assert!(!a.is_zero(), "inverse of zero in finite field");
        let order = self.0.size - 1;
        let l = self.0.log[a.0 as usize];
        FqElem(self.0.exp[((order - l) % order) as usize])
    }

    pub fn pow(&self, a: FqElem, e: u64) -> FqElem {
        if e == 0 {
            return FqElem::ONE;
        }
        if a.is_zero() {
            return FqElem::ZERO;
        }
        let order = (self.0.size - 1) as u64;
        let l = self.0.log[a.0 as usize] as u64 * (e % order) % order;
        FqElem(self.0.exp[l as usize])
    }

    /// x^{q^k}; negative k gives the unique q^{|k|}-th root.
    pub fn frob(&self, x: FqElem, k: i64) -> FqElem {
        if x.is_zero() {
            return x;
        }
        let s = self.0.s as i64;
        let k = k.rem_euclid(s) as u32;
        let order = (self.0.size - 1) as u64;
        let mut e = 1u64;
        for _ in 0..k {
            e = e * self.0.q % order;
        }
        self.pow(x, e)
    }

    /// x^{p^k} for k possibly negative (absolute Frobenius).
    pub fn frob_p(&self, x: FqElem, k: i64) -> FqElem {
        if x.is_zero() {
            return x;
        }
        let k = k.rem_euclid(self.0.degree as i64) as u32;
        let order = (self.0.size - 1) as u64;
        let mut e = 1u64;
        for _ in 0..k {
            e = e * self.0.p as u64 % order;
        }
        self.pow(x, e)
    }

    /// All y with y^m = x, smallest code first.
    pub fn roots(&self, x: FqElem, m: u64) -> Vec<FqElem> {
        assert!(m > 0);
        if x.is_zero() {
            return vec![FqElem::ZERO];
        }
        let order = (self.0.size - 1) as u64;
        let l = self.0.log[x.0 as usize] as u64;
        let g = num_integer::gcd(m % order, order);
        let g = if m % order == 0 { order } else { g };
        if l % g != 0 {
            return vec![];
        }
        let mut out: Vec<FqElem> = (0..order)
            .filter(|&k| (k as u128 * m as u128 % order as u128) as u64 == l)
            .map(|k| FqElem(self.0.exp[k as usize]))
            .collect();
        out.sort();
        out
    }

    /// Canonical m-th root: minimal code among all roots.
    pub fn root(&self, x: FqElem, m: u64) -> Result<FqElem, MathError> {
        self.roots(x, m).first().copied().ok_or(MathError::NoRootInCoefficientField)
    }

    pub fn fmt_elem(&self, x: FqElem) -> String {
        if self.0.degree == 1 {
            x.0.to_string()
        } else {
            let c: Vec<String> = self.coords(x).iter().map(|d| d.to_string()).collect();
            format!("[{}]", c.join(","))
        }
    }
}
