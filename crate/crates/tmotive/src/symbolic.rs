//! Symbolic Laurent polynomials in twisted generators x^{(j)}.
//!
//! Generators are `theta^(j)`, `kappa_i^(j)` and normalizers `u` declared with
//! a monomial unit `eta`; twisting shifts j and rewrites
//! `u^{(-1)} = eta u`, `u^{(1)} = u / eta^{(1)}`. Coefficients are integers
//! modulo `p`, with `p = 0` meaning plain integers (characteristic-free
//! identities, as used for printed matrices).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use crate::error::MathError;
use crate::ring::{Ring, Twist, UnitInv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    Theta,
    Kappa(u16),
    Norm(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen {
    pub name: Name,
    pub j: i32,
}

/// Sorted generator powers with nonzero exponents.
pub type Mono = Vec<(Gen, i32)>;

struct NormDef {
    name: String,
    eta_coef: i64,
    eta_mono: Mono,
}

fn registry() -> &'static RwLock<Vec<NormDef>> {
    static REG: OnceLock<RwLock<Vec<NormDef>>> = OnceLock::new();
    REG.get_or_init(|| RwLock::new(Vec::new()))
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            let e = a[i].1 + b[j].1;
            if e != 0 {
                out.push((a[i].0, e));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn mono_pow(a: &Mono, e: i32) -> Mono {
    if e == 0 {
        return Vec::new();
    }
    a.iter().map(|&(g, k)| (g, k * e)).collect()
}

fn mono_shift(a: &Mono, n: i32) -> Mono {
    a.iter().map(|&(g, k)| (Gen { name: g.name, j: g.j + n }, k)).collect()
}

#[derive(Clone, PartialEq, Eq)]
pub struct FrobSymbol {
    p: u32,
    terms: BTreeMap<Mono, i64>,
}

impl FrobSymbol {
    fn reduce(&self, c: i64) -> i64 {
        if self.p == 0 {
            c
        } else {
            c.rem_euclid(self.p as i64)
        }
    }

    fn from_map(p: u32, terms: BTreeMap<Mono, i64>) -> Self {
        let mut s = FrobSymbol { p, terms: BTreeMap::new() };
        for (m, c) in terms {
            let c = s.reduce(c);
            if c != 0 {
                s.terms.insert(m, c);
            }
        }
        s
    }

    pub fn zero(p: u32) -> Self {
        FrobSymbol { p, terms: BTreeMap::new() }
    }

    pub fn int(p: u32, c: i64) -> Self {
        Self::from_map(p, BTreeMap::from([(Vec::new(), c)]))
    }

    pub fn gen(p: u32, name: Name, j: i32) -> Self {
        Self::monomial(p, 1, vec![(Gen { name, j }, 1)])
    }

    pub fn monomial(p: u32, c: i64, mono: Mono) -> Self {
        Self::from_map(p, BTreeMap::from([(mono, c)]))
    }

    pub fn theta(p: u32, j: i32) -> Self {
        Self::gen(p, Name::Theta, j)
    }

    pub fn kappa(p: u32, i: u16, j: i32) -> Self {
        Self::gen(p, Name::Kappa(i), j)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &i64)> {
        self.terms.iter()
    }

    /// Declare (or look up) the normalizer `name` with `u^{(-1)} = eta u`.
    /// `eta` must be a unit monomial without normalizers.
    pub fn normalizer(name: &str, eta: &FrobSymbol) -> Result<FrobSymbol, MathError> {
        let (mono, coef) =
            eta.as_monomial().ok_or_else(|| MathError::Parse(format!("normalizer {name}: eta is not a monomial")))?;
        if mono.iter().any(|(g, _)| matches!(g.name, Name::Norm(_))) {
            return Err(MathError::Parse(format!("normalizer {name}: eta contains a normalizer")));
        }
        if eta.p == 0 && coef.abs() != 1 {
            return Err(MathError::Parse(format!("normalizer {name}: eta coefficient not a unit")));
        }
        let mut reg = registry().write().unwrap();
        let idx = match reg.iter().position(|d| d.name == name) {
            Some(i) => {
                let d = &reg[i];
                if d.eta_mono != mono || d.eta_coef != coef {
                    return Err(MathError::Parse(format!("normalizer {name} redeclared")));
                }
                i
            }
            None => {
                reg.push(NormDef { name: name.to_string(), eta_coef: coef, eta_mono: mono });
                reg.len() - 1
            }
        };
        Ok(Self::gen(eta.p, Name::Norm(idx as u32), 0))
    }

    /// The single monomial and its coefficient, if this is a monomial.
    pub fn as_monomial(&self) -> Option<(Mono, i64)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        Some((m.clone(), *c))
    }

    fn coef_inv(&self, c: i64) -> i64 {
        if self.p == 0 {
            assert!(c == 1 || c == -1, "integer coefficient {c} is not a unit");
            c
        } else {
            let p = self.p as i64;
            let mut r = 1i64;
            let mut b = c.rem_euclid(p);
            let mut e = p - 2;
            while e > 0 {
                if e & 1 == 1 {
                    r = r * b % p;
                }
                b = b * b % p;
                e >>= 1;
            }
            r
        }
    }

    fn coef_pow(&self, c: i64, e: i32) -> i64 {
        let base = if e < 0 { self.coef_inv(c) } else { c };
        let mut r = 1i64;
        for _ in 0..e.unsigned_abs() {
            r = self.reduce(r.checked_mul(base).expect("coefficient overflow"));
        }
        r
    }

    /// Inverse of a monomial unit.
    pub fn inv_monomial(&self) -> Option<FrobSymbol> {
        let (m, c) = self.as_monomial()?;
        if self.p == 0 && c.abs() != 1 {
            return None;
        }
        Some(Self::monomial(self.p, self.coef_inv(c), mono_pow(&m, -1)))
    }

    /// Twist of a single monomial: (coefficient factor, monomial).
    fn twist_mono(&self, m: &Mono, n: i32) -> (i64, Mono) {
        let mut coef = 1i64;
        let mut out: Mono = Vec::new();
        let reg = registry().read().unwrap();
        for &(g, e) in m {
            match g.name {
                Name::Norm(idx) => {
                    let d = &reg[idx as usize];
                    // u^{(n)} = F_n u with F_n = prod_{k=n+1}^{0} eta^{(k)} (n<0)
                    // or prod_{k=1}^{n} eta^{(k)}^{-1} (n>0)
                    let (mut fc, mut fm) = (1i64, Vec::new());
                    if n < 0 {
                        for k in (n + 1)..=0 {
                            fc = self.reduce(fc * d.eta_coef);
                            fm = mono_mul(&fm, &mono_shift(&d.eta_mono, k));
                        }
                    } else {
                        for k in 1..=n {
                            fc = self.reduce(fc * d.eta_coef);
                            fm = mono_mul(&fm, &mono_shift(&d.eta_mono, k));
                        }
                        fc = self.coef_inv(fc);
                        fm = mono_pow(&fm, -1);
                    }
                    coef = self.reduce(coef * self.coef_pow(fc, e));
                    out = mono_mul(&out, &mono_pow(&fm, e));
                    out = mono_mul(&out, &vec![(g, e)]);
                }
                _ => {
                    out = mono_mul(&out, &vec![(Gen { name: g.name, j: g.j + n }, e)]);
                }
            }
        }
        (coef, out)
    }

    /// Replace every generator by a value (used to specialize symbolic frames).
    pub fn substitute<R: Ring>(&self, proto: &R, value: &dyn Fn(Gen) -> R, inverse: &dyn Fn(Gen) -> R) -> R {
        let mut acc = proto.zero_like();
        for (m, &c) in &self.terms {
            let mut t = proto.from_int_like(c);
            for &(g, e) in m {
                let base = if e > 0 { value(g) } else { inverse(g) };
                for _ in 0..e.unsigned_abs() {
                    t = t.mul(&base);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn parse(p: u32, s: &str) -> Result<FrobSymbol, MathError> {
        parse_symbol(p, s)
    }

    fn gen_name(g: Gen) -> String {
        match g.name {
            Name::Theta => format!("theta^({})", g.j),
            Name::Kappa(i) => format!("kappa_{i}^({})", g.j),
            Name::Norm(idx) => {
                let reg = registry().read().unwrap();
                format!("{}^({})", reg[idx as usize].name, g.j)
            }
        }
    }
}

impl fmt::Display for FrobSymbol {
    /// Canonical text: monomials in generator order, generators as `name^(j)`,
    /// powers as `^k`, joined by ` + ` / ` - `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, &c) in &self.terms {
            let (neg, mag) = if self.p == 0 {
                (c < 0, c.abs())
            } else if c * 2 > self.p as i64 && self.p > 2 {
                (true, self.p as i64 - c)
            } else {
                (false, c)
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            if mag != 1 || m.is_empty() {
                factors.push(mag.to_string());
            }
            for &(g, e) in m {
                let name = FrobSymbol::gen_name(g);
                factors.push(if e == 1 { name } else { format!("{name}^{e}") });
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for FrobSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Ring for FrobSymbol {
    fn zero_like(&self) -> Self {
        FrobSymbol::zero(self.p)
    }
    fn one_like(&self) -> Self {
        FrobSymbol::int(self.p, 1)
    }
    fn from_int_like(&self, c: i64) -> Self {
        FrobSymbol::int(self.p, c)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "symbol characteristic mismatch");
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert(0);
            *e = self.reduce(e.checked_add(c).expect("coefficient overflow"));
            if *e == 0 {
                terms.remove(m);
            }
        }
        FrobSymbol { p: self.p, terms }
    }
    fn neg(&self) -> Self {
        Self::from_map(self.p, self.terms.iter().map(|(m, &c)| (m.clone(), -c)).collect())
    }
    fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "symbol characteristic mismatch");
        let mut terms: BTreeMap<Mono, i64> = BTreeMap::new();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let m = mono_mul(ma, mb);
                let e = terms.entry(m).or_insert(0);
                *e = self.reduce(
                    e.checked_add(ca.checked_mul(cb).expect("coefficient overflow")).expect("coefficient overflow"),
                );
            }
        }
        Self::from_map(self.p, terms)
    }
}

impl Twist for FrobSymbol {
    fn twist(&self, n: i64) -> Self {
        if n == 0 {
            return self.clone();
        }
        let n = n as i32;
        let mut terms: BTreeMap<Mono, i64> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let (fc, tm) = self.twist_mono(m, n);
            let e = terms.entry(tm).or_insert(0);
            *e = self.reduce(*e + self.reduce(c * fc));
        }
        Self::from_map(self.p, terms)
    }
}

/// `expr := ['-'] term (('+'|'-') term)*`, `term := factor ('*' factor)*`,
/// `factor := int | name ['^(' int ')'] ['^' int]` with names `theta`,
/// `kappa_i` or a declared normalizer. A bare name means twist index 0.
fn parse_symbol(p: u32, s: &str) -> Result<FrobSymbol, MathError> {
    let s: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pos = 0usize;
    let err = |pos: usize, m: &str| MathError::Parse(format!("{m} at {pos}"));
    let read_int = |pos: &mut usize| -> Option<i64> {
        let start = *pos;
        if *pos < s.len() && s[*pos] == '-' {
            *pos += 1;
        }
        while *pos < s.len() && s[*pos].is_ascii_digit() {
            *pos += 1;
        }
        s[start..*pos].iter().collect::<String>().parse().ok()
    };
    let mut acc = FrobSymbol::zero(p);
    let mut sign = 1i64;
    if pos < s.len() && s[pos] == '-' {
        sign = -1;
        pos += 1;
    }
    loop {
        let mut term = FrobSymbol::int(p, sign);
        loop {
            if pos < s.len() && s[pos].is_ascii_digit() {
                let v = read_int(&mut pos).ok_or_else(|| err(pos, "integer"))?;
                term = term.mul(&FrobSymbol::int(p, v));
            } else {
                let start = pos;
                while pos < s.len() && (s[pos].is_alphanumeric() || s[pos] == '_') {
                    pos += 1;
                }
                let name: String = s[start..pos].iter().collect();
                if name.is_empty() {
                    return Err(err(pos, "expected factor"));
                }
                let mut j = 0i32;
                let mut e = 1i32;
                if pos + 1 < s.len() && s[pos] == '^' && s[pos + 1] == '(' {
                    pos += 2;
                    j = read_int(&mut pos).ok_or_else(|| err(pos, "twist index"))? as i32;
                    if pos >= s.len() || s[pos] != ')' {
                        return Err(err(pos, "expected ')'"));
                    }
                    pos += 1;
                }
                if pos < s.len() && s[pos] == '^' {
                    pos += 1;
                    e = read_int(&mut pos).ok_or_else(|| err(pos, "power"))? as i32;
                }
                let g = if name == "theta" {
                    FrobSymbol::theta(p, 0)
                } else if let Some(i) = name.strip_prefix("kappa_") {
                    let i: u16 = i.parse().map_err(|_| err(pos, "kappa index"))?;
                    FrobSymbol::kappa(p, i, 0)
                } else {
                    let reg = registry().read().unwrap();
                    let idx = reg
                        .iter()
                        .position(|d| d.name == name)
                        .ok_or_else(|| err(pos, &format!("unknown generator {name}")))?;
                    FrobSymbol::gen(p, Name::Norm(idx as u32), 0)
                };
                let mut g = g.twist(j as i64);
                if e < 0 {
                    g = g.inv_monomial().ok_or_else(|| err(pos, "non-invertible power"))?;
                }
                for _ in 0..e.unsigned_abs() {
                    term = term.mul(&g);
                }
            }
            if pos < s.len() && s[pos] == '*' {
                pos += 1;
            } else {
                break;
            }
        }
        acc = acc.add(&term);
        if pos >= s.len() {
            break;
        }
        sign = match s[pos] {
            '+' => 1,
            '-' => -1,
            c => return Err(err(pos, &format!("unexpected '{c}'"))),
        };
        pos += 1;
    }
    Ok(acc)
}

impl UnitInv for FrobSymbol {
    fn unit_inv(&self) -> Result<Self, MathError> {
        self.inv_monomial().ok_or_else(|| MathError::NotInvertible(self.to_string()))
    }
}
