//! Polynomials in the commuting variable t over a coefficient ring.

use crate::ring::{Mat, Ring, Twist};

/// `sum_i c[i] t^i`; `c` is never empty.
#[derive(Clone, Debug)]
pub struct TPoly<R> {
    c: Vec<R>,
}

impl<R: Ring> TPoly<R> {
    pub fn new(mut c: Vec<R>) -> Self {
        assert!(!c.is_empty(), "t-polynomial needs a coefficient prototype");
        while c.len() > 1 && c.last().unwrap().is_zero() {
            c.pop();
        }
        TPoly { c }
    }

    pub fn constant(a: R) -> Self {
        TPoly { c: vec![a] }
    }

    /// `t - a`.
    pub fn t_minus(a: &R) -> Self {
        TPoly::new(vec![a.neg(), a.one_like()])
    }

    pub fn t(proto: &R) -> Self {
        TPoly::new(vec![proto.zero_like(), proto.one_like()])
    }

    pub fn coeffs(&self) -> &[R] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> R {
        self.c.get(i).cloned().unwrap_or_else(|| self.c[0].zero_like())
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn scale(&self, a: &R) -> Self {
        TPoly::new(self.c.iter().map(|x| a.mul(x)).collect())
    }

    /// Evaluate at t = x (Horner).
    pub fn eval(&self, x: &R) -> R {
        let mut acc = self.c.last().unwrap().clone();
        for a in self.c.iter().rev().skip(1) {
            acc = acc.mul(x).add(a);
        }
        acc
    }
}

impl<R: Ring> Ring for TPoly<R> {
    fn zero_like(&self) -> Self {
        TPoly::constant(self.c[0].zero_like())
    }
    fn one_like(&self) -> Self {
        TPoly::constant(self.c[0].one_like())
    }
    fn from_int_like(&self, k: i64) -> Self {
        TPoly::constant(self.c[0].from_int_like(k))
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
    fn add(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        TPoly::new(
            (0..n)
                .map(|i| match (self.c.get(i), other.c.get(i)) {
                    (Some(a), Some(b)) => a.add(b),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    _ => unreachable!(),
                })
                .collect(),
        )
    }
    fn neg(&self) -> Self {
        TPoly::new(self.c.iter().map(|x| x.neg()).collect())
    }
    fn mul(&self, other: &Self) -> Self {
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
                let term = a.mul(b);
                out[i + j] = Some(match out[i + j].take() {
                    None => term,
                    Some(x) => x.add(&term),
                });
            }
        }
        let z = self.c[0].zero_like();
        TPoly::new(out.into_iter().map(|x| x.unwrap_or_else(|| z.clone())).collect())
    }
}

impl<R: Twist> Twist for TPoly<R> {
    fn twist(&self, n: i64) -> Self {
        TPoly::new(self.c.iter().map(|x| x.twist(n)).collect())
    }
}

pub type TPolyMat<R> = Mat<TPoly<R>>;

/// Lift a matrix of constants to constant t-polynomials.
pub fn lift<R: Ring>(m: &Mat<R>) -> TPolyMat<R> {
    m.map(|x| TPoly::constant(x.clone()))
}
