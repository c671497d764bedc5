//! Ring abstractions shared by the numeric and symbolic coefficient rings,
//! and dense matrices over them.

use std::fmt;

use crate::cinf::CInf;
use crate::error::MathError;

pub trait Ring: Clone + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, c: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

/// Rings carrying the Frobenius twist x -> x^{(n)}.
pub trait Twist: Ring {
    fn twist(&self, n: i64) -> Self;
}

/// Rings where the units needed by the frame formulas can be inverted.
pub trait UnitInv: Twist {
    fn unit_inv(&self) -> Result<Self, MathError>;
}

impl Ring for CInf {
    fn zero_like(&self) -> Self {
        CInf::zero(self.field())
    }
    fn one_like(&self) -> Self {
        CInf::one(self.field())
    }
    fn from_int_like(&self, c: i64) -> Self {
        CInf::from_int(self.field(), c)
    }
    fn is_zero(&self) -> bool {
        CInf::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        CInf::add(self, other)
    }
    fn neg(&self) -> Self {
        CInf::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        CInf::mul(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        CInf::sub(self, other)
    }
}

impl Twist for CInf {
    fn twist(&self, n: i64) -> Self {
        CInf::twist(self, n)
    }
}

impl UnitInv for CInf {
    fn unit_inv(&self) -> Result<Self, MathError> {
        self.inv()
    }
}

#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: Clone> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// Delete row `i` and column `j`.
    pub fn minor(&self, i: usize, j: usize) -> Self {
        Mat::from_fn(self.rows - 1, self.cols - 1, |a, b| {
            let a = if a >= i { a + 1 } else { a };
            let b = if b >= j { b + 1 } else { b };
            self.get(a, b).clone()
        })
    }
}

impl<T: Ring> Mat<T> {
    pub fn zeros_like(proto: &T, rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| proto.zero_like())
    }

    pub fn identity_like(proto: &T, n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { proto.one_like() } else { proto.zero_like() })
    }

    pub fn scalar_like(x: &T, n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { x.clone() } else { x.zero_like() })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix add shape");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix sub shape");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix mul shape");
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc: Option<T> = None;
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, j);
                let term = a.mul(b);
                acc = Some(match acc {
                    None => term,
                    Some(x) => x.add(&term),
                });
            }
            acc.unwrap_or_else(|| self.data[0].zero_like())
        })
    }

    /// Left scalar multiplication.
    pub fn scale_left(&self, x: &T) -> Self {
        self.map(|a| x.mul(a))
    }

    pub fn scale_right(&self, x: &T) -> Self {
        self.map(|a| a.mul(x))
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(k >= 1);
        let mut out = self.clone();
        for _ in 1..k {
            out = out.mul(self);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Determinant by cofactor expansion along the first row; commutative
    /// entries only, no division.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        match n {
            0 => panic!("det of empty matrix"),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0).mul(self.get(1, 1)).sub(&self.get(0, 1).mul(self.get(1, 0))),
            _ => {
                let mut acc = self.get(0, 0).zero_like();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let term = a.mul(&self.minor(0, j).det());
                    acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                }
                acc
            }
        }
    }

    /// Cofactor matrix Cof(C)_{ij} = (-1)^{i+j} det(minor_{ij}).
    pub fn cofactor(&self) -> Self {
        let n = self.rows;
        assert_eq!(n, self.cols);
        if n == 1 {
            return Mat::identity_like(self.get(0, 0), 1);
        }
        Mat::from_fn(n, n, |i, j| {
            let d = self.minor(i, j).det();
            if (i + j) % 2 == 0 {
                d
            } else {
                d.neg()
            }
        })
    }

    /// Adjugate C^ad = Cof(C)^tr, so that C C^ad = det(C) Id.
    pub fn adjugate(&self) -> Self {
        self.cofactor().transpose()
    }

    /// (Cof(C), C^ad, det C).
    pub fn cof_adj_det(&self) -> (Self, Self, T) {
        let cof = self.cofactor();
        let adj = cof.transpose();
        (cof, adj, self.det())
    }
}

impl<T: Twist> Mat<T> {
    pub fn twist(&self, n: i64) -> Self {
        self.map(|x| x.twist(n))
    }
}
