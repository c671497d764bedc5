//! Exact arithmetic for Drinfeld modules, Anderson t-modules and their
//! t-motives over F_q[theta].

pub mod agf;
pub mod analytic;
pub mod cinf;
pub mod error;
pub mod field;
pub mod lattice;
pub mod motives;
pub mod parse;
pub mod ring;
pub mod skew;
pub mod symbolic;
pub mod tate;
pub mod thirdkind;
pub mod tmodule;
pub mod tpoly;

pub use cinf::CInf;
pub use error::MathError;
pub use field::{FieldConfig, FqElem};
pub use ring::{Mat, Ring, Twist, UnitInv};
pub use skew::{SkewMat, SkewPoly, Var};
pub use symbolic::FrobSymbol;
pub use tpoly::{TPoly, TPolyMat};

pub type Rat = num_rational::Ratio<i64>;
