use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("division by an element that is zero to precision")]
    DivisionByZeroToPrecision,
    #[error("no root of the leading coefficient in the coefficient field")]
    NoRootInCoefficientField,
    #[error("inverse of an exact element with an infinite expansion needs a precision cap")]
    UnboundedInverse,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("pole level would become negative ({0})")]
    NegativePoleLevel(i64),
    #[error("function has a pole at t = theta (residue of degree {0})")]
    PoleAtTheta(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("logarithm outside its verified convergence region: term degrees {0}")]
    OutsideLogRadius(String),
    #[error("lattice enumeration bound too small: {0}")]
    EnumerationBoundTooSmall(String),
    #[error("lattice exponential is not F_q-linear to precision: {0}")]
    LinearitySanityFailed(String),
    #[error("lattice basis degrees must be pairwise distinct: {0}")]
    BasisDegreesNotDistinct(String),
    #[error("Gauss norm not below one: {0}")]
    NormNotLessThanOne(String),
    #[error("element not invertible to precision: {0}")]
    NotInvertible(String),
    #[error("Frobenius difference equation failed: {0}")]
    FrobeniusCheckFailed(String),
    #[error("identity does not hold: {0}")]
    IdentityFailed(String),
    #[error("operation needs the other representation: {0}")]
    Representation(String),
}
