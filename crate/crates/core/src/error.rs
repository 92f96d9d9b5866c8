use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial of degree zero has no roots")]
    NoRoots,

    #[error("root set is not closed under conjugation near {0}")]
    NotConjugateSymmetric(Complex64),

    #[error("the zero polynomial is not allowed here")]
    ZeroPolynomial,

    #[error("denominator is the zero polynomial")]
    ZeroDenominator,

    #[error("evaluation at s = {s} is within guard distance of the pole at {pole}")]
    NearSingularity { s: Complex64, pole: Complex64 },

    #[error("no pole of the transfer function within tolerance of {0}")]
    PoleNotFound(Complex64),

    #[error("pole at {pole} has multiplicity {detected}, requested {requested}")]
    MultiplicityMismatch {
        pole: Complex64,
        requested: usize,
        detected: usize,
    },

    #[error("pole at {0} is not on the imaginary axis")]
    NotAxisPole(Complex64),

    #[error("Laurent expansion at {pole} did not converge: {reason}")]
    LaurentFailed { pole: Complex64, reason: String },

    #[error("loop value is zero; sensitivity is identically one at this point")]
    ZeroLoopValue,

    #[error("|zeta| = {modulus} is inside the guard band around the unit circle")]
    Conditioning { modulus: f64 },

    #[error("s = {0} is a closed-loop pole")]
    ClosedLoopPole(Complex64),

    #[error("network size {n} exceeds the cap of {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("loop numerator is identically zero")]
    DegenerateLoop,

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("analysis refused: {0}")]
    Refused(Refusal),
}

/// A failed precondition of an analysis, carried to the caller so it can
/// report which premise did not hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Refusal {
    #[error("relative degree {0} is below 2")]
    RelativeDegree(i64),

    #[error("1/(1 + k L(s)) is not stable for every gain k in (0, 4)")]
    NotStableForAllGains,

    #[error("1/(1 + k L(s)) is not stable for spectrum value k = {0}")]
    UnstableAtEigenvalue(f64),

    #[error("network size must be at least 1")]
    ZeroNetworkSize,
}

impl From<Refusal> for Error {
    fn from(r: Refusal) -> Self {
        Error::Refused(r)
    }
}
