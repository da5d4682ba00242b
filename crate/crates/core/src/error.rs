use crate::lie::AlgebraKind;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation `{op}` is not defined on {found:?}")]
    WrongAlgebra { op: &'static str, found: AlgebraKind },

    #[error("group element is not unimodular (|det - 1| = {deviation:e})")]
    NonUnimodular { deviation: f64 },

    #[error("operator is not K-symmetric (asymmetry {asymmetry:e})")]
    NotKSymmetric { asymmetry: f64 },

    #[error("metric is not Lorentzian: {negative} negative and {positive} positive eigenvalues")]
    NotLorentzian { negative: usize, positive: usize },

    #[error("singular or ill-conditioned input: {0}")]
    Singular(String),

    #[error("zero vector has no causal or cone membership")]
    ZeroVector,

    #[error("point is not on the cone intersection (|g*| = {gstar:e}, |tr x^2| = {trace:e})")]
    NotOnIntersection { gstar: f64, trace: f64 },

    #[error("eigenvalue ratio of the Killing generator is not imaginary (|Re mu|/|mu| = {ratio:e})")]
    NonImaginaryEigenvalueRatio { ratio: f64 },

    #[error("block structure failure ({detail}): residual {residual:e}")]
    BlockStructureFailure { residual: f64, detail: String },

    #[error("degenerate rotation rate c = {0:e}")]
    DegenerateRotation(f64),

    #[error("evaluation at t = {t} exceeds the maximal domain (pole at {pole})")]
    DomainExceeded { t: f64, pole: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
