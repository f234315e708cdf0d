use thiserror::Error;

use crate::complex::Simplex;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("simplex {0:?} repeats a vertex id")]
    DegenerateSimplex(Vec<usize>),
    #[error("vertex {0} is not in the complex")]
    MissingVertex(usize),
    #[error("simplex {0} is not in the complex")]
    MissingSimplex(Simplex),
    #[error("vertex {id} has {got} coordinates, expected {expected}")]
    CoordinateMismatch { id: usize, expected: usize, got: usize },
    #[error("vertex id {0} appears twice")]
    DuplicateVertex(usize),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("bad exponent: {0}")]
    BadExponent(String),
    #[error("bad degree: {0}")]
    BadDegree(String),
    #[error("not a subcomplex: {0}")]
    BadSubcomplex(String),
    #[error("bad carrier: {0}")]
    BadCarrier(String),
    #[error("point {0:?} lies outside the closed unit ball")]
    OutsideDomain(Vec<f64>),
    #[error("epsilon {eps} outside the open interval (0, {upper})")]
    BadEpsilon { eps: f64, upper: f64 },
    #[error("exponent sequence is not a counterexample: {0}")]
    NotACounterexample(String),
    #[error("problem too large for dense linear algebra: {0}")]
    TooLarge(String),
    #[error("form is discontinuous across face {face}: trace mismatch {mismatch:e}")]
    Discontinuous { face: Simplex, mismatch: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
