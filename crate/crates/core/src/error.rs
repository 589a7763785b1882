use thiserror::Error;

use crate::chain::EquationId;

/// Errors raised by the numerical modules and the artifact writers.
///
/// Offending values are widened to `f64` so the error type stays independent
/// of the scalar type the computation ran in.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("derivative order {0} is not supported (expected 1, 2 or 3)")]
    InvalidOrder(u32),

    #[error("spectral differentiation needs an even node count, got N = {0}")]
    OddSpectral(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("{what} must be strictly positive: sample {index} is {value}")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no admissible turning points for A = {a}, C = {c} (quartic u^4 - 2Au^3 - Cu^2 + 1 has sign pattern {signs})")]
    NoTurningPoints { a: f64, c: f64, signs: String },

    #[error("zero-amplitude stationary profile: turning points coincide at u = {u}")]
    ZeroAmplitude { u: f64 },

    #[error("profile ODE left u > 0 at s = {s} (u = {u})")]
    ProfileLeftDomain { s: f64, u: f64 },

    #[error("profile ODE blew up at s = {s} after exhausting step rejections")]
    OdeBlowup { s: f64 },

    #[error("torsion fell to {value} at index {index}, t = {time} (floor {floor})")]
    PositivityViolation {
        time: f64,
        index: usize,
        value: f64,
        floor: f64,
    },

    #[error("non-finite state at index {index}, t = {time}")]
    NonFiniteState { time: f64, index: usize },

    #[error("inverse transform left imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },

    #[error("{eq}: constraint violated at index {index} (value {value})")]
    Constraint {
        eq: EquationId,
        index: usize,
        value: f64,
    },

    #[error("profile is not strictly increasing at index {index}")]
    NotMonotone { index: usize },

    #[error("exp overflow guard: |u| = {value} exceeds 30 at index {index}")]
    ExpOverflow { index: usize, value: f64 },

    #[error("Frenet frame degenerated at s = {s}")]
    FrameDegenerate { s: f64 },

    #[error("curvature estimate degenerate (|X''| ~ 0) at sample {index}")]
    CurvatureDegenerate { index: usize },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
