use crate::metric::PointId;

/// Failure modes shared by every module of the crate.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty operand")]
    EmptyOperand,

    #[error("not a covering: carrier point {point} lies in no member")]
    NotACovering { point: PointId },

    #[error("shrink broke coverage: carrier point {witness} is uncovered after shrinking by {amount}")]
    ShrinkBrokeCoverage {
        witness: PointId,
        amount: f64,
        uncovered: Vec<PointId>,
    },

    #[error("mesh(V) exceeds L(U)/2: mesh(V) = {mesh_v}, L(U) = {lebesgue_u}")]
    MergeHypothesis { mesh_v: f64, lebesgue_u: f64 },

    #[error(
        "amalgamation precondition violated at step {step}: mesh(U_{next}) = {mesh_next} \
         exceeds half of min(L(U_{step}), mesh(U_{step})) = {bound}",
        next = step + 1
    )]
    AmalgamationPrecondition {
        step: usize,
        mesh_next: f64,
        bound: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no quasi-homothety available for member {member}: {reason}")]
    ProviderFailed { member: usize, reason: String },

    #[error("not injective on sample: points {0} and {1} have zero source distance but distinct images")]
    NotInjective(usize, usize),

    #[error("{what} of size {size} exceeds the cap {cap}")]
    CapExceeded { what: String, size: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("complex is disconnected: no path between the requested points")]
    Disconnected,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
