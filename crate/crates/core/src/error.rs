use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point set must be nonempty")]
    EmptyPointSet,

    #[error("chain mesh violated at index {index}: gap {gap} exceeds eta {eta}")]
    MeshViolation { index: usize, gap: f64, eta: f64 },

    #[error("point outside chart domain: |p| = {norm} >= r_V = {r_v}")]
    OutsideChart { norm: f64, r_v: f64 },

    #[error("point outside the open first quadrant")]
    OutsideFirstQuadrant,

    #[error("point outside the region D")]
    OutsideRegion,

    #[error("geometry gate violated: {0}")]
    GeometryGate(String),

    #[error("refinement budget exceeded at step {step}: needed more than {budget} points")]
    RefinementBudget { step: i64, budget: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "pseudo-orbit unwrap ambiguity at step {step}: offset {offset} >= 1/4; \
         use a smaller delta or a shorter orbit"
    )]
    UnwrapAmbiguity { step: usize, offset: f64 },

    #[error("property violated: {0}")]
    PropertyViolation(String),
}
