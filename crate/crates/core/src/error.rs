use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("infeasible bounds: lower bound exceeds upper bound at index {0}")]
    InfeasibleBounds(usize),

    #[error("interpolation system is singular to working precision")]
    DegenerateGeometry,

    #[error("update denominator is numerically zero")]
    ZeroDenominator,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
