use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A hidden point outside the region where it determines the separator.
    #[error("hidden point infeasible: {0}")]
    Infeasible(String),

    #[error("point lies inside the circle; no tangent lines exist")]
    InsideCircle,

    #[error("point lies on the circle; tangent lines are degenerate")]
    DegenerateTangent,

    #[error("a tangent line through the point is vertical")]
    VerticalTangent,

    /// Caller supplied arguments outside an operation's domain.
    #[error("{0}")]
    Domain(String),

    /// An attackable region reached the guard bound. Only happens for a
    /// line that does not separate the training clusters.
    #[error("attackable region is unbounded: {0}")]
    Unbounded(String),

    #[error("candidate pool exhausted")]
    PoolExhausted,

    #[error("acceptance probability {0:.3e} is too low for a Monte Carlo estimate")]
    UndefinedEstimate(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
