use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },

    #[error("vertex at level {level} is deeper than depth {depth}")]
    VertexTooDeep { level: usize, depth: usize },

    #[error("level {level} exceeds the configured maximum {max}")]
    LevelTooLarge { level: usize, max: usize },

    #[error("{what} budget of {limit} exceeded")]
    BudgetExceeded { what: &'static str, limit: u64 },

    #[error("marking sizes differ: {left} vs {right}")]
    MarkingSizeMismatch { left: usize, right: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure is degenerate: semigroup closure up to length {horizon} misses {missing}")]
    Degenerate { horizon: usize, missing: String },

    #[error("measure is not symmetric: {0}")]
    AsymmetricMeasure(String),

    #[error("word length of an element exceeds the enumerated radius {radius}")]
    RadiusExceeded { radius: usize },

    #[error("not a marked quotient: relation of length {length} fails in the target")]
    NotAQuotient { length: usize },

    #[error("conditioning event has zero mass")]
    ZeroMass,

    #[error("lift hypothesis n > l*q violated: n = {n}, l*q = {bound}")]
    LiftHypothesis { n: usize, bound: usize },

    #[error("generation certificate failed to verify: {0}")]
    Certificate(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Budget exhaustion is reported distinctly by the experiment runner.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
