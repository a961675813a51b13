use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("network generation failed: {0}")]
    GenerationFailure(String),

    #[error("node {node} cannot reach destination {destination}")]
    UnreachableDestination { node: usize, destination: usize },

    /// A rate assignment broke one of the queue, link-rate or conflict
    /// constraints. `trace` carries the decision trace of the offending slot
    /// as JSON lines when one was recorded.
    #[error("infeasible assignment at slot {slot}: {reason}")]
    InfeasibleAssignment {
        slot: usize,
        reason: String,
        trace: Option<String>,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("missing file: {0}")]
    MissingFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
