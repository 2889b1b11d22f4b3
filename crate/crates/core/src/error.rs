use thiserror::Error;

/// Errors raised while building or analysing max-min automata.
///
/// States and events are carried as rendered text so the error type stays
/// independent of the scalar grade in use.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid possibility `{text}`: {reason}")]
    InvalidGrade { text: String, reason: &'static str },

    #[error("malformed state literal `{0}`")]
    MalformedState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("duplicate event name `{0}`")]
    DuplicateEvent(String),

    #[error("automaton must have at least one crisp state")]
    EmptyStateSpace,

    #[error("initial state must not be the all-zero vector")]
    ZeroInitialState,

    #[error("the all-zero vector is not a valid fuzzy state")]
    ZeroState,

    #[error("state {0} appears more than once")]
    DuplicateState(String),

    #[error("state {0} is not a vertex of the graph")]
    NotAVertex(String),

    #[error("control value {value} for event `{event}` at {state} is below its uncontrollable degree {floor}")]
    ControlBelowFloor {
        state: String,
        event: String,
        value: String,
        floor: String,
    },

    #[error("invalid fuzzy language: {0}")]
    InvalidLanguage(String),

    #[error("language is not a sublanguage of the generated language at `{word}` ({degree} > {generated})")]
    NotSublanguage {
        word: String,
        degree: String,
        generated: String,
    },

    #[error("invalid controllable subgraph: {0}")]
    InvalidSubgraph(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{location}: {message}")]
    Document { location: String, message: String },

    #[error("no admissible control value for event `{event}` at {state}")]
    Infeasible { state: String, event: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
