use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HbtError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Antisymmetric combination of a state with itself.
    #[error("degenerate two-particle state: {0}")]
    DegenerateState(String),

    /// Plane waves have no finite norm, so overlaps between two of them or
    /// expectation values involving one are undefined.
    #[error("unnormalizable single-particle state in {0}")]
    Unnormalizable(&'static str),

    #[error("no interference fringes: {0}")]
    NoFringes(String),

    #[error("grid does not resolve the field: {0}")]
    UnderResolvedGrid(String),

    #[error("too few samples: {got} (need at least {min})")]
    TooFewSamples { got: u64, min: u64 },

    #[error("empty sample stream")]
    EmptySamples,

    #[error(
        "rejection envelope failure: acceptance rate {acceptance:.3e} below {threshold:.3e} \
         after {proposals} proposals"
    )]
    EnvelopeFailure {
        acceptance: f64,
        threshold: f64,
        proposals: u64,
    },

    #[error("fringe fit failed: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, HbtError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> HbtError {
    HbtError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
