use thiserror::Error;

/// Which coordinate (or bounded field) failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Lat,
    Lon,
    Priority,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Lat => "lat",
            Field::Lon => "lon",
            Field::Priority => "priority",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Broad class of an error, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Config,
    Invariant,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} out of range: {value}")]
    OutOfRange { field: Field, value: f64 },

    #[error("{field} is not finite")]
    NonFinite { field: Field },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("expected a {expected} distance matrix, got {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no cluster candidates")]
    NoCandidates,

    #[error("k = {k} is not in 1..={points}")]
    BadK { k: usize, points: usize },

    #[error("clustering produced no clusters")]
    NoClusters,

    #[error("strategy result is not a {0} result")]
    WrongStrategy(&'static str),

    #[error("every event is already observed")]
    NothingUnobserved,

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("plan was built against a different network state")]
    StateMismatch,

    #[error("`before` degree sequence is empty")]
    EmptyBefore,

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("unreadable input: {0}")]
    Unreadable(String),

    #[error("impossible synthetic spec: {0}")]
    ImpossibleSpec(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable name, used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NonFinite { .. } => "NonFinite",
            Error::InvalidConfig(_) => "ValidationError",
            Error::DuplicateId(_) => "DuplicateId",
            Error::EmptyInput(_) => "EmptyInput",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoCandidates => "NoCandidates",
            Error::BadK { .. } => "BadK",
            Error::NoClusters => "NoClusters",
            Error::WrongStrategy(_) => "WrongStrategy",
            Error::NothingUnobserved => "NothingUnobserved",
            Error::UnknownStrategy(_) => "UnknownStrategy",
            Error::StateMismatch => "StateMismatch",
            Error::EmptyBefore => "EmptyBefore",
            Error::MissingColumn(_) => "MissingColumn",
            Error::Unreadable(_) => "Unreadable",
            Error::ImpossibleSpec(_) => "ImpossibleSpec",
            Error::Invariant(_) => "InvariantViolation",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_)
            | Error::UnknownStrategy(_)
            | Error::BadK { .. }
            | Error::ImpossibleSpec(_) => ErrorClass::Config,
            Error::Invariant(_) | Error::KindMismatch { .. } | Error::DimensionMismatch { .. } => {
                ErrorClass::Invariant
            }
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
