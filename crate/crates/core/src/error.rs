use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes. The CLI maps each to a distinct exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Ingestion,
    Configuration,
    Validation,
    Capacity,
    Computation,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("ingestion error: source is empty")]
    EmptySource,
    #[error("ingestion error: missing column `{0}`")]
    MissingColumn(String),
    #[error("ingestion error: malformed header: {0}")]
    MalformedHeader(String),
    #[error("ingestion error: conversation `{conversation}` has duplicate order index {order_index}")]
    DuplicateOrder { conversation: String, order_index: u64 },
    #[error("ingestion error: row {row}: invalid value {value:?} in column `{column}`")]
    InvalidValue { row: usize, column: String, value: String },
    #[error("ingestion error: {0}")]
    Malformed(String),

    #[error("conversation `{id}` has {n} labeled client turns; a half split needs at least 2")]
    DegenerateSplit { id: String, n: usize },
    #[error("excluded: fewer than 4 labeled client turns (conversation `{id}` has {n})")]
    Excluded { id: String, n: usize },
    #[error("conversation `{0}` has no therapist turns; per-turn score is undefined")]
    UndefinedScore(String),
    #[error("unknown conversation `{0}`")]
    UnknownConversation(String),

    #[error("sample too small: {0}")]
    SampleTooSmall(String),
    #[error("pooled standard deviation is zero; effect size undefined")]
    DegenerateVariance,
    #[error("labels contain a single class; curve undefined")]
    SingleClass,
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("detection outcomes come from different corpora")]
    MismatchedCorpora,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("trajectory space has {cardinality} elements, above the cap of {cap}")]
    SpaceTooLarge { cardinality: u128, cap: u128 },

    #[error("structural error: missing field `{0}`")]
    MissingField(String),
    #[error("validation error: unknown {kind} `{id}`")]
    UnknownIdentifier { kind: &'static str, id: String },
    #[error("card has not been validated")]
    Unvalidated,

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            EmptySource | MissingColumn(_) | MalformedHeader(_) | DuplicateOrder { .. }
            | InvalidValue { .. } | Malformed(_) | Csv(_) => ErrorKind::Ingestion,
            InvalidParameter(_) | UnknownConversation(_) => ErrorKind::Configuration,
            MissingField(_) | UnknownIdentifier { .. } | Unvalidated | Json(_) => {
                ErrorKind::Validation
            }
            SpaceTooLarge { .. } => ErrorKind::Capacity,
            Io(_) => ErrorKind::Io,
            DegenerateSplit { .. } | Excluded { .. } | UndefinedScore(_) | SampleTooSmall(_)
            | DegenerateVariance | SingleClass | EmptyInput(_) | MismatchedCorpora => {
                ErrorKind::Computation
            }
        }
    }
}
