use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("word {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("context pools overlap on {0:?}")]
    OverlappingPools(String),

    #[error(
        "non-finite value in span {span} (center {center}, target {target}, lr {learning_rate}); \
         the learning rate is probably too high"
    )]
    NumericFailure {
        span: usize,
        center: u32,
        target: u32,
        learning_rate: f32,
    },

    #[error("span {span}: {source}")]
    InSpan {
        span: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn in_span(self, span: usize) -> Self {
        match self {
            e @ Error::InSpan { .. } => e,
            e @ Error::NumericFailure { .. } => e,
            e => Error::InSpan {
                span,
                source: alloc::boxed::Box::new(e),
            },
        }
    }

    /// Strips any [`Error::InSpan`] wrapping.
    pub fn root(&self) -> &Error {
        match self {
            Error::InSpan { source, .. } => source.root(),
            e => e,
        }
    }
}
