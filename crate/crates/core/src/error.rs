use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },

    #[error("invalid argument to {op}: {detail}")]
    InvalidArgument { op: &'static str, detail: String },

    #[error("operation {0} has no backward rule")]
    NoBackwardRule(&'static str),

    #[error("backward requires a scalar loss, got shape {0:?}")]
    NotScalar(Vec<usize>),

    #[error("label of length {label_len} (with {repeats} adjacent repeats) cannot align to {frames} frames")]
    InfeasibleLabel {
        label_len: usize,
        repeats: usize,
        frames: usize,
    },

    #[error("CTC input has zero frames")]
    EmptyFrames,

    #[error("label id {id} is out of range for {classes} classes (null is {null})", null = classes - 1)]
    LabelOutOfRange { id: usize, classes: usize },

    #[error("character {0:?} is not in the charset")]
    UnencodableChar(String),

    #[error("text encodes to {0} ids, more than the maximum of 37")]
    TooLong(usize),

    #[error("charset line {line}: {detail}")]
    Charset { line: usize, detail: String },

    #[error("corrupt record {index}: {detail}")]
    CorruptRecord { index: usize, detail: String },

    #[error("bad file header: {0}")]
    BadHeader(String),

    #[error("record {index}: {detail}")]
    Schema { index: usize, detail: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("evaluation set is empty")]
    EmptyEvalSet,

    #[error("split is missing the train subset")]
    MissingTrainSubset,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(op: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidArgument {
            op,
            detail: detail.into(),
        }
    }
}
