//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported sample rate {0} Hz (supported: 16000, 32000, 44100, 48000)")]
    UnsupportedSampleRate(u32),

    #[error("audio too short: {got} samples, need at least {need}")]
    AudioTooShort { got: usize, need: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right} ({what})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("unknown feature '{0}'")]
    UnknownFeature(String),

    #[error("feature names do not match the trained model (expected {expected} columns starting with '{first_expected}', got {got})")]
    FeatureNameMismatch {
        expected: usize,
        first_expected: String,
        got: usize,
    },

    #[error("parameter out of range: {what} = {got}, allowed {allowed}")]
    ParamOutOfRange {
        what: &'static str,
        got: String,
        allowed: &'static str,
    },

    #[error("class {class} has {got} samples, need at least {need}")]
    TooFewClassSamples { class: u8, got: usize, need: usize },

    #[error("labels contain a single class only")]
    SingleClass,

    #[error("fold {0} is missing one of the classes")]
    FoldMissingClass(usize),

    #[error("label segment [{start}, {end}) exceeds audio duration {duration}")]
    SegmentOutOfRange {
        start: f64,
        end: f64,
        duration: f64,
    },

    #[error("line {line}: {msg}")]
    LabelParse { line: usize, msg: String },

    #[error("malformed {format} data: {msg}")]
    Format { format: &'static str, msg: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input data rather than internal failures.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Numeric(_))
    }
}
