use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid nucleotide {ch:?} at index {index}")]
    InvalidNucleotide { index: usize, ch: char },
    #[error("empty sequence")]
    EmptySequence,
    #[error("position {0} outside [1, 48]")]
    PositionOutOfRange(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid SRT block")]
    InvalidBlock,
    #[error("invalid SRT sequence")]
    InvalidSequence,
    #[error("k_p = {0} outside [4, 65536]")]
    SourceCountOutOfRange(usize),
    #[error("decode failure: generator rank {rank_achieved} of {needed}")]
    DecodeFailure { rank_achieved: usize, needed: usize },
    #[error("file of {size} bytes exceeds capacity of {capacity} bytes")]
    FileTooLarge { size: usize, capacity: usize },
    #[error("seed space exhausted: accepted {accepted} of {wanted} oligos ({rate:.4} acceptance)")]
    EncodingStalled { accepted: usize, wanted: usize, rate: f64 },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("empty read set")]
    EmptyReadSet,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing ground truth for read {0}")]
    MissingTruth(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
