use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("n = {n} exceeds the configured cap {cap} (set GRADEDVB_MAX_N to raise it)")]
    NTooLarge { n: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not an isomorphism: {0}")]
    NotAnIsomorphism(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("extraction mismatch: {0}")]
    ExtractionMismatch(String),
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("projection mismatch: {0}")]
    ProjectionMismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
