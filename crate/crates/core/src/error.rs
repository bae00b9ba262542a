use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown canonicalization version `{0}`")]
    UnknownCanon(String),
    #[error("invalid KDF parameters: {0}")]
    InvalidParams(String),
    #[error("question is empty after canonicalization")]
    EmptyQuestion,
    #[error("answer is empty after canonicalization (abstentions are never hashed)")]
    EmptyAnswer,
    #[error("malformed answer hash `{0}`")]
    MalformedHash(String),
    #[error("malformed entry id `{0}`")]
    MalformedId(String),
    #[error("entry id {found} does not match its question (expected {expected})")]
    IdMismatch { expected: String, found: String },
    #[error("duplicate entry id {0}")]
    DuplicateId(String),
    #[error("unknown entry id {0}")]
    UnknownEntry(String),
    #[error("unsupported format version `{0}`")]
    UnknownFormatVersion(String),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("invalid submission: {0}")]
    InvalidSubmission(String),
    #[error("invalid answer sheet: {0}")]
    InvalidSheet(String),
    #[error("invalid stage plan: {0}")]
    InvalidPlan(String),
    #[error("malformed base64 in `{field}`")]
    MalformedBase64 { field: &'static str },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("protocol step out of order: {0}")]
    OutOfOrder(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("missing answer for entry {0} needed to derive a stage key")]
    MissingUnlockAnswer(String),
    #[error("stage {0} failed authentication")]
    Authentication(u32),
    #[error("invalid filter policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),
    #[error("invalid attack input: {0}")]
    InvalidAttack(String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error("cannot render a report with zero entries")]
    EmptyReport,
    #[error("KDF failure: {0}")]
    Kdf(String),
}
