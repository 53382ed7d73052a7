use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("rule {rule} is not applicable: {reason}")]
    NotApplicable { rule: String, reason: String },
    #[error("malformed word: {0}")]
    MalformedWord(String),
    #[error("rule {rule} (position {index} of the history) is not applicable")]
    NotApplicableAt { index: usize, rule: String },
    #[error("unknown rule label `{0}`")]
    UnknownRule(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("rule {0} carries no rule-set tag")]
    UntaggedRule(String),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("tape alphabet is empty")]
    EmptyAlphabet,
    #[error("invalid repetition count m = {0} (need m >= 1)")]
    InvalidM(usize),
    #[error("machine has no input sector")]
    NoInputSector,
    #[error("stage mismatch: {0}")]
    StageMismatch(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("superscript mismatch: {0}")]
    SuperscriptMismatch(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("word contains the q-letter `{0}`")]
    QLetterPresent(String),
    #[error("a first superscript is required for rule {0}")]
    SuperscriptRequired(String),
    #[error("rule {0} admits no superscripts")]
    SuperscriptForbidden(String),
    #[error("history is not eligible at position {0}")]
    IneligibleHistory(usize),
    #[error("empty history")]
    EmptyHistory,
    #[error("witness does not certify accessibility: {0}")]
    WitnessInvalid(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
