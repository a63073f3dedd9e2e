//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by grammar analysis, pumping machinery and the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed grammar or witness text.
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    /// The grammar text contains no rules.
    #[error("grammar has no rules")]
    NoRules,

    /// The start symbol derives no terminal word.
    #[error("the language is empty: start symbol '{start}' is not generating")]
    EmptyLanguage { start: String },

    /// A length that the operation requires to be in the language is not.
    #[error("length {length} is not in the language")]
    NotInLanguage { length: usize },

    /// A pumping operation was asked about a length below the constant in force.
    #[error("length {length} is below the pumping constant {b}")]
    BelowConstant { length: usize, b: usize },

    /// A pumping decomposition violated its contract.
    #[error("pumping decomposition failed at length {length}: {reason}")]
    WitnessViolation { length: usize, reason: String },

    /// Vectors of different dimensions were combined.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A structurally invalid automaton was supplied.
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    /// Inconsistent bounds or flags.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
