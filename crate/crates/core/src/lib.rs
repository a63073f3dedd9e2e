//! Constructive regularization of unary languages.
//!
//! A language over the one-letter alphabet `{a}` is a set of word lengths.
//! When such a language admits pumping splits (every long enough length `l`
//! breaks into `l = p + q` with the whole progression `p + i*q` staying in
//! the language), it is regular, and this crate builds the witnesses: from a
//! context-free grammar (or a membership oracle plus a user-supplied split
//! function) it derives pump splits, runs the tuple generation descent,
//! realizes the collected tuples as small automata, and emits a verified
//! minimal DFA, a regular expression and a semilinear description of the
//! language.
//!
//! ```
//! use unareg::grammar::UnaryGrammar;
//! use unareg::pipeline::{regularize_grammar, Config};
//!
//! let g = UnaryGrammar::parse("S -> a S a | a").unwrap();
//! let cfg = Config { b_override: Some(3), ..Config::default() };
//! let result = regularize_grammar(&g, &cfg).unwrap();
//! assert_eq!(result.regex, "a(aa)*");
//! assert!(result.verification.mismatches.is_empty());
//! ```
//!
//! Modules:
//!
//! * [`grammar`]: unary CFGs, Chomsky normal form, the bounded length
//!   oracle, parse trees and pump splits derived from them.
//! * [`pumping`]: pumping witnesses, the tuple generation descent, the
//!   finite tuple family, and the bounded pumping-property checker.
//! * [`automata`]: weighted unary NFAs, lasso-form DFAs, eventually
//!   periodic sets and regular expression output.
//! * [`semilinear`]: linear and semilinear sets, and the exact conversion
//!   of one-dimensional linear sets to eventually periodic sets.
//! * [`pipeline`]: the end-to-end construction with soundness filtering
//!   and oracle verification.

pub mod automata;
pub mod error;
pub mod grammar;
pub mod lengths;
pub mod pipeline;
pub mod pumping;
pub mod semilinear;

pub use error::{Error, Result};
