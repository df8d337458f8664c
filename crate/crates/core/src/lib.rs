//! READ/WRITE programs for simultaneous translation.
//!
//! A program interleaves READ (reveal one more source token) and WRITE (emit
//! one more target token). This crate derives oracle programs from word
//! alignments, scores programs with delay and quality metrics, runs learned
//! or scripted policies in a step-wise simulator, and trains a linear
//! programmer/interpreter pair by imitation with coupled scheduled sampling.

pub mod corpus;
pub mod error;
pub mod imitation;
pub mod metrics;
pub mod oracle;
pub mod program;
pub mod rng;
pub mod simulate;

pub use corpus::{AlignmentSet, SentencePair, SyntheticTask, SyntheticTaskConfig, TokenId, Vocab};
pub use error::{Error, Result};
pub use oracle::{generate_oracle, OracleConfig};
pub use program::{wait_k, Action, Program};
