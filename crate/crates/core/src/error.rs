use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("line count mismatch: source has {source_lines} lines, target has {target_lines}")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },
    #[error("empty {side} line {line}")]
    EmptyLine { side: &'static str, line: usize },
    #[error("malformed alignment link `{0}`")]
    MalformedLink(String),
    #[error("alignment link ({src}, {tgt}) out of range for lengths ({src_len}, {tgt_len})")]
    LinkOutOfRange {
        src: usize,
        tgt: usize,
        src_len: usize,
        tgt_len: usize,
    },
    #[error("sentence {0} has no alignment")]
    MissingAlignment(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("program is not boundary-valid for lengths ({src_len}, {tgt_len})")]
    InvalidProgram { src_len: usize, tgt_len: usize },
    #[error("unknown action symbol `{0}`")]
    BadActionSymbol(char),
    #[error("wait-k requires k >= 1")]
    ZeroWaitK,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("program does not read full source")]
    IncompleteRead,
    #[error("empty hypothesis set")]
    EmptyHypotheses,
    #[error("invalid policy distribution: {0}")]
    InvalidDistribution(String),
    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },
    #[error("bundle: {0}")]
    Bundle(String),
}
