use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    Dimension { left: usize, right: usize },

    /// A precondition of an operation was violated by its caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("syntax error on line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("{}", semantic_message(.line, .msg))]
    Semantic { line: Option<usize>, msg: String },

    /// The requested postselection cannot succeed on any branch.
    #[error("postselection has probability zero (record {record})")]
    ProbabilityZero { record: String },

    /// The postselection failed on this particular run; a retry may succeed.
    #[error("postselection missed on record {record}")]
    PostselectionMiss { record: String },

    /// A static evaluation needed the value of an outcome that is only known at run time.
    #[error("outcome of record {record} is not known statically")]
    Unresolved { record: String },

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("backend failure: {0}")]
    Backend(String),
}

fn semantic_message(line: &Option<usize>, msg: &str) -> String {
    match line {
        Some(l) => format!("semantic error on line {l}: {msg}"),
        None => format!("semantic error: {msg}"),
    }
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn semantic(msg: impl Into<String>) -> Self {
        Error::Semantic { line: None, msg: msg.into() }
    }
}
