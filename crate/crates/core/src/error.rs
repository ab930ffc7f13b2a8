use crate::lp::LpError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("degree of {what} is unbounded: value variables are not covered by the relation")]
    UnguardedDegree { what: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("partition of an empty table")]
    EmptyInput,
    #[error("universe of {vars} variables exceeds the limit of {limit}")]
    UniverseTooLarge { vars: usize, limit: usize },
    #[error("no finite bound exists for the requested targets")]
    Unbounded,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("statistics term {0} has no guarding input relation")]
    UnguardedConstraint(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("no case of the engine applies to {0}; the witness identity is corrupt")]
    NoApplicableCase(String),
    #[error("engine invariant violated: {0}")]
    InvariantViolated(String),
    #[error("reset emptied the output set")]
    EmptyOutputSet,
    #[error("leaf is not terminal")]
    NonTerminalLeaf,
    #[error("tree decomposition is not free-connex: {0}")]
    NotFreeConnex(String),
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("atoms {0} and {1} have the same variable set")]
    DuplicateAtomVarSet(String, String),
    #[error("head variable `{0}` does not occur in the body")]
    HeadVarNotInBody(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("constraint on `{0}` is not guarded: {1}")]
    NonGuardedConstraint(String, String),
    #[error("missing data file {0}")]
    MissingFile(String),
    #[error("header mismatch in {file}: expected {expected}, found {found}")]
    HeaderMismatch { file: String, expected: String, found: String },
    #[error("oracle cap exceeded: {0}")]
    OracleCap(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<LpError> for Error {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Infeasible { .. } => Error::Infeasible,
            LpError::Unbounded => Error::Unbounded,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
