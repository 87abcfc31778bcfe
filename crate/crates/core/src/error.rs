use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation budget of {budget} exhausted")]
    BudgetExhausted { budget: usize },

    #[error("non-finite value returned by {what} at x = {x:?}")]
    NonFiniteValue { what: String, x: Vec<f64> },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown solver label `{0}`")]
    UnknownSolver(String),

    #[error("invalid problem definition: {0}")]
    InvalidProblem(String),

    #[error("start point violates the linear constraints or bounds: {0}")]
    InfeasibleStart(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("multiplier estimate undefined: {0}")]
    DomainError(String),

    #[error("linear constraint row {0} is zero")]
    ZeroRow(usize),

    #[error("epsilon-active constraint rows are linearly dependent")]
    DegenerateActiveSet,

    #[error("interpolation system is numerically singular (condition estimate {0:e})")]
    PoisingFailure(f64),

    #[error("need at least {needed} sample points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid bracket: f_M = {f_m} < f_L = {f_l}")]
    InvalidBracket { f_m: f64, f_l: f64 },

    #[error("run ({problem}, {solver}) appears more than once")]
    DuplicateRun { problem: String, solver: String },

    #[error("profile table is empty")]
    EmptyTable,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by user input (bad names, bad files, infeasible
    /// starts) rather than by a defect in the library.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_) | Error::NonFiniteValue { .. })
    }
}
