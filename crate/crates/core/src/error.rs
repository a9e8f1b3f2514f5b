use crate::model::Group;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{field} must be a probability in [0, 1], got {value}")]
    InvalidProbability { field: &'static str, value: f64 },

    #[error("invalid model parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("group {0} has no users")]
    EmptyGroup(Group),

    #[error("group {group} has zero total {weight}; ratio is undefined")]
    ZeroMass { group: Group, weight: &'static str },

    #[error("allocation has {got} decisions but population has {expected} users")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),

    #[error("population of {n} users exceeds the enumeration cap of {cap}")]
    PopulationTooLarge { n: usize, cap: usize },

    #[error("no binary allocation satisfies the active constraints within tolerance {tolerance}")]
    NoFeasibleBinary { tolerance: f64 },

    #[error("constraint system is infeasible")]
    Infeasible,

    #[error("solver residual {residual:e} exceeds {limit:e}")]
    NumericalFailure { residual: f64, limit: f64 },

    #[error("simplex did not converge within {0} iterations")]
    IterationLimit(usize),

    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("invalid contingency table: {0}")]
    InvalidTable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown {kind} '{value}'")]
    Unknown { kind: &'static str, value: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
