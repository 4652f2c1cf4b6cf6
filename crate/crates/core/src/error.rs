use crate::feasibility::FeasibilityError;
use crate::model::Violation;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid election instance: {}", join(.0))]
    InvalidInstance(Vec<Violation>),
    #[error("total budget zero: aggregation undefined")]
    ZeroTotalBudget,
    #[error("degenerate instance: all vote shares undefined")]
    DegenerateElectorate,
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("victory weight {weight} is below the number of candidates {candidates}")]
    VictoryWeightTooSmall { weight: Rational, candidates: usize },
    #[error("oracle needs {required} evaluations, over the budget of {budget}")]
    OracleBudgetExceeded { required: u128, budget: u128 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
