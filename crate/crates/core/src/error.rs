use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty table")]
    EmptyTable,
    #[error("infeasible marginals: row1={row1}, col1={col1}, total={total}")]
    InfeasibleMarginals { total: u64, row1: u64, col1: u64 },
    /// A test needs every expected count to be positive.
    #[error("degenerate table: a marginal total is zero")]
    DegenerateTable,
    #[error("t-statistic undefined: n11 = 0")]
    TUndefined,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("special function failed to converge: {0}")]
    NoConvergence(&'static str),
    #[error("no observations of '{0}' in the required position")]
    NoObservations(String),
    #[error("invalid UTF-8 at byte offset {offset}")]
    Ingestion { offset: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
