use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("graph contains a circuit of positive weight")]
    PositiveCircuit,
    #[error("{lambda} is below the maximum cycle mean")]
    BelowMaxCycleMean { lambda: Rational },
    #[error("critical graph is empty")]
    EmptyCriticalGraph,
    #[error("matrix has no finite eigenvalue")]
    NoFiniteEigenvalue,
    #[error("oracle refuses n = {n} (limit {limit})")]
    OracleTooLarge { n: usize, limit: usize },
    #[error("roots inconsistent with the characteristic polynomial: {0}")]
    InconsistentRoots(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}
