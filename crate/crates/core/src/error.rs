use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single reason a candidate tuple is rejected. Indices are 1-based, as in
/// the operator names `T1, T2, …`.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotContraction { index: usize, norm: f64 },
    NotCommuting { i: usize, j: usize, norm: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotContraction { index, norm } => write!(f, "NotContraction({index}, {norm:.3e})"),
            Violation::NotCommuting { i, j, norm } => write!(f, "NotCommuting({i}, {j}, {norm:.3e})"),
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (‖A − A*‖ = {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    IndefiniteMatrix { eigenvalue: f64 },
    #[error("inconsistent system on the defect space (residual {residual:.3e})")]
    InconsistentSystem { residual: f64 },
    #[error("{context}: expected a {rows}×{cols} matrix to be square")]
    NotSquare { context: &'static str, rows: usize, cols: usize },
    #[error("{context}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch { context: &'static str, expected: usize, found: usize },
    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),
    #[error("{context} is not isometric (residual {residual:.3e})")]
    NotIsometric { context: &'static str, residual: f64 },
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("invalid tolerance policy {0}")]
    InvalidTolerance(String),
    #[error("a tuple needs at least two operators, found {0}")]
    TooFewOperators(usize),
    #[error("invalid tuple: {}", join(.0))]
    InvalidTuple(Vec<Violation>),
    #[error("unsupported generator kind '{0}'")]
    UnsupportedKind(String),
    #[error("reducing-subspace leakage in block {block} (norm {norm:.3e})")]
    BlockLeakage { block: usize, norm: f64 },
    #[error("residual of {equation} is {norm:.3e}")]
    ResidualExceeded { equation: String, norm: f64 },
    #[error("pencil numerical radius {0:.12} exceeds 1")]
    NumericalRadiusExceeded(f64),
    #[error("enlargement of the defect sum would be required (dimension gap {gap})")]
    EnlargementRequired { gap: usize },
    #[error("truncation tail {tail:.3e} above tolerance at the degree cap {cap}")]
    TailBoundExceeded { tail: f64, cap: usize },
    #[error("lift is not minimal (dimension gap {gap})")]
    MinimalityFailure { gap: usize },
    #[error("resolvent (I − ζT*) is near-singular (condition {condition:.3e})")]
    NearSingularResolvent { condition: f64 },
    #[error("tuple is not completely non-unitary (unitary part of dimension {0})")]
    NotCompletelyNonUnitary(usize),
    #[error("characteristic function is not purely contractive (‖Θ(0)u‖ = ‖u‖ for a unit vector u, gap {gap:.3e})")]
    NotPurelyContractive { gap: f64 },
    #[error("evaluation point |z| = {0} is not inside the unit disk")]
    OutsideDisk(f64),
    #[error("invalid BCL data: {0}")]
    InvalidBcl(String),
}
