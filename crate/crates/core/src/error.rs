use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range 1..={order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("deleting {deleted} indices from an order-{order} matrix leaves nothing")]
    EmptyResult { deleted: usize, order: usize },

    #[error("invalid indices: {0}")]
    InvalidIndex(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("order {order} exceeds the limit {max} for this method")]
    OrderTooLarge { order: usize, max: usize },

    #[error("not a symmetrizer: d_{i}*a_{i}{j} != d_{j}*a_{j}{i}")]
    NotASymmetrizer { i: usize, j: usize },

    #[error("matrix is not symmetric (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix is not symmetrizable: {witness}")]
    NotSymmetrizable { witness: serde_json::Value },

    #[error("child order {child} does not match parent order {parent} minus one")]
    OrderMismatch { parent: usize, child: usize },

    #[error("eigenvalue {p} has multiplicity {multiplicity}")]
    MultiplicityTooHigh { p: usize, multiplicity: usize },

    #[error("support pattern has no cycle to break")]
    PatternAcyclic,

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("operation requires the {0} regime")]
    WrongRegime(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
