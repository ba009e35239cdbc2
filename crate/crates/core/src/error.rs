use std::path::PathBuf;

/// Errors produced by the solvers, generators and file readers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("triangle {index} is degenerate (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("field has {got} nodal values, surface has {expected} vertices")]
    FieldLength { expected: usize, got: usize },

    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {diff:e}")]
    Asymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix diagonal entry {row} is not positive ({value:e})")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("singular matrix in dense elimination at column {0}")]
    SingularMatrix(usize),

    #[error("row {row} is not strictly diagonally dominant (|d| = {diag:e}, off-diagonal sum = {off:e})")]
    NotDiagonallyDominant { row: usize, diag: f64, off: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("grid index {index} is out of range for this difference quotient")]
    IndexOutOfRange { index: isize },

    #[error("segment {index} has vanishing length")]
    DegenerateSegment { index: usize },

    #[error("node {index} touches the rotation axis (x1 = {x1:e})")]
    AxisCollision { index: usize, x1: f64 },

    #[error("tangents at node {index} are antipodal (cusp)")]
    Cusp { index: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("time {t} lies outside the existence interval of the exact solution (vanishes at {t_max})")]
    OutsideExistence { t: f64, t_max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
