use thiserror::Error;

/// Errors raised by every computation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("unsupported derivative order {order} (supported: 1..={max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("degenerate metric: {0}")]
    Degenerate(String),
    #[error("fit quality too low: r^2 = {r_squared:.6} over window [{lo:e}, {hi:e}] ({detail})")]
    FitQuality {
        r_squared: f64,
        lo: f64,
        hi: f64,
        detail: String,
    },
    #[error("incomplete sample data: {0}")]
    IncompleteData(String),
    #[error("weight {weight} lies on an indicial wall ({detail})")]
    WeightOnWall { weight: f64, detail: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inadmissible epsilon: {0}")]
    Inadmissible(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("dimension error: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
