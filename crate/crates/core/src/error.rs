use thiserror::Error;

use crate::graph::GraphError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("function is not defined at vertex `{vertex}`")]
    Undefined { vertex: String },
    #[error("function must be positive at vertex `{vertex}`, got {value}")]
    NonPositive { vertex: String, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("ground state is not positive at vertex `{vertex}` (value {value:e})")]
    NotPositive { vertex: String, value: f64 },
    #[error("heat-kernel series needs more than {cap} terms")]
    SeriesTermCap { cap: usize },
    #[error("step size underflow at t = {t} (h = {h:e}, max u = {max_u:e})")]
    StepUnderflow { t: f64, h: f64, max_u: f64 },
    #[error("solution went negative at vertex `{vertex}`, t = {t}: {value:e}")]
    Negative { vertex: String, t: f64, value: f64 },
    #[error("lifespan estimates did not converge over radii {sequence:?}")]
    LifespanNonConvergence { sequence: Vec<(usize, f64)> },
    #[error("ordering violated: {0}")]
    Ordering(String),
    #[error("trajectory too coarse: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
