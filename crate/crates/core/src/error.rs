use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("window violation: {0}")]
    Window(String),
    #[error("NoStrictMinimizer: tie among {0:?}")]
    NoStrictMinimizer(Vec<usize>),
    #[error("Case3Degenerate: alpha equals delta/d")]
    Case3Degenerate,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn window<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Window(msg.into()))
}
