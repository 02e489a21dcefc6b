use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),
    #[error("hypergeometric series diverges at z = 1 (c - a - b = {0} <= 0)")]
    Divergent(f64),
    #[error("series did not converge within {0} terms")]
    NoConvergence(usize),
    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("kernel singularity: {0}")]
    Singularity(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("mass mismatch: source {source_mass}, target {target_mass}")]
    MassMismatch { source_mass: f64, target_mass: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("support collapsed to {cells} cell(s) after {iterations} iterations")]
    Collapse { cells: usize, iterations: usize },
    #[error("no convergence after {iterations} iterations (last change {change:e})")]
    NotConverged { iterations: usize, change: f64 },
    #[error("time stepping unstable: {0}")]
    Instability(String),
    #[error("t_max reached at t = {time} with L1 rate {rate:e}")]
    Timeout { time: f64, rate: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
