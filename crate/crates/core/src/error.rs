use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid disorder law: {0}")]
    InvalidLaw(String),
    #[error("invalid disorder index {index} at position {position}")]
    InvalidAssignment { position: usize, index: i64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field is not zero-mean: component {component} has c0 = {c0:e}")]
    NotZeroMean { component: usize, c0: f64 },
    #[error("empty population for disorder index {0}")]
    EmptyPopulation(i32),
    #[error("quadrature did not reach tolerance: estimate {estimate:e}, requested {requested:e}")]
    Quadrature { estimate: f64, requested: f64 },
    #[error("no synchronized solution for K = {k}, delta = {delta}")]
    NoSynchronizedSolution { k: f64, delta: f64 },
    #[error("profile normalization failed: {0}")]
    Normalization(String),
    #[error("linear operator rejected: {0}")]
    Assembly(String),
    #[error("disorder vector is not balanced: sum = {0:e}")]
    Unbalanced(f64),
    #[error("measure lies outside the tube: {0}")]
    OutsideTube(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("Fokker-Planck integration failed: {0}")]
    Pde(String),
    #[error("linear algebra failure: {0}")]
    LinAlg(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
