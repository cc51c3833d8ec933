use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("eigenrelation violated: |H psi - E psi| = {residual:e} exceeds {tolerance:e}")]
    Eigenrelation { residual: f64, tolerance: f64 },
    #[error("evaluation at a wavefunction node (x = {x}, particle {particle:?})")]
    Node { x: f64, particle: Option<usize> },
    #[error("particle {particle} left the grid at t = {t} (x = {x})")]
    DomainEscape { particle: usize, t: f64, x: f64 },
    #[error("time {time} outside trajectory horizon [{start}, {end}]")]
    Horizon { time: f64, start: f64, end: f64 },
    #[error("state occupies level {level} of a {dimension}-level truncation")]
    Truncation { level: usize, dimension: usize },
    #[error("internal consistency violated: deviation {deviation:e} exceeds {tolerance:e}")]
    Consistency { deviation: f64, tolerance: f64 },
}
