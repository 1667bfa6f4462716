use thiserror::Error;

/// Rejected inputs: bad grids, parameters, or integrator settings.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("grid too small: boundary mass {mass:.3e} exceeds {limit:.1e}")]
    BoundaryMass { mass: f64, limit: f64 },

    #[error("time step {dt:.4e} exceeds the stability bound {bound:.4e} (margin included)")]
    Stability { dt: f64, bound: f64 },

    #[error("momentum range ±{p_max} exceeds the sampling limit ±{limit:.4}")]
    Nyquist { p_max: f64, limit: f64 },

    #[error("coefficient must be constant in time for {0}")]
    NotConstant(&'static str),

    #[error("argument {0} outside the supported range")]
    OutOfRange(f64),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}

/// Why an accepted run was stopped part-way.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunAbort {
    #[error("trace drifted to {trace:.9} at t = {time:.4}")]
    TraceDrift { trace: f64, time: f64 },

    #[error("boundary mass reached {mass:.3e} at t = {time:.4}")]
    BoundaryMass { mass: f64, time: f64 },

    #[error("non-finite state at t = {time:.4}")]
    NonFinite { time: f64 },
}
