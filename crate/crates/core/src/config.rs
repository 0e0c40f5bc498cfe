use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("truncation order must be at least 2, got {0}")]
    Truncation(usize),
    #[error("newton_tol must be positive, got {0}")]
    NewtonTol(f64),
    #[error("newton_max_iter must be positive")]
    NewtonMaxIter,
    #[error("fd_step must be positive, got {0}")]
    FdStep(f64),
    #[error("sobolev_index must be nonnegative, got {0}")]
    SobolevIndex(f64),
}

/// Numerical settings shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Number of cosine modes `M`.
    pub truncation: usize,
    /// Newton stops once the ℓ² residual is at or below this.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Step for finite-difference Jacobian checks.
    pub fd_step: f64,
    /// Index `s` of the `H^s` norm used in reports.
    pub sobolev_index: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            truncation: 32,
            newton_tol: 1e-11,
            newton_max_iter: 25,
            fd_step: 1e-6,
            sobolev_index: 1.0,
        }
    }
}

impl SolveConfig {
    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.truncation < 2 {
            return Err(ConfigError::Truncation(self.truncation));
        }
        if self.newton_tol.is_nan() || self.newton_tol <= 0.0 {
            return Err(ConfigError::NewtonTol(self.newton_tol));
        }
        if self.newton_max_iter == 0 {
            return Err(ConfigError::NewtonMaxIter);
        }
        if self.fd_step.is_nan() || self.fd_step <= 0.0 {
            return Err(ConfigError::FdStep(self.fd_step));
        }
        if self.sobolev_index.is_nan() || self.sobolev_index < 0.0 {
            return Err(ConfigError::SobolevIndex(self.sobolev_index));
        }
        Ok(())
    }
}
