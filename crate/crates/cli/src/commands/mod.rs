pub mod analyze;
pub mod branch;
pub mod cross;
pub mod explicit;
pub mod verify;

use thiserror::Error;

/// Bad input: a parameter outside its domain, or a file that does not parse.
/// Reported with exit code 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// Outcome of a run that completed: whether every certificate passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

pub fn check_diffusion(a: f64) -> anyhow::Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--a must be positive and finite, got {a}")))
    }
}

pub fn check_modes(modes: usize) -> anyhow::Result<()> {
    if modes >= 2 {
        Ok(())
    } else {
        Err(usage(format!("--modes must be at least 2, got {modes}")))
    }
}

pub fn check_tol(tol: f64) -> anyhow::Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(usage(format!(
            "--tol must be positive and finite, got {tol}"
        )))
    }
}

/// `1 2` for the lattice point `(1, 2)`: safe inside a CSV cell.
pub fn lattice_cell(k: &nonlocal_bifurcation::LatticePoint) -> String {
    k.components()
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}
