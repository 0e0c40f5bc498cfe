//! Kernel input files.
//!
//! A kernel file is a JSON document in one of two forms. Both carry a
//! `schema` tag so the format can evolve:
//!
//! ```json
//! { "schema": "nlbif-kernel/1", "dim": 1, "lattice_radius": 2,
//!   "coefficients": [ [[1], 1.0], [[2], 0.5] ] }
//! ```
//!
//! lists `Φ̂(k)` for one representative of each `±k` pair (listing both is
//! allowed if the values agree; unlisted modes are zero), and
//!
//! ```json
//! { "schema": "nlbif-kernel/1", "dim": 1, "grid_size": 8,
//!   "samples": [2.0, 1.414, 0.0, -1.414, -2.0, -1.414, 0.0, 1.414] }
//! ```
//!
//! gives `Φ(j/N)` on a uniform grid, from which the coefficients are
//! recovered by a discrete transform.

use std::path::Path;

use nonlocal_bifurcation::kernel::KernelError;
use nonlocal_bifurcation::{KernelSpectrum, LatticePoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA: &str = "nlbif-kernel/1";

#[derive(Debug, Error)]
pub enum KernelFileError {
    #[error("cannot read kernel file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unsupported schema {found:?} (expected {SCHEMA:?})")]
    Schema { path: String, found: String },
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error("{path}: {source}")]
    Kernel { path: String, source: KernelError },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernelFile {
    schema: String,
    dim: usize,
    lattice_radius: Option<u32>,
    coefficients: Option<Vec<(Vec<i64>, f64)>>,
    grid_size: Option<usize>,
    samples: Option<Vec<f64>>,
}

/// How the spectrum was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum KernelSource {
    Coefficients,
    Samples {
        grid_size: usize,
        evenness_defect: f64,
        sampled_l2_norm: f64,
    },
}

#[derive(Debug, Clone)]
pub struct LoadedKernel {
    pub spectrum: KernelSpectrum,
    pub source: KernelSource,
}

pub fn load(path: &Path) -> Result<LoadedKernel, KernelFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| KernelFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, path: &str) -> Result<LoadedKernel, KernelFileError> {
    let raw: RawKernelFile = serde_json::from_str(text).map_err(|e| KernelFileError::Syntax {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    if raw.schema != SCHEMA {
        return Err(KernelFileError::Schema {
            path: path.to_owned(),
            found: raw.schema,
        });
    }
    let shape = |message: String| KernelFileError::Shape {
        path: path.to_owned(),
        message,
    };
    let kernel_err = |source| KernelFileError::Kernel {
        path: path.to_owned(),
        source,
    };

    match (raw.coefficients, raw.samples) {
        (Some(coefficients), None) => {
            if raw.grid_size.is_some() {
                return Err(shape("grid_size only applies to the sampled form".into()));
            }
            let radius = raw
                .lattice_radius
                .ok_or_else(|| shape("missing field `lattice_radius`".into()))?;
            let entries = coefficients
                .into_iter()
                .map(|(k, v)| (LatticePoint::new(k), v));
            let spectrum = KernelSpectrum::new(raw.dim, radius, entries).map_err(kernel_err)?;
            Ok(LoadedKernel {
                spectrum,
                source: KernelSource::Coefficients,
            })
        }
        (None, Some(samples)) => {
            if raw.dim != 1 {
                return Err(shape(format!(
                    "sampled kernels must have dim 1, got {}",
                    raw.dim
                )));
            }
            if raw.lattice_radius.is_some() {
                return Err(shape(
                    "lattice_radius is implied by grid_size in the sampled form".into(),
                ));
            }
            let grid_size = raw
                .grid_size
                .ok_or_else(|| shape("missing field `grid_size`".into()))?;
            if grid_size != samples.len() {
                return Err(shape(format!(
                    "grid_size is {grid_size} but {} samples were given",
                    samples.len()
                )));
            }
            let sampled = KernelSpectrum::from_samples(&samples).map_err(kernel_err)?;
            Ok(LoadedKernel {
                spectrum: sampled.spectrum,
                source: KernelSource::Samples {
                    grid_size,
                    evenness_defect: sampled.evenness_defect,
                    sampled_l2_norm: sampled.sampled_l2_norm,
                },
            })
        }
        (Some(_), Some(_)) => Err(shape(
            "give either `coefficients` or `samples`, not both".into(),
        )),
        (None, None) => Err(shape(
            "expected a `coefficients` list or a `samples` list".into(),
        )),
    }
}

// serde_json appends " at line X column Y"; the position is reported separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(idx) => message[..idx].to_owned(),
        None => message.to_owned(),
    }
}

/// Canonical JSON for a spectrum, in the coefficient form of the file schema.
pub fn canonical_json(spectrum: &KernelSpectrum) -> serde_json::Value {
    let coefficients: Vec<_> = spectrum
        .entries()
        .map(|(k, v)| serde_json::json!([k.components(), v]))
        .collect();
    serde_json::json!({
        "schema": SCHEMA,
        "dim": spectrum.dim(),
        "lattice_radius": spectrum.lattice_radius(),
        "coefficients": coefficients,
    })
}
