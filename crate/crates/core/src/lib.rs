//! Bifurcation analysis for the nonlocal elliptic equation
//! `∇·(a∇u + u Φ∗∇u) = 0` on the flat torus.
//!
//! - [`spectral`]: exact arithmetic on truncated cosine series.
//! - [`bessel`]: `I_m(z)` from its power series with a certified tail.
//! - [`kernel`]: kernel spectra, the linearized symbol, bifurcation-point
//!   detection and the linear uniqueness criteria.
//! - [`explicit`]: the closed-form solution family for `Φ = 2cos(2πx)`.
//! - [`continuation`]: Newton-based tracing of the bifurcating branch.

pub mod bessel;
pub mod config;
pub mod continuation;
pub mod explicit;
pub mod kernel;
pub mod spectral;

pub use config::SolveConfig;
pub use continuation::{Branch, BranchPoint};
pub use explicit::ExplicitFamilyMember;
pub use kernel::{BifurcationCandidate, KernelSpectrum, LatticePoint};
pub use spectral::CosineSeries;
