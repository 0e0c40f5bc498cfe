//! Interaction-kernel spectra and the linear analysis built on them.
//!
//! A kernel is stored through its Fourier coefficients on a finite lattice
//! `|k|∞ ≤ R` of `Z^d`. The kernel is even and real, so only one
//! representative of each pair `{k, -k}` is kept: the one whose first
//! nonzero component is positive. Modes inside the lattice that are not
//! stored have coefficient zero.
//!
//! On top of the spectrum this module answers the questions that precede
//! any nonlinear computation: where the linearization about a constant
//! state loses invertibility, whether the non-degeneracy hypothesis holds
//! there, and whether the linear problem has non-constant solutions.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{self, CosineSeries};

/// Absolute tolerance for comparing kernel coefficients.
pub const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel dimension must be positive")]
    ZeroDimension,
    #[error("lattice point {point} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        point: LatticePoint,
        got: usize,
        expected: usize,
    },
    #[error("lattice point {point} lies outside the lattice radius {radius}")]
    OutsideLattice { point: LatticePoint, radius: u32 },
    #[error("coefficient at {0} is not finite")]
    NonFinite(LatticePoint),
    #[error("mode {point} given twice with different values ({first} and {second})")]
    ConflictingEntry {
        point: LatticePoint,
        first: f64,
        second: f64,
    },
    #[error("sampled kernels need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("kernel samples must be finite")]
    NonFiniteSample,
    #[error("parameter a must be positive and finite, got {0}")]
    InvalidDiffusion(f64),
    #[error("L2 norm must be nonnegative and finite, got {0}")]
    InvalidNorm(f64),
    #[error("transversality check requires a one-dimensional kernel (got dimension {0})")]
    UnsupportedDimension(usize),
}

/// A point of the integer lattice `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(components: Vec<i64>) -> Self {
        Self(components)
    }

    pub fn one_dim(m: i64) -> Self {
        Self(vec![m])
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&c| (c as f64) * (c as f64)).sum()
    }

    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// The representative of `{k, -k}` whose first nonzero component is positive.
    pub fn canonical(&self) -> Self {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) if c < 0 => self.negated(),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Fourier coefficients `k ↦ Φ̂(k)` of an even, real kernel on `T^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSpectrum {
    dim: usize,
    lattice_radius: u32,
    entries: BTreeMap<LatticePoint, f64>,
    l2_norm: f64,
}

impl KernelSpectrum {
    /// Builds a spectrum from `(k, Φ̂(k))` pairs. Either member of a `±k`
    /// pair may be given; giving both is accepted only if the values agree.
    pub fn new<I>(dim: usize, lattice_radius: u32, entries: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = (LatticePoint, f64)>,
    {
        if dim == 0 {
            return Err(KernelError::ZeroDimension);
        }
        let mut map = BTreeMap::new();
        for (point, value) in entries {
            if point.dim() != dim {
                return Err(KernelError::DimensionMismatch {
                    got: point.dim(),
                    expected: dim,
                    point,
                });
            }
            if point.sup_norm() > u64::from(lattice_radius) {
                return Err(KernelError::OutsideLattice {
                    point,
                    radius: lattice_radius,
                });
            }
            if !value.is_finite() {
                return Err(KernelError::NonFinite(point));
            }
            let key = point.canonical();
            if let Some(&prev) = map.get(&key) {
                if prev != value {
                    return Err(KernelError::ConflictingEntry {
                        point: key,
                        first: prev,
                        second: value,
                    });
                }
            }
            map.insert(key, value);
        }
        let mut spectrum = Self {
            dim,
            lattice_radius,
            entries: map,
            l2_norm: 0.0,
        };
        spectrum.l2_norm = spectrum.parseval_norm();
        Ok(spectrum)
    }

    /// One-dimensional spectrum from `(m, Φ̂(m))` pairs.
    pub fn one_dim(lattice_radius: u32, modes: &[(i64, f64)]) -> Result<Self, KernelError> {
        Self::new(
            1,
            lattice_radius,
            modes.iter().map(|&(m, v)| (LatticePoint::one_dim(m), v)),
        )
    }

    /// `Φ(x) = 2cos(2πx)`: `Φ̂(±1) = 1` and every other coefficient zero.
    pub fn two_cosine() -> Self {
        Self::one_dim(1, &[(1, 1.0)]).expect("static kernel is valid")
    }

    pub fn zero(dim: usize, lattice_radius: u32) -> Result<Self, KernelError> {
        Self::new(dim, lattice_radius, std::iter::empty())
    }

    /// Recovers a 1-D spectrum from `N` uniform samples `Φ(j/N)`.
    ///
    /// Coefficients come from the discrete transform with the 1-periodic
    /// convention `Φ̂(k) = (1/N) Σ Φ(x_j) e^{-2πik x_j}`. Evenness is
    /// enforced by averaging `k` and `-k`; the largest discarded odd or
    /// imaginary part is returned as the evenness defect.
    pub fn from_samples(samples: &[f64]) -> Result<SampledKernel, KernelError> {
        let n = samples.len();
        if n < 3 {
            return Err(KernelError::TooFewSamples(n));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(KernelError::NonFiniteSample);
        }
        let mut buffer: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
        let scale = 1.0 / n as f64;
        let coeff = |k: usize| buffer[k % n] * scale;

        let radius = (n - 1) / 2;
        let mut defect: f64 = 0.0;
        let mut modes = Vec::with_capacity(radius + 1);
        for k in 0..=radius {
            let plus = coeff(k);
            let minus = coeff((n - k) % n);
            let sym = 0.5 * (plus + minus);
            defect = defect.max((plus - minus).norm() * 0.5).max(sym.im.abs());
            if sym.re != 0.0 {
                modes.push((k as i64, sym.re));
            }
        }
        let spectrum = Self::one_dim(radius as u32, &modes)?;
        let sampled_l2 = (samples.iter().map(|s| s * s).sum::<f64>() * scale).sqrt();
        Ok(SampledKernel {
            spectrum,
            evenness_defect: defect,
            sampled_l2_norm: sampled_l2,
        })
    }

    /// Overrides the computed `‖Φ‖_{L²}` with a supplied value.
    pub fn with_l2_norm(mut self, l2_norm: f64) -> Result<Self, KernelError> {
        if !(l2_norm.is_finite() && l2_norm >= 0.0) {
            return Err(KernelError::InvalidNorm(l2_norm));
        }
        self.l2_norm = l2_norm;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice_radius(&self) -> u32 {
        self.lattice_radius
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// `(Σ_k |Φ̂(k)|²)^{1/2}` over the represented lattice, counting `±k`.
    pub fn parseval_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(k, v)| if k.is_zero() { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    /// Stored `(canonical k, Φ̂(k))` pairs in lattice order.
    pub fn entries(&self) -> impl Iterator<Item = (&LatticePoint, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    /// Number of stored representatives.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every nonzero mode has zero coefficient, i.e. `Φ` is constant.
    pub fn is_constant(&self) -> bool {
        self.entries
            .iter()
            .all(|(k, v)| k.is_zero() || v.abs() <= EQ_TOL)
    }

    pub fn is_represented(&self, k: &LatticePoint) -> bool {
        k.dim() == self.dim && k.sup_norm() <= u64::from(self.lattice_radius)
    }

    /// `Φ̂(k)`, zero for absent or unrepresented modes.
    pub fn coefficient(&self, k: &LatticePoint) -> f64 {
        if k.dim() != self.dim {
            return 0.0;
        }
        self.entries.get(&k.canonical()).copied().unwrap_or(0.0)
    }

    /// `Φ̂(m)` of a one-dimensional kernel.
    pub fn mode(&self, m: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.entries
            .get(&LatticePoint::one_dim(m as i64))
            .copied()
            .unwrap_or(0.0)
    }

    /// Whether some nonzero-sign coefficient is negative somewhere in the
    /// stored spectrum. Reported, never enforced.
    pub fn has_negative_coefficient(&self) -> bool {
        self.entries.values().any(|&v| v < 0.0)
    }
}

/// Result of sample-based kernel ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    pub spectrum: KernelSpectrum,
    pub evenness_defect: f64,
    pub sampled_l2_norm: f64,
}

/// Value of the linearized symbol together with a lattice flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierEval {
    pub value: f64,
    /// `k` lies outside the represented lattice, so `Φ̂(k)` was read as zero.
    pub outside_lattice: bool,
}

/// Symbol `m(k) = -(2π)²|k|²(a + cΦ̂(k))` of `h ↦ aΔh + c∇·(Φ∗∇h)`.
pub fn multiplier(
    k: &LatticePoint,
    a: f64,
    c: f64,
    kernel: &KernelSpectrum,
) -> Result<MultiplierEval, KernelError> {
    check_diffusion(a)?;
    if k.dim() != kernel.dim() {
        return Err(KernelError::DimensionMismatch {
            point: k.clone(),
            got: k.dim(),
            expected: kernel.dim(),
        });
    }
    let outside = !kernel.is_represented(k);
    let phi = if outside { 0.0 } else { kernel.coefficient(k) };
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(MultiplierEval {
        value: -two_pi * two_pi * k.norm_sq() * (a + c * phi),
        outside_lattice: outside,
    })
}

/// Outcome of the non-degeneracy check at one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisVerdict {
    pub nonzero: bool,
    pub separated: bool,
    pub violating_modes: Vec<ModeGap>,
}

impl HypothesisVerdict {
    pub fn holds(&self) -> bool {
        self.nonzero && self.separated
    }
}

/// A mode whose coefficient matches the candidate's within [`EQ_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeGap {
    pub k: LatticePoint,
    /// `Φ̂(k) - Φ̂(k0)`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationCandidate {
    pub k0: LatticePoint,
    pub c0: f64,
    pub phi_k0: f64,
    pub hypothesis: HypothesisVerdict,
    /// Even-subspace modes whose multiplier vanishes at `c0`.
    pub kernel_dim: usize,
    /// Radius of the lattice the verdict was checked on.
    pub lattice_radius: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub candidates: Vec<BifurcationCandidate>,
    pub diagnostics: Vec<String>,
}

pub const CONSTANT_KERNEL_DIAGNOSTIC: &str =
    "constant kernel: no nonzero Fourier mode, uniqueness argument inapplicable";

/// Lists every mode where a non-constant branch can leave the constant
/// solutions, i.e. every stored `k0 ≠ 0` with `Φ̂(k0) ≠ 0`, at
/// `c0 = -a/Φ̂(k0)`.
pub fn detect_bifurcations(
    a: f64,
    kernel: &KernelSpectrum,
) -> Result<DetectionReport, KernelError> {
    check_diffusion(a)?;
    let mut diagnostics = Vec::new();
    if kernel.is_constant() {
        diagnostics.push(CONSTANT_KERNEL_DIAGNOSTIC.to_string());
        return Ok(DetectionReport {
            candidates: Vec::new(),
            diagnostics,
        });
    }
    if kernel.has_negative_coefficient() {
        diagnostics.push("kernel has negative Fourier coefficients".to_string());
    }

    let candidates = kernel
        .entries()
        .filter(|(k, v)| !k.is_zero() && v.abs() > EQ_TOL)
        .map(|(k0, phi_k0)| {
            let violating_modes: Vec<ModeGap> = kernel
                .entries()
                .filter(|(k, v)| *k != k0 && !k.is_zero() && (v - phi_k0).abs() <= EQ_TOL)
                .map(|(k, v)| ModeGap {
                    k: k.clone(),
                    gap: v - phi_k0,
                })
                .collect();
            BifurcationCandidate {
                k0: k0.clone(),
                c0: -a / phi_k0,
                phi_k0,
                kernel_dim: 1 + violating_modes.len(),
                hypothesis: HypothesisVerdict {
                    nonzero: true,
                    separated: violating_modes.is_empty(),
                    violating_modes,
                },
                lattice_radius: kernel.lattice_radius(),
            }
        })
        .collect();
    Ok(DetectionReport {
        candidates,
        diagnostics,
    })
}

/// Nonzero stored modes with `a + bΦ̂(k) = 0`: the non-constant solutions
/// of the linear problem `∇·(a∇u + b Φ∗∇u) = 0` on the represented lattice.
pub fn linear_nullspace(
    a: f64,
    b: f64,
    kernel: &KernelSpectrum,
) -> Result<Vec<LatticePoint>, KernelError> {
    check_diffusion(a)?;
    if b == 0.0 {
        return Ok(Vec::new());
    }
    Ok(kernel
        .entries()
        .filter(|(k, v)| !k.is_zero() && (a + b * v).abs() <= EQ_TOL)
        .map(|(k, _)| k.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    /// `‖Φ‖_{L²} < a/|b|` (always true for `b = 0`).
    pub energy_criterion: bool,
    /// The linear nullspace is empty on the represented lattice.
    pub spectral_criterion: bool,
    /// `energy ⇒ spectral` was observed to hold.
    pub implication_holds: bool,
    pub l2_norm: f64,
    /// `a/|b|`, infinite when `b = 0`.
    pub energy_threshold: f64,
    pub nullspace: Vec<LatticePoint>,
    pub lattice_radius: u32,
}

pub fn linear_uniqueness_certificate(
    a: f64,
    b: f64,
    kernel: &KernelSpectrum,
) -> Result<UniquenessCertificate, KernelError> {
    let nullspace = linear_nullspace(a, b, kernel)?;
    let threshold = if b == 0.0 { f64::INFINITY } else { a / b.abs() };
    let energy = kernel.l2_norm() < threshold;
    let spectral = nullspace.is_empty();
    Ok(UniquenessCertificate {
        energy_criterion: energy,
        spectral_criterion: spectral,
        implication_holds: !energy || spectral,
        l2_norm: kernel.l2_norm(),
        energy_threshold: threshold,
        nullspace,
        lattice_radius: kernel.lattice_radius(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalityReport {
    /// `-(2π)²|k0|²Φ̂(k0)`: the eigenvalue of `∇·(Φ∗∇·)` on `cos(2πk0·y)`.
    pub prefactor: f64,
    /// Relative defect of the computed action against `prefactor · v0`.
    pub defect: f64,
    pub holds: bool,
}

/// Applies `h ↦ ∇·(Φ∗∇h)` to `v0 = cos(2πk0x)` and compares against the
/// predicted multiple of `v0`. A nonzero prefactor is the transversality
/// condition.
pub fn transversality_check(
    candidate: &BifurcationCandidate,
    a: f64,
    kernel: &KernelSpectrum,
) -> Result<TransversalityReport, KernelError> {
    check_diffusion(a)?;
    if kernel.dim() != 1 || candidate.k0.dim() != 1 {
        return Err(KernelError::UnsupportedDimension(kernel.dim()));
    }
    let k0 = candidate.k0.components()[0].unsigned_abs() as usize;
    let phi = kernel.mode(k0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let prefactor = -(two_pi * k0 as f64).powi(2) * phi;

    let v0 = CosineSeries::unit(k0, k0);
    let applied =
        spectral::linear_drift(&v0, kernel, k0).expect("one-dimensional kernel checked above");
    let scale = prefactor.abs().max(f64::MIN_POSITIVE);
    let defect = applied
        .coeffs()
        .iter()
        .zip(v0.coeffs())
        .map(|(got, basis)| (got - prefactor * basis).powi(2))
        .sum::<f64>()
        .sqrt()
        / scale;
    Ok(TransversalityReport {
        prefactor,
        defect: if phi.abs() > EQ_TOL { defect } else { f64::NAN },
        holds: phi.abs() > EQ_TOL,
    })
}

fn check_diffusion(a: f64) -> Result<(), KernelError> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(KernelError::InvalidDiffusion(a))
    }
}
