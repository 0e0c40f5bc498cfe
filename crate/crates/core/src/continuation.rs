//! Numerical branch tracing for `F(c, v) = aΔv + c A v + B(v, v) = 0`.
//!
//! Here `A v = ∇·(Φ∗∇v)` and `B(v, w) = ∇·(v (Φ∗∇w))`, so `F` is exactly
//! quadratic in `(c, v)`:
//!
//! ```text
//! DF(c,v)[δc,h]                 = aΔh + δc A v + c A h + B(h,v) + B(v,h)
//! D²F[(δc1,h1),(δc2,h2)]        = δc1 A h2 + δc2 A h1 + B(h1,h2) + B(h2,h1)
//! ```
//!
//! Branches are followed by natural continuation in the amplitude
//! `s = V_{k0}`: each point solves the bordered system
//! `{F(c, v) = 0 on modes 1..M, V_{k0} = s}` for `(v, c)` by Newton's
//! method, seeded with the previous point.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, SolveConfig};
use crate::kernel::{BifurcationCandidate, KernelSpectrum};
use crate::spectral::{self, CosineSeries, SpectralError};

/// Relative pivot size below which the bordered Jacobian counts as singular.
pub const PIVOT_TOL: f64 = 1e-13;

/// Extra modes used for the enlarged-residual check on converged points.
pub const ENLARGED_MODES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("constrained mode k0 = {k0} must lie in 1..={order}")]
    ModeOutOfRange { k0: usize, order: usize },
    #[error("branch tracing is one-dimensional; candidate mode has dimension {0}")]
    UnsupportedDimension(usize),
    #[error("a must be positive and finite, got {0}")]
    InvalidDiffusion(f64),
    #[error("s_max must be positive and finite, got {0}")]
    InvalidAmplitude(f64),
    #[error("steps must be positive")]
    ZeroSteps,
    #[error(
        "no branch found at this truncation: first step at s = {s} did not converge ({reason})"
    )]
    NoBranchFound { s: f64, reason: FailureReason },
}

/// `F(c, v)` on modes `1..=m_out`.
pub fn evaluate_f(
    c: f64,
    v: &CosineSeries,
    a: f64,
    kernel: &KernelSpectrum,
    m_out: usize,
) -> Result<CosineSeries, SpectralError> {
    let drift = spectral::nonlinear_drift_term(c, v, kernel, m_out)?;
    Ok(v.derivative2()
        .resized(m_out)
        .combine(a, &drift.series, 1.0))
}

/// `DF(c, v)[δc, h]` on modes `1..=m_out`.
pub fn derivative_action(
    c: f64,
    v: &CosineSeries,
    dc: f64,
    h: &CosineSeries,
    a: f64,
    kernel: &KernelSpectrum,
    m_out: usize,
) -> Result<CosineSeries, SpectralError> {
    let diffusion = h.derivative2().resized(m_out).scaled(a);
    let av = spectral::linear_drift(v, kernel, m_out)?;
    let ah = spectral::linear_drift(h, kernel, m_out)?;
    let bhv = spectral::bilinear_drift(h, v, kernel, m_out)?.series;
    let bvh = spectral::bilinear_drift(v, h, kernel, m_out)?.series;
    Ok(diffusion
        .combine(1.0, &av, dc)
        .combine(1.0, &ah, c)
        .combine(1.0, &bhv, 1.0)
        .combine(1.0, &bvh, 1.0))
}

/// `D²F[(δc1, h1), (δc2, h2)]`; independent of the base point.
pub fn second_derivative_action(
    h1: &CosineSeries,
    h2: &CosineSeries,
    dc1: f64,
    dc2: f64,
    kernel: &KernelSpectrum,
    m_out: usize,
) -> Result<CosineSeries, SpectralError> {
    let ah1 = spectral::linear_drift(h1, kernel, m_out)?;
    let ah2 = spectral::linear_drift(h2, kernel, m_out)?;
    let b12 = spectral::bilinear_drift(h1, h2, kernel, m_out)?.series;
    let b21 = spectral::bilinear_drift(h2, h1, kernel, m_out)?.series;
    Ok(ah2
        .scaled(dc1)
        .combine(1.0, &ah1, dc2)
        .combine(1.0, &b12, 1.0)
        .combine(1.0, &b21, 1.0))
}

/// `DF(c, v)` restricted to the first `M` cosine modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    /// Column `j` is `DF(c,v)[0, cos(2π(j+1)x)]`.
    pub matrix: DMatrix<f64>,
    /// `A v`, the derivative in the `δc` direction.
    pub c_column: DVector<f64>,
}

pub fn assemble_jacobian(
    c: f64,
    v: &CosineSeries,
    a: f64,
    kernel: &KernelSpectrum,
    order: usize,
) -> Result<Jacobian, SpectralError> {
    let v = v.resized(order);
    let mut matrix = DMatrix::zeros(order, order);
    for j in 1..=order {
        let column =
            derivative_action(c, &v, 0.0, &CosineSeries::unit(order, j), a, kernel, order)?;
        matrix.column_mut(j - 1).copy_from_slice(column.coeffs());
    }
    let c_column = DVector::from_vec(spectral::linear_drift(&v, kernel, order)?.into_coeffs());
    Ok(Jacobian { matrix, c_column })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    MaxIterations,
    SingularJacobian,
    NonFinite,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::MaxIterations => "iteration limit reached",
            Self::SingularJacobian => "bordered Jacobian is singular",
            Self::NonFinite => "iterate became non-finite",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    /// The constrained coefficient `V_{k0}`.
    pub amplitude: f64,
    pub c: f64,
    pub solution: CosineSeries,
    pub residual_l2: f64,
    /// `F` evaluated with `M + 8` modes; flags solutions that only exist
    /// because of the truncation.
    pub enlarged_residual_l2: f64,
    pub newton_iters: usize,
    pub converged: bool,
    pub failure: Option<FailureReason>,
    /// Smallest over largest `|U_ii|` of the last bordered LU factorization.
    pub pivot_ratio: f64,
}

/// Newton solve of the bordered system at amplitude `s`, starting from
/// `(guess_c, guess_v)`. The guess's `k0` coefficient is overwritten by `s`.
#[allow(clippy::too_many_arguments)]
pub fn corrector(
    s: f64,
    guess_c: f64,
    guess_v: &CosineSeries,
    a: f64,
    kernel: &KernelSpectrum,
    k0: usize,
    config: &SolveConfig,
) -> Result<BranchPoint, ContinuationError> {
    config.validate()?;
    if !(a.is_finite() && a > 0.0) {
        return Err(ContinuationError::InvalidDiffusion(a));
    }
    let order = config.truncation;
    if k0 == 0 || k0 > order {
        return Err(ContinuationError::ModeOutOfRange { k0, order });
    }
    let mut v = guess_v.resized(order);
    v.set_coeff(k0, s);
    let mut c = guess_c;
    let mut pivot_ratio = f64::NAN;

    let mut iters = 0;
    let failure = loop {
        let residual = evaluate_f(c, &v, a, kernel, order)?;
        let norm = residual.l2();
        if !norm.is_finite() || !c.is_finite() {
            break Some(FailureReason::NonFinite);
        }
        if norm <= config.newton_tol {
            break None;
        }
        if iters == config.newton_max_iter {
            break Some(FailureReason::MaxIterations);
        }

        let jac = assemble_jacobian(c, &v, a, kernel, order)?;
        let mut bordered = DMatrix::zeros(order + 1, order + 1);
        bordered
            .view_mut((0, 0), (order, order))
            .copy_from(&jac.matrix);
        bordered
            .view_mut((0, order), (order, 1))
            .copy_from(&jac.c_column);
        bordered[(order, k0 - 1)] = 1.0;

        let mut rhs = DVector::zeros(order + 1);
        for m in 1..=order {
            rhs[m - 1] = -residual.coeff(m);
        }
        rhs[order] = s - v.coeff(k0);

        let lu = bordered.lu();
        let pivots = lu.u().diagonal().map(f64::abs);
        let (min_pivot, max_pivot) = (pivots.min(), pivots.max());
        pivot_ratio = if max_pivot > 0.0 {
            min_pivot / max_pivot
        } else {
            0.0
        };
        if pivot_ratio.is_nan() || pivot_ratio <= PIVOT_TOL {
            break Some(FailureReason::SingularJacobian);
        }
        let step = match lu.solve(&rhs) {
            Some(step) => step,
            None => break Some(FailureReason::SingularJacobian),
        };
        let mut coeffs = v.into_coeffs();
        for (coef, delta) in coeffs.iter_mut().zip(step.iter()) {
            *coef += delta;
        }
        c += step[order];
        v = match CosineSeries::new(coeffs) {
            Ok(v) => v,
            Err(_) => {
                v = CosineSeries::zeros(order);
                break Some(FailureReason::NonFinite);
            }
        };
        iters += 1;
    };

    let residual_l2 = evaluate_f(c, &v, a, kernel, order)?.l2();
    let enlarged_residual_l2 = evaluate_f(c, &v, a, kernel, order + ENLARGED_MODES)?.l2();
    Ok(BranchPoint {
        amplitude: s,
        c,
        solution: v,
        residual_l2,
        enlarged_residual_l2,
        newton_iters: iters,
        converged: failure.is_none(),
        failure,
        pivot_ratio,
    })
}

/// Inputs recorded alongside a branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: SolveConfig,
    pub s_max: f64,
    pub steps: usize,
    pub c0: f64,
    pub hypothesis_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub k0: usize,
    pub a: f64,
    pub kernel: KernelSpectrum,
    /// Sorted by amplitude.
    pub points: Vec<BranchPoint>,
    pub provenance: Provenance,
    /// Quadratic extrapolation of `c(s)` to `s = 0` from the innermost points.
    pub extrapolated_c0: f64,
    /// Smallest pivot ratio met along the branch.
    pub min_pivot_ratio: f64,
    pub warnings: Vec<String>,
}

impl Branch {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    /// Converged point whose `|s|` is closest to `target`.
    pub fn nearest(&self, target: f64) -> Option<&BranchPoint> {
        self.points.iter().filter(|p| p.converged).min_by(|x, y| {
            (x.amplitude.abs() - target)
                .abs()
                .total_cmp(&(y.amplitude.abs() - target).abs())
        })
    }
}

/// Follows the branch leaving `(c0, 0)` along `cos(2πk0x)` for amplitudes
/// `±s_max·j/steps`, `j = 1..=steps`.
///
/// A candidate failing the non-degeneracy hypothesis is traced anyway with
/// a warning; in that case the kernel of the linearization is larger than
/// one mode and the result is one curve out of several.
pub fn trace_branch(
    a: f64,
    kernel: &KernelSpectrum,
    candidate: &BifurcationCandidate,
    s_max: f64,
    steps: usize,
    config: &SolveConfig,
) -> Result<Branch, ContinuationError> {
    config.validate()?;
    if !(a.is_finite() && a > 0.0) {
        return Err(ContinuationError::InvalidDiffusion(a));
    }
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(ContinuationError::InvalidAmplitude(s_max));
    }
    if steps == 0 {
        return Err(ContinuationError::ZeroSteps);
    }
    if candidate.k0.dim() != 1 {
        return Err(ContinuationError::UnsupportedDimension(candidate.k0.dim()));
    }
    let k0 = candidate.k0.components()[0].unsigned_abs() as usize;
    let order = config.truncation;
    if k0 == 0 || k0 > order {
        return Err(ContinuationError::ModeOutOfRange { k0, order });
    }

    let mut warnings = Vec::new();
    if !candidate.hypothesis.holds() {
        let others: Vec<String> = candidate
            .hypothesis
            .violating_modes
            .iter()
            .map(|g| g.k.to_string())
            .collect();
        warnings.push(format!(
            "hypothesis (H) fails at k0 = {k0}: modes [{}] share Φ̂(k0); tracing one curve of a higher-dimensional solution set",
            others.join(", ")
        ));
    }

    let mut points = Vec::with_capacity(2 * steps);
    for sign in [-1.0, 1.0] {
        let mut prev_c = candidate.c0;
        let mut prev_v = CosineSeries::unit(order, k0).scaled(sign * s_max / steps as f64);
        for j in 1..=steps {
            let s = sign * s_max * j as f64 / steps as f64;
            let point = corrector(s, prev_c, &prev_v, a, kernel, k0, config)?;
            if !point.converged {
                if j == 1 {
                    return Err(ContinuationError::NoBranchFound {
                        s,
                        reason: point.failure.unwrap_or(FailureReason::MaxIterations),
                    });
                }
                warnings.push(format!(
                    "continuation stopped at s = {s}: {}",
                    point.failure.unwrap_or(FailureReason::MaxIterations)
                ));
                points.push(point);
                break;
            }
            prev_c = point.c;
            prev_v = point.solution.clone();
            points.push(point);
        }
    }
    points.sort_by(|x, y| x.amplitude.total_cmp(&y.amplitude));

    let min_pivot_ratio = points
        .iter()
        .map(|p| p.pivot_ratio)
        .filter(|r| r.is_finite())
        .fold(f64::INFINITY, f64::min);
    let extrapolated_c0 = extrapolate_to_zero(&points);

    Ok(Branch {
        k0,
        a,
        kernel: kernel.clone(),
        points,
        provenance: Provenance {
            config: *config,
            s_max,
            steps,
            c0: candidate.c0,
            hypothesis_holds: candidate.hypothesis.holds(),
        },
        extrapolated_c0,
        min_pivot_ratio,
        warnings,
    })
}

/// Value at `s = 0` of the quadratic through the three converged points
/// nearest the origin.
fn extrapolate_to_zero(points: &[BranchPoint]) -> f64 {
    let mut inner: Vec<&BranchPoint> = points.iter().filter(|p| p.converged).collect();
    inner.sort_by(|x, y| x.amplitude.abs().total_cmp(&y.amplitude.abs()));
    inner.truncate(3);
    match inner.len() {
        0 => f64::NAN,
        1 => inner[0].c,
        n => {
            let s: Vec<f64> = inner.iter().map(|p| p.amplitude).collect();
            let mut value = 0.0;
            for i in 0..n {
                let mut weight = 1.0;
                for j in 0..n {
                    if i != j {
                        weight *= s[j] / (s[j] - s[i]);
                    }
                }
                value += weight * inner[i].c;
            }
            value
        }
    }
}
