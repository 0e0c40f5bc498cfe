//! Closed-form non-constant solutions for the kernel `Φ(x) = 2cos(2πx)`.
//!
//! With `u = c + v` and `v = Σ V_m cos(2πmx)`, the equation
//! `a u_xx + (u Φ∗u_x)_x = 0` reduces mode by mode to
//!
//! ```text
//! V_2 = 2(a + c),                       m = 1
//! V_{m-1} - V_{m+1} = -(2ma/V_1) V_m,   m >= 2
//! ```
//!
//! which is solved by `V_m = -(az/I_1(z)) I_m(z)` for any real `z ≠ 0`,
//! with `c = -a(z I_2(z)/(2 I_1(z)) + 1)`. The free parameter `z` traces a
//! curve of solutions through the constant state `c = -a` at `z = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bessel::{self, BesselError};
use crate::kernel::{KernelSpectrum, EQ_TOL};
use crate::spectral::{self, CosineSeries, SpectralError};

/// Smallest `|I_1(z)|` accepted as a normalization.
pub const MIN_NORMALIZATION: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplicitError {
    #[error("z must be a nonzero real number (z ∈ ℝ∖{{0}} is the free parameter)")]
    ZeroParameter,
    #[error("z must be finite, got {0}")]
    NonFiniteParameter(f64),
    #[error("a must be positive and finite, got {0}")]
    InvalidDiffusion(f64),
    #[error("truncation order must be at least {min}, got {got}")]
    Order { got: usize, min: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("|I_1(z)| = {0:e} is too small to normalize by")]
    SingularNormalization(f64),
    #[error("kernel is not 2cos(2πx): {0}")]
    KernelMismatch(String),
    #[error("check order {check} is below the member order {order}")]
    CheckOrder { check: usize, order: usize },
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// One member of the closed-form family, truncated at order `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitFamilyMember {
    pub a: f64,
    pub z: f64,
    #[serde(rename = "M")]
    pub order: usize,
    /// Constant part of `u`.
    pub c: f64,
    pub coeffs: CosineSeries,
    /// `V_1 = -az`.
    pub amplitude: f64,
    /// Upper bound on `Σ_{m>M} |V_m|`.
    pub tail_certificate: f64,
    /// Per-coefficient Bessel tolerance used in construction.
    pub bessel_tolerance: f64,
}

/// Builds the member at parameter `z` with coefficients `V_1..V_M`. Each
/// Bessel value is computed to `tol / M` so the coefficient errors sum to
/// at most `tol` (before scaling by `az/I_1`).
pub fn construct(
    a: f64,
    z: f64,
    order: usize,
    tol: f64,
) -> Result<ExplicitFamilyMember, ExplicitError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(ExplicitError::InvalidDiffusion(a));
    }
    if !z.is_finite() {
        return Err(ExplicitError::NonFiniteParameter(z));
    }
    if z == 0.0 {
        return Err(ExplicitError::ZeroParameter);
    }
    if order < 2 {
        return Err(ExplicitError::Order { got: order, min: 2 });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(ExplicitError::InvalidTolerance(tol));
    }
    let per_coeff = tol / order as f64;
    let bessel: Vec<f64> = (1..=order as u32)
        .map(|m| bessel::bessel_i(m, z, per_coeff).map(|e| e.value))
        .collect::<Result<_, _>>()?;
    let i1 = bessel[0];
    let i2 = bessel[1];
    if i1.is_nan() || i1.abs() < MIN_NORMALIZATION {
        return Err(ExplicitError::SingularNormalization(i1));
    }
    let scale = -a * z / i1;
    let coeffs: Vec<f64> = bessel.iter().map(|im| scale * im).collect();
    let c = -a * (z * i2 / (2.0 * i1) + 1.0);

    let tail_certificate =
        (a * z.abs() / i1.abs()) * (0.25 * z * z).exp() * exponential_tail(0.5 * z.abs(), order);

    Ok(ExplicitFamilyMember {
        a,
        z,
        order,
        c,
        amplitude: -a * z,
        coeffs: CosineSeries::new(coeffs)?,
        tail_certificate,
        bessel_tolerance: per_coeff,
    })
}

/// [`construct`], after confirming `kernel` is `2cos(2πx)`.
pub fn construct_for_kernel(
    a: f64,
    z: f64,
    order: usize,
    tol: f64,
    kernel: &KernelSpectrum,
) -> Result<ExplicitFamilyMember, ExplicitError> {
    check_two_cosine(kernel)?;
    construct(a, z, order, tol)
}

fn check_two_cosine(kernel: &KernelSpectrum) -> Result<(), ExplicitError> {
    if kernel.dim() != 1 {
        return Err(ExplicitError::KernelMismatch(format!(
            "dimension {} instead of 1",
            kernel.dim()
        )));
    }
    for (k, v) in kernel.entries() {
        let m = k.components()[0];
        let expected = if m == 1 { 1.0 } else { 0.0 };
        if (v - expected).abs() > EQ_TOL {
            return Err(ExplicitError::KernelMismatch(format!(
                "Φ̂({m}) = {v}, expected {expected}"
            )));
        }
    }
    if (kernel.mode(1) - 1.0).abs() > EQ_TOL {
        return Err(ExplicitError::KernelMismatch("Φ̂(1) is missing".into()));
    }
    Ok(())
}

/// `Σ_{m>order} x^m/m!`, bounded above by summing until the term ratio
/// `x/(m+1)` drops below one and closing with a geometric tail.
fn exponential_tail(x: f64, order: usize) -> f64 {
    let mut term = 1.0;
    for k in 1..=order + 1 {
        term *= x / k as f64;
    }
    let mut acc = 0.0;
    let mut m = order + 1;
    loop {
        acc += term;
        let ratio = x / (m + 1) as f64;
        if ratio < 1.0 {
            return acc + term * ratio / (1.0 - ratio);
        }
        term *= ratio;
        m += 1;
    }
}

impl ExplicitFamilyMember {
    pub fn kernel(&self) -> KernelSpectrum {
        KernelSpectrum::two_cosine()
    }

    /// `u(x) = c + v(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.c + self.coeffs.evaluate(x)
    }

    /// Entry 0 is `|V_2 - 2(a+c)|`; entry `m-1` for `2 <= m <= M-1` is
    /// `|V_{m-1} - V_{m+1} + (2ma/V_1) V_m|`.
    pub fn recurrence_defect(&self) -> Vec<f64> {
        recurrence_defect(self)
    }

    pub fn full_equation_residual(&self, m_check: usize) -> Result<ResidualReport, ExplicitError> {
        full_equation_residual(self, m_check)
    }
}

pub fn recurrence_defect(member: &ExplicitFamilyMember) -> Vec<f64> {
    let v = &member.coeffs;
    let a = member.a;
    let v1 = v.coeff(1);
    let mut out = Vec::with_capacity(member.order.saturating_sub(1));
    out.push((v.coeff(2) - 2.0 * (a + member.c)).abs());
    for m in 2..member.order {
        let mf = m as f64;
        out.push((v.coeff(m - 1) - v.coeff(m + 1) + 2.0 * mf * a / v1 * v.coeff(m)).abs());
    }
    out
}

/// Residual of `a u_xx + (u Φ∗u_x)_x` for a member, mode by mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// ℓ² over modes `1..=m_check`.
    pub l2: f64,
    /// Residual coefficient of `cos(2πmx)` at index `m-1`.
    pub per_mode: Vec<f64>,
    /// ℓ² over modes `1..=M`, where the recurrence holds and only rounding
    /// (plus the small mode-`M` coupling) remains.
    pub interior_l2: f64,
    /// ℓ² over modes `M+1..=m_check`, produced purely by truncating the series.
    pub spill_l2: f64,
    /// `K` with truncation part `<= K · coefficient_decay_bound(M, z)`.
    pub coupling_constant: f64,
    pub truncation_bound: f64,
}

pub fn full_equation_residual(
    member: &ExplicitFamilyMember,
    m_check: usize,
) -> Result<ResidualReport, ExplicitError> {
    if m_check < member.order {
        return Err(ExplicitError::CheckOrder {
            check: m_check,
            order: member.order,
        });
    }
    let residual = equation_residual(
        member.a,
        member.c,
        &member.coeffs,
        &member.kernel(),
        m_check,
    )?;
    let order = member.order;
    let l2_of = |range: std::ops::RangeInclusive<usize>| {
        range.map(|m| residual.coeff(m).powi(2)).sum::<f64>().sqrt()
    };

    let m = order as f64;
    let x = 0.5 * member.z.abs();
    let v1 = member.amplitude.abs();
    let norm = member.a * member.z.abs()
        / bessel::bessel_i(1, member.z, member.bessel_tolerance)?
            .value
            .abs();
    let coupling_constant = 2.0 * PI * PI * v1 * norm * ((m + 1.0) + m * x / (m + 1.0));
    let truncation_bound =
        coupling_constant * bessel::coefficient_decay_bound(order as u32, member.z);

    Ok(ResidualReport {
        l2: residual.l2(),
        interior_l2: l2_of(1..=order),
        spill_l2: l2_of(order + 1..=m_check),
        per_mode: residual.into_coeffs(),
        coupling_constant,
        truncation_bound,
    })
}

/// `a v_xx + ∇·((c + v)(Φ∗∇v))` on modes `1..=m_check`, for `u = c + v`.
pub fn equation_residual(
    a: f64,
    c: f64,
    v: &CosineSeries,
    kernel: &KernelSpectrum,
    m_check: usize,
) -> Result<CosineSeries, SpectralError> {
    let diffusion = v.derivative2().resized(m_check);
    let drift = spectral::nonlinear_drift_term(c, v, kernel, m_check)?;
    Ok(diffusion.combine(a, &drift.series, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub z: f64,
    pub amplitude: f64,
    pub c: f64,
}

/// `(z, -az, c(z))` along the family.
pub fn family_curve(
    a: f64,
    z_values: &[f64],
    order: usize,
    tol: f64,
) -> Result<Vec<FamilyPoint>, ExplicitError> {
    z_values
        .iter()
        .map(|&z| {
            construct(a, z, order, tol).map(|m| FamilyPoint {
                z,
                amplitude: m.amplitude,
                c: m.c,
            })
        })
        .collect()
}
