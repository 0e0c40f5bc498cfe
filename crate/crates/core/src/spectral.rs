//! Truncated cosine series on the 1-periodic torus.
//!
//! A [`CosineSeries`] of order `M` stores `V_1..V_M` and represents
//! `v(x) = Σ V_m cos(2πmx)`. The mean mode is always zero. All products
//! are formed exactly in coefficient space with
//! `cos(nx)sin(qx) = ½[sin((n+q)x) + sin((q-n)x)]`, so there is no aliasing;
//! modes above the requested output order are dropped and their ℓ² mass is
//! reported as a truncation residual.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::KernelSpectrum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("cosine series needs at least one coefficient")]
    Empty,
    #[error("coefficient V_{0} is not finite")]
    NonFinite(usize),
    #[error("spectral operations need a one-dimensional kernel, got dimension {0}")]
    KernelDimension(usize),
    #[error("output order must be positive")]
    ZeroOutputOrder,
}

/// Even, zero-mean function stored as `V_1..V_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CosineSeries {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for CosineSeries {
    type Error = SpectralError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(coeffs)
    }
}

impl From<CosineSeries> for Vec<f64> {
    fn from(s: CosineSeries) -> Self {
        s.coeffs
    }
}

impl CosineSeries {
    /// `coeffs[m-1]` is the coefficient of `cos(2πmx)`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, SpectralError> {
        if coeffs.is_empty() {
            return Err(SpectralError::Empty);
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(SpectralError::NonFinite(i + 1));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order.max(1)],
        }
    }

    /// `cos(2π·mode·x)` as a series of the given order.
    pub fn unit(order: usize, mode: usize) -> Self {
        let mut s = Self::zeros(order.max(mode));
        s.coeffs[mode - 1] = 1.0;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `V_m`, zero for `m = 0` and `m > M`.
    pub fn coeff(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.coeffs.get(m - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn set_coeff(&mut self, m: usize, value: f64) {
        self.coeffs[m - 1] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Zero-padded or truncated copy with the given order.
    pub fn resized(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order.max(1), 0.0);
        Self { coeffs }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }

    /// `α·self + β·other`, with order `max` of the two.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let order = self.order().max(other.order());
        Self {
            coeffs: (1..=order)
                .map(|m| alpha * self.coeff(m) + beta * other.coeff(m))
                .collect(),
        }
    }

    /// Coefficient-space ℓ² norm.
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| v * (2.0 * PI * (i + 1) as f64 * x).cos())
            .sum()
    }

    /// `v_xx`: coefficient `m` becomes `-(2πm)² V_m`.
    pub fn derivative2(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, v)| -(2.0 * PI * (i + 1) as f64).powi(2) * v)
                .collect(),
        }
    }

    /// `Φ∗v`: coefficient `m` becomes `Φ̂(m) V_m`.
    pub fn convolve(&self, kernel: &KernelSpectrum) -> Result<Self, SpectralError> {
        check_kernel(kernel)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, v)| kernel.mode(i + 1) * v)
                .collect(),
        })
    }

    /// `‖v‖_{H^s} = (Σ (1 + (2πm)²)^s V_m²/2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| (1.0 + (2.0 * PI * (i + 1) as f64).powi(2)).powf(s) * v * v * 0.5)
            .sum::<f64>()
            .sqrt()
    }
}

/// A truncated quadratic term and the ℓ² mass of what was cut off.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftTerm {
    pub series: CosineSeries,
    pub truncation_residual: f64,
}

/// `A w = ∇·(Φ∗∇w)`, diagonal with entries `-(2πm)²Φ̂(m)`.
pub fn linear_drift(
    w: &CosineSeries,
    kernel: &KernelSpectrum,
    m_out: usize,
) -> Result<CosineSeries, SpectralError> {
    check_kernel(kernel)?;
    if m_out == 0 {
        return Err(SpectralError::ZeroOutputOrder);
    }
    Ok(CosineSeries {
        coeffs: (1..=m_out)
            .map(|m| -(2.0 * PI * m as f64).powi(2) * kernel.mode(m) * w.coeff(m))
            .collect(),
    })
}

/// `B(v, w) = ∇·(v (Φ∗∇w))` up to mode `m_out`.
pub fn bilinear_drift(
    v: &CosineSeries,
    w: &CosineSeries,
    kernel: &KernelSpectrum,
    m_out: usize,
) -> Result<DriftTerm, SpectralError> {
    check_kernel(kernel)?;
    if m_out == 0 {
        return Err(SpectralError::ZeroOutputOrder);
    }
    // Φ∗w_x = Σ g_q sin(2πqx)
    let g: Vec<f64> = (1..=w.order())
        .map(|q| -2.0 * PI * q as f64 * kernel.mode(q) * w.coeff(q))
        .collect();

    // sine coefficients of v·(Φ∗w_x), indices 0..=M_v+M_w
    let full = v.order() + w.order();
    let mut product = vec![0.0; full + 1];
    for (ni, &vn) in v.coeffs().iter().enumerate() {
        if vn == 0.0 {
            continue;
        }
        let n = ni + 1;
        for (qi, &gq) in g.iter().enumerate() {
            if gq == 0.0 {
                continue;
            }
            let q = qi + 1;
            let half = 0.5 * vn * gq;
            product[n + q] += half;
            if q > n {
                product[q - n] += half;
            } else if n > q {
                product[n - q] -= half;
            }
        }
    }

    let derivative = |p: usize| 2.0 * PI * p as f64 * product.get(p).copied().unwrap_or(0.0);
    let coeffs = (1..=m_out).map(derivative).collect();
    let truncation_residual = ((m_out + 1)..=full)
        .map(|p| derivative(p).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(DriftTerm {
        series: CosineSeries { coeffs },
        truncation_residual,
    })
}

/// `∇·((c + v)(Φ∗∇v)) = c·A v + B(v, v)` up to mode `m_out`.
pub fn nonlinear_drift_term(
    c: f64,
    v: &CosineSeries,
    kernel: &KernelSpectrum,
    m_out: usize,
) -> Result<DriftTerm, SpectralError> {
    let quadratic = bilinear_drift(v, v, kernel, m_out)?;
    let linear = linear_drift(v, kernel, m_out)?;
    Ok(DriftTerm {
        series: quadratic.series.combine(1.0, &linear, c),
        truncation_residual: quadratic.truncation_residual,
    })
}

fn check_kernel(kernel: &KernelSpectrum) -> Result<(), SpectralError> {
    if kernel.dim() == 1 {
        Ok(())
    } else {
        Err(SpectralError::KernelDimension(kernel.dim()))
    }
}
