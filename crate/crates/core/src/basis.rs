//! Trigonometric regression functions and the amplitude/phase parameterisation.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::PERIOD_HOURS;

const TAU: f64 = 2.0 * PI;

/// Model order `K`, the number of harmonics. The basis has `2K + 1` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicOrder(usize);

impl HarmonicOrder {
    /// Largest order accepted without [`HarmonicOrder::with_override`].
    pub const DEFAULT_MAX: usize = 3;

    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("harmonic order must be at least 1"));
        }
        if k > Self::DEFAULT_MAX {
            return Err(Error::InvalidArgument(
                "harmonic order above 3 requires an explicit override",
            ));
        }
        Ok(Self(k))
    }

    /// Accepts any order `K >= 1`.
    pub fn with_override(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("harmonic order must be at least 1"));
        }
        Ok(Self(k))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Basis dimension `2K + 1`.
    #[inline]
    pub fn dim(self) -> usize {
        2 * self.0 + 1
    }

    /// Upper bound `1/4^K` on the determinant of any normalised weighted
    /// information matrix.
    pub fn determinant_bound(self) -> f64 {
        libm::pow(0.25, self.0 as f64)
    }
}

/// `f(x) = [1, sin(πx/12), cos(πx/12), …, sin(πKx/12), cos(πKx/12)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector(Vec<f64>);

impl BasisVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for BasisVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Reduces a clock time to `[0, 24)`.
pub fn reduce_hours(x_hours: f64) -> f64 {
    let r = x_hours - PERIOD_HOURS * libm::floor(x_hours / PERIOD_HOURS);
    // floor can leave r == 24 for tiny negative inputs
    if r >= PERIOD_HOURS {
        0.0
    } else {
        r
    }
}

/// Angle `πx/12` in `[0, 2π)` of a clock time.
pub fn hours_to_angle(x_hours: f64) -> f64 {
    reduce_hours(x_hours) * (PI / 12.0)
}

/// Evaluates the regression functions at `x_hours`.
pub fn eval_basis(x_hours: f64, k: HarmonicOrder) -> Result<BasisVector> {
    let mut out = alloc::vec![0.0; k.dim()];
    eval_basis_into(x_hours, k, &mut out)?;
    Ok(BasisVector(out))
}

/// Allocation-free form of [`eval_basis`]; `out` must have length `2K + 1`.
pub fn eval_basis_into(x_hours: f64, k: HarmonicOrder, out: &mut [f64]) -> Result<()> {
    if !x_hours.is_finite() {
        return Err(Error::InvalidArgument("sample time must be finite"));
    }
    if out.len() != k.dim() {
        return Err(Error::LengthMismatch {
            expected: k.dim(),
            got: out.len(),
        });
    }
    let z = hours_to_angle(x_hours);
    out[0] = 1.0;
    for h in 1..=k.get() {
        let (s, c) = libm::sincos(h as f64 * z);
        out[2 * h - 1] = s;
        out[2 * h] = c;
    }
    Ok(())
}

/// Basis rows for a whole time vector, row-major `N × (2K+1)`.
pub fn design_matrix(times: &[f64], k: HarmonicOrder) -> Result<Vec<f64>> {
    let p = k.dim();
    let mut rows = alloc::vec![0.0; times.len() * p];
    for (x, row) in times.iter().zip(rows.chunks_exact_mut(p)) {
        eval_basis_into(*x, k, row)?;
    }
    Ok(rows)
}

/// One harmonic in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    /// Phase shift in `[0, 2π)`.
    pub phase: f64,
}

/// MESOR plus per-harmonic amplitude and phase, with
/// `θ₂ₖ₋₁ = −μₖ sin φₖ` and `θ₂ₖ = μₖ cos φₖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePhase {
    pub mesor: f64,
    pub harmonics: Vec<Harmonic>,
}

impl AmplitudePhase {
    pub fn order(&self) -> usize {
        self.harmonics.len()
    }
}

pub fn theta_to_amplitude_phase(theta: &[f64]) -> Result<AmplitudePhase> {
    if theta.len() < 3 || theta.len() % 2 == 0 {
        return Err(Error::InvalidArgument(
            "parameter vector length must be odd and at least 3",
        ));
    }
    let harmonics = theta[1..]
        .chunks_exact(2)
        .map(|pair| {
            let (s, c) = (pair[0], pair[1]);
            let amplitude = libm::hypot(s, c);
            let phase = if amplitude == 0.0 {
                0.0
            } else {
                wrap_angle(libm::atan2(-s, c))
            };
            Harmonic { amplitude, phase }
        })
        .collect();
    Ok(AmplitudePhase {
        mesor: theta[0],
        harmonics,
    })
}

pub fn amplitude_phase_to_theta(ap: &AmplitudePhase) -> Vec<f64> {
    let mut theta = Vec::with_capacity(2 * ap.harmonics.len() + 1);
    theta.push(ap.mesor);
    for h in &ap.harmonics {
        let (s, c) = libm::sincos(h.phase);
        theta.push(-h.amplitude * s);
        theta.push(h.amplitude * c);
    }
    theta
}

/// Maps an angle onto `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a - TAU * libm::floor(a / TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}
