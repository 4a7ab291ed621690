//! Weighted least squares fits of the order-`K` model and their variance
//! estimates.
//!
//! With weights `w` the estimate solves `(Σ wᵢ fᵢ fᵢᵀ) θ = Σ wᵢ fᵢ yᵢ` and the
//! noise variance is
//! `σ̂²_w = N / ((N − 2K − 1) Σ wⱼ) · Σ wᵢ (yᵢ − θ̂ᵀ fᵢ)²`,
//! which for `wᵢ = 1/N` is the usual residual mean square. The parameter
//! covariance used for Wald tests is `σ̂² W⁻¹`, a per-observation quantity:
//! test statistics multiply by `N`.

use alloc::vec::Vec;

use crate::basis::{design_matrix, HarmonicOrder};
use crate::design::{information_matrix_from_rows, InformationMatrix, WeightVector, Weights};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

/// Information matrices with a larger eigenvalue ratio are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigFit {
    pub theta_hat: Vec<f64>,
    pub sigma2_hat: f64,
    pub info: InformationMatrix,
    pub weights: WeightVector,
    pub residuals: Vec<f64>,
    pub n: usize,
    pub k: HarmonicOrder,
}

impl TrigFit {
    /// Harmonic coefficients `(θ₁, …, θ₂ₖ)`.
    pub fn gamma_hat(&self) -> &[f64] {
        &self.theta_hat[1..]
    }
}

/// `σ̂² M⁻¹` for a fit with information matrix `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitVariance {
    pub v: Matrix,
}

/// Sample times, weights and the factorised information matrix, shared by
/// every response fitted on the same design.
#[derive(Debug, Clone)]
pub struct PreparedDesign {
    k: HarmonicOrder,
    n: usize,
    rows: Vec<f64>,
    weights: WeightVector,
    uniform: bool,
    weight_total: f64,
    info: InformationMatrix,
    chol: Cholesky,
}

impl PreparedDesign {
    pub fn new(times: &[f64], weights: &Weights, k: HarmonicOrder) -> Result<Self> {
        let n = times.len();
        let p = k.dim();
        if n <= p {
            return Err(Error::InsufficientData { needed: p, got: n });
        }
        let weight_vec = weights.to_vector(n)?;
        let rows = design_matrix(times, k)?;
        let info = information_matrix_from_rows(&rows, n, weights, p)?;
        let ev = info.m.symmetric_eigenvalues();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if !(lo > 0.0) || hi / lo > MAX_CONDITION {
            return Err(Error::DegenerateDesign("information matrix is singular"));
        }
        let chol = Cholesky::new(&info.m)?;
        Ok(Self {
            k,
            n,
            rows,
            weight_total: weight_vec.iter().sum(),
            weights: weight_vec,
            uniform: !weights.is_weighted(),
            info,
            chol,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> HarmonicOrder {
        self.k
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn info(&self) -> &InformationMatrix {
        &self.info
    }

    /// Basis row `f(xᵢ)`.
    pub fn basis_row(&self, i: usize) -> &[f64] {
        let p = self.k.dim();
        &self.rows[i * p..(i + 1) * p]
    }

    pub fn fit(&self, y: &[f64]) -> Result<TrigFit> {
        if y.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("responses must be finite"));
        }
        let p = self.k.dim();
        let mut rhs = alloc::vec![0.0; p];
        if self.uniform {
            for (row, &yi) in self.rows.chunks_exact(p).zip(y) {
                rhs.iter_mut().zip(row).for_each(|(r, f)| *r += f * yi);
            }
            let inv_n = 1.0 / self.n as f64;
            rhs.iter_mut().for_each(|r| *r *= inv_n);
        } else {
            for ((row, &yi), &wi) in self.rows.chunks_exact(p).zip(y).zip(self.weights.iter()) {
                rhs.iter_mut().zip(row).for_each(|(r, f)| *r += wi * f * yi);
            }
            if self.weight_total != 1.0 {
                rhs.iter_mut().for_each(|r| *r /= self.weight_total);
            }
        }
        let theta_hat = self.chol.solve(&rhs);
        let residuals: Vec<f64> = self
            .rows
            .chunks_exact(p)
            .zip(y)
            .map(|(row, &yi)| yi - row.iter().zip(&theta_hat).map(|(f, t)| f * t).sum::<f64>())
            .collect();
        let dof = (self.n - p) as f64;
        let sigma2_hat = if self.uniform {
            residuals.iter().map(|r| r * r).sum::<f64>() / dof
        } else {
            let wss: f64 = residuals
                .iter()
                .zip(self.weights.iter())
                .map(|(r, w)| w * r * r)
                .sum();
            self.n as f64 / (dof * self.weight_total) * wss
        };
        Ok(TrigFit {
            theta_hat,
            sigma2_hat,
            info: self.info.clone(),
            weights: self.weights.clone(),
            residuals,
            n: self.n,
            k: self.k,
        })
    }
}

/// Fits the order-`K` model to one response vector.
pub fn fit(times: &[f64], y: &[f64], weights: &Weights, k: HarmonicOrder) -> Result<TrigFit> {
    if times.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            got: y.len(),
        });
    }
    PreparedDesign::new(times, weights, k)?.fit(y)
}

pub fn fit_variance(fit: &TrigFit) -> Result<FitVariance> {
    let chol = Cholesky::new(&fit.info.m)?;
    let mut v = chol.inverse();
    v.scale(fit.sigma2_hat);
    Ok(FitVariance { v })
}
