//! Rhythmicity tests: the Wald statistic on the harmonic coefficients, the
//! weighted F statistic, batch screening of expression panels, and the
//! closed-form Wald precision block for von Mises distributed sample times.

use alloc::string::String;
use alloc::vec::Vec;

use crate::basis::HarmonicOrder;
use crate::design::Weights;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::regression::{fit_variance, FitVariance, PreparedDesign, TrigFit};
use crate::special::{bessel_i, chi2_sf, f_sf};

/// Sums of squares below `(ZERO_SCALE · max|y|)²` are treated as exactly zero.
const ZERO_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldTest {
    pub stat: f64,
    pub df: u32,
    pub p: f64,
}

/// `τ_W = N γ̂ᵀ [Var_γγ]⁻¹ γ̂` with `γ = (θ₁, …, θ₂ₖ)` and `Var = σ̂² M⁻¹`,
/// referred to χ² with `2K` degrees of freedom.
pub fn wald_test(fit: &TrigFit, variance: &FitVariance) -> Result<WaldTest> {
    let p = fit.k.dim();
    if variance.v.dim() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            got: variance.v.dim(),
        });
    }
    let idx: Vec<usize> = (1..p).collect();
    let block = variance.v.submatrix(&idx);
    let chol = Cholesky::new(&block)
        .map_err(|_| Error::DegenerateDesign("harmonic variance block is singular"))?;
    let stat = fit.n as f64 * chol.inverse_quadratic_form(fit.gamma_hat());
    let df = 2 * fit.k.get() as u32;
    Ok(WaldTest {
        stat,
        df,
        p: chi2_sf(stat.max(0.0), df)?,
    })
}

/// `N γᵀ P γ` for a precision block `P = [Var_γγ]⁻¹` given directly.
pub fn wald_from_precision(gamma: &[f64], precision: &Matrix, n: usize) -> Result<f64> {
    if precision.dim() != gamma.len() {
        return Err(Error::LengthMismatch {
            expected: gamma.len(),
            got: precision.dim(),
        });
    }
    let pg = precision.mul_vec(gamma);
    Ok(n as f64 * gamma.iter().zip(&pg).map(|(a, b)| a * b).sum::<f64>())
}

/// Which F statistic to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FMode {
    /// Total weighted sum of squares in the denominator, `d1 = 2K − 1`.
    #[default]
    Paper,
    /// Textbook regression F: residual mean square denominator, `d1 = 2K`.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTest {
    pub stat: f64,
    pub d1: u32,
    pub d2: u32,
    pub p: f64,
    /// The denominator vanished; `stat` is reported as 0 and `p` as 1.
    pub undefined: bool,
}

/// Weighted F statistic with `ȳ_w = Σ wⱼ yⱼ`:
///
/// ```text
/// paper:      [(1/2K) Σ wᵢ{(yᵢ − ȳ_w)² − rᵢ²}] / [(1/(N−2K−1)) Σ wᵢ (yᵢ − ȳ_w)²]
/// classical:  [(1/2K) Σ wᵢ{(yᵢ − ȳ_w)² − rᵢ²}] / [(1/(N−2K−1)) Σ wᵢ rᵢ²]
/// ```
///
/// Paper mode is referred to `F(2K − 1, N − 2K − 1)`, classical mode to
/// `F(2K, N − 2K − 1)`.
pub fn f_test(y: &[f64], fit: &TrigFit, mode: FMode) -> Result<FTest> {
    let n = fit.n;
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let k2 = 2 * fit.k.get();
    if n <= k2 + 1 {
        return Err(Error::InsufficientData {
            needed: k2 + 1,
            got: n,
        });
    }
    let w = fit.weights.as_slice();
    let ybar: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let mut total = 0.0;
    let mut resid = 0.0;
    for ((&wi, &yi), &ri) in w.iter().zip(y).zip(&fit.residuals) {
        total += wi * (yi - ybar) * (yi - ybar);
        resid += wi * ri * ri;
    }
    let d2 = (n - k2 - 1) as u32;
    let numerator = (total - resid).max(0.0) / k2 as f64;
    let (den_sum, d1) = match mode {
        FMode::Paper => (total, k2 as u32 - 1),
        FMode::Classical => (resid, k2 as u32),
    };
    let zero = zero_threshold(y);
    let total_is_zero = total <= zero;
    if total_is_zero || d1 == 0 {
        return Ok(FTest {
            stat: 0.0,
            d1,
            d2,
            p: 1.0,
            undefined: true,
        });
    }
    if den_sum <= zero {
        // classical mode on a perfect fit
        return Ok(FTest {
            stat: f64::INFINITY,
            d1,
            d2,
            p: 0.0,
            undefined: false,
        });
    }
    let stat = numerator / (den_sum / d2 as f64);
    Ok(FTest {
        stat,
        d1,
        d2,
        p: f_sf(stat, d1, d2)?,
        undefined: false,
    })
}

fn zero_threshold(y: &[f64]) -> f64 {
    let scale = y
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let s = ZERO_SCALE * scale;
    s * s
}

/// Closed-form `[Var_γγ]⁻¹` (unit noise variance, `K = 1`) for sample angles
/// distributed von Mises with mean 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselVarianceOracle {
    pub kappa: f64,
    pub matrix: Matrix,
}

/// The oracle at concentration 1.
pub fn bessel_variance_oracle() -> BesselVarianceOracle {
    bessel_variance_oracle_for(1.0).expect("concentration 1 is valid")
}

/// `diag(½ − I₂/(2I₀), ½ + I₂/(2I₀) − I₁²/I₀²)` evaluated at `kappa`.
///
/// The off-diagonal terms vanish because `sin z` and `sin z cos z` are odd and
/// the density is symmetric about zero.
pub fn bessel_variance_oracle_for(kappa: f64) -> Result<BesselVarianceOracle> {
    let i0 = bessel_i(0, kappa)?;
    let i1 = bessel_i(1, kappa)?;
    let i2 = bessel_i(2, kappa)?;
    let ratio2 = i2 / (2.0 * i0);
    let ratio1 = i1 / i0;
    Ok(BesselVarianceOracle {
        kappa,
        matrix: Matrix::from_diag(&[0.5 - ratio2, 0.5 + ratio2 - ratio1 * ratio1]),
    })
}

/// Expression values for `G` genes sampled at common times.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub times: Vec<f64>,
    pub gene_ids: Vec<String>,
    /// One row of `N` values per gene.
    pub expr: Vec<Vec<f64>>,
}

impl Panel {
    pub fn new(times: Vec<f64>, gene_ids: Vec<String>, expr: Vec<Vec<f64>>) -> Result<Self> {
        if gene_ids.len() != expr.len() {
            return Err(Error::LengthMismatch {
                expected: gene_ids.len(),
                got: expr.len(),
            });
        }
        if let Some(row) = expr.iter().find(|r| r.len() != times.len()) {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: row.len(),
            });
        }
        Ok(Self {
            times,
            gene_ids,
            expr,
        })
    }

    pub fn num_samples(&self) -> usize {
        self.times.len()
    }

    pub fn num_genes(&self) -> usize {
        self.gene_ids.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReportFlag {
    /// The F denominator is zero (constant response).
    UndefinedF,
    /// `σ̂² = 0`; the Wald statistic is 0 when `γ̂ = 0` and infinite otherwise.
    ZeroVariance,
    /// Fitting failed; statistics are NaN.
    FitFailed(Error),
}

/// Wald and F results for one gene.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub gene_id: String,
    pub wald_stat: f64,
    pub wald_df: u32,
    pub wald_p: f64,
    pub f_stat: f64,
    pub f_df: (u32, u32),
    pub f_p: f64,
    pub flags: Vec<ReportFlag>,
}

impl TestReport {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    fn failed(gene_id: &str, k: HarmonicOrder, n: usize, err: Error) -> Self {
        let k2 = 2 * k.get() as u32;
        Self {
            gene_id: gene_id.into(),
            wald_stat: f64::NAN,
            wald_df: k2,
            wald_p: f64::NAN,
            f_stat: f64::NAN,
            f_df: (
                k2.saturating_sub(1),
                n.saturating_sub(k2 as usize + 1) as u32,
            ),
            f_p: f64::NAN,
            flags: alloc::vec![ReportFlag::FitFailed(err)],
        }
    }
}

/// Fits one gene on a prepared design and computes both statistics.
pub fn screen_gene(design: &PreparedDesign, gene_id: &str, y: &[f64], mode: FMode) -> TestReport {
    match screen_gene_inner(design, gene_id, y, mode) {
        Ok(r) => r,
        Err(e) => TestReport::failed(gene_id, design.order(), design.n(), e),
    }
}

fn screen_gene_inner(
    design: &PreparedDesign,
    gene_id: &str,
    y: &[f64],
    mode: FMode,
) -> Result<TestReport> {
    let fit = design.fit(y)?;
    let mut flags = Vec::new();
    let zero = zero_threshold(y);
    let wald = if fit.sigma2_hat <= zero {
        flags.push(ReportFlag::ZeroVariance);
        let g2: f64 = fit.gamma_hat().iter().map(|g| g * g).sum();
        if g2 <= zero {
            WaldTest {
                stat: 0.0,
                df: 2 * fit.k.get() as u32,
                p: 1.0,
            }
        } else {
            WaldTest {
                stat: f64::INFINITY,
                df: 2 * fit.k.get() as u32,
                p: 0.0,
            }
        }
    } else {
        wald_test(&fit, &fit_variance(&fit)?)?
    };
    let f = f_test(y, &fit, mode)?;
    if f.undefined {
        flags.push(ReportFlag::UndefinedF);
    }
    Ok(TestReport {
        gene_id: gene_id.into(),
        wald_stat: wald.stat,
        wald_df: wald.df,
        wald_p: wald.p,
        f_stat: f.stat,
        f_df: (f.d1, f.d2),
        f_p: f.p,
        flags,
    })
}

/// Screens every gene of a panel against one shared design factorisation.
///
/// Design-level failures (too few samples, singular information matrix) are
/// returned as errors; per-gene failures become flagged reports.
pub fn screen_panel(
    panel: &Panel,
    weights: &Weights,
    k: HarmonicOrder,
    mode: FMode,
) -> Result<Vec<TestReport>> {
    if panel.num_genes() == 0 {
        return Err(Error::InvalidArgument("panel has no genes"));
    }
    let design = PreparedDesign::new(&panel.times, weights, k)?;
    Ok(panel
        .gene_ids
        .iter()
        .zip(&panel.expr)
        .map(|(id, y)| screen_gene(&design, id, y, mode))
        .collect())
}
