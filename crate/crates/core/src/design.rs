//! Sample weights, information matrices and design criteria.
//!
//! The weighted information matrix `W = Σ wᵢ f(xᵢ) f(xᵢ)ᵀ` with normalised
//! weights always has unit top-left entry, and Hadamard's inequality applied to
//! each `(sin, cos)` diagonal pair bounds its determinant by `1/4^K`. The bound
//! is attained by equispaced designs, where `W = diag(1, ½, …, ½)`. Choosing the
//! kernel concentration that maximises `det W` therefore drives the reweighted
//! design towards the equispaced one.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;

use crate::basis::{design_matrix, hours_to_angle, HarmonicOrder};
use crate::error::{Error, Result};
use crate::kde::{FoldAssignment, KdeModel};
use crate::linalg::Matrix;
use crate::special::bessel_i_scaled;

/// Densities are floored here before taking reciprocals.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Tolerance on `Σ wᵢ = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Non-negative sample weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates weights that are already normalised.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidArgument("weight vector is empty"));
        }
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "weights must be finite and non-negative",
            ));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidArgument("weights must sum to one"));
        }
        Ok(Self(w))
    }

    /// Rescales non-negative raw weights to sum to one.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "weights must be finite and non-negative",
            ));
        }
        let s: f64 = raw.iter().sum();
        if !(s > 0.0) {
            return Err(Error::DegenerateDesign("weights sum to zero"));
        }
        Ok(Self(raw.iter().map(|x| x / s).collect()))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("weight vector is empty"));
        }
        Ok(Self(alloc::vec![1.0 / n as f64; n]))
    }

    /// Normalised reciprocal densities, `(1/ρᵢ) / Σⱼ (1/ρⱼ)`.
    pub fn from_densities(densities: &[f64]) -> Result<Self> {
        if densities.is_empty() {
            return Err(Error::InvalidArgument("weight vector is empty"));
        }
        let mut floored = Vec::with_capacity(densities.len());
        for &d in densities {
            if d.is_nan() || d < 0.0 {
                return Err(Error::DegenerateDesign("density is negative or undefined"));
            }
            floored.push(d.max(DENSITY_FLOOR));
        }
        // ratios against the smallest density stay in (0, 1], so nothing overflows
        let smallest = floored.iter().copied().fold(f64::INFINITY, f64::min);
        let ratios: Vec<f64> = floored.iter().map(|d| smallest / d).collect();
        let s: f64 = ratios.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::DegenerateDesign(
                "density underflow in weight normalisation",
            ));
        }
        Ok(Self(ratios.into_iter().map(|r| r / s).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Kish effective sample size `1 / Σ wᵢ²`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.0.iter().map(|w| w * w).sum::<f64>()
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Sample weighting used by fits, information matrices and tests.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Weights {
    /// `wᵢ = 1/N`, evaluated as a plain average.
    #[default]
    Uniform,
    Explicit(WeightVector),
}

impl Weights {
    pub fn is_weighted(&self) -> bool {
        matches!(self, Weights::Explicit(_))
    }

    /// Materialised weights for `n` samples.
    pub fn to_vector(&self, n: usize) -> Result<WeightVector> {
        match self {
            Weights::Uniform => WeightVector::uniform(n),
            Weights::Explicit(w) => {
                if w.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: w.len(),
                    });
                }
                Ok(w.clone())
            }
        }
    }
}

/// Reciprocal-density weights from a KDE evaluated at the sample times.
pub fn compute_weights(times: &[f64], kde: &KdeModel) -> Result<WeightVector> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no sample times"));
    }
    let densities: Vec<f64> = times.iter().map(|&t| kde.density(t)).collect();
    WeightVector::from_densities(&densities)
}

/// Weights built from fold-excluded densities: sample `j` uses the KDE fitted
/// without its own fold, and one normaliser is shared across all folds.
pub fn cross_validated_weights(
    times: &[f64],
    kappa: f64,
    folds: &FoldAssignment,
) -> Result<WeightVector> {
    let kde = KdeModel::new(times, kappa)?;
    WeightVector::from_densities(&kde.cross_validated_densities(folds)?)
}

/// Symmetric `(2K+1) × (2K+1)` average of basis outer products.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationMatrix {
    pub m: Matrix,
    pub weighted: bool,
}

impl InformationMatrix {
    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }
}

/// `Σᵢ wᵢ f(xᵢ) f(xᵢ)ᵀ / Σⱼ wⱼ`; uniform weights give `(1/N) Σᵢ f(xᵢ) f(xᵢ)ᵀ`.
pub fn information_matrix(
    times: &[f64],
    weights: &Weights,
    k: HarmonicOrder,
) -> Result<InformationMatrix> {
    let rows = design_matrix(times, k)?;
    information_matrix_from_rows(&rows, times.len(), weights, k.dim())
}

pub(crate) fn information_matrix_from_rows(
    rows: &[f64],
    n: usize,
    weights: &Weights,
    p: usize,
) -> Result<InformationMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("no sample times"));
    }
    let mut m = Matrix::zeros(p);
    match weights {
        Weights::Uniform => {
            for row in rows.chunks_exact(p) {
                m.add_outer(row, 1.0);
            }
            m.scale(1.0 / n as f64);
        }
        Weights::Explicit(w) => {
            if w.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
            for (row, &wi) in rows.chunks_exact(p).zip(w.iter()) {
                m.add_outer(row, wi);
            }
            let total: f64 = w.iter().sum();
            if total != 1.0 {
                m.scale(1.0 / total);
            }
        }
    }
    m.symmetrize();
    Ok(InformationMatrix {
        m,
        weighted: weights.is_weighted(),
    })
}

/// Exponent of a φₚ criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiP {
    /// Largest eigenvalue.
    PlusInfinity,
    /// Smallest eigenvalue (E-optimality).
    MinusInfinity,
    /// `p = 0` is the determinant (D-optimality), `p = −1` the harmonic mean (A-optimality).
    Finite(f64),
}

/// φₚ criterion of an information matrix from its eigenvalues.
pub fn phi_p_criterion(info: &InformationMatrix, p: PhiP) -> Result<f64> {
    let ev: Vec<f64> = info
        .m
        .symmetric_eigenvalues()
        .into_iter()
        // round-off can leave a PSD matrix with tiny negative eigenvalues
        .map(|l| if l < 0.0 && l > -1e-14 { 0.0 } else { l })
        .collect();
    if ev.iter().any(|&l| l < 0.0) {
        return Err(Error::InvalidArgument(
            "information matrix is not positive semidefinite",
        ));
    }
    Ok(match p {
        PhiP::PlusInfinity => ev[ev.len() - 1],
        PhiP::MinusInfinity => ev[0],
        PhiP::Finite(0.0) => ev.iter().product(),
        PhiP::Finite(p) => {
            if p < 0.0 && ev.contains(&0.0) {
                return Err(Error::SingularCriterion(
                    "negative exponent with a zero eigenvalue",
                ));
            }
            let mean = ev.iter().map(|&l| libm::pow(l, p)).sum::<f64>() / ev.len() as f64;
            libm::pow(mean, 1.0 / p)
        }
    })
}

/// D-criterion objective for κ with everything independent of κ precomputed:
/// basis rows and pairwise `cos(zⱼ − zᵢ)`.
#[derive(Debug, Clone)]
pub struct KappaObjective {
    rows: Vec<f64>,
    cos_diff: Vec<f64>,
    labels: Option<Vec<usize>>,
    kept: Vec<usize>,
    n: usize,
    p: usize,
}

impl KappaObjective {
    pub fn new(times: &[f64], k: HarmonicOrder, folds: Option<&FoldAssignment>) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::InvalidArgument("no sample times"));
        }
        let rows = design_matrix(times, k)?;
        let angles: Vec<f64> = times.iter().map(|&t| hours_to_angle(t)).collect();
        let mut cos_diff = alloc::vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                cos_diff[j * n + i] = libm::cos(angles[j] - angles[i]);
            }
        }
        let (labels, kept) = match folds {
            None => (None, alloc::vec![n; n]),
            Some(f) => {
                if f.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: f.len(),
                    });
                }
                let sizes = f.fold_sizes();
                let kept: Vec<usize> = f.labels().iter().map(|&l| n - sizes[l]).collect();
                if kept.contains(&0) {
                    return Err(Error::DegenerateDesign(
                        "excluding a fold empties the training set",
                    ));
                }
                (Some(f.labels().to_vec()), kept)
            }
        };
        Ok(Self {
            rows,
            cos_diff,
            labels,
            kept,
            n,
            p: k.dim(),
        })
    }

    /// Sample weights at concentration `kappa`.
    pub fn weights(&self, kappa: f64) -> Result<WeightVector> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidArgument(
                "kernel concentration must be positive and finite",
            ));
        }
        let norm = 1.0 / (2.0 * PI * bessel_i_scaled(0, kappa)?);
        let n = self.n;
        let mut dens = Vec::with_capacity(n);
        for j in 0..n {
            let row = &self.cos_diff[j * n..(j + 1) * n];
            let s: f64 = match &self.labels {
                None => row.iter().map(|c| libm::exp(kappa * (c - 1.0))).sum(),
                Some(labels) => row
                    .iter()
                    .zip(labels)
                    .filter(|(_, &l)| l != labels[j])
                    .map(|(c, _)| libm::exp(kappa * (c - 1.0)))
                    .sum(),
            };
            dens.push(norm * s / self.kept[j] as f64);
        }
        WeightVector::from_densities(&dens)
    }

    /// `det W(κ)`.
    pub fn evaluate(&self, kappa: f64) -> Result<f64> {
        let w = self.weights(kappa)?;
        let info = information_matrix_from_rows(&self.rows, self.n, &Weights::Explicit(w), self.p)?;
        let det = info.determinant();
        if !det.is_finite() {
            return Err(Error::DegenerateDesign("non-finite determinant"));
        }
        Ok(det)
    }
}

/// Determinant of the reciprocal-KDE-weighted information matrix at `kappa`,
/// with fold-excluded densities when `folds` is given.
pub fn d_criterion_for_kappa(
    times: &[f64],
    kappa: f64,
    k: HarmonicOrder,
    folds: Option<&FoldAssignment>,
) -> Result<f64> {
    KappaObjective::new(times, k, folds)?.evaluate(kappa)
}

/// Search interval and evaluation budget for [`select_kappa`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaSearch {
    pub lo: f64,
    pub hi: f64,
    /// Log-spaced coarse grid size.
    pub grid_points: usize,
    /// Golden-section evaluations on the bracketing cell.
    pub refine_evals: usize,
}

impl Default for KappaSearch {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 1e3,
            grid_points: 60,
            refine_evals: 40,
        }
    }
}

impl KappaSearch {
    fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::InvalidArgument(
                "search interval must satisfy 0 < lo < hi",
            ));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidArgument(
                "search grid needs at least two points",
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (libm::log(self.lo), libm::log(self.hi));
        let m = self.grid_points - 1;
        (0..self.grid_points)
            .map(|i| {
                if i == 0 {
                    self.lo
                } else if i == m {
                    self.hi
                } else {
                    libm::exp(a + (b - a) * i as f64 / m as f64)
                }
            })
            .collect()
    }
}

/// Outcome of the concentration search.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaSearchResult {
    pub kappa_opt: f64,
    /// `det W(κ_opt)`.
    pub criterion_value: f64,
    /// Every successful `(κ, det)` evaluation, sorted by κ.
    pub trace: Vec<(f64, f64)>,
    /// `1/4^K`.
    pub bound: f64,
    pub failed_evaluations: usize,
}

/// Values within this of the maximum count as ties; the smallest κ wins.
const TIE_TOLERANCE: f64 = 1e-12;

/// Chooses κ maximising the (cross-validated) D-criterion: a log-spaced grid
/// scan, then golden-section refinement in `log κ` on the cell around the best
/// grid point.
pub fn select_kappa(
    times: &[f64],
    k: HarmonicOrder,
    folds: &FoldAssignment,
    search: &KappaSearch,
) -> Result<KappaSearchResult> {
    if times.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 1,
            got: times.len(),
        });
    }
    search.validate()?;
    let objective = KappaObjective::new(times, k, Some(folds))?;
    select_kappa_with(&objective, k, search)
}

/// [`select_kappa`] over a prebuilt objective.
pub fn select_kappa_with(
    objective: &KappaObjective,
    k: HarmonicOrder,
    search: &KappaSearch,
) -> Result<KappaSearchResult> {
    search.validate()?;
    let mut trace = Vec::new();
    let mut failed = 0usize;
    let mut eval = |kappa: f64, trace: &mut Vec<(f64, f64)>| match objective.evaluate(kappa) {
        Ok(d) => {
            trace.push((kappa, d));
            Some(d)
        }
        Err(_) => {
            failed += 1;
            None
        }
    };

    let grid = search.grid();
    let values: Vec<Option<f64>> = grid.iter().map(|&kp| eval(kp, &mut trace)).collect();
    let max = values
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::SearchFailed);
    }
    let best = values
        .iter()
        .position(|v| matches!(v, Some(d) if *d >= max - TIE_TOLERANCE))
        .ok_or(Error::SearchFailed)?;
    let mut kappa_opt = grid[best];
    let mut criterion = values[best].unwrap_or(max);

    if search.refine_evals > 0 {
        let lo = libm::log(grid[best.saturating_sub(1)]);
        let hi = libm::log(grid[(best + 1).min(grid.len() - 1)]);
        let score = |d: Option<f64>| d.unwrap_or(f64::NEG_INFINITY);
        let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = score(eval(libm::exp(c), &mut trace));
        let mut fd = score(eval(libm::exp(d), &mut trace));
        let mut used = 2;
        let consider = |x: f64, fx: f64, kappa_opt: &mut f64, criterion: &mut f64| {
            if fx > *criterion + TIE_TOLERANCE {
                *kappa_opt = libm::exp(x);
                *criterion = fx;
            }
        };
        consider(c, fc, &mut kappa_opt, &mut criterion);
        consider(d, fd, &mut kappa_opt, &mut criterion);
        while used < search.refine_evals {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = score(eval(libm::exp(c), &mut trace));
                consider(c, fc, &mut kappa_opt, &mut criterion);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = score(eval(libm::exp(d), &mut trace));
                consider(d, fd, &mut kappa_opt, &mut criterion);
            }
            used += 1;
        }
    }

    trace.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(KappaSearchResult {
        kappa_opt,
        criterion_value: criterion,
        trace,
        bound: k.determinant_bound(),
        failed_evaluations: failed,
    })
}

/// Selects κ by cross-validated D-optimality, then weights every sample by the
/// reciprocal of the full-data KDE at that κ.
pub fn optimal_weights(
    times: &[f64],
    k: HarmonicOrder,
    folds: &FoldAssignment,
    search: &KappaSearch,
) -> Result<(WeightVector, KappaSearchResult)> {
    let result = select_kappa(times, k, folds, search)?;
    let kde = KdeModel::new(times, result.kappa_opt)?;
    Ok((compute_weights(times, &kde)?, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eval_basis;
    use std::vec;

    fn k(n: usize) -> HarmonicOrder {
        HarmonicOrder::new(n).unwrap()
    }

    fn equispaced(n: usize) -> Vec<f64> {
        (0..n).map(|i| 24.0 * i as f64 / n as f64).collect()
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        assert!(WeightVector::normalize(&[0.0, 0.0]).is_err());
        assert_eq!(
            WeightVector::normalize(&[1.0, 3.0]).unwrap().as_slice(),
            &[0.25, 0.75]
        );
    }

    #[test]
    fn identical_times_give_uniform_weights() {
        let times = [7.0; 5];
        let kde = KdeModel::new(&times, 2.0).unwrap();
        let w = compute_weights(&times, &kde).unwrap();
        assert!(w.iter().all(|x| (x - 0.2).abs() < 1e-15));
    }

    #[test]
    fn flat_kde_gives_near_uniform_weights() {
        let times = [0.5, 1.0, 1.5, 2.0, 9.0, 20.0];
        let kde = KdeModel::new(&times, 1e-8).unwrap();
        let w = compute_weights(&times, &kde).unwrap();
        assert!(w.iter().all(|x| (x - 1.0 / 6.0).abs() < 1e-6));
    }

    #[test]
    fn outlier_gets_largest_weight() {
        let times = [1.0, 1.5, 2.0, 2.5, 3.0, 14.0];
        let kde = KdeModel::new(&times, 2.0).unwrap();
        let w = compute_weights(&times, &kde).unwrap();
        let recip: Vec<f64> = times.iter().map(|&t| 1.0 / kde.density(t)).collect();
        let total: f64 = recip.iter().sum();
        for (wi, r) in w.iter().zip(&recip) {
            assert!((wi - r / total).abs() < 1e-14);
        }
        assert!(w[..5].iter().all(|&x| x < w[5]));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn floored_densities_stay_finite() {
        let w = WeightVector::from_densities(&[0.0, 1e-320, 1.0]).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
        assert!(w[2] < 1e-299);
        assert!(WeightVector::from_densities(&[f64::NAN]).is_err());
    }

    #[test]
    fn equispaced_information_is_diagonal() {
        for order in 1..=3 {
            let info = information_matrix(&equispaced(24), &Weights::Uniform, k(order)).unwrap();
            let mut diag = vec![0.5; 2 * order + 1];
            diag[0] = 1.0;
            assert!(info.m.max_abs_diff(&Matrix::from_diag(&diag)) < 1e-12);
            assert!(!info.weighted);
        }
    }

    #[test]
    fn information_matches_outer_product_sum() {
        let times = [0.7, 5.3, 9.9, 13.1, 21.4];
        let w = WeightVector::normalize(&[0.3, 1.0, 0.2, 0.7, 0.4]).unwrap();
        let info = information_matrix(&times, &Weights::Explicit(w.clone()), k(1)).unwrap();
        let mut want = [[0.0; 3]; 3];
        for (t, wi) in times.iter().zip(w.iter()) {
            let f = eval_basis(*t, k(1)).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    want[a][b] += wi * f[a] * f[b];
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                assert!((info.m[(a, b)] - want[a][b]).abs() < 1e-15);
            }
        }
        assert!((info.m[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(info.weighted);
    }

    #[test]
    fn phi_p_on_equispaced_matrix() {
        let info = InformationMatrix {
            m: Matrix::from_diag(&[1.0, 0.5, 0.5]),
            weighted: false,
        };
        assert!((phi_p_criterion(&info, PhiP::Finite(0.0)).unwrap() - 0.25).abs() < 1e-15);
        assert!((phi_p_criterion(&info, PhiP::MinusInfinity).unwrap() - 0.5).abs() < 1e-15);
        assert!((phi_p_criterion(&info, PhiP::PlusInfinity).unwrap() - 1.0).abs() < 1e-15);
        // (mean of 1, 2, 2)^{-1}
        assert!((phi_p_criterion(&info, PhiP::Finite(-1.0)).unwrap() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn phi_p_singular() {
        let info = InformationMatrix {
            m: Matrix::from_diag(&[1.0, 0.0, 0.5]),
            weighted: false,
        };
        assert!(matches!(
            phi_p_criterion(&info, PhiP::Finite(-1.0)),
            Err(Error::SingularCriterion(_))
        ));
        assert_eq!(phi_p_criterion(&info, PhiP::Finite(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn equispaced_criterion_is_bound_for_any_kappa() {
        let times = equispaced(24);
        for order in 1..=3 {
            for kappa in [1e-3, 0.5, 3.0, 40.0] {
                let d = d_criterion_for_kappa(&times, kappa, k(order), None).unwrap();
                assert!((d - k(order).determinant_bound()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn search_grid_shape() {
        let g = KappaSearch::default().grid();
        assert_eq!(g.len(), 60);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[59], 1e3);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn equispaced_selection_picks_smallest_kappa() {
        let times = equispaced(12);
        let folds = FoldAssignment::leave_one_out(12);
        let r = select_kappa(&times, k(1), &folds, &KappaSearch::default()).unwrap();
        assert!((r.criterion_value - 0.25).abs() < 1e-6);
        assert_eq!(r.kappa_opt, 1e-3);
        assert_eq!(r.bound, 0.25);
        assert!(r.trace.windows(2).all(|w| w[0].0 <= w[1].0));
    }

    #[test]
    fn search_rejects_bad_interval() {
        let times = equispaced(6);
        let folds = FoldAssignment::leave_one_out(6);
        let bad = KappaSearch {
            lo: 2.0,
            hi: 1.0,
            ..KappaSearch::default()
        };
        assert!(select_kappa(&times, k(1), &folds, &bad).is_err());
        assert!(select_kappa(
            &[1.0],
            k(1),
            &FoldAssignment::leave_one_out(1),
            &KappaSearch::default()
        )
        .is_err());
    }
}
