//! Circular kernel density estimation of sample-collection times.
//!
//! Times in hours are mapped to angles `z = πx/12`, so densities here are per
//! radian. Sample weights only use normalised reciprocals of the density, so
//! the choice of angular versus hourly units cancels.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::basis::hours_to_angle;
use crate::error::{Error, Result};
use crate::special::bessel_i_scaled;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelFamily {
    #[default]
    VonMises,
}

/// Von Mises kernel `exp(κ cos z) / (2π I₀(κ))`.
pub fn vm_kernel(z: f64, kappa: f64) -> Result<f64> {
    let norm = vm_normalizer(kappa)?;
    Ok(vm_kernel_with(z, kappa, norm))
}

// 1 / (2π e^{-κ} I₀(κ)); the e^{-κ} is folded into the exponent below.
fn vm_normalizer(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(
            "kernel concentration must be positive and finite",
        ));
    }
    Ok(1.0 / (2.0 * PI * bessel_i_scaled(0, kappa)?))
}

#[inline]
fn vm_kernel_with(z: f64, kappa: f64, norm: f64) -> f64 {
    libm::exp(kappa * (libm::cos(z) - 1.0)) * norm
}

/// Kernel density estimate over the 24-hour circle.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    angles: Vec<f64>,
    kappa: f64,
    kernel: KernelFamily,
    norm: f64,
}

impl KdeModel {
    /// Builds a von Mises KDE from sample times in hours.
    pub fn new(times_hours: &[f64], kappa: f64) -> Result<Self> {
        Self::with_kernel(times_hours, kappa, KernelFamily::VonMises)
    }

    pub fn with_kernel(times_hours: &[f64], kappa: f64, kernel: KernelFamily) -> Result<Self> {
        if times_hours.is_empty() {
            return Err(Error::InvalidArgument(
                "density estimate needs at least one sample",
            ));
        }
        if times_hours.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("sample time must be finite"));
        }
        let norm = match kernel {
            KernelFamily::VonMises => vm_normalizer(kappa)?,
        };
        Ok(Self {
            angles: times_hours.iter().map(|&t| hours_to_angle(t)).collect(),
            kappa,
            kernel,
            norm,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kernel(&self) -> KernelFamily {
        self.kernel
    }

    /// Training angles in `[0, 2π)`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    #[inline]
    fn kernel_at(&self, dz: f64) -> f64 {
        match self.kernel {
            KernelFamily::VonMises => vm_kernel_with(dz, self.kappa, self.norm),
        }
    }

    /// `(1/N) Σᵢ K_κ(πx/12 − zᵢ)`.
    pub fn density(&self, x_hours: f64) -> f64 {
        let z = hours_to_angle(x_hours);
        let sum: f64 = self.angles.iter().map(|&zi| self.kernel_at(z - zi)).sum();
        sum / self.angles.len() as f64
    }

    /// Density from the training points outside fold `fold_index`.
    ///
    /// A fold index with no members leaves the full training set.
    pub fn density_excluding(
        &self,
        folds: &FoldAssignment,
        fold_index: usize,
        x_hours: f64,
    ) -> Result<f64> {
        if folds.len() != self.angles.len() {
            return Err(Error::LengthMismatch {
                expected: self.angles.len(),
                got: folds.len(),
            });
        }
        let z = hours_to_angle(x_hours);
        let (sum, count) = self
            .angles
            .iter()
            .zip(folds.labels())
            .filter(|(_, &f)| f != fold_index)
            .fold((0.0, 0usize), |(s, c), (&zi, _)| {
                (s + self.kernel_at(z - zi), c + 1)
            });
        if count == 0 {
            return Err(Error::DegenerateDesign(
                "excluding the fold empties the training set",
            ));
        }
        Ok(sum / count as f64)
    }

    /// For each training sample `j`, the density at `x_j` estimated without
    /// the fold containing `j`.
    pub fn cross_validated_densities(&self, folds: &FoldAssignment) -> Result<Vec<f64>> {
        let n = self.angles.len();
        if folds.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: folds.len(),
            });
        }
        let sizes = folds.fold_sizes();
        let labels = folds.labels();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let fj = labels[j];
            let count = n - sizes[fj];
            if count == 0 {
                return Err(Error::DegenerateDesign(
                    "excluding the fold empties the training set",
                ));
            }
            let zj = self.angles[j];
            let sum: f64 = (0..n)
                .filter(|&i| labels[i] != fj)
                .map(|i| self.kernel_at(zj - self.angles[i]))
                .sum();
            out.push(sum / count as f64);
        }
        Ok(out)
    }
}

/// Assignment of each sample to one of `M` non-empty folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    folds: usize,
}

impl FoldAssignment {
    /// `M = N`: sample `i` forms fold `i`.
    pub fn leave_one_out(n: usize) -> Self {
        Self {
            fold_of: (0..n).collect(),
            folds: n,
        }
    }

    /// Seeded random partition into `m` folds of near-equal size.
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidArgument("fold count must lie in 1..=N"));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            order.swap(i, j);
        }
        let mut fold_of = alloc::vec![0; n];
        for (pos, &sample) in order.iter().enumerate() {
            fold_of[sample] = pos % m;
        }
        Ok(Self { fold_of, folds: m })
    }

    /// Validates explicit labels `0..M`, each used at least once.
    pub fn from_labels(fold_of: Vec<usize>) -> Result<Self> {
        let folds = fold_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = alloc::vec![false; folds];
        for &f in &fold_of {
            seen[f] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("every fold must be non-empty"));
        }
        Ok(Self { fold_of, folds })
    }

    pub fn labels(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn num_folds(&self) -> usize {
        self.folds
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.folds];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_i;
    use std::vec;

    #[test]
    fn kernel_uniform_limit() {
        for z in [0.0, 1.0, PI] {
            assert!((vm_kernel(z, 1e-12).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_matches_direct_formula() {
        let want = libm::exp(-1.0) / (2.0 * PI * bessel_i(0, 1.0).unwrap());
        assert!((vm_kernel(PI, 1.0).unwrap() - want).abs() < 1e-15);
        assert!(vm_kernel(0.0, 0.0).is_err());
        assert!(vm_kernel(0.0, -1.0).is_err());
    }

    #[test]
    fn kernel_integrates_to_one() {
        let n = 10_000;
        let h = 2.0 * PI / n as f64;
        // periodic trapezoid rule
        let total: f64 = (0..n)
            .map(|i| vm_kernel(i as f64 * h, 2.5).unwrap())
            .sum::<f64>()
            * h;
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_stays_finite_for_sharp_concentration() {
        let k = vm_kernel(0.0, 1e3).unwrap();
        assert!(k.is_finite() && k > 0.0);
        assert_eq!(vm_kernel(PI, 1e3).unwrap(), 0.0);
    }

    #[test]
    fn single_point_density() {
        let m = KdeModel::new(&[0.0], 1.0).unwrap();
        let want = libm::exp(1.0) / (2.0 * PI * bessel_i(0, 1.0).unwrap());
        assert!((m.density(0.0) - want).abs() < 1e-15);
        let many = KdeModel::new(&[5.0; 7], 1.0).unwrap();
        let one = KdeModel::new(&[5.0], 1.0).unwrap();
        assert!((many.density(13.0) - one.density(13.0)).abs() < 1e-16);
    }

    #[test]
    fn density_is_explicit_average() {
        let times = [0.5, 3.0, 7.9, 15.2, 22.7];
        let m = KdeModel::new(&times, 3.0).unwrap();
        let z = PI * 7.3 / 12.0;
        let want: f64 = times
            .iter()
            .map(|t| {
                (3.0 * (z - PI * t / 12.0).cos()).exp() / (2.0 * PI * bessel_i(0, 3.0).unwrap())
            })
            .sum::<f64>()
            / 5.0;
        assert!((m.density(7.3) - want).abs() < 1e-14);
    }

    #[test]
    fn construction_errors() {
        assert!(KdeModel::new(&[], 1.0).is_err());
        assert!(KdeModel::new(&[1.0], 0.0).is_err());
        assert!(KdeModel::new(&[f64::NAN], 1.0).is_err());
    }

    #[test]
    fn leave_one_out_with_two_points() {
        let m = KdeModel::new(&[2.0, 9.0], 1.4).unwrap();
        let folds = FoldAssignment::leave_one_out(2);
        let got = m.density_excluding(&folds, 0, 9.0).unwrap();
        assert!((got - vm_kernel(0.0, 1.4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn excluding_empty_fold_is_full_density() {
        let m = KdeModel::new(&[2.0, 9.0, 11.0], 2.0).unwrap();
        let folds = FoldAssignment::leave_one_out(3);
        assert_eq!(m.density_excluding(&folds, 7, 4.0).unwrap(), m.density(4.0));
    }

    #[test]
    fn excluding_everything_is_degenerate() {
        let m = KdeModel::new(&[2.0, 9.0], 2.0).unwrap();
        let folds = FoldAssignment::from_labels(vec![0, 0]).unwrap();
        assert!(matches!(
            m.density_excluding(&folds, 0, 1.0),
            Err(Error::DegenerateDesign(_))
        ));
        assert!(m.cross_validated_densities(&folds).is_err());
    }

    #[test]
    fn fold_excluded_densities_match_rebuilt_models() {
        let times = [0.3, 4.1, 4.4, 12.0, 17.5, 23.1];
        let folds = FoldAssignment::from_labels(vec![0, 1, 2, 0, 1, 2]).unwrap();
        let m = KdeModel::new(&times, 1.7).unwrap();
        let cv = m.cross_validated_densities(&folds).unwrap();
        for fold in 0..3 {
            let kept: Vec<f64> = times
                .iter()
                .zip(folds.labels())
                .filter(|(_, &f)| f != fold)
                .map(|(t, _)| *t)
                .collect();
            let rebuilt = KdeModel::new(&kept, 1.7).unwrap();
            for q in [0.0, 5.5, 13.25, 20.0] {
                let a = m.density_excluding(&folds, fold, q).unwrap();
                assert!((a - rebuilt.density(q)).abs() < 1e-15);
            }
            for (j, t) in times.iter().enumerate() {
                if folds.labels()[j] == fold {
                    assert!((cv[j] - rebuilt.density(*t)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn random_folds_are_balanced_and_seeded() {
        let a = FoldAssignment::random(10, 3, 7).unwrap();
        let b = FoldAssignment::random(10, 3, 7).unwrap();
        assert_eq!(a, b);
        let mut sizes = a.fold_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert!(FoldAssignment::random(3, 4, 1).is_err());
        assert!(FoldAssignment::from_labels(vec![0, 2]).is_err());
    }
}
