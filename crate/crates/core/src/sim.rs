//! Simulation of rhythmic expression under uneven sampling, and the phase
//! sweep comparing unweighted, equispaced and weighted regressions.
//!
//! Each trial draws two data sets from the same setting: one at the setting's
//! collection times and one at equispaced times of the same size. The weighted
//! arm uses reciprocal-KDE weights with κ chosen by leave-one-out D-optimality.
//! Random streams are keyed by `(seed, phase index, trial index)` so trials can
//! be evaluated in any order, or in parallel, with identical results.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::basis::{wrap_angle, HarmonicOrder};
use crate::design::{optimal_weights, KappaSearch, KappaSearchResult, WeightVector, Weights};
use crate::error::{Error, Result};
use crate::inference::{f_test, wald_test, FMode};
use crate::kde::FoldAssignment;
use crate::regression::{fit_variance, PreparedDesign};
use crate::special::{normal_cdf, normal_quantile};

/// Uniform draw on `[0, 1)` with 53 random bits.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

// (0, 1), safe for quantile functions
fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    normal_quantile(uniform_open(rng))
}

/// Draw from `N(mu, sigma2)` conditioned on `[a, b]`, by inverting the normal
/// CDF over the truncated interval.
pub fn sample_truncated_normal<R: RngCore + ?Sized>(
    mu: f64,
    sigma2: f64,
    a: f64,
    b: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidArgument(
            "truncation bounds must satisfy a < b",
        ));
    }
    if !(sigma2 > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(
            "truncated normal needs finite mean and positive variance",
        ));
    }
    let sigma = libm::sqrt(sigma2);
    let (alpha, beta) = ((a - mu) / sigma, (b - mu) / sigma);
    let u = uniform_open(rng);
    // work in whichever tail keeps the CDF values away from 1
    let z = if alpha > 0.0 {
        let (lo, hi) = (normal_cdf(-beta), normal_cdf(-alpha));
        -normal_quantile(lo + u * (hi - lo))
    } else {
        let (lo, hi) = (normal_cdf(alpha), normal_cdf(beta));
        normal_quantile(lo + u * (hi - lo))
    };
    let x = mu + sigma * z;
    Ok(if x.is_finite() {
        x.clamp(a, b)
    } else if z > 0.0 {
        b
    } else {
        a
    })
}

/// Below this concentration von Mises draws are taken as uniform.
const VM_UNIFORM_BELOW: f64 = 1e-6;

/// Von Mises draw on `[0, 2π)` by the Best–Fisher wrapped-Cauchy rejection sampler.
pub fn sample_von_mises<R: RngCore + ?Sized>(mu: f64, kappa: f64, rng: &mut R) -> Result<f64> {
    if !(kappa >= 0.0) || !kappa.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidArgument(
            "von Mises needs finite mean and kappa >= 0",
        ));
    }
    if kappa < VM_UNIFORM_BELOW {
        return Ok(2.0 * PI * uniform01(rng));
    }
    let tau = 1.0 + libm::sqrt(1.0 + 4.0 * kappa * kappa);
    let rho = (tau - libm::sqrt(2.0 * tau)) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1 = uniform01(rng);
        let u2 = uniform_open(rng);
        let z = libm::cos(PI * u1);
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || libm::log(c / u2) + 1.0 - c >= 0.0 {
            let u3 = uniform01(rng);
            let theta = libm::acos(f.clamp(-1.0, 1.0));
            let theta = if u3 < 0.5 { -theta } else { theta };
            return Ok(wrap_angle(mu + theta));
        }
    }
}

/// Converts an angle in radians to clock hours.
pub fn angle_to_hours(z: f64) -> f64 {
    let h = wrap_angle(z) * 12.0 / PI;
    if h >= 24.0 {
        0.0
    } else {
        h
    }
}

/// `Xᵢ = 24(i − 1)/n`.
pub fn equispaced_times(n: usize) -> Vec<f64> {
    (0..n).map(|i| 24.0 * i as f64 / n as f64).collect()
}

/// Population standard deviation over the mean.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "coefficient of variation of an empty vector",
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 || !mean.is_finite() {
        return Err(Error::UndefinedStatistic("mean is zero"));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(libm::sqrt(var) / mean)
}

/// A fixed value or a per-sample truncated normal draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueSpec {
    Fixed(f64),
    TruncatedNormal {
        mu: f64,
        sigma2: f64,
        lo: f64,
        hi: f64,
    },
}

impl ValueSpec {
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            ValueSpec::Fixed(v) => Ok(v),
            ValueSpec::TruncatedNormal { mu, sigma2, lo, hi } => {
                sample_truncated_normal(mu, sigma2, lo, hi, rng)
            }
        }
    }

    fn lower_bound(&self) -> f64 {
        match *self {
            ValueSpec::Fixed(v) => v,
            ValueSpec::TruncatedNormal { lo, .. } => lo,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ValueSpec::Fixed(v) if !v.is_finite() => {
                Err(Error::InvalidArgument("fixed value must be finite"))
            }
            ValueSpec::TruncatedNormal { mu, sigma2, lo, hi }
                if !(lo < hi) || !(sigma2 > 0.0) || !mu.is_finite() =>
            {
                Err(Error::InvalidArgument(
                    "truncated normal needs lo < hi and sigma2 > 0",
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Phase shift applied to every harmonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseSpec {
    /// The sweep's current base phase.
    Base,
    Fixed(f64),
}

/// Where a setting's collection times come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeSource {
    Explicit(Vec<f64>),
    Equispaced(usize),
    /// `n` von Mises angles converted to hours.
    VonMises {
        n: usize,
        mu: f64,
        kappa: f64,
    },
    /// `n` draws from a mixture of `(weight, mu, kappa)` von Mises components.
    VonMisesMixture {
        n: usize,
        components: Vec<(f64, f64, f64)>,
    },
}

impl TimeSource {
    /// Concrete times in hours; random sources consume `rng`.
    pub fn materialize<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            TimeSource::Explicit(t) => {
                if t.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidArgument("sample time must be finite"));
                }
                Ok(t.clone())
            }
            TimeSource::Equispaced(n) => Ok(equispaced_times(*n)),
            TimeSource::VonMises { n, mu, kappa } => (0..*n)
                .map(|_| sample_von_mises(*mu, *kappa, rng).map(angle_to_hours))
                .collect(),
            TimeSource::VonMisesMixture { n, components } => {
                let total: f64 = components.iter().map(|c| c.0).sum();
                if components.is_empty() || !(total > 0.0) || components.iter().any(|c| c.0 < 0.0) {
                    return Err(Error::InvalidArgument(
                        "mixture weights must be non-negative with positive sum",
                    ));
                }
                (0..*n)
                    .map(|_| {
                        let mut u = uniform01(rng) * total;
                        let mut pick = components[components.len() - 1];
                        for c in components {
                            if u < c.0 {
                                pick = *c;
                                break;
                            }
                            u -= c.0;
                        }
                        sample_von_mises(pick.1, pick.2, rng).map(angle_to_hours)
                    })
                    .collect()
            }
        }
    }
}

/// One data-generating scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSetting {
    pub id: u8,
    pub mesor: ValueSpec,
    /// Amplitude of every harmonic.
    pub amplitude: ValueSpec,
    pub phase: PhaseSpec,
    pub time_source: TimeSource,
    /// Standard deviation of the Gaussian noise; 1 in every numbered setting.
    pub noise_sd: f64,
}

/// Default number of synthetic collection times.
pub const DEFAULT_SAMPLE_SIZE: usize = 50;

const MESOR_TN: ValueSpec = ValueSpec::TruncatedNormal {
    mu: 6.0,
    sigma2: 1.0,
    lo: 4.0,
    hi: 8.0,
};
const AMPLITUDE_TN: ValueSpec = ValueSpec::TruncatedNormal {
    mu: 0.5,
    sigma2: 0.25,
    lo: 0.0,
    hi: 1.0,
};

impl SimSetting {
    /// Numbered settings 1–7 with `time_source`, or the synthetic stand-in when
    /// `None`: `VM(0, 1)` times for single-population settings, a two-component
    /// von Mises mixture for the pooled settings 3 and 7.
    pub fn numbered(id: u8, time_source: Option<TimeSource>) -> Result<Self> {
        let (mesor, amplitude, phase) = match id {
            1 => (
                ValueSpec::Fixed(6.0),
                ValueSpec::Fixed(0.5),
                PhaseSpec::Base,
            ),
            2 | 3 => (MESOR_TN, ValueSpec::Fixed(0.5), PhaseSpec::Base),
            4 => (ValueSpec::Fixed(6.0), AMPLITUDE_TN, PhaseSpec::Base),
            5 => (ValueSpec::Fixed(6.0), AMPLITUDE_TN, PhaseSpec::Fixed(0.0)),
            6 | 7 => (MESOR_TN, AMPLITUDE_TN, PhaseSpec::Base),
            _ => {
                return Err(Error::InvalidArgument(
                    "simulation setting id must be 1..=7",
                ))
            }
        };
        let time_source = time_source.unwrap_or_else(|| match id {
            3 | 7 => TimeSource::VonMisesMixture {
                n: DEFAULT_SAMPLE_SIZE,
                components: alloc::vec![(0.5, 0.0, 1.0), (0.5, 2.0 * PI / 3.0, 2.0)],
            },
            _ => TimeSource::VonMises {
                n: DEFAULT_SAMPLE_SIZE,
                mu: 0.0,
                kappa: 1.0,
            },
        });
        let s = Self {
            id,
            mesor,
            amplitude,
            phase,
            time_source,
            noise_sd: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.mesor.validate()?;
        self.amplitude.validate()?;
        if self.amplitude.lower_bound() < 0.0 {
            return Err(Error::InvalidArgument("amplitudes must be non-negative"));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidArgument(
                "noise standard deviation must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Responses `yᵢ = θ₀ᵢ + Σₖ μₖᵢ cos(πkXᵢ/12 + φ) + εᵢ` at `times`, with
/// per-sample MESOR and amplitudes redrawn when the setting is random.
pub fn generate_trial<R: RngCore + ?Sized>(
    setting: &SimSetting,
    times: &[f64],
    phase_base: f64,
    k: HarmonicOrder,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let phase = match setting.phase {
        PhaseSpec::Base => phase_base,
        PhaseSpec::Fixed(p) => p,
    };
    times
        .iter()
        .map(|&x| {
            let mut y = setting.mesor.draw(rng)?;
            for h in 1..=k.get() {
                let mu = setting.amplitude.draw(rng)?;
                y += mu * libm::cos(PI * h as f64 * x / 12.0 + phase);
            }
            if setting.noise_sd > 0.0 {
                y += setting.noise_sd * standard_normal(rng);
            }
            Ok(y)
        })
        .collect()
}

/// The three regressions compared in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Unweighted,
    UnweightedEquispaced,
    Weighted,
}

impl Arm {
    pub const ALL: [Arm; 3] = [Arm::Unweighted, Arm::UnweightedEquispaced, Arm::Weighted];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Unweighted => "unweighted",
            Arm::UnweightedEquispaced => "unweighted_equispaced",
            Arm::Weighted => "weighted",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    WaldOverN,
    F,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::WaldOverN => "wald_over_n",
            Statistic::F => "f",
        }
    }
}

/// Fold scheme used when selecting κ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldSpec {
    #[default]
    LeaveOneOut,
    /// `M` seeded random folds.
    Random(usize),
}

impl FoldSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<FoldAssignment> {
        match *self {
            FoldSpec::LeaveOneOut => Ok(FoldAssignment::leave_one_out(n)),
            FoldSpec::Random(m) => FoldAssignment::random(n, m, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: HarmonicOrder,
    pub phase_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub search: KappaSearch,
    pub folds: FoldSpec,
    pub f_mode: FMode,
}

/// Trial count used when none is given.
pub const DEFAULT_TRIALS: usize = 500;

/// `{2πj/20 : j = 1, …, 20}`.
pub fn default_phase_grid() -> Vec<f64> {
    (1..=20).map(|j| 2.0 * PI * j as f64 / 20.0).collect()
}

impl RunConfig {
    pub fn new(k: HarmonicOrder, trials: usize, seed: u64) -> Self {
        Self {
            k,
            phase_grid: default_phase_grid(),
            trials,
            seed,
            search: KappaSearch::default(),
            folds: FoldSpec::LeaveOneOut,
            f_mode: FMode::Paper,
        }
    }
}

/// Random stream for `(phase, trial)`; the stream id keeps every pair disjoint.
pub fn trial_rng(seed: u64, phase_index: usize, trial_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((phase_index as u64) << 32) | trial_index as u64);
    rng
}

// stream reserved for drawing the collection times
const TIME_STREAM: u64 = u64::MAX;

/// Everything fixed across trials: the collection times, the equispaced
/// comparison design, the selected κ and the three factorised designs.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub setting: SimSetting,
    pub config: RunConfig,
    pub times: Vec<f64>,
    pub equispaced: Vec<f64>,
    pub weights: WeightVector,
    pub kappa: KappaSearchResult,
    designs: [PreparedDesign; 3],
}

impl SweepContext {
    /// The collection times do not change between trials, so κ selection is
    /// deterministic and done once here.
    pub fn prepare(setting: &SimSetting, config: &RunConfig) -> Result<Self> {
        setting.validate()?;
        if config.trials == 0 {
            return Err(Error::InvalidArgument("at least one trial is required"));
        }
        if config.phase_grid.is_empty() {
            return Err(Error::InvalidArgument("phase grid is empty"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(TIME_STREAM);
        let times = setting.time_source.materialize(&mut rng)?;
        let n = times.len();
        if n <= config.k.dim() {
            return Err(Error::InsufficientData {
                needed: config.k.dim(),
                got: n,
            });
        }
        let equispaced = equispaced_times(n);
        let folds = config.folds.build(n, config.seed)?;
        let (weights, kappa) = optimal_weights(&times, config.k, &folds, &config.search)?;
        let designs = [
            PreparedDesign::new(&times, &Weights::Uniform, config.k)?,
            PreparedDesign::new(&equispaced, &Weights::Uniform, config.k)?,
            PreparedDesign::new(&times, &Weights::Explicit(weights.clone()), config.k)?,
        ];
        Ok(Self {
            setting: setting.clone(),
            config: config.clone(),
            times,
            equispaced,
            weights,
            kappa,
            designs,
        })
    }

    pub fn design(&self, arm: Arm) -> &PreparedDesign {
        &self.designs[arm.index()]
    }

    /// Runs one trial: generates both data sets and evaluates every arm.
    pub fn run_trial(&self, phase_index: usize, trial_index: usize) -> Result<TrialOutcome> {
        let phase = *self
            .config
            .phase_grid
            .get(phase_index)
            .ok_or(Error::InvalidArgument("phase index out of range"))?;
        let mut rng = trial_rng(self.config.seed, phase_index, trial_index);
        let k = self.config.k;
        let sampled = generate_trial(&self.setting, &self.times, phase, k, &mut rng)?;
        let equi = generate_trial(&self.setting, &self.equispaced, phase, k, &mut rng)?;
        let mut arms = [None; 3];
        for arm in Arm::ALL {
            let y = if arm == Arm::UnweightedEquispaced {
                &equi
            } else {
                &sampled
            };
            arms[arm.index()] = self.evaluate(arm, y).ok();
        }
        Ok(TrialOutcome { arms })
    }

    fn evaluate(&self, arm: Arm, y: &[f64]) -> Result<ArmStatistics> {
        let design = self.design(arm);
        let fit = design.fit(y)?;
        let wald = wald_test(&fit, &fit_variance(&fit)?)?;
        let f = f_test(y, &fit, self.config.f_mode)?;
        if f.undefined {
            return Err(Error::UndefinedStatistic("F denominator is zero"));
        }
        Ok(ArmStatistics {
            wald_over_n: wald.stat / fit.n as f64,
            f: f.stat,
        })
    }

    /// Averages trial outcomes (indexed `[phase][trial]`) into a summary.
    pub fn summarize(&self, outcomes: &[Vec<TrialOutcome>]) -> Result<SweepSummary> {
        if outcomes.len() != self.config.phase_grid.len() {
            return Err(Error::LengthMismatch {
                expected: self.config.phase_grid.len(),
                got: outcomes.len(),
            });
        }
        let mut rows = Vec::with_capacity(outcomes.len() * 3);
        let mut failures = 0;
        for (pi, trials) in outcomes.iter().enumerate() {
            for arm in Arm::ALL {
                let (mut sw, mut sf, mut count) = (0.0, 0.0, 0usize);
                for t in trials {
                    match t.arms[arm.index()] {
                        Some(s) => {
                            sw += s.wald_over_n;
                            sf += s.f;
                            count += 1;
                        }
                        None => failures += 1,
                    }
                }
                let denom = if count == 0 { f64::NAN } else { count as f64 };
                rows.push(PhaseArmSummary {
                    phase_index: pi,
                    phase: self.config.phase_grid[pi],
                    arm,
                    mean_wald_over_n: sw / denom,
                    mean_f: sf / denom,
                    trials_ok: count,
                });
            }
        }
        let mut cov = Vec::new();
        for arm in Arm::ALL {
            for stat in [Statistic::WaldOverN, Statistic::F] {
                let means: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.arm == arm)
                    .map(|r| match stat {
                        Statistic::WaldOverN => r.mean_wald_over_n,
                        Statistic::F => r.mean_f,
                    })
                    .collect();
                cov.push(CovEntry {
                    arm,
                    statistic: stat,
                    value: coefficient_of_variation(&means)
                        .ok()
                        .filter(|v| v.is_finite()),
                });
            }
        }
        Ok(SweepSummary {
            setting_id: self.setting.id,
            k: self.config.k.get(),
            trials: self.config.trials,
            seed: self.config.seed,
            n: self.times.len(),
            kappa_opt: self.kappa.kappa_opt,
            criterion_value: self.kappa.criterion_value,
            rows,
            cov,
            failures,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmStatistics {
    pub wald_over_n: f64,
    pub f: f64,
}

/// Per-arm statistics of one trial; `None` where the arm failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub arms: [Option<ArmStatistics>; 3],
}

impl TrialOutcome {
    pub fn arm(&self, arm: Arm) -> Option<ArmStatistics> {
        self.arms[arm.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseArmSummary {
    pub phase_index: usize,
    pub phase: f64,
    pub arm: Arm,
    pub mean_wald_over_n: f64,
    pub mean_f: f64,
    pub trials_ok: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovEntry {
    pub arm: Arm,
    pub statistic: Statistic,
    /// `None` when the phase means average to zero.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub setting_id: u8,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    pub kappa_opt: f64,
    pub criterion_value: f64,
    /// One row per (phase, arm), phase-major.
    pub rows: Vec<PhaseArmSummary>,
    pub cov: Vec<CovEntry>,
    /// Arm evaluations that failed and were left out of the means.
    pub failures: usize,
}

impl SweepSummary {
    pub fn cov(&self, arm: Arm, statistic: Statistic) -> Option<f64> {
        self.cov
            .iter()
            .find(|c| c.arm == arm && c.statistic == statistic)
            .and_then(|c| c.value)
    }

    /// Phase-ordered means of one arm.
    pub fn phase_means(&self, arm: Arm, statistic: Statistic) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.arm == arm)
            .map(|r| match statistic {
                Statistic::WaldOverN => r.mean_wald_over_n,
                Statistic::F => r.mean_f,
            })
            .collect()
    }
}

/// Runs every `(phase, trial)` sequentially and summarises.
pub fn run_sweep(setting: &SimSetting, config: &RunConfig) -> Result<SweepSummary> {
    let ctx = SweepContext::prepare(setting, config)?;
    let outcomes = (0..config.phase_grid.len())
        .map(|p| (0..config.trials).map(|t| ctx.run_trial(p, t)).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    ctx.summarize(&outcomes)
}
