//! The five subcommands as library functions returning plain results, plus
//! the renderers that turn those results into CSV, JSON and SVG text.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wcosinor_core::basis::theta_to_amplitude_phase;
use wcosinor_core::design::{optimal_weights, select_kappa, KappaSearchResult, Weights};
use wcosinor_core::inference::{screen_gene, ReportFlag};
use wcosinor_core::regression::PreparedDesign;
use wcosinor_core::sim::{
    Arm, RunConfig, SimSetting, SweepContext, SweepSummary, TimeSource, TrialOutcome,
};
use wcosinor_core::{Error, Panel, TestReport};

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::numfmt::{fmt_f64, parse_f64};
use crate::svg::{Guide, Mark, Plot, Series};

fn folds_for(settings: &Settings, n: usize) -> CliResult<wcosinor_core::FoldAssignment> {
    settings.folds.build(n, settings.seed).map_err(|e| match e {
        Error::InvalidArgument(m) => CliError::config(m),
        other => other.into(),
    })
}

/// Cross-validated κ selection on a time vector.
pub fn run_kappa(times: &[f64], settings: &Settings) -> CliResult<KappaSearchResult> {
    let folds = folds_for(settings, times.len())?;
    Ok(select_kappa(
        times,
        settings.order,
        &folds,
        &settings.search,
    )?)
}

/// Weights for a design: uniform, or the kernel-density weights at the selected κ.
pub fn design_weights(
    times: &[f64],
    settings: &Settings,
    weighted: bool,
) -> CliResult<(Weights, Option<KappaSearchResult>)> {
    if !weighted {
        return Ok((Weights::Uniform, None));
    }
    let folds = folds_for(settings, times.len())?;
    let (w, search) = optimal_weights(times, settings.order, &folds, &settings.search)?;
    Ok((Weights::Explicit(w), Some(search)))
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaReport {
    pub kappa_opt: f64,
    pub criterion: f64,
    pub bound: f64,
    pub evaluations: usize,
    pub failed_evaluations: usize,
}

impl From<&KappaSearchResult> for KappaReport {
    fn from(r: &KappaSearchResult) -> Self {
        Self {
            kappa_opt: r.kappa_opt,
            criterion: r.criterion_value,
            bound: r.bound,
            evaluations: r.trace.len(),
            failed_evaluations: r.failed_evaluations,
        }
    }
}

/// `kappa,criterion` rows in increasing κ.
pub fn kappa_trace_csv(r: &KappaSearchResult) -> String {
    let mut s = String::from("kappa,criterion\n");
    for (k, d) in &r.trace {
        s.push_str(&format!("{},{}\n", fmt_f64(*k), fmt_f64(*d)));
    }
    s
}

pub fn kappa_svg(r: &KappaSearchResult) -> String {
    Plot {
        title: "Cross-validated D-criterion".into(),
        x_label: "log10 kappa".into(),
        y_label: "det W".into(),
        series: vec![Series {
            name: "criterion".into(),
            mark: Mark::Line,
            points: r.trace.iter().map(|&(k, d)| (k.log10(), d)).collect(),
        }],
        guides: vec![Guide {
            name: "bound".into(),
            slope: 0.0,
            intercept: r.bound,
            dashed: true,
        }],
    }
    .render()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicRecord {
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub min: f64,
    pub max: f64,
    pub effective_sample_size: f64,
}

/// One gene of the fit JSON; numeric fields are `null` when the fit failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub gene: String,
    pub theta: Option<Vec<f64>>,
    pub mesor: Option<f64>,
    pub harmonics: Option<Vec<HarmonicRecord>>,
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub weights: WeightSummary,
    pub flags: Vec<String>,
}

fn fit_record(
    design: &PreparedDesign,
    gene: &str,
    y: &[f64],
    kappa: Option<f64>,
    ws: &WeightSummary,
) -> FitRecord {
    let mut rec = FitRecord {
        gene: gene.to_string(),
        theta: None,
        mesor: None,
        harmonics: None,
        sigma2: None,
        kappa,
        weights: ws.clone(),
        flags: Vec::new(),
    };
    match design
        .fit(y)
        .and_then(|f| Ok((theta_to_amplitude_phase(&f.theta_hat)?, f)))
    {
        Ok((ap, f)) => {
            rec.mesor = Some(ap.mesor);
            rec.harmonics = Some(
                ap.harmonics
                    .iter()
                    .map(|h| HarmonicRecord {
                        amplitude: h.amplitude,
                        phase: h.phase,
                    })
                    .collect(),
            );
            rec.sigma2 = Some(f.sigma2_hat);
            rec.theta = Some(f.theta_hat);
        }
        Err(e) => rec.flags.push(format!("fit_failed: {e}")),
    }
    rec
}

/// Per-gene fits on one shared design.
pub fn run_fit(
    panel: &Panel,
    settings: &Settings,
) -> CliResult<(Vec<FitRecord>, Option<KappaSearchResult>)> {
    let (weights, search) = design_weights(&panel.times, settings, settings.weighted)?;
    let design = PreparedDesign::new(&panel.times, &weights, settings.order)?;
    let w = design.weights();
    let ws = WeightSummary {
        min: w.iter().copied().fold(f64::INFINITY, f64::min),
        max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        effective_sample_size: w.effective_sample_size(),
    };
    let kappa = search.as_ref().map(|s| s.kappa_opt);
    let records = panel
        .gene_ids
        .par_iter()
        .zip(panel.expr.par_iter())
        .map(|(id, y)| fit_record(&design, id, y, kappa, &ws))
        .collect();
    Ok((records, search))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreenMode {
    Unweighted,
    Weighted,
    Both,
}

#[derive(Debug, Clone)]
pub struct ScreenOutput {
    pub mode: ScreenMode,
    pub unweighted: Option<Vec<TestReport>>,
    pub weighted: Option<Vec<TestReport>>,
    pub kappa: Option<KappaSearchResult>,
}

/// Parallel counterpart of the library's panel screen; same reports, same order.
pub fn screen_reports(
    panel: &Panel,
    weights: &Weights,
    settings: &Settings,
) -> CliResult<Vec<TestReport>> {
    if panel.num_genes() == 0 {
        return Err(Error::InvalidArgument("panel has no genes").into());
    }
    let design = PreparedDesign::new(&panel.times, weights, settings.order)?;
    Ok(panel
        .gene_ids
        .par_iter()
        .zip(panel.expr.par_iter())
        .map(|(id, y)| screen_gene(&design, id, y, settings.f_mode))
        .collect())
}

pub fn run_screen(panel: &Panel, settings: &Settings, mode: ScreenMode) -> CliResult<ScreenOutput> {
    let mut out = ScreenOutput {
        mode,
        unweighted: None,
        weighted: None,
        kappa: None,
    };
    if mode != ScreenMode::Weighted {
        out.unweighted = Some(screen_reports(panel, &Weights::Uniform, settings)?);
    }
    if mode != ScreenMode::Unweighted {
        let (w, search) = design_weights(&panel.times, settings, true)?;
        out.weighted = Some(screen_reports(panel, &w, settings)?);
        out.kappa = search;
    }
    Ok(out)
}

pub fn flag_name(flag: &ReportFlag) -> String {
    match flag {
        ReportFlag::UndefinedF => "undefined_f".into(),
        ReportFlag::ZeroVariance => "zero_variance".into(),
        ReportFlag::FitFailed(e) => format!("fit_failed: {e}"),
    }
}

fn flags_cell(reports: &[(&str, &TestReport)]) -> String {
    let mut parts = Vec::new();
    for (prefix, r) in reports {
        for f in &r.flags {
            if prefix.is_empty() {
                parts.push(flag_name(f));
            } else {
                parts.push(format!("{prefix}:{}", flag_name(f)));
            }
        }
    }
    parts.join(";")
}

/// Screening table. Single modes carry degrees of freedom; `both` pairs the
/// statistic and p-value columns of the two designs.
pub fn screen_csv(out: &ScreenOutput) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
        w.write_record(rec).expect("in-memory write")
    };
    match (&out.unweighted, &out.weighted) {
        (Some(u), Some(v)) => {
            row(
                &mut w,
                [
                    "gene",
                    "wald_stat_unweighted",
                    "wald_p_unweighted",
                    "f_stat_unweighted",
                    "f_p_unweighted",
                    "wald_stat_weighted",
                    "wald_p_weighted",
                    "f_stat_weighted",
                    "f_p_weighted",
                    "flags",
                ]
                .map(String::from)
                .to_vec(),
            );
            for (a, b) in u.iter().zip(v) {
                row(
                    &mut w,
                    vec![
                        a.gene_id.clone(),
                        fmt_f64(a.wald_stat),
                        fmt_f64(a.wald_p),
                        fmt_f64(a.f_stat),
                        fmt_f64(a.f_p),
                        fmt_f64(b.wald_stat),
                        fmt_f64(b.wald_p),
                        fmt_f64(b.f_stat),
                        fmt_f64(b.f_p),
                        flags_cell(&[("unweighted", a), ("weighted", b)]),
                    ],
                );
            }
        }
        (Some(r), None) | (None, Some(r)) => {
            row(
                &mut w,
                [
                    "gene",
                    "wald_stat",
                    "wald_df",
                    "wald_p",
                    "f_stat",
                    "f_df1",
                    "f_df2",
                    "f_p",
                    "flags",
                ]
                .map(String::from)
                .to_vec(),
            );
            for a in r {
                row(
                    &mut w,
                    vec![
                        a.gene_id.clone(),
                        fmt_f64(a.wald_stat),
                        a.wald_df.to_string(),
                        fmt_f64(a.wald_p),
                        fmt_f64(a.f_stat),
                        a.f_df.0.to_string(),
                        a.f_df.1.to_string(),
                        fmt_f64(a.f_p),
                        flags_cell(&[("", a)]),
                    ],
                );
            }
        }
        (None, None) => {}
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Wald,
    F,
}

impl StatKind {
    pub fn name(self) -> &'static str {
        match self {
            StatKind::Wald => "wald",
            StatKind::F => "f",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenePair {
    pub gene: String,
    pub unweighted: f64,
    pub weighted: f64,
}

/// No-intercept regression of weighted on unweighted statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub statistic: StatKind,
    pub beta: f64,
    pub genes: usize,
    pub weighted_greater: usize,
    pub weighted_not_greater: usize,
    /// Genes without a finite pair of statistics.
    pub skipped: Vec<String>,
    pub pairs: Vec<GenePair>,
}

/// `β = Σ uᵢwᵢ / Σ uᵢ²` and the win counts over finite pairs.
pub fn compare_pairs(statistic: StatKind, pairs: Vec<GenePair>) -> CliResult<ComparisonResult> {
    let (finite, skipped): (Vec<GenePair>, Vec<GenePair>) = pairs
        .into_iter()
        .partition(|p| p.unweighted.is_finite() && p.weighted.is_finite());
    if finite.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 }.into());
    }
    let suu: f64 = finite.iter().map(|p| p.unweighted * p.unweighted).sum();
    if suu == 0.0 {
        return Err(Error::UndefinedStatistic(
            "all unweighted statistics are zero; slope undefined",
        )
        .into());
    }
    let suw: f64 = finite.iter().map(|p| p.unweighted * p.weighted).sum();
    let greater = finite.iter().filter(|p| p.weighted > p.unweighted).count();
    Ok(ComparisonResult {
        statistic,
        beta: suw / suu,
        genes: finite.len(),
        weighted_greater: greater,
        weighted_not_greater: finite.len() - greater,
        skipped: skipped.into_iter().map(|p| p.gene).collect(),
        pairs: finite,
    })
}

/// Reads the paired columns of a `both`-mode screening table.
pub fn read_paired_table(path: &Path, statistic: StatKind) -> CliResult<Vec<GenePair>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::ingest(path, e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::ingest(path, e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::ingest(path, format!("row 1: no `{name}` column")))
    };
    let g = col("gene")?;
    let u = col(&format!("{}_stat_unweighted", statistic.name()))?;
    let w = col(&format!("{}_stat_weighted", statistic.name()))?;
    let mut pairs = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::ingest(path, e.to_string()))?;
        let num = |c: usize| {
            parse_f64(&rec[c]).ok_or_else(|| {
                CliError::ingest(
                    path,
                    format!(
                        "row {}, column {}: `{}` is not a number",
                        r + 2,
                        c + 1,
                        &rec[c]
                    ),
                )
            })
        };
        pairs.push(GenePair {
            gene: rec[g].to_string(),
            unweighted: num(u)?,
            weighted: num(w)?,
        });
    }
    Ok(pairs)
}

pub fn compare_svg(c: &ComparisonResult) -> String {
    let stat = match c.statistic {
        StatKind::Wald => "Wald",
        StatKind::F => "F",
    };
    Plot {
        title: format!(
            "{stat} statistics, weighted vs unweighted (beta = {:.4})",
            c.beta
        ),
        x_label: format!("unweighted {stat}"),
        y_label: format!("weighted {stat}"),
        series: vec![Series {
            name: "genes".into(),
            mark: Mark::Points,
            points: c.pairs.iter().map(|p| (p.unweighted, p.weighted)).collect(),
        }],
        guides: vec![
            Guide {
                name: "identity".into(),
                slope: 1.0,
                intercept: 0.0,
                dashed: true,
            },
            Guide {
                name: "fit".into(),
                slope: c.beta,
                intercept: 0.0,
                dashed: false,
            },
        ],
    }
    .render()
}

/// Simulation setting with optional overrides of its time source.
pub fn simulation_setting(
    id: u8,
    times: Option<Vec<f64>>,
    equispaced: bool,
    samples: Option<usize>,
) -> CliResult<SimSetting> {
    let mut s = SimSetting::numbered(id, None)
        .map_err(|_| CliError::config(format!("setting must be between 1 and 7 (got {id})")))?;
    if let Some(t) = times {
        s.time_source = TimeSource::Explicit(t);
    } else if equispaced {
        let n = match &s.time_source {
            TimeSource::VonMises { n, .. } | TimeSource::VonMisesMixture { n, .. } => *n,
            TimeSource::Equispaced(n) => *n,
            TimeSource::Explicit(t) => t.len(),
        };
        s.time_source = TimeSource::Equispaced(samples.unwrap_or(n));
    } else if let Some(m) = samples {
        match &mut s.time_source {
            TimeSource::VonMises { n, .. } | TimeSource::VonMisesMixture { n, .. } => *n = m,
            TimeSource::Equispaced(n) => *n = m,
            TimeSource::Explicit(_) => {}
        }
    }
    Ok(s)
}

pub fn run_config(settings: &Settings) -> RunConfig {
    let mut c = RunConfig::new(settings.order, settings.trials, settings.seed);
    c.search = settings.search;
    c.folds = settings.folds;
    c.f_mode = settings.f_mode;
    c
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub summary: SweepSummary,
    pub times: Vec<f64>,
}

/// Parallel sweep; trials are collected by index so the summary equals the
/// sequential library sweep bit for bit.
pub fn run_simulate(setting: &SimSetting, config: &RunConfig) -> CliResult<SimulationOutput> {
    let ctx = SweepContext::prepare(setting, config)?;
    let t = config.trials;
    let flat = (0..config.phase_grid.len() * t)
        .into_par_iter()
        .map(|i| ctx.run_trial(i / t, i % t))
        .collect::<Result<Vec<TrialOutcome>, _>>()?;
    let outcomes: Vec<Vec<TrialOutcome>> = flat.chunks(t).map(<[_]>::to_vec).collect();
    Ok(SimulationOutput {
        summary: ctx.summarize(&outcomes)?,
        times: ctx.times.clone(),
    })
}

pub fn sweep_csv(s: &SweepSummary) -> String {
    let mut out = String::from("phase_index,phase_radians,arm,mean_wald_over_n,mean_f\n");
    for r in &s.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.phase_index,
            fmt_f64(r.phase),
            r.arm.name(),
            fmt_f64(r.mean_wald_over_n),
            fmt_f64(r.mean_f)
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovRecord {
    pub arm: String,
    pub statistic: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovSummary {
    pub setting: u8,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    pub kappa_opt: f64,
    pub criterion: f64,
    pub failures: usize,
    pub cov: Vec<CovRecord>,
}

pub fn cov_summary(s: &SweepSummary) -> CovSummary {
    CovSummary {
        setting: s.setting_id,
        k: s.k,
        trials: s.trials,
        seed: s.seed,
        n: s.n,
        kappa_opt: s.kappa_opt,
        criterion: s.criterion_value,
        failures: s.failures,
        cov: s
            .cov
            .iter()
            .map(|c| CovRecord {
                arm: c.arm.name().into(),
                statistic: c.statistic.name().into(),
                value: c.value,
            })
            .collect(),
    }
}

pub fn sweep_svg(s: &SweepSummary) -> String {
    Plot {
        title: format!("Setting {}: mean Wald/N across phase", s.setting_id),
        x_label: "phase (radians)".into(),
        y_label: "mean Wald / N".into(),
        series: Arm::ALL
            .iter()
            .map(|&arm| Series {
                name: arm.name().into(),
                mark: Mark::Line,
                points: s
                    .rows
                    .iter()
                    .filter(|r| r.arm == arm)
                    .map(|r| (r.phase, r.mean_wald_over_n))
                    .collect(),
            })
            .collect(),
        guides: Vec::new(),
    }
    .render()
}
