//! Argument parsing and dispatch: ingest, compute, write files, print a summary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::*;
use crate::config::{CommonFlags, Effective, Settings};
use crate::error::{CliError, CliResult};
use crate::numfmt::{fmt_f64, to_json};
use crate::panel::{ingest_csv, read_times, write_times, TimeSeriesPanel};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "wcosinor",
    version,
    about = "Weighted cosinor regression for irregularly timed samples"
)]
pub struct Cli {
    #[command(flatten)]
    pub flags: CommonFlags,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct TimesInput {
    /// CSV with a `time_hours` column.
    #[arg(long)]
    pub times: Option<PathBuf>,
    /// Panel CSV; only its sample times are used.
    #[arg(long)]
    pub panel: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Select the kernel concentration by cross-validated D-criterion.
    Kappa {
        #[command(flatten)]
        input: TimesInput,
    },
    /// Fit every gene and report coefficients, amplitudes and phases.
    Fit {
        #[arg(long)]
        panel: PathBuf,
    },
    /// Wald and F tests for every gene.
    Screen {
        #[arg(long)]
        panel: PathBuf,
        /// Defaults to `weighted` when --weighted is set, else `unweighted`.
        #[arg(long, value_enum)]
        mode: Option<ScreenMode>,
    },
    /// Regress weighted on unweighted statistics from a `both` screening table.
    Compare {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum, default_value = "wald")]
        statistic: StatKind,
    },
    /// Monte Carlo phase sweep for one of the seven simulation settings.
    Simulate {
        #[arg(long, default_value_t = 1)]
        setting: u8,
        /// Fixed collection times instead of the setting's generator.
        #[arg(long, conflicts_with = "equispaced")]
        times: Option<PathBuf>,
        /// Use equispaced collection times.
        #[arg(long)]
        equispaced: bool,
        /// Sample size for generated time designs.
        #[arg(long)]
        samples: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Kappa { .. } => "kappa",
            Command::Fit { .. } => "fit",
            Command::Screen { .. } => "screen",
            Command::Compare { .. } => "compare",
            Command::Simulate { .. } => "simulate",
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'a str,
    effective: &'a BTreeMap<String, Effective>,
    details: BTreeMap<String, Value>,
    outputs: Vec<String>,
}

struct OutDir<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> OutDir<'a> {
    fn new(dir: &'a Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|source| CliError::Output { path, source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = to_json(value).map_err(|e| CliError::Output {
            path: self.dir.join(name),
            source: e.into(),
        })?;
        self.write(name, &text)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn load_panel(path: &Path, settings: &Settings) -> CliResult<TimeSeriesPanel> {
    let p = ingest_csv(path, settings.rows)?;
    log::info!(
        "{}: {} samples, {} genes kept of {}",
        path.display(),
        p.provenance.samples,
        p.panel.num_genes(),
        p.provenance.genes_read
    );
    Ok(p)
}

/// Runs a parsed command line, writing outputs and printing a short summary to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let settings = Settings::resolve(&cli.flags)?;
    let mut out = OutDir::new(&settings.out)?;
    let mut details = BTreeMap::new();
    let mut lines = Vec::new();

    match &cli.command {
        Command::Kappa { input } => {
            let times = match (&input.times, &input.panel) {
                (Some(t), _) => {
                    details.insert("input".into(), json!(t.display().to_string()));
                    read_times(t)?
                }
                (None, Some(p)) => {
                    let tp = load_panel(p, &settings)?;
                    details.insert("provenance".into(), to_value(&tp.provenance));
                    tp.panel.times
                }
                (None, None) => {
                    return Err(CliError::config("one of --times or --panel is required"))
                }
            };
            let r = run_kappa(&times, &settings)?;
            let report = KappaReport::from(&r);
            lines.push(format!("kappa_opt = {}", fmt_f64(report.kappa_opt)));
            lines.push(format!("criterion = {}", fmt_f64(report.criterion)));
            lines.push(format!("bound = {}", fmt_f64(report.bound)));
            out.json("kappa.json", &report)?;
            out.write("kappa_trace.csv", &kappa_trace_csv(&r))?;
            out.write("kappa_trace.svg", &kappa_svg(&r))?;
        }
        Command::Fit { panel } => {
            let tp = load_panel(panel, &settings)?;
            details.insert("provenance".into(), to_value(&tp.provenance));
            let (records, search) = run_fit(&tp.panel, &settings)?;
            if let Some(s) = &search {
                details.insert("kappa".into(), to_value(&KappaReport::from(s)));
            }
            let failed = records.iter().filter(|r| r.theta.is_none()).count();
            lines.push(format!("fitted {} genes ({failed} failed)", records.len()));
            out.json("fit.json", &records)?;
        }
        Command::Screen { panel, mode } => {
            let tp = load_panel(panel, &settings)?;
            details.insert("provenance".into(), to_value(&tp.provenance));
            let mode = mode.unwrap_or(if settings.weighted {
                ScreenMode::Weighted
            } else {
                ScreenMode::Unweighted
            });
            details.insert("mode".into(), to_value(&mode));
            let res = run_screen(&tp.panel, &settings, mode)?;
            if let Some(s) = &res.kappa {
                details.insert("kappa".into(), to_value(&KappaReport::from(s)));
            }
            lines.push(format!("screened {} genes", tp.panel.num_genes()));
            out.write("screen.csv", &screen_csv(&res))?;
        }
        Command::Compare { table, statistic } => {
            details.insert("input".into(), json!(table.display().to_string()));
            let c = compare_pairs(*statistic, read_paired_table(table, *statistic)?)?;
            lines.push(format!("beta = {}", fmt_f64(c.beta)));
            lines.push(format!(
                "weighted > unweighted: {}, weighted <= unweighted: {}, skipped: {}",
                c.weighted_greater,
                c.weighted_not_greater,
                c.skipped.len()
            ));
            out.json("compare.json", &c)?;
            out.write("compare.svg", &compare_svg(&c))?;
        }
        Command::Simulate {
            setting,
            times,
            equispaced,
            samples,
        } => {
            let explicit = match times {
                Some(p) => {
                    details.insert("times".into(), json!(p.display().to_string()));
                    Some(read_times(p)?)
                }
                None => None,
            };
            let s = simulation_setting(*setting, explicit, *equispaced, *samples)?;
            details.insert("setting".into(), json!(setting));
            details.insert("equispaced".into(), json!(equispaced));
            if let Some(n) = samples {
                details.insert("samples".into(), json!(n));
            }
            let sim = run_simulate(&s, &run_config(&settings))?;
            let cov = cov_summary(&sim.summary);
            for c in &cov.cov {
                lines.push(format!(
                    "cov {} {} = {}",
                    c.arm,
                    c.statistic,
                    c.value.map_or("undefined".into(), fmt_f64)
                ));
            }
            out.write("sweep.csv", &sweep_csv(&sim.summary))?;
            out.json("cov.json", &cov)?;
            out.write("sweep.svg", &sweep_svg(&sim.summary))?;
            let path = settings.out.join("times.csv");
            write_times(&sim.times, &path)?;
            out.written.push("times.csv".into());
        }
    }

    let meta = Metadata {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        effective: &settings.effective,
        details,
        outputs: out.written.clone(),
    };
    out.json("metadata.json", &meta)?;
    for l in lines {
        let _ = writeln!(stdout, "{l}");
    }
    Ok(())
}
