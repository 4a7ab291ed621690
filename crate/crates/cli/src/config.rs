//! Effective settings: command-line flags override a `key = value` config
//! file, which overrides built-in defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use wcosinor_core::design::KappaSearch;
use wcosinor_core::sim::{FoldSpec, DEFAULT_TRIALS};
use wcosinor_core::{FMode, HarmonicOrder};

use crate::error::{CliError, CliResult};

/// Flags shared by every subcommand. Unset flags fall through to the config file.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonFlags {
    /// Number of harmonics K (1 to 3).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Use kernel-density weights.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub weighted: Option<bool>,
    /// Cross-validation folds for κ selection: a fold count or `loo`.
    #[arg(long, global = true)]
    pub folds: Option<String>,
    /// κ search grid as `lo:hi:n` (log-spaced).
    #[arg(long = "kappa-grid", global = true)]
    pub kappa_grid: Option<String>,
    /// Monte Carlo trials per phase.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// F statistic definition: `paper` or `classical`.
    #[arg(long = "f-mode", global = true)]
    pub f_mode: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Panel layout: `samples` (one row per sample) or `genes`.
    #[arg(long, global = true)]
    pub rows: Option<String>,
    /// `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    Config,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Header `time_hours,gene…`; one row per sample.
    Samples,
    /// Header `label,time…`; one row per gene.
    Genes,
}

pub const KEYS: [&str; 9] = [
    "order",
    "weighted",
    "folds",
    "kappa_grid",
    "trials",
    "seed",
    "f_mode",
    "out",
    "rows",
];

fn default_value(key: &str) -> String {
    match key {
        "order" => "1".into(),
        "weighted" => "false".into(),
        "folds" => "loo".into(),
        "kappa_grid" => {
            let s = KappaSearch::default();
            format!("{}:{}:{}", s.lo, s.hi, s.grid_points)
        }
        "trials" => DEFAULT_TRIALS.to_string(),
        "seed" => "1".into(),
        "f_mode" => "paper".into(),
        "out" => "wcosinor-out".into(),
        "rows" => "samples".into(),
        _ => unreachable!("unknown key {key}"),
    }
}

/// Parsed and validated settings plus the raw effective value of every key.
#[derive(Debug, Clone)]
pub struct Settings {
    pub order: HarmonicOrder,
    pub weighted: bool,
    pub folds: FoldSpec,
    pub search: KappaSearch,
    pub trials: usize,
    pub seed: u64,
    pub f_mode: FMode,
    pub out: PathBuf,
    pub rows: Layout,
    pub effective: BTreeMap<String, Effective>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Effective {
    pub value: String,
    pub source: Source,
}

/// Reads a config file: `key = value` lines, `#` comments, dashes and
/// underscores interchangeable in keys.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!(
                "line {}: unknown key `{}`",
                lineno + 1,
                k.trim()
            )));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn flag_values(flags: &CommonFlags) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    put("order", flags.order.map(|v| v.to_string()));
    put("weighted", flags.weighted.map(|v| v.to_string()));
    put("folds", flags.folds.clone());
    put("kappa_grid", flags.kappa_grid.clone());
    put("trials", flags.trials.map(|v| v.to_string()));
    put("seed", flags.seed.map(|v| v.to_string()));
    put("f_mode", flags.f_mode.clone());
    put("out", flags.out.as_ref().map(|p| p.display().to_string()));
    put("rows", flags.rows.clone());
    m
}

impl Settings {
    /// Resolves flags, the optional config file and defaults.
    pub fn resolve(flags: &CommonFlags) -> CliResult<Self> {
        let file = match &flags.config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        Self::layered(&flag_values(flags), &file)
    }

    fn layered(
        flags: &BTreeMap<String, String>,
        file: &BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let mut effective = BTreeMap::new();
        for key in KEYS {
            let eff = if let Some(v) = flags.get(key) {
                Effective {
                    value: v.clone(),
                    source: Source::Flag,
                }
            } else if let Some(v) = file.get(key) {
                Effective {
                    value: v.clone(),
                    source: Source::Config,
                }
            } else {
                Effective {
                    value: default_value(key),
                    source: Source::Default,
                }
            };
            effective.insert(key.to_string(), eff);
        }
        let get = |k: &str| effective[k].value.as_str();
        Ok(Self {
            order: parse_order(get("order"))?,
            weighted: parse_bool(get("weighted"))?,
            folds: parse_folds(get("folds"))?,
            search: parse_kappa_grid(get("kappa_grid"))?,
            trials: parse_positive(get("trials"), "trials")?,
            seed: get("seed").parse().map_err(|_| {
                CliError::config(format!("seed `{}` is not an unsigned integer", get("seed")))
            })?,
            f_mode: parse_f_mode(get("f_mode"))?,
            out: PathBuf::from(get("out")),
            rows: parse_layout(get("rows"))?,
            effective,
        })
    }
}

fn parse_order(s: &str) -> CliResult<HarmonicOrder> {
    let k: usize = s
        .parse()
        .map_err(|_| CliError::config(format!("order `{s}` is not an integer")))?;
    HarmonicOrder::new(k)
        .map_err(|_| CliError::config(format!("order must be 1, 2 or 3 (got {k})")))
}

fn parse_bool(s: &str) -> CliResult<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::config(format!("`{s}` is not a boolean"))),
    }
}

fn parse_positive(s: &str, what: &str) -> CliResult<usize> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(CliError::config(format!(
            "{what} must be a positive integer (got `{s}`)"
        ))),
    }
}

pub fn parse_folds(s: &str) -> CliResult<FoldSpec> {
    if s.eq_ignore_ascii_case("loo") {
        return Ok(FoldSpec::LeaveOneOut);
    }
    match s.parse::<usize>() {
        Ok(m) if m >= 2 => Ok(FoldSpec::Random(m)),
        _ => Err(CliError::config(format!(
            "folds must be `loo` or an integer ≥ 2 (got `{s}`)"
        ))),
    }
}

pub fn parse_kappa_grid(s: &str) -> CliResult<KappaSearch> {
    let bad = || {
        CliError::config(format!(
            "kappa grid must be lo:hi:n with 0 < lo < hi, n ≥ 2 (got `{s}`)"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite() && n >= 2) {
        return Err(bad());
    }
    Ok(KappaSearch {
        lo,
        hi,
        grid_points: n,
        ..KappaSearch::default()
    })
}

fn parse_f_mode(s: &str) -> CliResult<FMode> {
    match s.to_ascii_lowercase().as_str() {
        "paper" => Ok(FMode::Paper),
        "classical" => Ok(FMode::Classical),
        _ => Err(CliError::config(format!(
            "f-mode must be `paper` or `classical` (got `{s}`)"
        ))),
    }
}

fn parse_layout(s: &str) -> CliResult<Layout> {
    match s.to_ascii_lowercase().as_str() {
        "samples" => Ok(Layout::Samples),
        "genes" => Ok(Layout::Genes),
        _ => Err(CliError::config(format!(
            "rows must be `samples` or `genes` (got `{s}`)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn precedence_flag_over_file_over_default() {
        let flags = map(&[("order", "2")]);
        let file = map(&[("order", "3"), ("seed", "9")]);
        let s = Settings::layered(&flags, &file).unwrap();
        assert_eq!(s.order.get(), 2);
        assert_eq!(s.seed, 9);
        assert_eq!(s.trials, DEFAULT_TRIALS);
        assert_eq!(s.effective["order"].source, Source::Flag);
        assert_eq!(s.effective["seed"].source, Source::Config);
        assert_eq!(s.effective["trials"].source, Source::Default);
    }

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text(
            "# comment\nkappa-grid = 0.01:100:30\n\nf_mode=classical # trailing\n",
        )
        .unwrap();
        assert_eq!(m["kappa_grid"], "0.01:100:30");
        assert_eq!(m["f_mode"], "classical");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("order 2").is_err());
    }

    #[test]
    fn value_validation() {
        assert!(parse_order("4").is_err());
        assert_eq!(parse_folds("5").unwrap(), FoldSpec::Random(5));
        assert_eq!(parse_folds("LOO").unwrap(), FoldSpec::LeaveOneOut);
        assert!(parse_folds("1").is_err());
        let g = parse_kappa_grid("0.1:10:7").unwrap();
        assert_eq!((g.lo, g.hi, g.grid_points), (0.1, 10.0, 7));
        assert!(parse_kappa_grid("10:1:5").is_err());
        assert!(parse_kappa_grid("1:2").is_err());
        assert!(parse_f_mode("other").is_err());
        assert!(parse_layout("cols").is_err());
        for e in [
            parse_bool("maybe").unwrap_err(),
            parse_order("x").unwrap_err(),
        ] {
            assert_eq!(e.exit_code(), 4);
        }
    }
}
