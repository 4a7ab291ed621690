//! Panel and time-vector CSV ingestion and writing.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use wcosinor_core::basis::reduce_hours;
use wcosinor_core::Panel;

use crate::config::Layout;
use crate::error::{CliError, CliResult};
use crate::numfmt::{fmt_f64, parse_f64};

pub const TIME_COLUMN: &str = "time_hours";

/// Where a panel came from and what ingestion did to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub source: String,
    pub layout: Layout,
    pub samples: usize,
    pub genes_read: usize,
    /// Genes removed because of missing or non-numeric entries.
    pub dropped: Vec<String>,
}

/// Expression panel with every gene complete and times reduced to `[0, 24)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    pub panel: Panel,
    pub provenance: Provenance,
}

impl TimeSeriesPanel {
    pub fn times(&self) -> &[f64] {
        &self.panel.times
    }
}

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::ingest(path, e.to_string()))
}

fn read_rows(path: &Path) -> CliResult<Vec<csv::StringRecord>> {
    reader(path)?
        .records()
        .map(|r| r.map_err(|e| CliError::ingest(path, e.to_string())))
        .collect()
}

fn parse_time(path: &Path, s: &str, row: usize, col: usize) -> CliResult<f64> {
    match parse_f64(s) {
        Some(t) if t.is_finite() => Ok(reduce_hours(t)),
        _ => Err(CliError::ingest(
            path,
            format!("row {row}, column {col}: sample time `{s}` is not a finite number"),
        )),
    }
}

/// Reads a panel CSV in either layout.
///
/// Genes with any missing or non-numeric entry are dropped and logged; an
/// unparseable file, duplicate gene ids or fewer than 2 samples is an error.
pub fn ingest_csv(path: &Path, layout: Layout) -> CliResult<TimeSeriesPanel> {
    let rows = read_rows(path)?;
    let header = rows
        .first()
        .ok_or_else(|| CliError::ingest(path, "file is empty"))?;
    let (times, ids, cells): (Vec<f64>, Vec<String>, Vec<Vec<String>>) = match layout {
        Layout::Samples => {
            if header.get(0) != Some(TIME_COLUMN) {
                return Err(CliError::ingest(
                    path,
                    format!(
                        "row 1, column 1: expected `{TIME_COLUMN}`, found `{}`",
                        header.get(0).unwrap_or("")
                    ),
                ));
            }
            let ids: Vec<String> = header.iter().skip(1).map(String::from).collect();
            let mut times = Vec::with_capacity(rows.len() - 1);
            let mut cells = vec![Vec::with_capacity(rows.len() - 1); ids.len()];
            for (r, rec) in rows.iter().enumerate().skip(1) {
                times.push(parse_time(path, &rec[0], r + 1, 1)?);
                for (g, v) in rec.iter().skip(1).enumerate() {
                    cells[g].push(v.to_string());
                }
            }
            (times, ids, cells)
        }
        Layout::Genes => {
            let times = header
                .iter()
                .enumerate()
                .skip(1)
                .map(|(c, s)| parse_time(path, s, 1, c + 1))
                .collect::<CliResult<Vec<_>>>()?;
            let mut ids = Vec::new();
            let mut cells = Vec::new();
            for rec in rows.iter().skip(1) {
                ids.push(rec[0].to_string());
                cells.push(rec.iter().skip(1).map(String::from).collect());
            }
            (times, ids, cells)
        }
    };
    if times.len() < 2 {
        return Err(CliError::ingest(
            path,
            format!("need at least 2 samples, found {}", times.len()),
        ));
    }
    let mut seen = HashSet::new();
    for (i, id) in ids.iter().enumerate() {
        if id.is_empty() {
            return Err(CliError::ingest(
                path,
                format!("gene {} has an empty identifier", i + 1),
            ));
        }
        if !seen.insert(id.as_str()) {
            return Err(CliError::ingest(path, format!("duplicate gene id `{id}`")));
        }
    }
    let genes_read = ids.len();
    let mut dropped = Vec::new();
    let mut kept_ids = Vec::new();
    let mut expr = Vec::new();
    for (id, raw) in ids.into_iter().zip(cells) {
        let values: Option<Vec<f64>> = raw
            .iter()
            .map(|s| parse_f64(s).filter(|v| v.is_finite()))
            .collect();
        match values {
            Some(v) => {
                kept_ids.push(id);
                expr.push(v);
            }
            None => dropped.push(id),
        }
    }
    if !dropped.is_empty() {
        log::warn!(
            "{}: dropped {} gene(s) with missing or non-numeric values",
            path.display(),
            dropped.len()
        );
    }
    let provenance = Provenance {
        source: path.display().to_string(),
        layout,
        samples: times.len(),
        genes_read,
        dropped,
    };
    let panel =
        Panel::new(times, kept_ids, expr).map_err(|e| CliError::ingest(path, e.to_string()))?;
    Ok(TimeSeriesPanel { panel, provenance })
}

fn output_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_output_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Output {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// Writes a panel in the given layout with 17-digit numbers.
pub fn write_panel(panel: &Panel, path: &Path, layout: Layout) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_output_err(path))?;
    let err = csv_output_err(path);
    match layout {
        Layout::Samples => {
            let mut header = vec![TIME_COLUMN.to_string()];
            header.extend(panel.gene_ids.iter().cloned());
            w.write_record(&header).map_err(&err)?;
            for (i, t) in panel.times.iter().enumerate() {
                let mut rec = vec![fmt_f64(*t)];
                rec.extend(panel.expr.iter().map(|g| fmt_f64(g[i])));
                w.write_record(&rec).map_err(&err)?;
            }
        }
        Layout::Genes => {
            let mut header = vec!["gene".to_string()];
            header.extend(panel.times.iter().map(|t| fmt_f64(*t)));
            w.write_record(&header).map_err(&err)?;
            for (id, row) in panel.gene_ids.iter().zip(&panel.expr) {
                let mut rec = vec![id.clone()];
                rec.extend(row.iter().map(|v| fmt_f64(*v)));
                w.write_record(&rec).map_err(&err)?;
            }
        }
    }
    w.flush().map_err(output_err(path))
}

/// Reads the `time_hours` column of a time-vector CSV, reduced to `[0, 24)`.
pub fn read_times(path: &Path) -> CliResult<Vec<f64>> {
    let rows = read_rows(path)?;
    let header = rows
        .first()
        .ok_or_else(|| CliError::ingest(path, "file is empty"))?;
    let col = header
        .iter()
        .position(|h| h == TIME_COLUMN)
        .ok_or_else(|| CliError::ingest(path, format!("row 1: no `{TIME_COLUMN}` column")))?;
    let times = rows
        .iter()
        .enumerate()
        .skip(1)
        .map(|(r, rec)| {
            let cell = rec.get(col).ok_or_else(|| {
                CliError::ingest(path, format!("row {}: missing column {}", r + 1, col + 1))
            })?;
            parse_time(path, cell, r + 1, col + 1)
        })
        .collect::<CliResult<Vec<_>>>()?;
    if times.len() < 2 {
        return Err(CliError::ingest(
            path,
            format!("need at least 2 samples, found {}", times.len()),
        ));
    }
    Ok(times)
}

/// Writes a single-column `time_hours` CSV.
pub fn write_times(times: &[f64], path: &Path) -> CliResult<()> {
    let mut f = File::create(path).map_err(output_err(path))?;
    let mut text = format!("{TIME_COLUMN}\n");
    for t in times {
        text.push_str(&fmt_f64(*t));
        text.push('\n');
    }
    f.write_all(text.as_bytes()).map_err(output_err(path))
}
