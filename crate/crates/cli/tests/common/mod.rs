#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wcosinor::config::Layout;
use wcosinor::write_panel;
use wcosinor_core::sim::{standard_normal, uniform01, TimeSource};
use wcosinor_core::Panel;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wcosinor"))
}

/// Runs the binary in `cwd`; panics with stderr on spawn failure only.
pub fn run_in(cwd: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("spawn wcosinor")
}

/// Rhythmic genes with random amplitude and phase on von Mises clustered times.
pub fn clustered_panel(n: usize, genes: usize, seed: u64) -> Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times = TimeSource::VonMises {
        n,
        mu: 0.0,
        kappa: 1.0,
    }
    .materialize(&mut rng)
    .unwrap();
    let mut ids = Vec::new();
    let mut expr = Vec::new();
    for g in 0..genes {
        let amp = 1.5 * uniform01(&mut rng);
        let phase = 2.0 * PI * uniform01(&mut rng);
        ids.push(format!("gene{g:03}"));
        expr.push(
            times
                .iter()
                .map(|t| 6.0 + amp * (PI * t / 12.0 + phase).cos() + standard_normal(&mut rng))
                .collect(),
        );
    }
    Panel::new(times, ids, expr).unwrap()
}

pub fn write_panel_file(dir: &Path, name: &str, panel: &Panel) -> PathBuf {
    let p = dir.join(name);
    write_panel(panel, &p, Layout::Samples).unwrap();
    p
}

/// Every file in `dir`, sorted by name, with contents.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}
