//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use common::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wcosinor::commands::{compare_pairs, ComparisonResult, GenePair, StatKind};
use wcosinor::config::Layout;
use wcosinor::ingest_csv;
use wcosinor_core::design::{information_matrix, select_kappa, WeightVector, Weights};
use wcosinor_core::inference::{bessel_variance_oracle, screen_panel, wald_from_precision};
use wcosinor_core::kde::FoldAssignment;
use wcosinor_core::regression::fit;
use wcosinor_core::sim::{
    run_sweep, sample_von_mises, uniform01, Arm, RunConfig, SimSetting, Statistic, TimeSource,
};
use wcosinor_core::{FMode, HarmonicOrder, KappaSearch};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn k(n: usize) -> HarmonicOrder {
    HarmonicOrder::new(n).unwrap()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("runtime {took:?} exceeds {limit:?}"))
    } else {
        Ok(())
    }
}

fn c1_oracle_matrix() -> Outcome {
    let start = Instant::now();
    let o = bessel_variance_oracle();
    within(Duration::from_secs(1), start)?;
    let (a, b) = (o.matrix[(0, 0)], o.matrix[(1, 1)]);
    if (a - 0.446).abs() > 1e-3 || (b - 0.354).abs() > 1e-3 || o.matrix[(0, 1)] != 0.0 {
        return Err(format!("diag({a}, {b})"));
    }
    Ok(format!("diag({a:.6}, {b:.6})"))
}

fn c2_wald_triple() -> Outcome {
    let p = bessel_variance_oracle().matrix;
    let r2 = 2f64.sqrt();
    // γ̂ of the three example genes: (1, 1), (0, √2), (√2, 0)
    let t: Vec<f64> = [[1.0, 1.0], [0.0, r2], [r2, 0.0]]
        .iter()
        .map(|g| wald_from_precision(g, &p, 1).unwrap())
        .collect();
    let want = [0.800, 0.708, 0.892];
    for (got, w) in t.iter().zip(want) {
        if (got - w).abs() > 1e-3 {
            return Err(format!("tau/N = {t:?}"));
        }
    }
    if !(t[2] > t[0] && t[0] > t[1]) {
        return Err(format!("ordering violated: {t:?}"));
    }
    Ok(format!("tau/N = ({:.4}, {:.4}, {:.4})", t[0], t[1], t[2]))
}

fn c3_equispaced_identity() -> Outcome {
    let mut worst = 0.0f64;
    for n in [24, 48] {
        let times: Vec<f64> = (0..n).map(|i| 24.0 * i as f64 / n as f64).collect();
        for order in 1..=3 {
            let info = information_matrix(&times, &Weights::Uniform, k(order)).unwrap();
            let p = 2 * order + 1;
            for a in 0..p {
                for b in 0..p {
                    let want = match (a, b) {
                        (0, 0) => 1.0,
                        _ if a == b => 0.5,
                        _ => 0.0,
                    };
                    worst = worst.max((info.m[(a, b)] - want).abs());
                }
            }
            worst = worst.max((info.determinant() - 0.25f64.powi(order as i32)).abs());
        }
    }
    if worst > 1e-10 {
        return Err(format!("max deviation {worst:e}"));
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn c4_hadamard_fuzz() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut closest = f64::NEG_INFINITY;
    for case in 0..10_000 {
        let order = 1 + case % 3;
        let n = 1 + (uniform01(&mut rng) * 60.0) as usize;
        // mix spread-out and tightly clustered designs
        let spread = if case % 4 == 0 { 2.0 } else { 24.0 };
        let centre = 24.0 * uniform01(&mut rng);
        let times: Vec<f64> = (0..n)
            .map(|_| centre + spread * uniform01(&mut rng))
            .collect();
        let raw: Vec<f64> = (0..n).map(|_| uniform01(&mut rng).powi(3) + 1e-9).collect();
        let w = WeightVector::normalize(&raw).unwrap();
        let det = information_matrix(&times, &Weights::Explicit(w), k(order))
            .unwrap()
            .determinant();
        let bound = 0.25f64.powi(order as i32);
        if det > bound + 1e-9 {
            violations += 1;
        }
        closest = closest.max(det - bound);
    }
    within(Duration::from_secs(30), start)?;
    if violations > 0 {
        return Err(format!("{violations} violations"));
    }
    Ok(format!("0 violations, max det - bound = {closest:.3e}"))
}

fn c5_kappa_selection() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for s in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + s);
        let times = TimeSource::VonMises {
            n: 100,
            mu: 0.0,
            kappa: 1.0,
        }
        .materialize(&mut rng)
        .unwrap();
        let r = select_kappa(
            &times,
            k(1),
            &FoldAssignment::leave_one_out(100),
            &KappaSearch::default(),
        )
        .map_err(|e| e.to_string())?;
        let unweighted = information_matrix(&times, &Weights::Uniform, k(1))
            .unwrap()
            .determinant();
        if r.criterion_value < 0.23 || r.criterion_value <= unweighted {
            return Err(format!(
                "dataset {s}: criterion {} vs unweighted {unweighted}",
                r.criterion_value
            ));
        }
        worst = worst.min(r.criterion_value);
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("min criterion {worst:.4} over 20 datasets"))
}

fn c6_monte_carlo_schur() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 1_000_000;
    let (mut s, mut c, mut ss, mut cc, mut sc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let z = sample_von_mises(0.0, 1.0, &mut rng).unwrap();
        let (sz, cz) = z.sin_cos();
        s += sz;
        c += cz;
        ss += sz * sz;
        cc += cz * cz;
        sc += sz * cz;
    }
    let nf = n as f64;
    let (s, c) = (s / nf, c / nf);
    // Schur complement of the intercept block: the covariance of (sin, cos)
    let emp = [
        [ss / nf - s * s, sc / nf - s * c],
        [sc / nf - s * c, cc / nf - c * c],
    ];
    let o = bessel_variance_oracle().matrix;
    let mut worst = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            worst = worst.max((emp[a][b] - o[(a, b)]).abs());
        }
    }
    if worst > 3e-3 {
        return Err(format!("max entry deviation {worst:e}"));
    }
    Ok(format!("max entry deviation {worst:.2e}"))
}

fn c7_desk_sweep() -> Outcome {
    let start = Instant::now();
    let setting = SimSetting::numbered(1, None).unwrap();
    let summary = run_sweep(&setting, &RunConfig::new(k(1), 500, 1)).map_err(|e| e.to_string())?;
    within(Duration::from_secs(600), start)?;
    let cov = |arm| summary.cov(arm, Statistic::WaldOverN).unwrap_or(f64::NAN);
    let (u, e, w) = (
        cov(Arm::Unweighted),
        cov(Arm::UnweightedEquispaced),
        cov(Arm::Weighted),
    );
    let line = format!(
        "CoV unweighted {u:.4}, weighted {w:.4}, equispaced {e:.4} (N = {})",
        summary.n
    );
    if w < u && e < w {
        Ok(line)
    } else {
        Err(line)
    }
}

fn c8_uniform_weight_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 8 + (uniform01(&mut rng) * 40.0) as usize;
        let order = 1 + (uniform01(&mut rng) * 3.0) as usize;
        let times: Vec<f64> = (0..n).map(|_| 24.0 * uniform01(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| 10.0 * uniform01(&mut rng) - 5.0).collect();
        let explicit = Weights::Explicit(WeightVector::new(vec![1.0 / n as f64; n]).unwrap());
        let (Ok(a), Ok(b)) = (
            fit(&times, &y, &explicit, k(order)),
            fit(&times, &y, &Weights::Uniform, k(order)),
        ) else {
            continue;
        };
        for (x, z) in a.theta_hat.iter().zip(&b.theta_hat) {
            worst = worst.max((x - z).abs());
        }
        worst = worst.max((a.sigma2_hat - b.sigma2_hat).abs());
    }
    if worst > 1e-12 {
        return Err(format!("max difference {worst:e}"));
    }
    Ok(format!("max difference {worst:.2e} over 100 panels"))
}

fn c9_comparison_math() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pairs: Vec<GenePair> = (0..100)
        .map(|g| {
            let u = 20.0 * uniform01(&mut rng);
            GenePair {
                gene: format!("g{g}"),
                unweighted: u,
                weighted: 1.1 * u,
            }
        })
        .collect();
    let prop = compare_pairs(StatKind::Wald, pairs).map_err(|e| e.to_string())?;
    if (prop.beta - 1.1).abs() > 1e-12 {
        return Err(format!("proportional beta {}", prop.beta));
    }

    // mixed data: a clustered 100-gene panel screened through the binary
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let p = write_panel_file(d, "panel.csv", &clustered_panel(40, 100, 99));
    for args in [
        &[
            "screen",
            "--panel",
            "panel.csv",
            "--mode",
            "both",
            "--out",
            "s",
        ][..],
        &["compare", "--table", "s/screen.csv", "--out", "c"][..],
    ] {
        let out = run_in(d, args);
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
    }
    let c: ComparisonResult =
        serde_json::from_str(&fs::read_to_string(d.join("c/compare.json")).unwrap())
            .map_err(|e| e.to_string())?;

    let panel = ingest_csv(&p, Layout::Samples).unwrap().panel;
    let (w, _) = wcosinor_core::design::optimal_weights(
        &panel.times,
        k(1),
        &FoldAssignment::leave_one_out(panel.num_samples()),
        &KappaSearch::default(),
    )
    .unwrap();
    let u = screen_panel(&panel, &Weights::Uniform, k(1), FMode::Paper).unwrap();
    let v = screen_panel(&panel, &Weights::Explicit(w), k(1), FMode::Paper).unwrap();
    let (mut num, mut den, mut greater) = (0.0f64, 0.0f64, 0usize);
    for (a, b) in u.iter().zip(&v) {
        num += a.wald_stat * b.wald_stat;
        den += a.wald_stat * a.wald_stat;
        greater += usize::from(b.wald_stat > a.wald_stat);
    }
    let beta = num / den;
    if (c.beta - beta).abs() > 1e-12 * beta.abs() || c.weighted_greater != greater || c.genes != 100
    {
        return Err(format!(
            "CLI beta {} counts {} vs oracle {beta} {greater}",
            c.beta, c.weighted_greater
        ));
    }
    Ok(format!(
        "proportional beta {:.15}; mixed beta {:.6}, counts ({}, {})",
        prop.beta, c.beta, c.weighted_greater, c.weighted_not_greater
    ))
}

fn c10_determinism() -> Outcome {
    let inputs = tempfile::tempdir().map_err(|e| e.to_string())?;
    let panel = write_panel_file(inputs.path(), "panel.csv", &clustered_panel(30, 25, 10));
    let times = inputs.path().join("times.csv");
    wcosinor::panel::write_times(&clustered_panel(30, 0, 10).times, &times).unwrap();
    let (panel, times) = (
        panel.to_str().unwrap().to_string(),
        times.to_str().unwrap().to_string(),
    );
    let table = format!("{}/screen.csv", inputs.path().join("both").display());
    let seed_run = run_in(
        inputs.path(),
        &[
            "screen", "--panel", &panel, "--mode", "both", "--out", "both",
        ],
    );
    if !seed_run.status.success() {
        return Err("could not prepare comparison table".into());
    }
    let commands: Vec<Vec<&str>> = vec![
        vec!["kappa", "--times", &times, "--folds", "5", "--seed", "3"],
        vec!["fit", "--panel", &panel, "--weighted"],
        vec![
            "screen",
            "--panel",
            &panel,
            "--mode",
            "both",
            "--f-mode",
            "classical",
        ],
        vec!["compare", "--table", &table, "--statistic", "f"],
        vec![
            "simulate",
            "--setting",
            "7",
            "--trials",
            "20",
            "--seed",
            "11",
        ],
    ];
    for cmd in &commands {
        let runs: Vec<_> = (0..2)
            .map(|_| {
                let cwd = tempfile::tempdir().unwrap();
                let mut args = cmd.clone();
                args.extend(["--out", "out"]);
                let out = run_in(cwd.path(), &args);
                (
                    out.status.code(),
                    out.stdout,
                    snapshot(&cwd.path().join("out")),
                )
            })
            .collect();
        if runs[0].0 != Some(0) {
            return Err(format!("`{}` exited {:?}", cmd[0], runs[0].0));
        }
        if runs[0] != runs[1] {
            return Err(format!("`{}` outputs differ between runs", cmd[0]));
        }
    }
    Ok(format!(
        "{} commands byte-identical across repeated runs",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 variance oracle", c1_oracle_matrix),
        ("2 Wald triple", c2_wald_triple),
        ("3 equispaced identity", c3_equispaced_identity),
        ("4 determinant bound fuzz", c4_hadamard_fuzz),
        ("5 kappa selection", c5_kappa_selection),
        ("6 Monte Carlo Schur block", c6_monte_carlo_schur),
        ("7 desk-scale sweep", c7_desk_sweep),
        (
            "8 uniform-weight equivalence",
            c8_uniform_weight_equivalence,
        ),
        ("9 comparison math", c9_comparison_math),
        ("10 determinism", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{took:.2}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{took:.2}s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
