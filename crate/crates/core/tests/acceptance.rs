// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use common::{distance_to_segments, in_open_box, segment_samples, within_band};
use ifs_lab::bimodule::{
    build_bump_partition, covariant_rep_check, reconstruction_vectors,
    verify_operator_reconstruction, verify_theta_reconstruction, AdmissibleSymbol, DEFAULT_DELTA,
};
use ifs_lab::catalog;
use ifs_lab::geometry::AxisBox;
use ifs_lab::ifs_core::{
    branch_coincidence_set, branch_value_set, check_open_set_condition, is_finite_branch,
    AffinePiece, IfsSystem, OscViolation,
};
use ifs_lab::l2_operators::{
    covariance_residual, isometry_residual, projection_residual, transfer_residual, Discretization,
};
use ifs_lab::measure::{chaos_game, exact_cell_masses, markov_fixpoint, DEFAULT_BURN_IN};
use ifs_lab::symbols::{SharedSymbol, SinBump, TrigSum};

type Outcome = Result<String, String>;

fn system(name: &str) -> IfsSystem {
    catalog::lookup(name).unwrap().system
}

fn ratios(r: &[f64]) -> Vec<f64> {
    r.windows(2).map(|w| w[1] / w[0]).collect()
}

fn in_band(r: &[f64], lo: f64, hi: f64) -> bool {
    r.iter().all(|&x| lo <= x && x <= hi)
}

fn fmt_list(r: &[f64]) -> String {
    r.iter()
        .map(|x| format!("{x:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_operator_identities() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for name in ["tent_square", "tent_sigma"] {
        let disc = Discretization::new(&system(name), 6).map_err(|e| e.to_string())?;
        for m in 2..=5 {
            let iso = isometry_residual(&disc, m).map_err(|e| e.to_string())?;
            let proj = projection_residual(&disc, m).map_err(|e| e.to_string())?;
            let tr = transfer_residual(&disc, m).map_err(|e| e.to_string())?;
            worst = (worst.0.max(iso), worst.1.max(proj), worst.2.max(tr));
        }
    }
    check(
        worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 <= 1e-14,
        format!(
            "max isometry {:.2e}, projection {:.2e}, entrywise C* - L {:.2e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn c2_covariance_convergence() -> Outcome {
    let s = system("tent_square");
    let disc = Discretization::new(&s, 7).map_err(|e| e.to_string())?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..20u64 {
        let a: SharedSymbol = Arc::new(TrigSum::random(s.ambient(), 4, 7000 + k));
        let r = (2..=6)
            .map(|m| covariance_residual(&disc, &a, m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        for q in ratios(&r) {
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    check(
        in_band(&[lo, hi], 0.25, 0.75),
        format!("20 symbols, depths 2..6, step ratios in [{lo:.3}, {hi:.3}]"),
    )
}

fn c3_measure() -> Outcome {
    let mut tv: f64 = 0.0;
    for (name, m) in [("tent_square", 4), ("tent_sigma", 3)] {
        let s = system(name);
        let exact = exact_cell_masses(&s, m).map_err(|e| e.to_string())?;
        let fix = markov_fixpoint(&s, m, 10_000, 1e-15).map_err(|e| e.to_string())?;
        tv = tv.max(fix.total_variation(&exact).map_err(|e| e.to_string())?);
    }
    let samples = 1_000_000;
    let mut worst_fraction: f64 = 1.0;
    for (name, m) in [("tent_square", 4), ("tent_sigma", 3)] {
        let s = system(name);
        let exact = exact_cell_masses(&s, m).map_err(|e| e.to_string())?;
        for seed in 1..=10 {
            let emp =
                chaos_game(&s, m, samples, seed, DEFAULT_BURN_IN).map_err(|e| e.to_string())?;
            let inside = emp
                .masses()
                .iter()
                .zip(exact.masses())
                .filter(|(f, p)| within_band(**f, **p, samples, 4.0))
                .count();
            worst_fraction = worst_fraction.min(inside as f64 / exact.masses().len() as f64);
        }
    }
    check(
        tv <= 1e-10 && worst_fraction >= 0.95,
        format!(
            "fixed point TV {tv:.2e}; worst seed has {:.1}% of cells in 4-sigma bands",
            100.0 * worst_fraction
        ),
    )
}

fn same_union(reported: &[AffinePiece], expected: &[Vec<Vec<f64>>]) -> f64 {
    let rep: Vec<Vec<Vec<f64>>> = reported.iter().map(|p| p.vertices.clone()).collect();
    let a = rep
        .iter()
        .flat_map(|s| segment_samples(s, 64))
        .map(|p| distance_to_segments(&p, expected))
        .fold(0.0, f64::max);
    let b = expected
        .iter()
        .flat_map(|s| segment_samples(s, 64))
        .map(|p| distance_to_segments(&p, &rep))
        .fold(0.0, f64::max);
    a.max(b)
}

fn c4_branch_sets() -> Outcome {
    let s = system("tent_square");
    let c = branch_coincidence_set(&s);
    let v = branch_value_set(&s, &c);
    let coincidence = vec![
        vec![vec![0.0, 1.0], vec![1.0, 1.0]],
        vec![vec![1.0, 0.0], vec![1.0, 1.0]],
    ];
    let values = vec![
        vec![vec![0.0, 0.5], vec![1.0, 0.5]],
        vec![vec![0.5, 0.0], vec![0.5, 1.0]],
    ];
    let (dc, dv) = (same_union(&c, &coincidence), same_union(&v, &values));
    let finite_square = is_finite_branch(&c);
    let finite_1d = is_finite_branch(&branch_coincidence_set(&system("tent_1d")));
    check(
        dc <= 1e-12 && dv <= 1e-12 && !finite_square && finite_1d,
        format!(
            "coincidence set off by {dc:.1e}, value set off by {dv:.1e}; finite branch: square {finite_square}, tent_1d {finite_1d}"
        ),
    )
}

fn c5_open_set_condition() -> Outcome {
    let unit = AxisBox::unit(2);
    let square =
        check_open_set_condition(&system("tent_square"), &unit).map_err(|e| e.to_string())?;
    let sigma =
        check_open_set_condition(&system("tent_sigma"), &unit).map_err(|e| e.to_string())?;
    let bad_sys = system("overlap_bad");
    let bad = check_open_set_condition(&bad_sys, &AxisBox::unit(1)).map_err(|e| e.to_string())?;
    // the witness must lie in both open images
    let witness_ok = match bad.first_violation() {
        Some(OscViolation::Overlap { pair, witness }) => [pair.0, pair.1]
            .iter()
            .all(|&i| in_open_box(&bad_sys.branch(i).invert(witness), &[0.0], &[1.0], 0.0)),
        Some(OscViolation::Containment { branch, witness }) => {
            in_open_box(witness, &[0.0], &[1.0], 0.0)
                && !in_open_box(&bad_sys.branch(*branch).apply(witness), &[0.0], &[1.0], 0.0)
        }
        None => false,
    };
    let note = bad
        .first_violation()
        .map(|v| v.to_string())
        .unwrap_or_else(|| "no violation".into());
    check(
        square.passed() && sigma.passed() && !bad.passed() && witness_ok,
        format!(
            "tent_square {}, tent_sigma {}, overlap_bad: {note}",
            square.passed(),
            sigma.passed()
        ),
    )
}

fn reconstruction_ratios(
    name: &str,
    depths: std::ops::RangeInclusive<usize>,
) -> Result<(Vec<f64>, Vec<f64>, f64), String> {
    let e = catalog::lookup(name).map_err(|e| e.to_string())?;
    let support = e.facts.symbol_support.clone().ok_or("no symbol support")?;
    let a = AdmissibleSymbol::new(
        Arc::new(SinBump::new(support.clone())),
        Some(support),
        &e.system,
        DEFAULT_DELTA,
    )
    .map_err(|e| e.to_string())?;
    let p = build_bump_partition(&a, &e.system, DEFAULT_DELTA).map_err(|e| e.to_string())?;
    let (mut th, mut op, mut cell) = (vec![], vec![], 0.0f64);
    for m in depths {
        let (xi, eta) = reconstruction_vectors(&e.system, &a, &p, m).map_err(|e| e.to_string())?;
        let t = verify_theta_reconstruction(&e.system, &a, &xi, &eta, 20, 7, m)
            .map_err(|e| e.to_string())?;
        let o = verify_operator_reconstruction(&e.system, &a, &xi, &eta, m)
            .map_err(|e| e.to_string())?;
        th.push(t.continuum);
        op.push(o.continuum);
        cell = cell.max(t.cell).max(o.cell);
    }
    Ok((ratios(&th), ratios(&op), cell))
}

fn c6_reconstruction() -> Outcome {
    let (sq_t, sq_o, sq_c) = reconstruction_ratios("tent_square", 3..=6)?;
    let (sg_t, sg_o, sg_c) = reconstruction_ratios("tent_sigma", 2..=4)?;
    let ok = [&sq_t, &sq_o, &sg_t, &sg_o]
        .iter()
        .all(|r| in_band(r, 0.3, 0.7));
    check(
        ok,
        format!(
            "tent_square theta [{}] operator [{}]; tent_sigma theta [{}] operator [{}]; cell defect {:.1e}",
            fmt_list(&sq_t),
            fmt_list(&sq_o),
            fmt_list(&sg_t),
            fmt_list(&sg_o),
            sq_c.max(sg_c)
        ),
    )
}

fn c7_covariant() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in ["tent_square", "tent_sigma"] {
        let r = covariant_rep_check(&system(name), 3, 20, 7).map_err(|e| e.to_string())?;
        worst = worst.max(r.left_module).max(r.inner_product);
    }
    check(
        worst <= 1e-12,
        format!("20 triples at depth 3, max residual {worst:.2e}"),
    )
}

fn report(out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_ifs-lab"))
        .args([
            "report",
            "--system",
            "tent_square",
            "--depths",
            "2..4",
            "--seed",
            "7",
            "--samples",
            "200000",
        ])
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    match o.status.code() {
        Some(0) => Ok(()),
        c => Err(format!("report exited with {c:?}")),
    }
}

fn c8_determinism() -> Outcome {
    let (a, b) = (
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    );
    report(a.path())?;
    report(b.path())?;
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    let differing: Vec<&String> = names
        .iter()
        .filter(|n| std::fs::read(a.path().join(n)).ok() != std::fs::read(b.path().join(n)).ok())
        .collect();
    check(
        names.len() == 13 && differing.is_empty(),
        format!(
            "{} CSV files compared, {} differ",
            names.len(),
            differing.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 exact operator identities", c1_operator_identities),
        ("2 covariance convergence", c2_covariance_convergence),
        ("3 measure fixed point and chaos game", c3_measure),
        ("4 branch-set geometry", c4_branch_sets),
        ("5 open set condition", c5_open_set_condition),
        ("6 reconstruction convergence", c6_reconstruction),
        ("7 covariant representation", c7_covariant),
        ("8 determinism of report", c8_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
