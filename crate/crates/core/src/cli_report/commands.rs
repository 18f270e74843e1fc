//! The batch commands. Each writes CSV files into the output directory and
//! returns an exit status: 0 pass, 1 check failure. Configuration errors
//! are returned as `Err` and map to status 2.

use std::path::{Path, PathBuf};

use crate::budget::check_run;
use crate::error::{Error, Result};
use crate::l2_operators::{
    covariance_bound, covariance_residual, isometry_residual, projection_residual,
    transfer_residual, Discretization,
};
use crate::measure::{chaos_game, exact_cell_masses, markov_fixpoint, DEFAULT_BURN_IN};
use crate::table::{fmt_g17, Table};

use super::config::{LoadedSystem, RunConfig};
use super::suites::{
    covariance_symbols, reconstruction_rows, run_all, SuiteReport, MARKOV_MAX_ITERS, MARKOV_TOL,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Loads the system, checks the cell budget and creates the output
/// directory.
pub fn prepare(cfg: &RunConfig) -> Result<LoadedSystem> {
    let sys = LoadedSystem::load(&cfg.system)?;
    check_run(sys.ifs.n(), cfg.depths.1)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))?;
    Ok(sys)
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    table.write(&path)?;
    Ok(path)
}

/// Runs every suite, writes `verify_<suite>.csv` and reports failures on
/// stderr.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(i32, Vec<SuiteReport>)> {
    let sys = prepare(cfg)?;
    let reports = run_all(&sys, cfg)?;
    let mut status = EXIT_PASS;
    for r in &reports {
        write(&r.to_table(), &cfg.out, &format!("verify_{}.csv", r.suite))?;
        let failed = r.checks.iter().filter(|c| !c.pass).count();
        println!(
            "{} {} ({} checks, {} failed)",
            if failed == 0 { "PASS" } else { "FAIL" },
            r.suite,
            r.checks.len(),
            failed
        );
        for c in r.checks.iter().filter(|c| !c.pass) {
            status = EXIT_FAILURE;
            let depth = c
                .depth
                .map(|d| format!(" at depth {d}"))
                .unwrap_or_default();
            let note = c
                .note
                .as_deref()
                .map(|n| format!(": {n}"))
                .unwrap_or_default();
            eprintln!(
                "failed check {}/{}{depth}: value {} against tolerance {}{note}",
                r.suite,
                c.check,
                fmt_g17(c.value),
                c.tolerance.label()
            );
        }
    }
    Ok((status, reports))
}

/// Exact, fixed-point and chaos-game cell masses at the deepest requested
/// depth.
pub fn cmd_measure(cfg: &RunConfig) -> Result<i32> {
    if !cfg.assume_separation {
        return Err(Error::Config(
            "exact cell masses need the measure separation assumption, which is disabled".into(),
        ));
    }
    let sys = prepare(cfg)?;
    let m = cfg.depths.1;
    let exact = exact_cell_masses(&sys.ifs, m)?;
    let fix = markov_fixpoint(&sys.ifs, m, MARKOV_MAX_ITERS, MARKOV_TOL)?;
    let emp = chaos_game(&sys.ifs, m, cfg.samples, cfg.seed, DEFAULT_BURN_IN)?;
    write(&exact.to_table(), &cfg.out, "masses_exact.csv")?;
    write(&fix.to_table(), &cfg.out, "masses_fixpoint.csv")?;
    write(&emp.to_table(), &cfg.out, "masses_empirical.csv")?;
    Ok(EXIT_PASS)
}

/// Residual-versus-depth table for the operator identities. Fails when a
/// residual exceeds its bound.
pub fn cmd_operators(cfg: &RunConfig) -> Result<i32> {
    let sys = prepare(cfg)?;
    let disc = Discretization::new(&sys.ifs, cfg.depths.1 + 1)?;
    let a = covariance_symbols(&sys, cfg).swap_remove(0);
    let tol = &cfg.tolerances;
    let mut t = Table::new(&["depth", "identity", "residual", "bound"]);
    let mut status = EXIT_PASS;
    for m in cfg.depths.0..=cfg.depths.1 {
        let transfer = match transfer_residual(&disc, m) {
            Err(Error::NonUniformWeights) => f64::NAN,
            r => r?,
        };
        let rows = [
            ("isometry", isometry_residual(&disc, m)?, tol.identity),
            (
                "covariance",
                covariance_residual(&disc, &a, m)?,
                covariance_bound(&disc, &a, m),
            ),
            ("projection", projection_residual(&disc, m)?, tol.identity),
            ("transfer-eq", transfer, tol.entry),
        ];
        for (name, r, bound) in rows {
            if !(r <= bound) {
                status = EXIT_FAILURE;
                eprintln!(
                    "identity {name} at depth {m}: residual {} above bound {}",
                    fmt_g17(r),
                    fmt_g17(bound)
                );
            }
            t.push(vec![
                m.to_string(),
                name.to_string(),
                fmt_g17(r),
                fmt_g17(bound),
            ]);
        }
    }
    write(&t, &cfg.out, "operators.csv")?;
    Ok(status)
}

/// The reconstruction experiment table.
pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<i32> {
    let sys = prepare(cfg)?;
    let rows = reconstruction_rows(&sys, cfg)?;
    let mut t = Table::new(&[
        "example",
        "depth",
        "n_bumps",
        "residual_theta",
        "residual_operator",
    ]);
    for r in rows {
        t.push(vec![
            sys.name.clone(),
            r.depth.to_string(),
            r.n_bumps.to_string(),
            fmt_g17(r.theta),
            fmt_g17(r.operator),
        ]);
    }
    write(&t, &cfg.out, "reconstruction.csv")?;
    Ok(EXIT_PASS)
}

/// `measure`, `operators`, `reconstruct` and `verify` in turn; the status
/// is the worst of the four.
pub fn cmd_report(cfg: &RunConfig) -> Result<i32> {
    let mut status = cmd_measure(cfg)?;
    status = status.max(cmd_operators(cfg)?);
    status = status.max(cmd_reconstruct(cfg)?);
    status = status.max(cmd_verify(cfg)?.0);
    Ok(status)
}
