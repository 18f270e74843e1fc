//! The verification suites run by `verify`, in their fixed order.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bimodule::{
    build_bump_partition, covariant_rep_check, reconstruction_vectors,
    verify_operator_reconstruction, verify_theta_reconstruction, AdmissibleSymbol,
};
use crate::error::{Error, Result};
use crate::ifs_core::checks::ATTRACTOR_CHECK_RESOLUTION;
use crate::ifs_core::{
    check_open_set_condition, grid_spacing, self_similarity_defect, verify_inverse_branches,
    BranchSets,
};
use crate::l2_operators::{
    covariance_bound, covariance_residual, isometry_residual, projection_residual,
    transfer_residual, Discretization,
};
use crate::measure::{exact_cell_masses, markov_fixpoint, self_similarity_residual, Word};
use crate::symbols::{SharedSymbol, SinBump, TrigSum};
use crate::table::{fmt_g17, Table};

use super::config::{LoadedSystem, RunConfig};

/// Grid resolution of the inverse-branch check.
pub const INVERSE_BRANCH_RESOLUTION: usize = 64;
/// Iteration cap and stopping tolerance for the Markov fixed point.
pub const MARKOV_MAX_ITERS: usize = 10_000;
pub const MARKOV_TOL: f64 = 1e-15;
/// Terms in the random covariance symbols.
pub const COVARIANCE_TERMS: usize = 4;

/// Acceptance rule of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// `value <= t`.
    Max(f64),
    /// `lo <= value <= hi`.
    Band(f64, f64),
}

impl Tolerance {
    /// NaN never passes.
    pub fn accepts(&self, v: f64) -> bool {
        match *self {
            Tolerance::Max(t) => v <= t,
            Tolerance::Band(lo, hi) => lo <= v && v <= hi,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Tolerance::Max(t) => fmt_g17(t),
            Tolerance::Band(lo, hi) => format!("{}..{}", fmt_g17(lo), fmt_g17(hi)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub check: String,
    pub depth: Option<usize>,
    pub value: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
    /// Extra context printed for failures.
    pub note: Option<String>,
}

impl Check {
    pub fn new(check: &str, depth: Option<usize>, value: f64, tolerance: Tolerance) -> Self {
        Self {
            check: check.to_string(),
            depth,
            value,
            tolerance,
            pass: tolerance.accepts(value),
            note: None,
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `check,depth,value,tolerance,pass`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["check", "depth", "value", "tolerance", "pass"]);
        for c in &self.checks {
            t.push(vec![
                c.check.clone(),
                c.depth.map(|d| d.to_string()).unwrap_or_default(),
                fmt_g17(c.value),
                c.tolerance.label(),
                c.pass.to_string(),
            ]);
        }
        t
    }
}

/// Suite names in execution order.
pub const SUITES: [&str; 8] = [
    "inverse-branch",
    "self-similarity",
    "open-set-condition",
    "branch-sets",
    "measure",
    "operators",
    "covariant",
    "reconstruction",
];

/// Errors that stem from the configuration rather than from a failed
/// check; they abort a run with exit status 2.
pub fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::DepthOverflow { .. }
            | Error::Parse(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::InvalidBox(_)
            | Error::InvalidWeights(_)
            | Error::DimensionMismatch { .. }
            | Error::NotAContraction { .. }
            | Error::BranchLeavesBox { .. }
            | Error::NotAdmissible(_)
    )
}

fn depths(cfg: &RunConfig) -> impl Iterator<Item = usize> + Clone {
    cfg.depths.0..=cfg.depths.1
}

fn inverse_branch(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<Check>> {
    let r = verify_inverse_branches(&sys.ifs, INVERSE_BRANCH_RESOLUTION);
    Ok(vec![Check::new(
        "max-residual",
        None,
        r,
        Tolerance::Max(cfg.tolerances.inverse_branch),
    )])
}

fn self_similarity(sys: &LoadedSystem, _cfg: &RunConfig) -> Result<Vec<Check>> {
    let res = ATTRACTOR_CHECK_RESOLUTION;
    let d = self_similarity_defect(&sys.ifs, res);
    Ok(vec![Check::new(
        "hausdorff-defect",
        None,
        d,
        Tolerance::Max(grid_spacing(sys.ifs.ambient(), res)),
    )])
}

fn open_set(sys: &LoadedSystem, _cfg: &RunConfig) -> Result<Vec<Check>> {
    let candidate = sys
        .facts
        .as_ref()
        .map(|f| f.osc_candidate.clone())
        .unwrap_or_else(|| sys.ifs.ambient().clone());
    let verdict = check_open_set_condition(&sys.ifs, &candidate)?;
    let mut c = Check::new(
        "violations",
        None,
        verdict.violations.len() as f64,
        Tolerance::Max(0.0),
    );
    if let Some(v) = verdict.first_violation() {
        c = c.with_note(v.to_string());
    }
    Ok(vec![c])
}

fn branch_sets(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<Check>> {
    let tol = cfg.tolerances.branch_sets;
    let sets = BranchSets::compute(&sys.ifs);
    let (mut agree, mut lands): (f64, f64) = (0.0, 0.0);
    for piece in &sets.coincidence {
        let (i, j) = piece.pair;
        for x in piece.sample_points(16) {
            let (gi, gj) = (sys.ifs.branch(i).apply(&x), sys.ifs.branch(j).apply(&x));
            agree = agree.max(crate::geometry::sup_dist(&gi, &gj));
            lands = lands.max(sets.distance_to_values(&gi));
        }
    }
    let mut out = vec![
        Check::new("coincidence-agreement", None, agree, Tolerance::Max(tol)),
        Check::new("value-membership", None, lands, Tolerance::Max(tol)),
    ];
    if let Some(f) = &sys.facts {
        out.push(Check::new(
            "coincidence-vs-catalog",
            None,
            crate::catalog::union_discrepancy(&sets.coincidence, &f.coincidence),
            Tolerance::Max(tol),
        ));
        out.push(Check::new(
            "values-vs-catalog",
            None,
            crate::catalog::union_discrepancy(&sets.values, &f.values),
            Tolerance::Max(tol),
        ));
        let mismatch = (sets.is_finite_branch() != f.finite_branch) as u8 as f64;
        out.push(Check::new(
            "finite-branch-vs-catalog",
            None,
            mismatch,
            Tolerance::Max(0.0),
        ));
    }
    Ok(out)
}

fn measure(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<Check>> {
    if !cfg.assume_separation {
        return Err(Error::Config(
            "exact cell masses need the measure separation assumption, which is disabled".into(),
        ));
    }
    let n = sys.ifs.n();
    let mut out = Vec::new();
    for m in depths(cfg) {
        let exact = exact_cell_masses(&sys.ifs, m)?;
        let fix = markov_fixpoint(&sys.ifs, m, MARKOV_MAX_ITERS, MARKOV_TOL)?;
        out.push(Check::new(
            "fixpoint-tv",
            Some(m),
            fix.total_variation(&exact)?,
            Tolerance::Max(cfg.tolerances.measure_tv),
        ));
        let k = m.saturating_sub(1).min(3);
        let words: Vec<Word> = (0..=k)
            .flat_map(|d| {
                (0..crate::measure::cells::pow(n, d)).map(move |i| Word::from_index(i, n, d))
            })
            .collect();
        out.push(Check::new(
            "self-similarity-residual",
            Some(m),
            self_similarity_residual(&sys.ifs, &exact, &words)?,
            Tolerance::Max(cfg.tolerances.self_similarity),
        ));
    }
    Ok(out)
}

/// Seeded Lipschitz symbols used by the covariance checks.
pub fn covariance_symbols(sys: &LoadedSystem, cfg: &RunConfig) -> Vec<SharedSymbol> {
    (0..cfg.trials)
        .map(|k| {
            Arc::new(TrigSum::random(
                sys.ifs.ambient(),
                COVARIANCE_TERMS,
                cfg.seed.wrapping_mul(1000).wrapping_add(k as u64),
            )) as SharedSymbol
        })
        .collect()
}

fn ratio_band(c2: f64, b: f64) -> Tolerance {
    Tolerance::Band(c2 * (1.0 - b), c2 * (1.0 + b))
}

fn operators(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let disc = Discretization::new(&sys.ifs, cfg.depths.1 + 1)?;
    let symbols = covariance_symbols(sys, cfg);
    let band = ratio_band(sys.ifs.max_ratio(), tol.covariance_band);
    let mut out = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for m in depths(cfg) {
        out.push(Check::new(
            "isometry",
            Some(m),
            isometry_residual(&disc, m)?,
            Tolerance::Max(tol.identity),
        ));
        out.push(Check::new(
            "projection",
            Some(m),
            projection_residual(&disc, m)?,
            Tolerance::Max(tol.identity),
        ));
        let transfer = match transfer_residual(&disc, m) {
            Ok(v) => v,
            Err(Error::NonUniformWeights) => f64::NAN,
            Err(e) => return Err(e),
        };
        out.push(Check::new(
            "transfer-eq",
            Some(m),
            transfer,
            Tolerance::Max(tol.entry),
        ));
        let res: Vec<f64> = symbols
            .par_iter()
            .map(|a| covariance_residual(&disc, a, m))
            .collect::<Result<_>>()?;
        let scaled = res
            .iter()
            .zip(&symbols)
            .map(|(r, a)| r / covariance_bound(&disc, a, m))
            .fold(0.0, f64::max);
        out.push(Check::new(
            "covariance-over-bound",
            Some(m),
            scaled,
            Tolerance::Max(1.0),
        ));
        if let Some(p) = &prev {
            let ratios: Vec<f64> = res.iter().zip(p).map(|(r, q)| r / q).collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            out.push(Check::new("covariance-ratio-min", Some(m), lo, band));
            out.push(Check::new("covariance-ratio-max", Some(m), hi, band));
        }
        prev = Some(res);
    }
    Ok(out)
}

fn covariant(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in depths(cfg) {
        let r = covariant_rep_check(&sys.ifs, m, cfg.trials, cfg.seed)?;
        let t = Tolerance::Max(cfg.tolerances.covariant);
        out.push(Check::new("left-module", Some(m), r.left_module, t));
        out.push(Check::new("inner-product", Some(m), r.inner_product, t));
    }
    Ok(out)
}

/// One row of the reconstruction experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionRow {
    pub depth: usize,
    pub n_bumps: usize,
    pub theta: f64,
    pub operator: f64,
    pub theta_cell: f64,
    pub operator_cell: f64,
}

/// The admissible `sin²` bump on the configured (or catalog) support.
pub fn reconstruction_symbol(sys: &LoadedSystem, cfg: &RunConfig) -> Result<AdmissibleSymbol> {
    let support = sys.symbol_support(cfg).ok_or_else(|| {
        let msg = format!(
            "no symbol support for system `{}` (set symbol_support)",
            sys.name
        );
        if sys.is_catalog() {
            Error::MissingSymbol(msg)
        } else {
            Error::Config(msg)
        }
    })?;
    AdmissibleSymbol::new(
        Arc::new(SinBump::new(support.clone())),
        Some(support),
        &sys.ifs,
        cfg.delta,
    )
}

pub fn reconstruction_rows(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<ReconstructionRow>> {
    let a = reconstruction_symbol(sys, cfg)?;
    let p = build_bump_partition(&a, &sys.ifs, cfg.delta)?;
    depths(cfg)
        .map(|m| {
            let (xi, eta) = reconstruction_vectors(&sys.ifs, &a, &p, m)?;
            let th = verify_theta_reconstruction(&sys.ifs, &a, &xi, &eta, cfg.trials, cfg.seed, m)?;
            let op = verify_operator_reconstruction(&sys.ifs, &a, &xi, &eta, m)?;
            Ok(ReconstructionRow {
                depth: m,
                n_bumps: p.len(),
                theta: th.continuum,
                operator: op.continuum,
                theta_cell: th.cell,
                operator_cell: op.cell,
            })
        })
        .collect()
}

fn reconstruction(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<Check>> {
    let rows = reconstruction_rows(sys, cfg)?;
    let tol = &cfg.tolerances;
    let band = ratio_band(sys.ifs.max_ratio(), tol.reconstruction_band);
    let mut out = Vec::new();
    for (k, r) in rows.iter().enumerate() {
        let m = Some(r.depth);
        out.push(Check::new(
            "theta-cell-defect",
            m,
            r.theta_cell,
            Tolerance::Max(tol.cell_defect),
        ));
        out.push(Check::new(
            "operator-cell-defect",
            m,
            r.operator_cell,
            Tolerance::Max(tol.cell_defect),
        ));
        if k > 0 {
            out.push(Check::new(
                "theta-ratio",
                m,
                r.theta / rows[k - 1].theta,
                band,
            ));
            out.push(Check::new(
                "operator-ratio",
                m,
                r.operator / rows[k - 1].operator,
                band,
            ));
        }
    }
    Ok(out)
}

/// Runs one suite. Configuration errors propagate; any other error becomes
/// a failing `error` check so that the suite is never silently skipped.
pub fn run_suite(name: &'static str, sys: &LoadedSystem, cfg: &RunConfig) -> Result<SuiteReport> {
    let f = match name {
        "inverse-branch" => inverse_branch,
        "self-similarity" => self_similarity,
        "open-set-condition" => open_set,
        "branch-sets" => branch_sets,
        "measure" => measure,
        "operators" => operators,
        "covariant" => covariant,
        "reconstruction" => reconstruction,
        other => return Err(Error::Parse(format!("unknown suite `{other}`"))),
    };
    let checks = match f(sys, cfg) {
        Ok(c) => c,
        Err(e) if is_config_error(&e) => return Err(e),
        Err(e) => {
            vec![Check::new("error", None, f64::NAN, Tolerance::Max(0.0)).with_note(e.to_string())]
        }
    };
    Ok(SuiteReport {
        suite: name,
        checks,
    })
}

/// All suites in order, or concurrently with the reports sorted by suite
/// name when `cfg.parallel` is set.
pub fn run_all(sys: &LoadedSystem, cfg: &RunConfig) -> Result<Vec<SuiteReport>> {
    if cfg.parallel {
        let mut reports: Vec<SuiteReport> = SUITES
            .par_iter()
            .map(|s| run_suite(s, sys, cfg))
            .collect::<Result<_>>()?;
        reports.sort_by(|a, b| a.suite.cmp(b.suite));
        for r in &mut reports {
            r.checks.sort_by_key(|c| c.depth);
        }
        Ok(reports)
    } else {
        SUITES.iter().map(|s| run_suite(s, sys, cfg)).collect()
    }
}
