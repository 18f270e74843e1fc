//! Partition-of-unity reconstruction of `M_a` from theta operators and the
//! covariant-representation relations.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs_core::IfsSystem;
use crate::l2_operators::{
    continuum_residual, sample_to_cells, CellFunction, CellOperator, CellQuadrature,
    Discretization, SampleRule, QUADRATURE_SUB_DEPTH,
};
use crate::measure::cell_centers;
use crate::symbols::{Constant, Symbol, TrigSum};

use super::module::{a_valued_inner, theta_operator};
use super::partition::{AdmissibleSymbol, BumpPartition};

/// Terms in the random trigonometric trial functions.
pub const TRIAL_TERMS: usize = 4;

/// `xi_b = n a sqrt(f_b)` and `eta_b = sqrt(f_b)` sampled at the centres
/// of the depth-`m+1` cells (the module elements acted on at depth `m`).
pub fn reconstruction_vectors(
    ifs: &IfsSystem,
    a: &AdmissibleSymbol,
    p: &BumpPartition,
    m: usize,
) -> Result<(Vec<CellFunction>, Vec<CellFunction>)> {
    crate::budget::check_cells(ifs.n(), m + 1)?;
    let n = ifs.n();
    let centres = cell_centers(ifs, m + 1);
    let av: Vec<Complex64> = centres.par_iter().map(|c| a.symbol().eval(c)).collect();
    let scale = n as f64;
    let pairs: Vec<(CellFunction, CellFunction)> = (0..p.len())
        .into_par_iter()
        .map(|b| {
            let roots: Vec<f64> = centres.iter().map(|c| p.eval(b, c).sqrt()).collect();
            let xi = roots
                .iter()
                .zip(&av)
                .map(|(r, a)| a * (scale * r))
                .collect();
            let eta = roots.iter().map(|&r| Complex64::new(r, 0.0)).collect();
            Ok((
                CellFunction::new(n, m + 1, xi)?,
                CellFunction::new(n, m + 1, eta)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Residual of a reconstruction against the continuous target and against
/// the same target sampled at cell centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// Distance to the continuous operator (what converges with depth).
    pub continuum: f64,
    /// Distance to the cell-sampled operator.
    pub cell: f64,
}

fn zero(n: usize, depth: usize) -> CellFunction {
    CellFunction::constant(n, depth, Complex64::new(0.0, 0.0))
}

fn check_vectors(
    ifs: &IfsSystem,
    xis: &[CellFunction],
    etas: &[CellFunction],
    m: usize,
) -> Result<()> {
    if xis.len() != etas.len() {
        return Err(Error::DepthMismatch(format!(
            "{} xi against {} eta vectors",
            xis.len(),
            etas.len()
        )));
    }
    for f in xis.iter().chain(etas) {
        if f.depth() != m + 1 || f.n() != ifs.n() {
            return Err(Error::DepthMismatch(format!(
                "vector at depth {} for operators at depth {m}",
                f.depth()
            )));
        }
    }
    Ok(())
}

/// Trial function `t`: the constant one for `t = 0`, otherwise a seeded
/// trigonometric sum with `sup <= 1`.
pub fn trial_function(ifs: &IfsSystem, seed: u64, t: usize) -> Box<dyn Symbol> {
    if t == 0 {
        Box::new(Constant(Complex64::new(1.0, 0.0)))
    } else {
        Box::new(TrigSum::random(
            ifs.ambient(),
            TRIAL_TERMS,
            seed.wrapping_add(t as u64),
        ))
    }
}

/// `sum_b theta_{xi_b, eta_b}` as an operator on depth-`m+1` cell functions.
fn theta_sum(
    disc: &Discretization,
    xis: &[CellFunction],
    etas: &[CellFunction],
    m: usize,
) -> Result<CellOperator> {
    if xis.is_empty() {
        return disc.mult_op(&zero(disc.n(), m + 1));
    }
    let pairs: Vec<(CellFunction, CellFunction)> =
        xis.iter().cloned().zip(etas.iter().cloned()).collect();
    theta_operator(disc, &pairs)
}

/// Max over `trials` trial functions `zeta` of
/// `sup |(sum_b theta_{xi_b, eta_b} zeta)(u) - a(x) zeta(x)|`, `x` running over
/// the quadrature nodes of every depth-`m+1` cell `u`. The `cell` residual
/// takes `x` to be the centre of `u`.
pub fn verify_theta_reconstruction(
    ifs: &IfsSystem,
    a: &AdmissibleSymbol,
    xis: &[CellFunction],
    etas: &[CellFunction],
    trials: usize,
    seed: u64,
    m: usize,
) -> Result<Residual> {
    check_vectors(ifs, xis, etas, m)?;
    let disc = Discretization::new(ifs, m + 1)?;
    let op = theta_sum(&disc, xis, etas, m)?;
    let quad = CellQuadrature::new(ifs, m + 1, QUADRATURE_SUB_DEPTH)?;
    let centres = cell_centers(ifs, m + 1);
    let sym = a.symbol();
    let a_nodes: Vec<Vec<Complex64>> = (0..quad.cells())
        .into_par_iter()
        .map(|u| {
            (0..quad.nodes_per_cell())
                .map(|v| sym.eval(&quad.point(u, v)))
                .collect()
        })
        .collect();
    let mut worst = Residual {
        continuum: 0.0,
        cell: 0.0,
    };
    for t in 0..trials.max(1) {
        let zeta_sym = trial_function(ifs, seed, t);
        let zeta = sample_to_cells(ifs, zeta_sym.as_ref(), m + 1, SampleRule::Center)?;
        let out = op.apply(&zeta)?;
        let (cont, cell) = (0..quad.cells())
            .into_par_iter()
            .map(|u| {
                let tz = out.values()[u];
                let cell = (tz - sym.eval(&centres[u]) * zeta.values()[u]).norm();
                let cont = (0..quad.nodes_per_cell())
                    .map(|v| (tz - a_nodes[u][v] * zeta_sym.eval(&quad.point(u, v))).norm())
                    .fold(0.0, f64::max);
                (cont, cell)
            })
            .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
        worst.continuum = worst.continuum.max(cont);
        worst.cell = worst.cell.max(cell);
    }
    Ok(worst)
}

/// `T = sum_b M_{xi_b} C C* M_{eta_b}*` on depth-`m+1` cell functions.
pub fn reconstructed_operator(
    disc: &Discretization,
    xis: &[CellFunction],
    etas: &[CellFunction],
    m: usize,
) -> Result<CellOperator> {
    let cc = disc
        .composition_op(m)?
        .compose(&disc.adjoint_composition_op(m)?)?;
    let mut acc = disc.mult_op(&zero(disc.n(), m + 1))?;
    for (xi, eta) in xis.iter().zip(etas) {
        let term = disc
            .mult_op(xi)?
            .compose(&cc)?
            .compose(&disc.mult_op(eta)?.adjoint())?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `‖sum_b M_{xi_b} C C* M_{eta_b}* - M_a‖` with `M_a` the continuous
/// multiplication operator (`continuum`) and its cell sampling (`cell`).
pub fn verify_operator_reconstruction(
    ifs: &IfsSystem,
    a: &AdmissibleSymbol,
    xis: &[CellFunction],
    etas: &[CellFunction],
    m: usize,
) -> Result<Residual> {
    check_vectors(ifs, xis, etas, m)?;
    let disc = Discretization::new(ifs, m + 1)?;
    let t = reconstructed_operator(&disc, xis, etas, m)?;
    let quad = CellQuadrature::new(ifs, m + 1, QUADRATURE_SUB_DEPTH)?;
    let continuum = continuum_residual(&t, a.symbol().as_ref(), &quad)?;
    let ma = disc.mult_op(&disc.sample(a.symbol().as_ref(), m + 1)?)?;
    let cell = t.sub(&ma)?.norm()?;
    Ok(Residual { continuum, cell })
}

/// Residuals of `rho(a) V_xi = V_{a xi}` and `V_xi* V_eta = rho(<xi, eta>_A)`
/// with `rho(a) = M_a` and `V_xi = M_xi C_phi : V_m -> V_{m+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariantReport {
    pub left_module: f64,
    pub inner_product: f64,
}

/// Max of both residuals over `trials` random triples `(a, xi, eta)`
/// sampled at depth `m+1`; trial 0 uses `a = xi = eta = 1`.
pub fn covariant_rep_check(
    ifs: &IfsSystem,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<CovariantReport> {
    if !ifs.is_hutchinson() {
        return Err(Error::NonUniformWeights);
    }
    let disc = Discretization::new(ifs, m + 1)?;
    let c = disc.composition_op(m)?;
    let mut rep = CovariantReport {
        left_module: 0.0,
        inner_product: 0.0,
    };
    for t in 0..trials.max(1) {
        let s = seed.wrapping_mul(3).wrapping_add(3 * t as u64);
        let sample = |k: u64| -> Result<CellFunction> {
            let f = if t == 0 {
                trial_function(ifs, 0, 0)
            } else {
                trial_function(ifs, s + k, 1)
            };
            disc.sample(f.as_ref(), m + 1)
        };
        let (a, xi, eta) = (sample(0)?, sample(1)?, sample(2)?);
        let v = |f: &CellFunction| -> Result<CellOperator> { disc.mult_op(f)?.compose(&c) };
        let lhs = disc.mult_op(&a)?.compose(&v(&xi)?)?;
        let r1 = lhs.sub(&v(&a.mul(&xi)?)?)?.norm()?;
        let vv = v(&xi)?.adjoint().compose(&v(&eta)?)?;
        let r2 = vv
            .sub(&disc.mult_op(&a_valued_inner(&xi, &eta)?)?)?
            .norm()?;
        rep.left_module = rep.left_module.max(r1);
        rep.inner_product = rep.inner_product.max(r2);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bimodule::partition::{build_bump_partition, DEFAULT_DELTA};
    use crate::catalog;
    use crate::symbols::SinBump;
    use std::sync::Arc;

    fn setup(name: &str) -> (IfsSystem, AdmissibleSymbol, BumpPartition) {
        let e = catalog::lookup(name).unwrap();
        let s = e.facts.symbol_support.clone().unwrap();
        let a = AdmissibleSymbol::new(
            Arc::new(SinBump::new(s.clone())),
            Some(s),
            &e.system,
            DEFAULT_DELTA,
        )
        .unwrap();
        let p = build_bump_partition(&a, &e.system, DEFAULT_DELTA).unwrap();
        (e.system, a, p)
    }

    #[test]
    fn cell_level_reconstruction_is_exact() {
        let (ifs, a, p) = setup("tent_square");
        let (xi, eta) = reconstruction_vectors(&ifs, &a, &p, 3).unwrap();
        let th = verify_theta_reconstruction(&ifs, &a, &xi, &eta, 3, 1, 3).unwrap();
        assert!(th.cell < 1e-12, "{th:?}");
        let op = verify_operator_reconstruction(&ifs, &a, &xi, &eta, 3).unwrap();
        assert!(op.cell < 1e-12, "{op:?}");
        assert!(op.continuum > 0.0);
    }

    #[test]
    fn covariant_relations_hold() {
        let ifs = catalog::tent_sigma().system;
        let r = covariant_rep_check(&ifs, 2, 4, 11).unwrap();
        assert!(r.left_module < 1e-12 && r.inner_product < 1e-12, "{r:?}");
    }
}
