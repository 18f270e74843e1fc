//! Residuals of the operator identities relating `C_phi`, `C_phi*`, `L_phi`
//! and multiplication operators.

use std::sync::Arc;

use crate::error::Result;
use crate::symbols::{SharedSymbol, Transferred};

use super::operator::{continuum_residual, CellQuadrature, Discretization, QUADRATURE_SUB_DEPTH};

/// `‖C* C - I‖` on depth `m`.
pub fn isometry_residual(disc: &Discretization, m: usize) -> Result<f64> {
    let cc = disc
        .adjoint_composition_op(m)?
        .compose(&disc.composition_op(m)?)?;
    cc.sub(&disc.identity(m)?)?.norm()
}

/// `‖(C C*)² - C C*‖` on depth `m+1`.
pub fn projection_residual(disc: &Discretization, m: usize) -> Result<f64> {
    let p = disc
        .composition_op(m)?
        .compose(&disc.adjoint_composition_op(m)?)?;
    p.compose(&p)?.sub(&p)?.norm()
}

/// Largest entrywise difference between `C*` and `L_phi`.
pub fn transfer_residual(disc: &Discretization, m: usize) -> Result<f64> {
    disc.adjoint_composition_op(m)?
        .max_entry_diff(&disc.transfer_op(m)?)
}

/// `‖C* M_{a@(m+1)} C - M_{L a}‖` with `L a` the continuous transfer of `a`.
pub fn covariance_residual(disc: &Discretization, a: &SharedSymbol, m: usize) -> Result<f64> {
    let ma = disc.mult_op(&disc.sample(a.as_ref(), m + 1)?)?;
    let t = disc
        .adjoint_composition_op(m)?
        .compose(&ma)?
        .compose(&disc.composition_op(m)?)?;
    let la = Transferred {
        inner: Arc::clone(a),
        ifs: disc.ifs().clone(),
    };
    let quad = CellQuadrature::new(disc.ifs(), m, QUADRATURE_SUB_DEPTH)?;
    continuum_residual(&t, &la, &quad)
}

/// `3 Lip(a) c2^m`.
pub fn covariance_bound(disc: &Discretization, a: &SharedSymbol, m: usize) -> f64 {
    3.0 * a.lipschitz() * disc.ifs().max_ratio().powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::symbols::TrigSum;

    #[test]
    fn exact_identities_on_the_square() {
        let d = Discretization::new(&catalog::tent_square().system, 4).unwrap();
        for m in 1..4 {
            assert!(isometry_residual(&d, m).unwrap() < 1e-12);
            assert!(projection_residual(&d, m).unwrap() < 1e-12);
            assert!(transfer_residual(&d, m).unwrap() < 1e-14);
        }
    }

    #[test]
    fn covariance_residual_is_within_bound_and_shrinks() {
        let ifs = catalog::tent_square().system;
        let d = Discretization::new(&ifs, 5).unwrap();
        let a: SharedSymbol = Arc::new(TrigSum::random(ifs.ambient(), 4, 3));
        let r3 = covariance_residual(&d, &a, 3).unwrap();
        let r4 = covariance_residual(&d, &a, 4).unwrap();
        assert!(r3 <= covariance_bound(&d, &a, 3));
        assert!(r4 < r3);
    }
}
