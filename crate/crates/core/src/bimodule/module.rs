//! `X = C(K)` as a right Hilbert module over `A = C(K)` with left action,
//! at cell resolution: elements at depth `m+1`, coefficients at depth `m`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::l2_operators::{CellFunction, CellOperator, Csr, Discretization, Sparsity};
use crate::measure::cells::pow;

fn check_step(upper: &CellFunction, lower: &CellFunction, what: &str) -> Result<()> {
    if upper.n() != lower.n() || upper.depth() != lower.depth() + 1 {
        return Err(Error::DepthMismatch(format!(
            "{what}: expected depths m+1 and m, got {} and {}",
            upper.depth(),
            lower.depth()
        )));
    }
    Ok(())
}

fn check_same(a: &CellFunction, b: &CellFunction, what: &str) -> Result<()> {
    if a.n() != b.n() || a.depth() != b.depth() {
        return Err(Error::DepthMismatch(format!(
            "{what}: depths {} and {} differ",
            a.depth(),
            b.depth()
        )));
    }
    Ok(())
}

/// `<xi, eta>_A = L(conj(xi) eta)`: `(1/n) sum_i conj(xi(i·w)) eta(i·w)`.
pub fn a_valued_inner(xi: &CellFunction, eta: &CellFunction) -> Result<CellFunction> {
    check_same(xi, eta, "inner product")?;
    if xi.depth() == 0 {
        return Err(Error::DepthMismatch(
            "module elements live at depth >= 1".into(),
        ));
    }
    let n = xi.n();
    let len = pow(n, xi.depth() - 1);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for i in 0..n {
        for w in 0..len {
            let k = i * len + w;
            out[w] += xi.values()[k].conj() * eta.values()[k];
        }
    }
    let inv = 1.0 / n as f64;
    CellFunction::new(
        n,
        xi.depth() - 1,
        out.into_iter().map(|v| v * inv).collect(),
    )
}

/// `(a·xi·b)(i·w) = a(i·w) xi(i·w) b(w)`.
pub fn bimodule_actions(
    a: &CellFunction,
    xi: &CellFunction,
    b: &CellFunction,
) -> Result<CellFunction> {
    check_same(a, xi, "left action")?;
    check_step(xi, b, "right action")?;
    a.mul(xi)?.mul(&b.pull_back())
}

/// `xi·b`.
pub fn right_action(xi: &CellFunction, b: &CellFunction) -> Result<CellFunction> {
    check_step(xi, b, "right action")?;
    xi.mul(&b.pull_back())
}

/// `a·xi`.
pub fn left_action(a: &CellFunction, xi: &CellFunction) -> Result<CellFunction> {
    check_same(a, xi, "left action")?;
    a.mul(xi)
}

/// A function on the union of the cographs of the branches: component `i`
/// holds `f(gamma_i(y), y)` as a function of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CographFunction {
    components: Vec<CellFunction>,
}

impl CographFunction {
    pub fn new(components: Vec<CellFunction>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::DepthMismatch("no cograph components".into()))?;
        if components.len() != first.n() {
            return Err(Error::DepthMismatch(format!(
                "{} components for {} branches",
                components.len(),
                first.n()
            )));
        }
        for c in &components {
            check_same(first, c, "cograph components")?;
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[CellFunction] {
        &self.components
    }

    pub fn depth(&self) -> usize {
        self.components[0].depth()
    }

    /// `<f, g>_Y = sum_i conj(f_i) g_i`.
    pub fn inner(&self, other: &CographFunction) -> Result<CellFunction> {
        let mut acc = CellFunction::constant(
            self.components[0].n(),
            self.depth(),
            Complex64::new(0.0, 0.0),
        );
        if other.components.len() != self.components.len() {
            return Err(Error::DepthMismatch(
                "cograph functions with different n".into(),
            ));
        }
        for (f, g) in self.components.iter().zip(&other.components) {
            acc = acc.add(&f.conj().mul(g)?)?;
        }
        Ok(acc)
    }
}

/// `(Phi f)(i·w) = sqrt(n) f_i(w)`.
pub fn cograph_iso(f: &CographFunction) -> Result<CellFunction> {
    let n = f.components.len();
    let s = (n as f64).sqrt();
    let mut values = Vec::with_capacity(n * f.components[0].len());
    for comp in &f.components {
        values.extend(comp.values().iter().map(|v| v * s));
    }
    CellFunction::new(n, f.depth() + 1, values)
}

/// `f_i(w) = (Phi f)(i·w) / sqrt(n)`.
pub fn cograph_inverse(xi: &CellFunction) -> Result<CographFunction> {
    if xi.depth() == 0 {
        return Err(Error::DepthMismatch(
            "module elements live at depth >= 1".into(),
        ));
    }
    let n = xi.n();
    let s = (n as f64).sqrt();
    let len = pow(n, xi.depth() - 1);
    let comps = (0..n)
        .map(|i| {
            CellFunction::new(
                n,
                xi.depth() - 1,
                xi.values()[i * len..(i + 1) * len]
                    .iter()
                    .map(|v| v / s)
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    CographFunction::new(comps)
}

/// `theta_{xi,eta}(zeta) = xi·<eta, zeta>_A`.
pub fn theta_apply(
    xi: &CellFunction,
    eta: &CellFunction,
    zeta: &CellFunction,
) -> Result<CellFunction> {
    check_same(xi, eta, "theta")?;
    check_same(eta, zeta, "theta")?;
    right_action(xi, &a_valued_inner(eta, zeta)?)
}

/// Matrix of `sum_k theta_{xi_k, eta_k}` on `V_{m+1}`: entry `(i·w, j·w)`
/// is `sum_k xi_k(i·w) conj(eta_k(j·w)) / n`. It equals
/// `sum_k M_{xi_k} C C* M_{eta_k}*` for uniform weights.
pub fn theta_operator(
    disc: &Discretization,
    pairs: &[(CellFunction, CellFunction)],
) -> Result<CellOperator> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::DepthMismatch("no theta pairs".into()))?;
    let depth = first.0.depth();
    if depth == 0 {
        return Err(Error::DepthMismatch(
            "module elements live at depth >= 1".into(),
        ));
    }
    for (x, e) in pairs {
        check_same(&first.0, x, "theta operator")?;
        check_same(&first.0, e, "theta operator")?;
    }
    let n = disc.n();
    let len = pow(n, depth - 1);
    let inv = 1.0 / n as f64;
    let mut t = Vec::new();
    for w in 0..len {
        for i in 0..n {
            for j in 0..n {
                let (r, c) = (i * len + w, j * len + w);
                let v: Complex64 = pairs
                    .iter()
                    .map(|(x, e)| x.values()[r] * e.values()[c].conj())
                    .sum();
                if v.norm() > 0.0 {
                    t.push((r, c, v * inv));
                }
            }
        }
    }
    let w = disc.masses(depth)?;
    CellOperator::new(
        n,
        (depth, depth),
        Csr::from_triplets(len * n, len * n, t),
        Sparsity::BranchStructured,
        w.clone(),
        w,
    )
}
