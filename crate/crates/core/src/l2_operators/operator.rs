//! Matrices between cell-function spaces `V_m` and the operators
//! `M_a`, `C_phi`, `C_phi*` and `L_phi`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::budget::check_cells;
use crate::error::{Error, Result};
use crate::ifs_core::{require_attractor_is_box, IfsSystem};
use crate::measure::{cells::pow, exact_cell_masses, CellMeasure, MeasureKind};
use crate::symbols::Symbol;

use super::function::{sample_to_cells, CellFunction, SampleRule};
use super::norm::{weighted_norm, NormOptions};
use super::sparse::Csr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sparsity {
    Diagonal,
    /// Entries only between cells `i·w` and `w` (or `i·w` and `j·w`).
    BranchStructured,
    General,
}

/// A matrix `V_{m_dom} -> V_{m_cod}`; both spaces carry the cell masses of
/// the self-similar measure as inner-product weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOperator {
    n: usize,
    dom_depth: usize,
    cod_depth: usize,
    matrix: Csr,
    sparsity: Sparsity,
    dom_masses: Arc<Vec<f64>>,
    cod_masses: Arc<Vec<f64>>,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl CellOperator {
    pub fn new(
        n: usize,
        (dom_depth, cod_depth): (usize, usize),
        matrix: Csr,
        sparsity: Sparsity,
        dom_masses: Arc<Vec<f64>>,
        cod_masses: Arc<Vec<f64>>,
    ) -> Result<Self> {
        if matrix.cols() != pow(n, dom_depth)
            || matrix.rows() != pow(n, cod_depth)
            || dom_masses.len() != matrix.cols()
            || cod_masses.len() != matrix.rows()
        {
            return Err(Error::DepthMismatch(format!(
                "{}x{} matrix does not map depth {dom_depth} to depth {cod_depth}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self {
            n,
            dom_depth,
            cod_depth,
            matrix,
            sparsity,
            dom_masses,
            cod_masses,
        })
    }

    pub fn dom_depth(&self) -> usize {
        self.dom_depth
    }

    pub fn cod_depth(&self) -> usize {
        self.cod_depth
    }

    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    pub fn sparsity(&self) -> Sparsity {
        self.sparsity
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, f: &CellFunction) -> Result<CellFunction> {
        if f.depth() != self.dom_depth || f.n() != self.n {
            return Err(Error::DepthMismatch(format!(
                "operator on depth {} applied to a depth-{} function",
                self.dom_depth,
                f.depth()
            )));
        }
        CellFunction::new(self.n, self.cod_depth, self.matrix.matvec(f.values()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &CellOperator) -> Result<CellOperator> {
        if inner.cod_depth != self.dom_depth || inner.n != self.n {
            return Err(Error::DepthMismatch(format!(
                "cannot compose depth {}->{} after depth {}->{}",
                self.dom_depth, self.cod_depth, inner.dom_depth, inner.cod_depth
            )));
        }
        let matrix = self.matrix.matmul(&inner.matrix);
        let sparsity = if inner.dom_depth == self.cod_depth && matrix.is_diagonal() {
            Sparsity::Diagonal
        } else if self.sparsity != Sparsity::General && inner.sparsity != Sparsity::General {
            Sparsity::BranchStructured
        } else {
            Sparsity::General
        };
        CellOperator::new(
            self.n,
            (inner.dom_depth, self.cod_depth),
            matrix,
            sparsity,
            Arc::clone(&inner.dom_masses),
            Arc::clone(&self.cod_masses),
        )
    }

    /// Adjoint for the mass-weighted inner products:
    /// `T† = D_dom^{-1} T^H D_cod`.
    pub fn adjoint(&self) -> CellOperator {
        let inv: Vec<f64> = self
            .dom_masses
            .iter()
            .map(|m| if *m > 0.0 { 1.0 / m } else { 0.0 })
            .collect();
        let matrix = self
            .matrix
            .conj_transpose()
            .scale_rows_cols(&inv, &self.cod_masses);
        CellOperator {
            n: self.n,
            dom_depth: self.cod_depth,
            cod_depth: self.dom_depth,
            matrix,
            sparsity: self.sparsity,
            dom_masses: Arc::clone(&self.cod_masses),
            cod_masses: Arc::clone(&self.dom_masses),
        }
    }

    fn same_spaces(&self, other: &CellOperator) -> Result<()> {
        if (self.dom_depth, self.cod_depth, self.n) != (other.dom_depth, other.cod_depth, other.n) {
            return Err(Error::DepthMismatch(format!(
                "operators {}->{} and {}->{}",
                self.dom_depth, self.cod_depth, other.dom_depth, other.cod_depth
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &CellOperator, alpha: Complex64) -> Result<CellOperator> {
        self.same_spaces(other)?;
        let matrix = self.matrix.add_scaled(&other.matrix, alpha);
        let sparsity = if self.sparsity == other.sparsity {
            self.sparsity
        } else if self.sparsity == Sparsity::General || other.sparsity == Sparsity::General {
            Sparsity::General
        } else {
            Sparsity::BranchStructured
        };
        Ok(CellOperator {
            matrix,
            sparsity,
            ..self.clone()
        })
    }

    pub fn add(&self, other: &CellOperator) -> Result<CellOperator> {
        self.combine(other, c(1.0))
    }

    pub fn sub(&self, other: &CellOperator) -> Result<CellOperator> {
        self.combine(other, c(-1.0))
    }

    pub fn scale(&self, alpha: Complex64) -> CellOperator {
        CellOperator {
            matrix: self.matrix.scale(alpha),
            ..self.clone()
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_entry_diff(&self, other: &CellOperator) -> Result<f64> {
        self.same_spaces(other)?;
        Ok(self.matrix.max_abs_diff(&other.matrix))
    }

    /// Operator norm between the mass-weighted spaces.
    pub fn norm(&self) -> Result<f64> {
        self.norm_with(NormOptions::default())
    }

    pub fn norm_with(&self, opts: NormOptions) -> Result<f64> {
        weighted_norm(&self.matrix, &self.cod_masses, &self.dom_masses, opts)
    }

    pub fn dom_masses(&self) -> &Arc<Vec<f64>> {
        &self.dom_masses
    }

    pub fn cod_masses(&self) -> &Arc<Vec<f64>> {
        &self.cod_masses
    }
}

/// Operator norm (free-function form).
pub fn operator_norm(t: &CellOperator) -> Result<f64> {
    t.norm()
}

/// A system whose box is its attractor together with the exact cell masses
/// of its self-similar measure up to `max_depth`.
#[derive(Debug, Clone)]
pub struct Discretization {
    ifs: IfsSystem,
    masses: Vec<Arc<Vec<f64>>>,
}

impl Discretization {
    /// Fails with `AttractorNotBox` when the cells would not tile the box
    /// and with `DepthOverflow` when `n^max_depth` exceeds the budget.
    pub fn new(ifs: &IfsSystem, max_depth: usize) -> Result<Self> {
        require_attractor_is_box(ifs)?;
        check_cells(ifs.n(), max_depth)?;
        let masses = (0..=max_depth)
            .map(|m| exact_cell_masses(ifs, m).map(|mu| mu.shared_masses()))
            .collect::<Result<_>>()?;
        Ok(Self {
            ifs: ifs.clone(),
            masses,
        })
    }

    pub fn ifs(&self) -> &IfsSystem {
        &self.ifs
    }

    pub fn n(&self) -> usize {
        self.ifs.n()
    }

    pub fn max_depth(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn masses(&self, m: usize) -> Result<Arc<Vec<f64>>> {
        self.masses.get(m).cloned().ok_or_else(|| {
            Error::DepthMismatch(format!(
                "depth {m} beyond discretisation depth {}",
                self.max_depth()
            ))
        })
    }

    pub fn measure(&self, m: usize) -> Result<CellMeasure> {
        CellMeasure::new(
            self.n(),
            m,
            self.masses(m)?.as_ref().clone(),
            MeasureKind::Exact,
        )
    }

    pub fn sample(&self, a: &dyn Symbol, m: usize) -> Result<CellFunction> {
        self.masses(m)?;
        sample_to_cells(&self.ifs, a, m, SampleRule::Center)
    }

    pub fn identity(&self, m: usize) -> Result<CellOperator> {
        let w = self.masses(m)?;
        CellOperator::new(
            self.n(),
            (m, m),
            Csr::identity(pow(self.n(), m)),
            Sparsity::Diagonal,
            w.clone(),
            w,
        )
    }

    /// Diagonal `M_a`.
    pub fn mult_op(&self, a: &CellFunction) -> Result<CellOperator> {
        let m = a.depth();
        let w = self.masses(m)?;
        CellOperator::new(
            self.n(),
            (m, m),
            Csr::diagonal(a.values()),
            Sparsity::Diagonal,
            w.clone(),
            w,
        )
    }

    /// `C_phi : V_m -> V_{m+1}`, `C χ_w = sum_i χ_{i·w}`.
    pub fn composition_op(&self, m: usize) -> Result<CellOperator> {
        let n = self.n();
        let len = pow(n, m);
        let t = (0..n)
            .flat_map(|i| (0..len).map(move |w| (i * len + w, w, c(1.0))))
            .collect();
        CellOperator::new(
            n,
            (m, m + 1),
            Csr::from_triplets(len * n, len, t),
            Sparsity::BranchStructured,
            self.masses(m)?,
            self.masses(m + 1)?,
        )
    }

    /// `C_phi* : V_{m+1} -> V_m`, `C* χ_{i·w} = p_i χ_w`.
    pub fn adjoint_composition_op(&self, m: usize) -> Result<CellOperator> {
        self.branch_average(m, self.ifs.weights().to_vec())
    }

    /// `L_phi : V_{m+1} -> V_m`, `L χ_{i·w} = χ_w / n`. Needs uniform weights.
    pub fn transfer_op(&self, m: usize) -> Result<CellOperator> {
        if !self.ifs.is_hutchinson() {
            return Err(Error::NonUniformWeights);
        }
        let n = self.n();
        self.branch_average(m, vec![1.0 / n as f64; n])
    }

    fn branch_average(&self, m: usize, coef: Vec<f64>) -> Result<CellOperator> {
        let n = self.n();
        let len = pow(n, m);
        let t = (0..n)
            .flat_map(|i| {
                let p = coef[i];
                (0..len).map(move |w| (w, i * len + w, c(p)))
            })
            .collect();
        CellOperator::new(
            n,
            (m + 1, m),
            Csr::from_triplets(len, len * n, t),
            Sparsity::BranchStructured,
            self.masses(m + 1)?,
            self.masses(m)?,
        )
    }
}

/// Centre quadrature inside every depth-`m` cell: the nodes of cell `u`
/// are `gamma_u(c_v)` for the centres `c_v` of the depth-`r` cells of the
/// box, weighted by `mass(u·v) / mass(u) = prod p_v`.
#[derive(Debug, Clone)]
pub struct CellQuadrature {
    depth: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// Row-major linear parts and translations of `gamma_u`.
    maps: Vec<(Vec<f64>, Vec<f64>)>,
    dim: usize,
}

/// Sub-depth used by [`CellQuadrature`] unless stated otherwise.
pub const QUADRATURE_SUB_DEPTH: usize = 2;

impl CellQuadrature {
    pub fn new(ifs: &IfsSystem, m: usize, sub_depth: usize) -> Result<Self> {
        check_cells(ifs.n(), m)?;
        let d = ifs.dim();
        let nodes = crate::measure::cell_centers(ifs, sub_depth);
        let weights = exact_cell_masses(ifs, sub_depth)?.masses().to_vec();
        let mut maps: Vec<(Vec<f64>, Vec<f64>)> = vec![(
            (0..d * d)
                .map(|k| if k / d == k % d { 1.0 } else { 0.0 })
                .collect(),
            vec![0.0; d],
        )];
        for _ in 0..m {
            let mut next = Vec::with_capacity(maps.len() * ifs.n());
            for g in ifs.branches() {
                let gl = g.linear_rows();
                let gt = g.translation();
                for (l, t) in &maps {
                    let mut nl = vec![0.0; d * d];
                    let mut nt = vec![0.0; d];
                    for r in 0..d {
                        for cc in 0..d {
                            nl[r * d + cc] = (0..d).map(|k| gl[r][k] * l[k * d + cc]).sum();
                        }
                        nt[r] = (0..d).map(|k| gl[r][k] * t[k]).sum::<f64>() + gt[r];
                    }
                    next.push((nl, nt));
                }
            }
            maps = next;
        }
        Ok(Self {
            depth: m,
            nodes,
            weights,
            maps,
            dim: d,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cells(&self) -> usize {
        self.maps.len()
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    /// Node `v` of cell `u`.
    pub fn point(&self, u: usize, v: usize) -> Vec<f64> {
        let (l, t) = &self.maps[u];
        let q = &self.nodes[v];
        let d = self.dim;
        (0..d)
            .map(|r| (0..d).map(|k| l[r * d + k] * q[k]).sum::<f64>() + t[r])
            .collect()
    }

    /// Per-cell mean and variance of `g`.
    pub fn mean_and_variance(&self, g: &dyn Symbol) -> (Vec<Complex64>, Vec<f64>) {
        use rayon::prelude::*;
        (0..self.cells())
            .into_par_iter()
            .map(|u| {
                let vals: Vec<Complex64> = (0..self.nodes.len())
                    .map(|v| g.eval(&self.point(u, v)))
                    .collect();
                let mean: Complex64 = vals.iter().zip(&self.weights).map(|(x, w)| x * *w).sum();
                let var: f64 = vals
                    .iter()
                    .zip(&self.weights)
                    .map(|(x, w)| (x - mean).norm_sqr() * w)
                    .sum();
                (mean, var)
            })
            .unzip()
    }
}

/// Norm of `T - M_g` from `V_m` into `L^2(mu)` for a square cell operator
/// `T` and a continuous `g`:
/// `‖(T - M_g) f‖² = sum_u mu_u (|(T f)_u - mean_u(g) f_u|² + var_u(g) |f_u|²)`,
/// i.e. the norm of the stacked operator `[T - M_mean ; M_sqrt(var)]`.
pub fn continuum_residual(t: &CellOperator, g: &dyn Symbol, quad: &CellQuadrature) -> Result<f64> {
    if t.dom_depth() != t.cod_depth() || quad.depth() != t.dom_depth() {
        return Err(Error::DepthMismatch(format!(
            "residual of a depth {}->{} operator with depth-{} quadrature",
            t.dom_depth(),
            t.cod_depth(),
            quad.depth()
        )));
    }
    let (mean, var) = quad.mean_and_variance(g);
    let top = t.matrix().sub(&Csr::diagonal(&mean));
    let bottom = Csr::diagonal(&var.iter().map(|v| c(v.sqrt())).collect::<Vec<_>>());
    let stacked = top.vstack(&bottom);
    let w = t.cod_masses();
    let rows: Vec<f64> = w.iter().chain(w.iter()).copied().collect();
    weighted_norm(&stacked, &rows, t.dom_masses(), NormOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::symbols::Coordinate;

    #[test]
    fn composition_columns_have_n_ones() {
        let d = Discretization::new(&catalog::tent_square().system, 3).unwrap();
        let cop = d.composition_op(1).unwrap();
        for w in 0..4 {
            let col: Vec<usize> = (0..16)
                .filter(|&r| cop.matrix().get(r, w) == c(1.0))
                .collect();
            assert_eq!(col, vec![w, 4 + w, 8 + w, 12 + w]);
        }
        assert!((cop.norm().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_adjoint_of_c_is_c_star() {
        let s = catalog::tent_sigma().system;
        let d = Discretization::new(&s, 3).unwrap();
        let cop = d.composition_op(2).unwrap();
        let cs = d.adjoint_composition_op(2).unwrap();
        assert!(cop.adjoint().max_entry_diff(&cs).unwrap() < 1e-14);
        assert!(d.compose_check(2).unwrap() < 1e-15);
    }

    #[test]
    fn quadrature_mean_of_linear_function_is_cell_centre() {
        let s = catalog::tent_square().system;
        let q = CellQuadrature::new(&s, 2, 2).unwrap();
        let (mean, var) = q.mean_and_variance(&Coordinate(0));
        let centres = crate::measure::cell_centers(&s, 2);
        for u in 0..16 {
            assert!((mean[u].re - centres[u][0]).abs() < 1e-15);
            // four nodes per axis at spacing h/4: variance (h/4)^2 * 5/4
            let h: f64 = 0.25;
            assert!((var[u] - (h / 4.0).powi(2) * 1.25).abs() < 1e-15);
        }
    }

    impl Discretization {
        fn compose_check(&self, m: usize) -> Result<f64> {
            let cc = self
                .adjoint_composition_op(m)?
                .compose(&self.composition_op(m)?)?;
            cc.max_entry_diff(&self.identity(m)?)
        }
    }
}
