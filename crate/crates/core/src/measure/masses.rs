//! Cell masses of the self-similar measure.

use std::sync::Arc;

use crate::budget::check_cells;
use crate::error::{Error, Result};
use crate::ifs_core::IfsSystem;
use crate::table::{fmt_g17, Table};

use super::cells::{cell_boxes, cells, index_label, pow, Word};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Exact,
    Fixpoint {
        iterations: usize,
        residual: f64,
    },
    Empirical {
        samples: u64,
        seed: u64,
        burn_in: usize,
    },
}

/// Masses of all depth-`m` cylinder cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMeasure {
    depth: usize,
    n: usize,
    masses: Arc<Vec<f64>>,
    kind: MeasureKind,
}

impl CellMeasure {
    pub fn new(n: usize, depth: usize, masses: Vec<f64>, kind: MeasureKind) -> Result<Self> {
        if masses.len() != pow(n, depth) {
            return Err(Error::DepthMismatch(format!(
                "{} masses for depth {depth} with {n} branches",
                masses.len()
            )));
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidWeights(
                "masses must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            depth,
            n,
            masses: Arc::new(masses),
            kind,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn shared_masses(&self) -> Arc<Vec<f64>> {
        Arc::clone(&self.masses)
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn mass(&self, w: &Word) -> f64 {
        self.masses[w.index(self.n)]
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass of the cylinder `K_u` for `|u| <= depth` (sum over extensions).
    pub fn cylinder_mass(&self, u: &Word) -> f64 {
        let span = pow(self.n, self.depth - u.depth());
        let start = u.index(self.n) * span;
        self.masses[start..start + span].iter().sum()
    }

    /// `½ sum |a - b|`.
    pub fn total_variation(&self, other: &CellMeasure) -> Result<f64> {
        same_shape(self, other)?;
        Ok(tv(&self.masses, &other.masses))
    }

    /// Depth `m-1` masses obtained by summing over the last letter.
    pub fn coarsen(&self) -> Result<CellMeasure> {
        if self.depth == 0 {
            return Err(Error::DepthMismatch("cannot coarsen depth 0".into()));
        }
        let masses = self.masses.chunks(self.n).map(|c| c.iter().sum()).collect();
        CellMeasure::new(self.n, self.depth - 1, masses, self.kind.clone())
    }

    /// Depth `m-1` masses `sum_i mass(i·w)`, i.e. the push-forward under the
    /// expanding map.
    pub fn drop_first_letter(&self) -> Result<CellMeasure> {
        if self.depth == 0 {
            return Err(Error::DepthMismatch(
                "cannot drop a letter at depth 0".into(),
            ));
        }
        let len = pow(self.n, self.depth - 1);
        let mut out = vec![0.0; len];
        for block in self.masses.chunks(len) {
            for (o, m) in out.iter_mut().zip(block) {
                *o += m;
            }
        }
        CellMeasure::new(self.n, self.depth - 1, out, self.kind.clone())
    }

    /// `word,mass` rows with one-based word labels.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["word", "mass"]);
        for (idx, m) in self.masses.iter().enumerate() {
            t.push(vec![index_label(idx, self.n, self.depth), fmt_g17(*m)]);
        }
        t
    }
}

fn same_shape(a: &CellMeasure, b: &CellMeasure) -> Result<()> {
    if a.n != b.n || a.depth != b.depth {
        return Err(Error::DepthMismatch(format!(
            "depth {} (n = {}) vs depth {} (n = {})",
            a.depth, a.n, b.depth, b.n
        )));
    }
    Ok(())
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `mass(w) = prod_k p_{w_k}`.
///
/// Products of weights are the cylinder masses only when branch-image
/// overlaps are null for the measure (measure separation); the catalog
/// systems satisfy this, `overlap_bad` does not.
pub fn exact_cell_masses(ifs: &IfsSystem, m: usize) -> Result<CellMeasure> {
    check_cells(ifs.n(), m)?;
    let mut cur = vec![1.0];
    for _ in 0..m {
        let mut next = Vec::with_capacity(cur.len() * ifs.n());
        for &p in ifs.weights() {
            next.extend(cur.iter().map(|c| p * c));
        }
        cur = next;
    }
    CellMeasure::new(ifs.n(), m, cur, MeasureKind::Exact)
}

/// One application of the Markov operator on depth-`m` masses:
/// `T(mu)(w) = p_{w_1} sum_i mu(tail(w)·i)`.
pub fn markov_step(ifs: &IfsSystem, mu: &[f64], m: usize) -> Vec<f64> {
    let n = ifs.n();
    if m == 0 {
        return vec![mu.iter().sum()];
    }
    let tail_len = pow(n, m - 1);
    let coarse: Vec<f64> = mu.chunks(n).map(|c| c.iter().sum()).collect();
    let mut out = Vec::with_capacity(mu.len());
    for &p in ifs.weights() {
        out.extend(coarse.iter().take(tail_len).map(|c| p * c));
    }
    out
}

/// Fixed point of the Markov operator started from the normalised
/// Lebesgue volumes `|det L_w|` of the cells.
pub fn markov_fixpoint(
    ifs: &IfsSystem,
    m: usize,
    max_iters: usize,
    tol: f64,
) -> Result<CellMeasure> {
    check_cells(ifs.n(), m)?;
    let vols: Vec<f64> = cells(ifs, m).iter().map(|c| c.volume_ratio()).collect();
    let s: f64 = vols.iter().sum();
    let start = vols.iter().map(|v| v / s).collect();
    markov_fixpoint_from(ifs, m, start, max_iters, tol)
}

/// Same iteration from an arbitrary probability vector.
pub fn markov_fixpoint_from(
    ifs: &IfsSystem,
    m: usize,
    start: Vec<f64>,
    max_iters: usize,
    tol: f64,
) -> Result<CellMeasure> {
    let n = ifs.n();
    if start.len() != pow(n, m) {
        return Err(Error::DepthMismatch(format!(
            "start vector has {} entries",
            start.len()
        )));
    }
    if m == 0 {
        return CellMeasure::new(
            n,
            0,
            vec![1.0],
            MeasureKind::Fixpoint {
                iterations: 0,
                residual: 0.0,
            },
        );
    }
    let mut cur = start;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        let next = markov_step(ifs, &cur, m);
        residual = tv(&next, &cur);
        cur = next;
        if residual < tol {
            return CellMeasure::new(
                n,
                m,
                cur,
                MeasureKind::Fixpoint {
                    iterations: it,
                    residual,
                },
            );
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        residual,
    })
}

/// `max_E |mu(E) - sum_i p_i mu(gamma_i^{-1}(E))|` over the cylinders `E`
/// named by `test_cells`.
///
/// `mu(gamma_i^{-1}(E))` sums the masses of the depth-`m` cells `K_w` with
/// `gamma_i(K_w) = K_{i·w} ⊆ E`.
pub fn self_similarity_residual(
    ifs: &IfsSystem,
    mu: &CellMeasure,
    test_cells: &[Word],
) -> Result<f64> {
    let m = mu.depth();
    let n = ifs.n();
    if n != mu.n() {
        return Err(Error::DepthMismatch(format!(
            "measure has {} branches, system {n}",
            mu.n()
        )));
    }
    let mut worst: f64 = 0.0;
    for e in test_cells {
        let k = e.depth();
        if k > 0 && k + 1 > m {
            return Err(Error::DepthMismatch(format!(
                "test cell depth {k} needs a measure of depth >= {}",
                k + 1
            )));
        }
        let lhs = mu.cylinder_mass(e);
        let mut rhs = 0.0;
        for (i, &p) in ifs.weights().iter().enumerate() {
            let pre = if k == 0 {
                mu.total()
            } else if e.first() == Some(i) {
                mu.cylinder_mass(&e.tail())
            } else {
                0.0
            };
            rhs += p * pre;
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// For each `eps`, the mass of the depth-`m` cells whose bounding box is
/// closer than `eps` to some pairwise overlap `gamma_i(K) ∩ gamma_j(K)`
/// (overlaps taken as intersections of image bounding boxes).
pub fn measure_separation_estimate(
    ifs: &IfsSystem,
    eps_list: &[f64],
    mu: &CellMeasure,
) -> Result<Vec<f64>> {
    if mu.n() != ifs.n() {
        return Err(Error::DepthMismatch(
            "measure and system disagree on n".into(),
        ));
    }
    let images = cell_boxes(ifs, 1);
    let mut overlaps = Vec::new();
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if let Some(b) = images[i].intersection(&images[j]) {
                overlaps.push(b);
            }
        }
    }
    let boxes = cell_boxes(ifs, mu.depth());
    let dist: Vec<f64> = boxes
        .iter()
        .map(|b| {
            overlaps
                .iter()
                .map(|o| b.distance_to_box(o))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(eps_list
        .iter()
        .map(|&eps| {
            dist.iter()
                .zip(mu.masses())
                .filter(|(d, _)| **d < eps)
                .map(|(_, m)| m)
                .sum()
        })
        .collect())
}
