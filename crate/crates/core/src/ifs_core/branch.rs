//! Coincidence set `C` (points where two branches agree), its image `B`
//! (values taken by two distinct branches at the same point) and the index
//! sets `I(x)`.
//!
//! For affine branches every pair contributes an affine subspace solving
//! `(L_i - L_j) x = t_j - t_i`, clipped to the ambient box; the clipped set
//! is a convex polytope stored through its vertices.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{box_hull_distance, point_hull_distance, sup_dist, AxisBox, GEOM_TOL};

use super::system::IfsSystem;

/// Default pivot tolerance for rank decisions.
pub const PIVOT_TOL: f64 = 1e-12;

/// Residual bound every stored point satisfies.
pub const PIECE_RESIDUAL_TOL: f64 = 1e-12;

/// Solution set of `gamma_i(x) = gamma_j(x)` (or its image) inside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    /// Branch pair `(i, j)`, zero-based, `i < j`.
    pub pair: (usize, usize),
    pub basepoint: Vec<f64>,
    /// Orthonormal basis of the direction space.
    pub basis: Vec<Vec<f64>>,
    /// Dimension of the piece (0 for a point).
    pub dimension: i32,
    /// Vertices of the clipped polytope; the piece is their convex hull.
    pub vertices: Vec<Vec<f64>>,
    /// `Some(i)` when this is the image of a coincidence piece under `gamma_i`.
    pub image_under: Option<usize>,
}

impl AffinePiece {
    pub fn distance_to_point(&self, p: &[f64]) -> f64 {
        point_hull_distance(p, &self.vertices)
    }

    pub fn distance_to_box(&self, b: &AxisBox) -> f64 {
        box_hull_distance(b, &self.vertices)
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.distance_to_point(p) <= tol
    }

    /// Points spread over the piece: vertices, plus evenly spaced points on
    /// every edge between vertex pairs and the centroid.
    pub fn sample_points(&self, per_edge: usize) -> Vec<Vec<f64>> {
        let v = &self.vertices;
        let mut out = v.clone();
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                for s in 1..per_edge {
                    let t = s as f64 / per_edge as f64;
                    out.push(
                        v[a].iter()
                            .zip(&v[b])
                            .map(|(x, y)| x + t * (y - x))
                            .collect(),
                    );
                }
            }
        }
        if v.len() > 2 {
            let d = v[0].len();
            let mut c = vec![0.0; d];
            for p in v {
                for k in 0..d {
                    c[k] += p[k] / v.len() as f64;
                }
            }
            out.push(c);
        }
        out
    }
}

/// Solves `m x = rhs` by Gauss-Jordan elimination with full pivoting.
/// Returns a particular solution and a basis of the kernel, or `None` when
/// the system is inconsistent.
pub fn solve_affine(
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
    pivot_tol: f64,
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut b = rhs.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let tol = pivot_tol * scale;
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let mut best = (k, k, 0.0f64);
        for i in k..rows {
            for j in k..cols {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        a.swap_rows(k, best.0);
        b.swap_rows(k, best.0);
        a.swap_columns(k, best.1);
        perm.swap(k, best.1);
        let p = a[(k, k)];
        for j in 0..cols {
            a[(k, j)] /= p;
        }
        b[k] /= p;
        for i in 0..rows {
            if i != k {
                let f = a[(i, k)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(k, j)];
                    }
                    b[i] -= f * b[k];
                }
            }
        }
        rank += 1;
    }
    let rhs_scale = rhs.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if (rank..rows).any(|i| b[i].abs() > pivot_tol * rhs_scale.max(scale)) {
        return None;
    }
    let mut x = vec![0.0; cols];
    for k in 0..rank {
        x[perm[k]] = b[k];
    }
    let kernel = (rank..cols)
        .map(|f| {
            let mut v = vec![0.0; cols];
            v[perm[f]] = 1.0;
            for k in 0..rank {
                v[perm[k]] = -a[(k, f)];
            }
            v
        })
        .collect();
    Some((x, kernel))
}

fn orthonormalize(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for q in &out {
            let dot: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
            for k in 0..w.len() {
                w[k] -= dot * q[k];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-14 {
            out.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Vertices of `{x0 + B c} ∩ box`, found by activating `k` box faces at a
/// time (`k` = number of basis vectors).
fn clip_to_box(x0: &[f64], basis: &[Vec<f64>], bx: &AxisBox) -> Vec<Vec<f64>> {
    let d = x0.len();
    let k = basis.len();
    let tol = GEOM_TOL * (1.0 + bx.diameter());
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut push = |p: Vec<f64>| {
        if bx.contains(&p, tol) && !verts.iter().any(|q| sup_dist(q, &p) <= tol) {
            verts.push(bx.clamp(&p));
        }
    };
    if k == 0 {
        push(x0.to_vec());
        return verts;
    }
    // choose k distinct axes and a side per axis
    let axes_sets: Vec<Vec<usize>> = (0..1usize << d)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..d).filter(|b| m >> b & 1 == 1).collect())
        .collect();
    for axes in &axes_sets {
        for sides in 0..1usize << k {
            let a = DMatrix::from_fn(k, k, |r, c| basis[c][axes[r]]);
            let rhs = DVector::from_fn(k, |r, _| {
                let ax = axes[r];
                let bound = if sides >> r & 1 == 1 {
                    bx.hi()[ax]
                } else {
                    bx.lo()[ax]
                };
                bound - x0[ax]
            });
            if let Some(c) = a.lu().solve(&rhs) {
                let p: Vec<f64> = (0..d)
                    .map(|r| x0[r] + (0..k).map(|j| basis[j][r] * c[j]).sum::<f64>())
                    .collect();
                if p.iter().all(|v| v.is_finite()) {
                    push(p);
                }
            }
        }
    }
    verts
}

/// The coincidence set as a list of pieces, one per branch pair with a
/// non-empty solution set inside the ambient box.
pub fn branch_coincidence_set(ifs: &IfsSystem) -> Vec<AffinePiece> {
    branch_coincidence_set_with(ifs, PIVOT_TOL)
}

pub fn branch_coincidence_set_with(ifs: &IfsSystem, pivot_tol: f64) -> Vec<AffinePiece> {
    let n = ifs.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (gi, gj) = (ifs.branch(i), ifs.branch(j));
            let m = gi.linear() - gj.linear();
            let rhs = gj.translation() - gi.translation();
            let Some((x0, kernel)) = solve_affine(&m, &rhs, pivot_tol) else {
                continue;
            };
            let basis = orthonormalize(&kernel);
            let vertices = clip_to_box(&x0, &basis, ifs.ambient());
            if vertices.is_empty() {
                continue;
            }
            out.push(AffinePiece {
                pair: (i, j),
                basepoint: x0,
                dimension: basis.len() as i32,
                basis,
                vertices,
                image_under: None,
            });
        }
    }
    out
}

/// Images of the coincidence pieces; their union is the branch value set.
/// Each piece of pair `(i, j)` is mapped by `gamma_i`, which agrees with
/// `gamma_j` there.
pub fn branch_value_set(ifs: &IfsSystem, coincidence: &[AffinePiece]) -> Vec<AffinePiece> {
    coincidence
        .iter()
        .map(|p| {
            let g = ifs.branch(p.pair.0);
            let lin = g.linear();
            let mapped_basis: Vec<Vec<f64>> = p
                .basis
                .iter()
                .map(|v| {
                    (lin * DVector::from_column_slice(v))
                        .iter()
                        .copied()
                        .collect()
                })
                .collect();
            AffinePiece {
                pair: p.pair,
                basepoint: g.apply(&p.basepoint),
                basis: orthonormalize(&mapped_basis),
                dimension: p.dimension,
                vertices: p.vertices.iter().map(|v| g.apply(v)).collect(),
                image_under: Some(p.pair.0),
            }
        })
        .collect()
}

/// True iff the coincidence set is finite (every piece is a point).
pub fn is_finite_branch(coincidence: &[AffinePiece]) -> bool {
    coincidence.iter().all(|p| p.dimension <= 0)
}

/// Both branch sets of a system.
#[derive(Debug, Clone)]
pub struct BranchSets {
    pub coincidence: Vec<AffinePiece>,
    pub values: Vec<AffinePiece>,
}

impl BranchSets {
    pub fn compute(ifs: &IfsSystem) -> Self {
        let coincidence = branch_coincidence_set(ifs);
        let values = branch_value_set(ifs, &coincidence);
        Self {
            coincidence,
            values,
        }
    }

    pub fn distance_to_values(&self, p: &[f64]) -> f64 {
        self.values
            .iter()
            .map(|v| v.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn values_distance_to_box(&self, b: &AxisBox) -> f64 {
        self.values
            .iter()
            .map(|v| v.distance_to_box(b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite_branch(&self) -> bool {
        is_finite_branch(&self.coincidence)
    }
}

/// `I(x)`: branches whose image of the ambient box contains `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchIndexSet {
    pub point: Vec<f64>,
    pub indices: Vec<usize>,
}

pub fn branch_index_set(ifs: &IfsSystem, x: &[f64]) -> BranchIndexSet {
    let tol = GEOM_TOL * (1.0 + ifs.ambient().diameter());
    let indices = (0..ifs.n())
        .filter(|&i| ifs.ambient().contains(&ifs.branch(i).invert(x), tol))
        .collect();
    BranchIndexSet {
        point: x.to_vec(),
        indices,
    }
}
