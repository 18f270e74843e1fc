//! Axis-aligned boxes, parallelotopes and the small convex-geometry
//! predicates used by the branch-set and open-set checks.
//!
//! Everything here works in dimension 1, 2 or 3 with the Euclidean metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance used for touching/containment decisions.
pub const GEOM_TOL: f64 = 1e-12;

/// A closed axis-aligned box `[lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}]`.
///
/// Degenerate boxes (`lo_k == hi_k`) are allowed; the same type is used for
/// open candidate sets, where the caller interprets the bounds as strict.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty() || lo.len() > 3 {
            return Err(Error::InvalidBox(format!(
                "dimension {} not in 1..=3",
                lo.len()
            )));
        }
        for k in 0..lo.len() {
            if !(lo[k].is_finite() && hi[k].is_finite()) || lo[k] > hi[k] {
                return Err(Error::InvalidBox(format!(
                    "axis {k}: [{}, {}] is not an interval",
                    lo[k], hi[k]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Builds a box from `[[lo, hi], ...]` rows.
    pub fn from_intervals(rows: &[[f64; 2]]) -> Result<Self> {
        Self::new(
            rows.iter().map(|r| r[0]).collect(),
            rows.iter().map(|r| r[1]).collect(),
        )
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn has_interior(&self) -> bool {
        (0..self.dim()).all(|k| self.hi[k] > self.lo[k])
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| 0.5 * (self.lo[k] + self.hi[k]))
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|k| self.width(k).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn intervals(&self) -> Vec<[f64; 2]> {
        (0..self.dim()).map(|k| [self.lo[k], self.hi[k]]).collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .enumerate()
            .all(|(k, &v)| v >= self.lo[k] - tol && v <= self.hi[k] + tol)
    }

    /// `other` lies inside `self` (closed containment, with tolerance).
    pub fn contains_box(&self, other: &AxisBox, tol: f64) -> bool {
        (0..self.dim()).all(|k| other.lo[k] >= self.lo[k] - tol && other.hi[k] <= self.hi[k] + tol)
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(k, &v)| v.clamp(self.lo[k], self.hi[k]))
            .collect()
    }

    pub fn distance_to_point(&self, x: &[f64]) -> f64 {
        euclid(x, &self.clamp(x))
    }

    pub fn distance_to_box(&self, other: &AxisBox) -> f64 {
        (0..self.dim())
            .map(|k| {
                let gap = (other.lo[k] - self.hi[k])
                    .max(self.lo[k] - other.hi[k])
                    .max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Closed intersection, `None` when empty.
    pub fn intersection(&self, other: &AxisBox) -> Option<AxisBox> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let l = self.lo[k].max(other.lo[k]);
            let h = self.hi[k].min(other.hi[k]);
            if l > h {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        Some(AxisBox { lo, hi })
    }

    /// Box enlarged by `r` on every side.
    pub fn inflate(&self, r: f64) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().map(|v| v - r).collect(),
            hi: self.hi.iter().map(|v| v + r).collect(),
        }
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|k| {
                        if mask >> k & 1 == 1 {
                            self.hi[k]
                        } else {
                            self.lo[k]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Regular grid with `res` points per axis. `centered` selects cell
    /// midpoints `lo + (k + 1/2) h`; otherwise the grid includes both ends.
    pub fn grid(&self, res: usize, centered: bool) -> Vec<Vec<f64>> {
        let d = self.dim();
        let total = res.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; d];
                for k in (0..d).rev() {
                    let j = idx % res;
                    idx /= res;
                    p[k] = if centered {
                        self.lo[k] + (j as f64 + 0.5) * self.width(k) / res as f64
                    } else if res == 1 {
                        self.lo[k]
                    } else {
                        self.lo[k] + j as f64 * self.width(k) / (res - 1) as f64
                    };
                }
                p
            })
            .collect()
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `center + axes * u` for `u` in `[-1, 1]^d`; columns of `axes` are the
/// half-edge vectors. Boxes and their affine images are parallelotopes.
#[derive(Debug, Clone)]
pub struct Parallelotope {
    pub center: DVector<f64>,
    pub axes: DMatrix<f64>,
}

impl Parallelotope {
    pub fn from_box(b: &AxisBox) -> Self {
        let d = b.dim();
        let center = DVector::from_vec(b.center());
        let axes = DMatrix::from_fn(d, d, |r, c| if r == c { 0.5 * b.width(r) } else { 0.0 });
        Self { center, axes }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Image under `x -> linear * x + translation`.
    pub fn affine_image(&self, linear: &DMatrix<f64>, translation: &DVector<f64>) -> Self {
        Self {
            center: linear * &self.center + translation,
            axes: linear * &self.axes,
        }
    }

    fn half_extent(&self, u: &DVector<f64>) -> f64 {
        (0..self.axes.ncols())
            .map(|j| self.axes.column(j).dot(u).abs())
            .sum()
    }

    /// Support interval of the projection onto `u`.
    pub fn project(&self, u: &DVector<f64>) -> (f64, f64) {
        let c = self.center.dot(u);
        let r = self.half_extent(u);
        (c - r, c + r)
    }

    pub fn bounding_box(&self) -> AxisBox {
        let d = self.dim();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for k in 0..d {
            let r: f64 = (0..self.axes.ncols())
                .map(|j| self.axes[(k, j)].abs())
                .sum();
            lo.push(self.center[k] - r);
            hi.push(self.center[k] + r);
        }
        AxisBox { lo, hi }
    }

    /// True when every column is parallel to a coordinate axis, so the
    /// parallelotope coincides with its bounding box.
    pub fn is_axis_aligned(&self) -> bool {
        (0..self.axes.ncols()).all(|j| {
            let col = self.axes.column(j);
            col.iter().filter(|v| v.abs() > 0.0).count() <= 1
        })
    }

    pub fn vertices(&self) -> Vec<DVector<f64>> {
        let m = self.axes.ncols();
        (0..1usize << m)
            .map(|mask| {
                let mut v = self.center.clone();
                for j in 0..m {
                    let s = if mask >> j & 1 == 1 { 1.0 } else { -1.0 };
                    v += self.axes.column(j) * s;
                }
                v
            })
            .collect()
    }

    fn edge_directions(&self) -> Vec<DVector<f64>> {
        (0..self.axes.ncols())
            .map(|j| self.axes.column(j).into_owned())
            .filter(|c| c.norm() > 0.0)
            .collect()
    }

    /// Inequalities `a . x <= b` describing the parallelotope (requires
    /// full-rank axes).
    pub fn halfspaces(&self) -> Option<Vec<(DVector<f64>, f64)>> {
        let inv = self.axes.clone().try_inverse()?;
        let mut out = Vec::with_capacity(2 * self.dim());
        for k in 0..self.dim() {
            let row = inv.row(k).transpose();
            let c = row.dot(&self.center);
            out.push((row.clone(), 1.0 + c));
            out.push((-row, 1.0 - c));
        }
        Some(out)
    }
}

fn candidate_axes(p: &Parallelotope, q: &Parallelotope) -> Vec<DVector<f64>> {
    let d = p.dim();
    let mut axes: Vec<DVector<f64>> = (0..d)
        .map(|k| DVector::from_fn(d, |r, _| if r == k { 1.0 } else { 0.0 }))
        .collect();
    let mut edges = p.edge_directions();
    edges.extend(q.edge_directions());
    match d {
        2 => {
            for e in &edges {
                axes.push(DVector::from_vec(vec![-e[1], e[0]]));
            }
        }
        3 => {
            for (a, ea) in edges.iter().enumerate() {
                for eb in &edges[a + 1..] {
                    let c = DVector::from_vec(vec![
                        ea[1] * eb[2] - ea[2] * eb[1],
                        ea[2] * eb[0] - ea[0] * eb[2],
                        ea[0] * eb[1] - ea[1] * eb[0],
                    ]);
                    if c.norm() > 1e-14 * ea.norm() * eb.norm() {
                        axes.push(c);
                    }
                }
            }
        }
        _ => {}
    }
    axes.into_iter()
        .filter(|a| a.norm() > 0.0)
        .map(|a| a.normalize())
        .collect()
}

/// Separating-axis test. Returns a unit axis along which the two convex
/// sets are weakly separated (touching allowed), which certifies that the
/// sets have disjoint interiors; `None` means their interiors overlap.
pub fn separating_axis(p: &Parallelotope, q: &Parallelotope, tol: f64) -> Option<DVector<f64>> {
    for u in candidate_axes(p, q) {
        let (pl, ph) = p.project(&u);
        let (ql, qh) = q.project(&u);
        if ph <= ql + tol || qh <= pl + tol {
            return Some(u);
        }
    }
    None
}

/// Chebyshev-centre linear programme: maximise `t` subject to
/// `a . x + t |a| <= b` for every halfspace. Solved by enumerating the
/// vertices of the `(d+1)`-dimensional feasible region, which is exact and
/// cheap for `d <= 3`. Returns the centre and its margin `t`.
pub fn chebyshev_center(halfspaces: &[(DVector<f64>, f64)]) -> Option<(Vec<f64>, f64)> {
    let d = halfspaces.first()?.0.len();
    let m = halfspaces.len();
    let k = d + 1;
    let rows: Vec<(Vec<f64>, f64)> = halfspaces
        .iter()
        .map(|(a, b)| {
            let mut r: Vec<f64> = a.iter().copied().collect();
            r.push(a.norm());
            (r, *b)
        })
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let a = DMatrix::from_fn(k, k, |r, c| rows[idx[r]].0[c]);
        let b = DVector::from_fn(k, |r, _| rows[idx[r]].1);
        if let Some(sol) = a.lu().solve(&b) {
            let feasible = rows.iter().all(|(r, rb)| {
                let lhs: f64 = r.iter().zip(sol.iter()).map(|(x, y)| x * y).sum();
                lhs <= rb + 1e-10 * (1.0 + rb.abs())
            });
            if feasible && sol.iter().all(|v| v.is_finite()) {
                let t = sol[d];
                if best.as_ref().map_or(true, |(_, bt)| t > *bt) {
                    best = Some((sol.iter().take(d).copied().collect(), t));
                }
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

fn combine(vertices: &[Vec<f64>], lambda: &[f64]) -> Vec<f64> {
    let d = vertices[0].len();
    let mut x = vec![0.0; d];
    for (v, &l) in vertices.iter().zip(lambda) {
        for k in 0..d {
            x[k] += l * v[k];
        }
    }
    x
}

/// Minimises a convex function of the barycentric weights of `vertices`
/// by accelerated projected gradient. `grad_at` maps a point `x = V lambda`
/// to the gradient of the objective with respect to `x`.
fn minimise_over_hull<F>(vertices: &[Vec<f64>], grad_at: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = vertices.len();
    let lip: f64 = 2.0
        * vertices
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>();
    let step = 1.0 / lip.max(1e-300);
    let mut lambda = vec![1.0 / m as f64; m];
    let mut y = lambda.clone();
    let mut t = 1.0f64;
    for _ in 0..4000 {
        let x = combine(vertices, &y);
        let g = grad_at(&x);
        let mut next: Vec<f64> = (0..m)
            .map(|i| y[i] - step * vertices[i].iter().zip(&g).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        project_simplex(&mut next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        for i in 0..m {
            y[i] = next[i] + (t - 1.0) / t_next * (next[i] - lambda[i]);
        }
        lambda = next;
        t = t_next;
    }
    combine(vertices, &lambda)
}

/// Distance from a point to the convex hull of `vertices`.
pub fn point_hull_distance(p: &[f64], vertices: &[Vec<f64>]) -> f64 {
    match vertices.len() {
        0 => f64::INFINITY,
        1 => euclid(p, &vertices[0]),
        2 => {
            let (a, b) = (&vertices[0], &vertices[1]);
            let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            let len2: f64 = ab.iter().map(|x| x * x).sum();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (p.iter()
                    .zip(a)
                    .zip(&ab)
                    .map(|((pi, ai), d)| (pi - ai) * d)
                    .sum::<f64>()
                    / len2)
                    .clamp(0.0, 1.0)
            };
            let q: Vec<f64> = a.iter().zip(&ab).map(|(ai, d)| ai + t * d).collect();
            euclid(p, &q)
        }
        _ => {
            let x = minimise_over_hull(vertices, |x| {
                x.iter().zip(p).map(|(a, b)| 2.0 * (a - b)).collect()
            });
            euclid(p, &x)
        }
    }
}

/// Distance between a closed box and the convex hull of `vertices`.
pub fn box_hull_distance(b: &AxisBox, vertices: &[Vec<f64>]) -> f64 {
    match vertices.len() {
        0 => f64::INFINITY,
        1 => b.distance_to_point(&vertices[0]),
        2 => {
            // f(t) = dist(a + t (b - a), box)^2 is convex and C^1 on [0, 1].
            let (a, c) = (&vertices[0], &vertices[1]);
            let f = |t: f64| {
                let x: Vec<f64> = a.iter().zip(c).map(|(p, q)| p + t * (q - p)).collect();
                b.distance_to_point(&x)
            };
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let (mut f1, mut f2) = (f(x1), f(x2));
            for _ in 0..200 {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = f(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = f(x2);
                }
            }
            f(0.0).min(f(1.0)).min(f(0.5 * (lo + hi)))
        }
        _ => {
            let x = minimise_over_hull(vertices, |x| {
                let c = b.clamp(x);
                x.iter().zip(&c).map(|(p, q)| 2.0 * (p - q)).collect()
            });
            b.distance_to_point(&x)
        }
    }
}
