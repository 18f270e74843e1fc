//! Grid-sampled checks: inverse branches of the expanding map and
//! self-similarity of the ambient box.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{euclid, sup_dist, AxisBox};

use super::system::IfsSystem;

/// Resolution used when an operation needs the attractor to be the box.
pub const ATTRACTOR_CHECK_RESOLUTION: usize = 64;

/// `max_{x, i} |phi(gamma_i(x)) - x|` (sup norm) over a `res^d` grid that
/// includes the box faces.
pub fn verify_inverse_branches(ifs: &IfsSystem, grid_resolution: usize) -> f64 {
    let res = grid_resolution.max(2);
    let grid = ifs.ambient().grid(res, false);
    grid.par_iter()
        .map(|x| {
            ifs.branches()
                .iter()
                .map(|g| sup_dist(&ifs.phi(&g.apply(x)), x))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Diagonal of one cell of the `res^d` cell-centred grid.
pub fn grid_spacing(ambient: &AxisBox, grid_resolution: usize) -> f64 {
    (0..ambient.dim())
        .map(|k| (ambient.width(k) / grid_resolution as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Symmetric Hausdorff distance between the cell-centred grid `G` on the
/// box and `∪_i gamma_i(G)`. Bounded by [`grid_spacing`] when the box is
/// the attractor.
pub fn self_similarity_defect(ifs: &IfsSystem, grid_resolution: usize) -> f64 {
    let res = grid_resolution.max(1);
    let bx = ifs.ambient();
    let grid = bx.grid(res, true);
    let images: Vec<Vec<f64>> = grid
        .iter()
        .flat_map(|x| ifs.branches().iter().map(move |g| g.apply(x)))
        .collect();
    let d = bx.dim();
    let h: Vec<f64> = (0..d).map(|k| bx.width(k) / res as f64).collect();

    // image -> grid: the nearest grid point is found per axis
    let img_to_grid = images
        .par_iter()
        .map(|y| {
            let nearest: Vec<f64> = (0..d)
                .map(|k| {
                    let j = ((y[k] - bx.lo()[k]) / h[k] - 0.5)
                        .round()
                        .clamp(0.0, (res - 1) as f64);
                    bx.lo()[k] + (j + 0.5) * h[k]
                })
                .collect();
            euclid(y, &nearest)
        })
        .reduce(|| 0.0, f64::max);

    let buckets = Buckets::new(bx, res, &images);
    let grid_to_img = grid
        .par_iter()
        .map(|x| buckets.nearest(x, &images))
        .reduce(|| 0.0, f64::max);
    img_to_grid.max(grid_to_img)
}

/// Points bucketed on the grid cells of the box (clamped at the faces).
struct Buckets {
    lo: Vec<f64>,
    h: Vec<f64>,
    res: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(bx: &AxisBox, res: usize, pts: &[Vec<f64>]) -> Self {
        let d = bx.dim();
        let h: Vec<f64> = (0..d).map(|k| bx.width(k) / res as f64).collect();
        let mut b = Self {
            lo: bx.lo().to_vec(),
            h,
            res,
            cells: vec![Vec::new(); res.pow(d as u32)],
        };
        for (i, p) in pts.iter().enumerate() {
            let c = b.coords(p);
            let idx = b.flat(&c);
            b.cells[idx].push(i);
        }
        b
    }

    fn coords(&self, p: &[f64]) -> Vec<i64> {
        p.iter()
            .enumerate()
            .map(|(k, &x)| {
                (((x - self.lo[k]) / self.h[k]).floor() as i64).clamp(0, self.res as i64 - 1)
            })
            .collect()
    }

    fn flat(&self, c: &[i64]) -> usize {
        c.iter().fold(0usize, |acc, &v| acc * self.res + v as usize)
    }

    fn nearest(&self, x: &[f64], pts: &[Vec<f64>]) -> f64 {
        let d = x.len();
        let c = self.coords(x);
        let hmin = self.h.iter().copied().fold(f64::INFINITY, f64::min);
        let mut best = f64::INFINITY;
        for r in 0..=self.res as i64 {
            // every bucket at Chebyshev ring r
            let mut off = vec![-r; d];
            loop {
                if off.iter().any(|v| v.abs() == r) {
                    let cell: Vec<i64> = c.iter().zip(&off).map(|(a, b)| a + b).collect();
                    if cell.iter().all(|&v| v >= 0 && v < self.res as i64) {
                        for &i in &self.cells[self.flat(&cell)] {
                            best = best.min(euclid(x, &pts[i]));
                        }
                    }
                }
                let mut k = 0;
                while k < d {
                    off[k] += 1;
                    if off[k] <= r {
                        break;
                    }
                    off[k] = -r;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
            // points in ring r + 1 or beyond are at least r * hmin away
            if best <= r as f64 * hmin {
                break;
            }
        }
        best
    }
}

/// Fails with [`Error::AttractorNotBox`] unless the box is (numerically)
/// the attractor.
pub fn require_attractor_is_box(ifs: &IfsSystem) -> Result<()> {
    let spacing = grid_spacing(ifs.ambient(), ATTRACTOR_CHECK_RESOLUTION);
    let defect = self_similarity_defect(ifs, ATTRACTOR_CHECK_RESOLUTION);
    if defect <= spacing {
        Ok(())
    } else {
        Err(Error::AttractorNotBox { defect, spacing })
    }
}
