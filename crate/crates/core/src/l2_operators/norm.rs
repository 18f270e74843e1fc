//! Operator norms between weighted `l^2` spaces.
//!
//! `‖T‖ = sup ‖T f‖_cod / ‖f‖_dom` with `‖f‖² = sum_k w_k |f_k|²`. The
//! sparsity graph (rows and columns joined by nonzeros) splits `T` into
//! independent blocks and the norm is the largest block norm. Small blocks
//! are handled by a dense SVD; larger ones by power iteration on `T† T`
//! from the normalised all-ones vector.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

use super::sparse::Csr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub max_iters: usize,
    /// Relative change of the estimate that stops the iteration.
    pub tol: f64,
    /// Blocks with at most this many columns go to the dense SVD.
    pub dense_limit: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-10,
            dense_limit: 64,
        }
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Weighted operator norm of `m` with row weights `row_w` (codomain) and
/// column weights `col_w` (domain). Columns of zero weight are ignored.
pub fn weighted_norm(m: &Csr, row_w: &[f64], col_w: &[f64], opts: NormOptions) -> Result<f64> {
    assert_eq!(row_w.len(), m.rows());
    assert_eq!(col_w.len(), m.cols());
    let (rows, cols) = (m.rows(), m.cols());
    let mut dsu = Dsu((0..rows + cols).collect());
    let mut any = false;
    for r in 0..rows {
        for (c, v) in m.row(r) {
            if v.norm() > 0.0 && col_w[c] > 0.0 {
                dsu.union(r, rows + c);
                any = true;
            }
        }
    }
    if !any {
        return Ok(0.0);
    }
    // group columns and rows by component root
    let mut col_groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for c in 0..cols {
        if col_w[c] > 0.0 {
            let root = dsu.find(rows + c);
            col_groups.entry(root).or_default().push(c);
        }
    }
    let mut row_groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for r in 0..rows {
        let root = dsu.find(r);
        if col_groups.contains_key(&root) {
            row_groups.entry(root).or_default().push(r);
        }
    }
    let mut best: f64 = 0.0;
    for (root, cs) in &col_groups {
        let Some(rs) = row_groups.get(root) else {
            continue;
        };
        let mut col_local = std::collections::HashMap::with_capacity(cs.len());
        for (k, &c) in cs.iter().enumerate() {
            col_local.insert(c, k);
        }
        // scaled block B = W_r^{1/2} A W_c^{-1/2}
        let mut t = Vec::new();
        for (lr, &r) in rs.iter().enumerate() {
            let sr = row_w[r].sqrt();
            for (c, v) in m.row(r) {
                if let Some(&lc) = col_local.get(&c) {
                    t.push((lr, lc, v * (sr / col_w[c].sqrt())));
                }
            }
        }
        let block = Csr::from_triplets(rs.len(), cs.len(), t);
        let start: Vec<f64> = cs.iter().map(|&c| col_w[c].sqrt()).collect();
        let s = if cs.len() <= opts.dense_limit && rs.len() <= 4 * opts.dense_limit {
            dense_norm(&block)
        } else {
            power_norm(&block, &start, opts)?
        };
        best = best.max(s);
    }
    Ok(best)
}

fn dense_norm(b: &Csr) -> f64 {
    let d = DMatrix::<Complex64>::from_fn(b.rows(), b.cols(), |r, c| b.get(r, c));
    d.singular_values().iter().copied().fold(0.0, f64::max)
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Power iteration on `B^H B` (Euclidean), starting from `start`; the
/// estimate is `‖B x‖ / ‖x‖`.
fn power_norm(b: &Csr, start: &[f64], opts: NormOptions) -> Result<f64> {
    let bh = b.conj_transpose();
    let mut x: Vec<Complex64> = start.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if norm2(&b.matvec(&x)) == 0.0 {
        // the all-ones direction is in the kernel; use a fixed pseudo-random start
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x5eed);
        x = (0..b.cols())
            .map(|_| {
                Complex64::new(
                    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
                    0.0,
                )
            })
            .collect();
        if norm2(&b.matvec(&x)) == 0.0 {
            return Ok(0.0);
        }
    }
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut est = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_iters {
        let y = b.matvec(&x);
        let s = norm2(&y);
        if s == 0.0 {
            return Ok(0.0);
        }
        change = (s - est).abs();
        est = s;
        if change <= opts.tol * s {
            return Ok(s);
        }
        let mut z = bh.matvec(&y);
        let nz = norm2(&z);
        z.iter_mut().for_each(|v| *v /= nz);
        x = z;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iters,
        residual: change / est.max(f64::MIN_POSITIVE),
    })
}
