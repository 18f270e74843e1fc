//! Chaos-game sampling of the self-similar measure.
//!
//! Generator: xoshiro256++ seeded through SplitMix64 (`seed_from_u64`).
//! Stream `s` of [`STREAMS`] is that generator advanced by `s` jumps of
//! `2^128` steps, so streams never overlap. Counts are integers, merged by
//! summation, so the result does not depend on thread scheduling.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::budget::check_cells;
use crate::error::Result;
use crate::geometry::GEOM_TOL;
use crate::ifs_core::IfsSystem;

use super::cells::pow;
use super::masses::{CellMeasure, MeasureKind};

/// Number of independent streams the samples are split over.
pub const STREAMS: usize = 8;

/// Default burn-in. About `log(diam / 1e-30) / log(1 / c2)` for
/// `c2 = 1/2`: after 100 steps the starting point is forgotten to far below
/// double precision.
pub const DEFAULT_BURN_IN: usize = 100;

/// Uniform double in `[0, 1)` from the top 53 bits.
pub fn unit_f64(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Generator for stream `s` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, s: usize) -> Xoshiro256PlusPlus {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..s {
        rng.jump();
    }
    rng
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Index of the depth-`m` cell containing `x`: at each level the smallest
/// branch whose image of the box contains the point (ties go to the
/// lexicographically smallest word), falling back to the nearest image.
pub fn locate(ifs: &IfsSystem, x: &[f64], m: usize) -> usize {
    let bx = ifs.ambient();
    let tol = GEOM_TOL * (1.0 + bx.diameter());
    let mut y = x.to_vec();
    let mut pre = vec![0.0; y.len()];
    let mut idx = 0;
    for _ in 0..m {
        let mut chosen = None;
        let mut nearest = (0, f64::INFINITY);
        for (i, g) in ifs.branches().iter().enumerate() {
            g.invert_into(&y, &mut pre);
            if bx.contains(&pre, tol) {
                chosen = Some(i);
                break;
            }
            let d = bx.distance_to_point(&pre);
            if d < nearest.1 {
                nearest = (i, d);
            }
        }
        let i = chosen.unwrap_or_else(|| {
            ifs.branch(nearest.0).invert_into(&y, &mut pre);
            nearest.0
        });
        idx = idx * ifs.n() + i;
        std::mem::swap(&mut y, &mut pre);
    }
    idx
}

fn run_stream(
    ifs: &IfsSystem,
    m: usize,
    samples: u64,
    seed: u64,
    s: usize,
    burn_in: usize,
) -> Vec<u64> {
    let mut rng = stream_rng(seed, s);
    let mut acc = 0.0;
    let cumulative: Vec<f64> = ifs
        .weights()
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let mut counts = vec![0u64; pow(ifs.n(), m)];
    let mut x = ifs.branch(0).fixed_point();
    let mut buf = vec![0.0; ifs.dim()];
    for _ in 0..burn_in {
        ifs.branch(pick(&cumulative, unit_f64(&mut rng)))
            .apply_into(&x, &mut buf);
        std::mem::swap(&mut x, &mut buf);
    }
    for _ in 0..samples {
        ifs.branch(pick(&cumulative, unit_f64(&mut rng)))
            .apply_into(&x, &mut buf);
        std::mem::swap(&mut x, &mut buf);
        counts[locate(ifs, &x, m)] += 1;
    }
    counts
}

/// Empirical depth-`m` masses from `samples` chaos-game points.
pub fn chaos_game(
    ifs: &IfsSystem,
    m: usize,
    samples: u64,
    seed: u64,
    burn_in: usize,
) -> Result<CellMeasure> {
    check_cells(ifs.n(), m)?;
    let samples = samples.max(1);
    let per: Vec<u64> = (0..STREAMS as u64)
        .map(|s| samples / STREAMS as u64 + u64::from(s < samples % STREAMS as u64))
        .collect();
    let counts = per
        .par_iter()
        .enumerate()
        .map(|(s, &k)| run_stream(ifs, m, k, seed, s, burn_in))
        .reduce(
            || vec![0u64; pow(ifs.n(), m)],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let masses = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    CellMeasure::new(
        ifs.n(),
        m,
        masses,
        MeasureKind::Empirical {
            samples,
            seed,
            burn_in,
        },
    )
}

/// Chaos-game estimate of `∫ f dmu` with its standard error.
pub fn chaos_integral<F>(
    ifs: &IfsSystem,
    f: F,
    samples: u64,
    seed: u64,
    burn_in: usize,
) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let samples = samples.max(2);
    let per: Vec<u64> = (0..STREAMS as u64)
        .map(|s| samples / STREAMS as u64 + u64::from(s < samples % STREAMS as u64))
        .collect();
    let sums: Vec<(f64, f64)> = per
        .par_iter()
        .enumerate()
        .map(|(s, &k)| {
            let mut rng = stream_rng(seed, s);
            let mut acc = 0.0;
            let cumulative: Vec<f64> = ifs
                .weights()
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            let mut x = ifs.branch(0).fixed_point();
            let (mut s1, mut s2) = (0.0, 0.0);
            for step in 0..burn_in as u64 + k {
                x = ifs.branch(pick(&cumulative, unit_f64(&mut rng))).apply(&x);
                if step >= burn_in as u64 {
                    let v = f(&x);
                    s1 += v;
                    s2 += v * v;
                }
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let nf = samples as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    (mean, (var / nf).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn locate_prefers_smallest_word_on_boundaries() {
        let s = catalog::tent_1d().system;
        // 0.5 lies in both gamma_1(K) and gamma_2(K)
        assert_eq!(locate(&s, &[0.5], 1), 0);
        assert_eq!(locate(&s, &[0.1], 2), 0);
        // 0.3 = gamma_1(0.6), 0.6 = gamma_2(0.8)
        assert_eq!(locate(&s, &[0.3], 2), 1);
        assert_eq!(locate(&s, &[0.9], 1), 1);
    }

    #[test]
    fn single_sample_fills_one_cell_and_runs_are_reproducible() {
        let s = catalog::tent_square().system;
        let mu = chaos_game(&s, 2, 1, 3, DEFAULT_BURN_IN).unwrap();
        assert_eq!(mu.masses().iter().filter(|&&m| m == 1.0).count(), 1);
        let a = chaos_game(&s, 2, 5000, 11, DEFAULT_BURN_IN).unwrap();
        let b = chaos_game(&s, 2, 5000, 11, DEFAULT_BURN_IN).unwrap();
        assert_eq!(a, b);
        assert!((a.total() - 1.0).abs() < 1e-14);
    }
}
