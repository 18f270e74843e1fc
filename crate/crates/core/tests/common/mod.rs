// Independent reference computations used by the integration tests.
#![allow(dead_code)]

use ifs_lab::ifs_core::IfsSystem;

/// Cell masses of the product measure: mass(w) = p_{w1} ... p_{wm}, with
/// the word index base n and w1 most significant.
pub fn product_masses(p: &[f64], m: usize) -> Vec<f64> {
    let mut masses = vec![1.0];
    for _ in 0..m {
        let mut next = Vec::with_capacity(masses.len() * p.len());
        for &pi in p {
            for &q in &masses {
                next.push(pi * q);
            }
        }
        masses = next;
    }
    masses
}

/// Letters of the word with index `idx`, w1 first.
pub fn letters(mut idx: usize, n: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for k in (0..m).rev() {
        out[k] = idx % n;
        idx /= n;
    }
    out
}

/// gamma_{w1} o ... o gamma_{wm} applied to `x`.
pub fn apply_word(ifs: &IfsSystem, word: &[usize], x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &i in word.iter().rev() {
        y = ifs.branch(i).apply(&y);
    }
    y
}

/// Centre of the depth-m cell `idx`.
pub fn cell_center(ifs: &IfsSystem, idx: usize, m: usize) -> Vec<f64> {
    let w = letters(idx, ifs.n(), m);
    apply_word(ifs, &w, &ifs.ambient().center())
}

/// Distance from `p` to the segment [a, b].
pub fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let dd: f64 = d.iter().map(|x| x * x).sum();
    let t = if dd == 0.0 {
        0.0
    } else {
        (p.iter()
            .zip(a)
            .zip(&d)
            .map(|((pi, ai), di)| (pi - ai) * di)
            .sum::<f64>()
            / dd)
            .clamp(0.0, 1.0)
    };
    p.iter()
        .zip(a)
        .zip(&d)
        .map(|((pi, ai), di)| (pi - ai - t * di).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Distance from `p` to a union of segments (a point is a segment with
/// equal endpoints).
pub fn distance_to_segments(p: &[f64], segs: &[Vec<Vec<f64>>]) -> f64 {
    segs.iter()
        .map(|s| point_segment_distance(p, &s[0], s.last().unwrap()))
        .fold(f64::INFINITY, f64::min)
}

/// Points spaced evenly along the segment.
pub fn segment_samples(s: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let (a, b) = (&s[0], s.last().unwrap());
    (0..=k)
        .map(|j| {
            let t = j as f64 / k as f64;
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        })
        .collect()
}

pub fn in_open_box(x: &[f64], lo: &[f64], hi: &[f64], margin: f64) -> bool {
    x.iter()
        .zip(lo)
        .zip(hi)
        .all(|((v, l), h)| *v > l + margin && *v < h - margin)
}

/// Upper bound on the weighted operator norm: the Frobenius norm of
/// W_r^{1/2} A W_c^{-1/2}.
pub fn weighted_frobenius(entries: &[(usize, usize, f64)], row_w: &[f64], col_w: &[f64]) -> f64 {
    entries
        .iter()
        .map(|&(r, c, v)| v * v * row_w[r] / col_w[c])
        .sum::<f64>()
        .sqrt()
}

/// Binomial 4-sigma acceptance for an empirical cell frequency.
pub fn within_band(freq: f64, p: f64, samples: u64, sigmas: f64) -> bool {
    let sd = (p * (1.0 - p) / samples as f64).sqrt();
    (freq - p).abs() <= sigmas * sd
}

/// Least-squares slope of log(r) against the index, as a per-step ratio.
pub fn fitted_ratio(r: &[f64]) -> f64 {
    let k = r.len() as f64;
    let xm = (k - 1.0) / 2.0;
    let ym = r.iter().map(|v| v.ln()).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in r.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v.ln() - ym);
        sxx += dx * dx;
    }
    (sxy / sxx).exp()
}
