//! Continuous functions on the box used as symbols and trial vectors.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::geometry::AxisBox;

/// A continuous complex function with a known Lipschitz bound.
pub trait Symbol: Send + Sync + std::fmt::Debug {
    fn eval(&self, x: &[f64]) -> Complex64;

    /// Upper bound on the Euclidean Lipschitz constant.
    fn lipschitz(&self) -> f64;

    /// True when the function vanishes identically.
    fn is_zero(&self) -> bool {
        false
    }
}

pub type SharedSymbol = Arc<dyn Symbol>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub Complex64);

impl Symbol for Constant {
    fn eval(&self, _x: &[f64]) -> Complex64 {
        self.0
    }

    fn lipschitz(&self) -> f64 {
        0.0
    }

    fn is_zero(&self) -> bool {
        self.0 == Complex64::new(0.0, 0.0)
    }
}

/// `x -> x_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate(pub usize);

impl Symbol for Coordinate {
    fn eval(&self, x: &[f64]) -> Complex64 {
        Complex64::new(x[self.0], 0.0)
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }
}

/// `sum_k c_k exp(2 pi i <f_k, (x - lo) / width>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSum {
    lo: Vec<f64>,
    width: Vec<f64>,
    terms: Vec<(Vec<i32>, Complex64)>,
}

/// Highest frequency used by [`TrigSum::random`].
pub const MAX_FREQUENCY: i32 = 2;

impl TrigSum {
    pub fn new(ambient: &AxisBox, terms: Vec<(Vec<i32>, Complex64)>) -> Self {
        Self {
            lo: ambient.lo().to_vec(),
            width: (0..ambient.dim()).map(|k| ambient.width(k)).collect(),
            terms,
        }
    }

    /// `terms` random frequencies in `{-2..2}^d` with complex coefficients
    /// normalised to `sum |c_k| = 1`, so `|f| <= 1`.
    pub fn random(ambient: &AxisBox, terms: usize, seed: u64) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let d = ambient.dim();
        let span = (2 * MAX_FREQUENCY + 1) as f64;
        let mut out = Vec::with_capacity(terms);
        for _ in 0..terms.max(1) {
            let f: Vec<i32> = (0..d)
                .map(|_| ((u() * span).floor() as i32).min(2 * MAX_FREQUENCY) - MAX_FREQUENCY)
                .collect();
            let c = Complex64::new(u() - 0.5, u() - 0.5);
            out.push((f, c));
        }
        let total: f64 = out.iter().map(|(_, c)| c.norm()).sum();
        if total > 0.0 {
            for (_, c) in &mut out {
                *c /= total;
            }
        }
        Self::new(ambient, out)
    }

    pub fn terms(&self) -> &[(Vec<i32>, Complex64)] {
        &self.terms
    }
}

impl Symbol for TrigSum {
    fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(f, c)| {
                let phase: f64 = f
                    .iter()
                    .enumerate()
                    .map(|(k, &fk)| fk as f64 * (x[k] - self.lo[k]) / self.width[k])
                    .sum();
                c * Complex64::from_polar(1.0, 2.0 * PI * phase)
            })
            .sum()
    }

    fn lipschitz(&self) -> f64 {
        self.terms
            .iter()
            .map(|(f, c)| {
                let g: f64 = f
                    .iter()
                    .enumerate()
                    .map(|(k, &fk)| (2.0 * PI * fk as f64 / self.width[k]).powi(2))
                    .sum();
                c.norm() * g.sqrt()
            })
            .sum()
    }
}

/// `prod_k sin²(pi (x_k - lo_k) / w_k)` on `support`, zero outside. It
/// vanishes with its gradient on the boundary of the support.
#[derive(Debug, Clone, PartialEq)]
pub struct SinBump {
    pub support: AxisBox,
    pub amplitude: f64,
}

impl SinBump {
    pub fn new(support: AxisBox) -> Self {
        Self {
            support,
            amplitude: 1.0,
        }
    }
}

impl Symbol for SinBump {
    fn eval(&self, x: &[f64]) -> Complex64 {
        if !self.support.contains(x, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let v: f64 = (0..x.len())
            .map(|k| {
                let s = (PI * (x[k] - self.support.lo()[k]) / self.support.width(k)).sin();
                s * s
            })
            .product();
        Complex64::new(self.amplitude * v, 0.0)
    }

    fn lipschitz(&self) -> f64 {
        // |d/dt sin²(pi t / w)| <= pi / w and the other factors are <= 1
        self.amplitude
            * (0..self.support.dim())
                .map(|k| (PI / self.support.width(k)).powi(2))
                .sum::<f64>()
                .sqrt()
    }

    fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }
}

/// `(1/n) sum_i a(gamma_i(x))` for a symbol `a`.
#[derive(Debug, Clone)]
pub struct Transferred {
    pub inner: SharedSymbol,
    pub ifs: crate::ifs_core::IfsSystem,
}

impl Symbol for Transferred {
    fn eval(&self, x: &[f64]) -> Complex64 {
        let n = self.ifs.n() as f64;
        self.ifs
            .branches()
            .iter()
            .map(|g| self.inner.eval(&g.apply(x)))
            .sum::<Complex64>()
            / n
    }

    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz() * self.ifs.max_ratio()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_trig_sums_are_bounded_and_reproducible() {
        let b = AxisBox::unit(2);
        let f = TrigSum::random(&b, 4, 9);
        assert_eq!(f, TrigSum::random(&b, 4, 9));
        for p in b.grid(17, false) {
            assert!(f.eval(&p).norm() <= 1.0 + 1e-12);
        }
        // Lipschitz bound against finite differences
        let h = 1e-6;
        for p in b.grid(9, true) {
            let q = [p[0] + h, p[1]];
            assert!((f.eval(&q) - f.eval(&p)).norm() / h <= f.lipschitz() * (1.0 + 1e-4));
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let s = SinBump::new(AxisBox::from_intervals(&[[0.1, 0.4], [0.1, 0.4]]).unwrap());
        assert_eq!(s.eval(&[0.5, 0.2]).norm(), 0.0);
        assert!((s.eval(&[0.25, 0.25]).re - 1.0).abs() < 1e-15);
        assert!(s.eval(&[0.1, 0.3]).norm() < 1e-30);
    }
}
