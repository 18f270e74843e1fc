//! Functions constant on the depth-`m` cylinder cells.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs_core::IfsSystem;
use crate::measure::{cells::pow, word_images, CellMeasure};
use crate::symbols::Symbol;

#[derive(Debug, Clone, PartialEq)]
pub struct CellFunction {
    depth: usize,
    n: usize,
    values: Vec<Complex64>,
}

/// How a continuous function is reduced to one value per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleRule {
    /// Value at the image of the box centre, `gamma_w(c)`.
    Center,
    /// Mean over `s` Halton points of the box mapped into the cell.
    Average(usize),
}

impl CellFunction {
    pub fn new(n: usize, depth: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != pow(n, depth) {
            return Err(Error::DepthMismatch(format!(
                "{} values for depth {depth} with {n} branches",
                values.len()
            )));
        }
        Ok(Self { depth, n, values })
    }

    pub fn from_real(n: usize, depth: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            n,
            depth,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn constant(n: usize, depth: usize, c: Complex64) -> Self {
        Self {
            depth,
            n,
            values: vec![c; pow(n, depth)],
        }
    }

    pub fn indicator(n: usize, depth: usize, idx: usize) -> Self {
        let mut f = Self::constant(n, depth, Complex64::new(0.0, 0.0));
        f.values[idx] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn same_shape(&self, other: &CellFunction) -> Result<()> {
        if self.depth != other.depth || self.n != other.n {
            return Err(Error::DepthMismatch(format!(
                "cell functions at depths {} and {}",
                self.depth, other.depth
            )));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &CellFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            depth: self.depth,
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &CellFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &CellFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CellFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            depth: self.depth,
            n: self.n,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `sup |f - g|`.
    pub fn sup_dist(&self, other: &CellFunction) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    pub fn l2_norm(&self, mu: &CellMeasure) -> Result<f64> {
        Ok(inner_product(self, self, mu)?.re.max(0.0).sqrt())
    }

    /// Copies `value(w)` to every `value(w·v)`, `|v| = m' - m`.
    pub fn refine(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::DepthMismatch(format!(
                "cannot refine depth {} to shallower depth {depth}",
                self.depth
            )));
        }
        let rep = pow(self.n, depth - self.depth);
        let values = self
            .values
            .iter()
            .flat_map(|v| std::iter::repeat(*v).take(rep))
            .collect();
        Ok(Self {
            depth,
            n: self.n,
            values,
        })
    }

    /// `b(w)` copied to the cells `i·w` (pull-back through the expanding
    /// map, one level deeper).
    pub fn pull_back(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len() * self.n);
        for _ in 0..self.n {
            values.extend_from_slice(&self.values);
        }
        Self {
            depth: self.depth + 1,
            n: self.n,
            values,
        }
    }
}

/// `sum_w conj(f(w)) g(w) mass(w)`.
pub fn inner_product(f: &CellFunction, g: &CellFunction, mu: &CellMeasure) -> Result<Complex64> {
    f.same_shape(g)?;
    if mu.depth() != f.depth || mu.n() != f.n {
        return Err(Error::DepthMismatch(format!(
            "functions at depth {} against a measure at depth {}",
            f.depth,
            mu.depth()
        )));
    }
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(mu.masses())
        .map(|((a, b), m)| a.conj() * b * *m)
        .sum())
}

/// Radical inverse of `k` in base `b`.
fn radical_inverse(mut k: usize, b: usize) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += f * (k % b) as f64;
        k /= b;
        f *= inv;
    }
    r
}

/// First `s` Halton points (bases 2, 3, 5) in the box, skipping the origin.
pub fn halton_points(ifs: &IfsSystem, s: usize) -> Vec<Vec<f64>> {
    const BASES: [usize; 3] = [2, 3, 5];
    let bx = ifs.ambient();
    (1..=s)
        .map(|k| {
            (0..bx.dim())
                .map(|a| bx.lo()[a] + radical_inverse(k, BASES[a]) * bx.width(a))
                .collect()
        })
        .collect()
}

/// Reduces a continuous function to a depth-`m` cell function.
pub fn sample_to_cells(
    ifs: &IfsSystem,
    a: &dyn Symbol,
    m: usize,
    rule: SampleRule,
) -> Result<CellFunction> {
    crate::budget::check_cells(ifs.n(), m)?;
    let values = match rule {
        SampleRule::Center => {
            let pts = word_images(ifs, m, &ifs.ambient().center());
            pts.par_iter().map(|p| a.eval(p)).collect()
        }
        SampleRule::Average(s) => {
            let s = s.max(1);
            let base = halton_points(ifs, s);
            let per: Vec<Vec<Vec<f64>>> = base.iter().map(|b| word_images(ifs, m, b)).collect();
            (0..pow(ifs.n(), m))
                .into_par_iter()
                .map(|w| per.iter().map(|pts| a.eval(&pts[w])).sum::<Complex64>() / s as f64)
                .collect()
        }
    };
    CellFunction::new(ifs.n(), m, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::measure::exact_cell_masses;
    use crate::symbols::Coordinate;

    #[test]
    fn center_sampling_of_x_on_the_square() {
        let s = catalog::tent_square().system;
        let f = sample_to_cells(&s, &Coordinate(0), 1, SampleRule::Center).unwrap();
        let re: Vec<f64> = f.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![0.25, 0.25, 0.75, 0.75]);
        let avg = sample_to_cells(&s, &Coordinate(0), 1, SampleRule::Average(64)).unwrap();
        for (a, b) in avg.values().iter().zip(f.values()) {
            assert!((a.re - b.re).abs() < 0.02);
        }
    }

    #[test]
    fn refinement_copies_values_and_preserves_inner_products() {
        let s = catalog::tent_square().system;
        let ind = CellFunction::indicator(4, 1, 0).refine(2).unwrap();
        let ones: Vec<usize> = (0..16).filter(|&k| ind.values()[k].re == 1.0).collect();
        assert_eq!(ones, vec![0, 1, 2, 3]);
        let mu1 = exact_cell_masses(&s, 1).unwrap();
        let mu3 = exact_cell_masses(&s, 3).unwrap();
        let f = CellFunction::from_real(4, 1, &[1.0, -2.0, 0.5, 3.0]).unwrap();
        let g = CellFunction::from_real(4, 1, &[0.0, 1.0, 1.0, 1.0]).unwrap();
        let a = inner_product(&f, &g, &mu1).unwrap();
        let b = inner_product(&f.refine(3).unwrap(), &g.refine(3).unwrap(), &mu3).unwrap();
        assert!((a - b).norm() < 1e-14);
        assert!(f.refine(0).is_err());
    }
}
