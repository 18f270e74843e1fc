use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Parallelotope};

/// Smallest singular value below which a linear part is treated as singular.
const SINGULAR_FLOOR: f64 = 1e-14;

/// Returns `(sigma_min(L), sigma_max(L))`, the two-sided Lipschitz bounds of
/// `x -> L x + t` in the Euclidean metric.
///
/// Fails with [`Error::NotAContraction`] unless `0 < c1 <= c2 < 1`.
pub fn contraction_bounds(linear: &DMatrix<f64>) -> Result<(f64, f64)> {
    if linear.nrows() != linear.ncols() {
        return Err(Error::DimensionMismatch {
            expected: linear.nrows(),
            found: linear.ncols(),
        });
    }
    let sv = linear.clone().singular_values();
    let c1 = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = sv.iter().copied().fold(0.0, f64::max);
    if c1 <= SINGULAR_FLOOR || c2 >= 1.0 || !c2.is_finite() {
        return Err(Error::NotAContraction { c1, c2 });
    }
    Ok((c1, c2))
}

/// One branch `gamma(x) = L x + t` of an iterated function system.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineContraction {
    linear: DMatrix<f64>,
    translation: DVector<f64>,
    inverse: DMatrix<f64>,
    c1: f64,
    c2: f64,
}

impl AffineContraction {
    pub fn new(linear: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        if translation.len() != linear.nrows() {
            return Err(Error::DimensionMismatch {
                expected: linear.nrows(),
                found: translation.len(),
            });
        }
        let (c1, c2) = contraction_bounds(&linear)?;
        let inverse = linear
            .clone()
            .try_inverse()
            .ok_or(Error::NotAContraction { c1, c2 })?;
        Ok(Self {
            linear,
            translation,
            inverse,
            c1,
            c2,
        })
    }

    /// Builds a branch from row-major matrix rows and a translation.
    pub fn from_rows(rows: &[Vec<f64>], translation: &[f64]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Parse(format!("linear part must be {d}x{d}")));
        }
        let linear = DMatrix::from_fn(d, d, |r, c| rows[r][c]);
        Self::new(linear, DVector::from_column_slice(translation))
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn linear_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.linear[(r, c)]).collect())
            .collect()
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for r in 0..d {
            let mut acc = self.translation[r];
            for c in 0..d {
                acc += self.linear[(r, c)] * x[c];
            }
            out[r] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn invert_into(&self, y: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for r in 0..d {
            let mut acc = 0.0;
            for c in 0..d {
                acc += self.inverse[(r, c)] * (y[c] - self.translation[c]);
            }
            out[r] = acc;
        }
    }

    /// `gamma^{-1}(y)`.
    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.invert_into(y, &mut out);
        out
    }

    pub fn inverse_linear(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn fixed_point(&self) -> Vec<f64> {
        let d = self.dim();
        let a = DMatrix::identity(d, d) - &self.linear;
        // I - L is invertible because ||L|| < 1.
        let x = a
            .lu()
            .solve(&self.translation)
            .expect("I - L is invertible");
        x.iter().copied().collect()
    }

    pub fn image_of(&self, p: &Parallelotope) -> Parallelotope {
        p.affine_image(&self.linear, &self.translation)
    }

    pub fn image_of_box(&self, b: &AxisBox) -> Parallelotope {
        self.image_of(&Parallelotope::from_box(b))
    }

    /// Preimage of a parallelotope under this branch.
    pub fn preimage_of(&self, p: &Parallelotope) -> Parallelotope {
        let shift = -(&self.inverse * &self.translation);
        p.affine_image(&self.inverse, &shift)
    }

    /// Composition `self o other`.
    pub fn compose(&self, other: &AffineContraction) -> (DMatrix<f64>, DVector<f64>) {
        (
            &self.linear * &other.linear,
            &self.linear * &other.translation + &self.translation,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_of_diagonal_maps() {
        let (c1, c2) =
            contraction_bounds(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5])))
                .unwrap();
        assert!((c1 - 0.5).abs() < 1e-15 && (c2 - 0.5).abs() < 1e-15);
        let (c1, c2) = contraction_bounds(&DMatrix::from_diagonal(&DVector::from_vec(vec![
            0.5,
            -1.0 / 3.0,
        ])))
        .unwrap();
        assert!((c1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((c2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_and_expanding_maps_are_rejected() {
        assert!(matches!(
            contraction_bounds(&DMatrix::zeros(2, 2)),
            Err(Error::NotAContraction { .. })
        ));
        assert!(matches!(
            contraction_bounds(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0]))),
            Err(Error::NotAContraction { .. })
        ));
    }

    #[test]
    fn inverse_and_fixed_point() {
        let g =
            AffineContraction::from_rows(&[vec![-0.5, 0.0], vec![0.0, 0.5]], &[1.0, 0.0]).unwrap();
        let x = [0.3, 0.7];
        let y = g.apply(&x);
        let back = g.invert(&y);
        assert!((back[0] - 0.3).abs() < 1e-15 && (back[1] - 0.7).abs() < 1e-15);
        let f = g.fixed_point();
        let gf = g.apply(&f);
        assert!((gf[0] - f[0]).abs() < 1e-15 && (gf[1] - f[1]).abs() < 1e-15);
    }
}
