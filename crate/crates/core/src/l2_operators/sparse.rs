//! Compressed sparse row matrices over `Complex64`.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl Csr {
    /// Duplicate entries are summed; explicit zeros are kept out.
    pub fn from_triplets(rows: usize, cols: usize, mut t: Vec<(usize, usize, Complex64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(
                r < rows && c < cols,
                "entry ({r}, {c}) outside {rows}x{cols}"
            );
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        };
        m.prune(0.0);
        m
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        let t = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), t)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        (0..self.rows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r)
            .find(|(cc, _)| *cc == c)
            .map_or(Complex64::new(0.0, 0.0), |(_, v)| v)
    }

    /// Drops entries with modulus `<= tol`.
    pub fn prune(&mut self, tol: f64) {
        let mut indptr = vec![0; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].norm() > tol {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut t = Vec::new();
        let mut acc: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.cols];
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                t.push((r, c, acc[c]));
                acc[c] = Complex64::new(0.0, 0.0);
                mark[c] = false;
            }
            touched.clear();
        }
        Csr::from_triplets(self.rows, other.cols, t)
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> Csr {
        let t = self
            .triplets()
            .into_iter()
            .map(|(r, c, v)| (c, r, v.conj()))
            .collect();
        Csr::from_triplets(self.cols, self.rows, t)
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Csr, alpha: Complex64) -> Csr {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shapes differ"
        );
        let mut t = self.triplets();
        t.extend(
            other
                .triplets()
                .into_iter()
                .map(|(r, c, v)| (r, c, alpha * v)),
        );
        Csr::from_triplets(self.rows, self.cols, t)
    }

    pub fn sub(&self, other: &Csr) -> Csr {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, alpha: Complex64) -> Csr {
        let mut m = self.clone();
        for v in &mut m.values {
            *v *= alpha;
        }
        m
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Csr {
        let mut m = self.clone();
        for r in 0..m.rows {
            for k in m.indptr[r]..m.indptr[r + 1] {
                m.values[k] *= left[r] * right[m.indices[k]];
            }
        }
        m
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &Csr) -> Csr {
        assert_eq!(self.cols, other.cols);
        let mut t = self.triplets();
        t.extend(
            other
                .triplets()
                .into_iter()
                .map(|(r, c, v)| (r + self.rows, c, v)),
        );
        Csr::from_triplets(self.rows + other.rows, self.cols, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Csr) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| self.row(r).all(|(c, _)| c == r))
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut d = vec![vec![Complex64::new(0.0, 0.0); self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn product_matches_dense() {
        let a = Csr::from_triplets(
            2,
            3,
            vec![
                (0, 0, c(1.0)),
                (0, 2, c(2.0)),
                (1, 1, c(3.0)),
                (0, 0, c(1.0)),
            ],
        );
        let b = Csr::from_triplets(
            3,
            2,
            vec![
                (0, 1, c(1.0)),
                (1, 0, c(-1.0)),
                (2, 0, Complex64::new(0.0, 1.0)),
            ],
        );
        let p = a.matmul(&b).to_dense();
        assert_eq!(p[0][0], Complex64::new(0.0, 2.0));
        assert_eq!(p[0][1], c(2.0));
        assert_eq!(p[1][0], c(-3.0));
        assert_eq!(a.conj_transpose().get(2, 0), c(2.0));
        assert_eq!(a.sub(&a).nnz(), 0);
        assert!(Csr::identity(3).is_diagonal());
        assert_eq!(a.matvec(&[c(1.0), c(1.0), c(1.0)]), vec![c(4.0), c(3.0)]);
    }
}
