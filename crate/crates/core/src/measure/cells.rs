//! Words and cylinder cells `K_w = gamma_{w_1} o ... o gamma_{w_m}(K)`.
//!
//! A depth-`m` word is stored by its base-`n` index with `w_1` the most
//! significant letter. Refinement appends letters (`w -> w·v`), the
//! preimage under the expanding map prepends them (`w -> i·w`).

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Parallelotope};
use crate::ifs_core::IfsSystem;

/// A finite word over `{0, .., n-1}` (letters printed one-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn empty() -> Self {
        Self {
            letters: Vec::new(),
        }
    }

    /// Zero-based letters.
    pub fn new(letters: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l >= n) {
            return Err(Error::Parse(format!(
                "letter {} out of range 1..={n}",
                bad + 1
            )));
        }
        Ok(Self { letters })
    }

    /// Parses a one-based label such as `"142"` (or `"1.12.3"` when `n > 9`).
    pub fn parse(label: &str, n: usize) -> Result<Self> {
        let parts: Vec<&str> = if label.contains('.') {
            label.split('.').collect()
        } else {
            label.split("").filter(|s| !s.is_empty()).collect()
        };
        let mut letters = Vec::with_capacity(parts.len());
        for p in parts {
            let v: usize = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad word `{label}`")))?;
            if v == 0 {
                return Err(Error::Parse(format!("letters are one-based in `{label}`")));
            }
            letters.push(v - 1);
        }
        Self::new(letters, n)
    }

    pub fn from_index(mut idx: usize, n: usize, depth: usize) -> Self {
        let mut letters = vec![0; depth];
        for k in (0..depth).rev() {
            letters[k] = idx % n;
            idx /= n;
        }
        Self { letters }
    }

    pub fn index(&self, n: usize) -> usize {
        self.letters.iter().fold(0, |acc, &l| acc * n + l)
    }

    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn first(&self) -> Option<usize> {
        self.letters.first().copied()
    }

    /// `w_2 .. w_m`.
    pub fn tail(&self) -> Word {
        Word {
            letters: self.letters.iter().skip(1).copied().collect(),
        }
    }

    /// `i·w`.
    pub fn prepend(&self, i: usize) -> Word {
        let mut letters = Vec::with_capacity(self.depth() + 1);
        letters.push(i);
        letters.extend_from_slice(&self.letters);
        Word { letters }
    }

    /// `w·i`.
    pub fn append(&self, i: usize) -> Word {
        let mut letters = self.letters.clone();
        letters.push(i);
        Word { letters }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.letters.starts_with(&self.letters)
    }

    pub fn label(&self, n: usize) -> String {
        word_label(&self.letters, n)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.letters.iter().max().map_or(1, |m| m + 1);
        f.write_str(&word_label(&self.letters, n))
    }
}

fn word_label(letters: &[usize], n: usize) -> String {
    if n <= 9 {
        letters
            .iter()
            .map(|l| char::from(b'1' + *l as u8))
            .collect()
    } else {
        letters
            .iter()
            .map(|l| (l + 1).to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// One-based label of the depth-`m` word with index `idx`.
pub fn index_label(idx: usize, n: usize, depth: usize) -> String {
    Word::from_index(idx, n, depth).label(n)
}

/// `n^m` (unchecked; callers go through the budget first).
pub fn pow(n: usize, m: usize) -> usize {
    n.pow(m as u32)
}

/// The affine map `gamma_w = gamma_{w_1} o ... o gamma_{w_m}` of a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderCell {
    pub word: Word,
    pub linear: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl CylinderCell {
    pub fn new(ifs: &IfsSystem, word: Word) -> Self {
        let d = ifs.dim();
        let mut linear = DMatrix::identity(d, d);
        let mut translation = DVector::zeros(d);
        // gamma_{i}∘map(w): build from the last letter outwards
        for &l in word.letters().iter().rev() {
            let g = ifs.branch(l);
            translation = g.linear() * &translation + g.translation();
            linear = g.linear() * &linear;
        }
        Self {
            word,
            linear,
            translation,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.linear * DVector::from_column_slice(x) + &self.translation;
        v.iter().copied().collect()
    }

    pub fn parallelotope(&self, ambient: &AxisBox) -> Parallelotope {
        Parallelotope::from_box(ambient).affine_image(&self.linear, &self.translation)
    }

    pub fn center(&self, ambient: &AxisBox) -> Vec<f64> {
        self.apply(&ambient.center())
    }

    pub fn bounding_box(&self, ambient: &AxisBox) -> AxisBox {
        self.parallelotope(ambient).bounding_box()
    }

    pub fn diameter(&self, ambient: &AxisBox) -> f64 {
        let p = self.parallelotope(ambient);
        let vs = p.vertices();
        let mut best: f64 = 0.0;
        for a in &vs {
            for b in &vs {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    /// `|det L_w|`, the Lebesgue volume ratio of the cell.
    pub fn volume_ratio(&self) -> f64 {
        self.linear.determinant().abs()
    }
}

/// All depth-`m` cells in index order.
pub fn cells(ifs: &IfsSystem, m: usize) -> Vec<CylinderCell> {
    let n = ifs.n();
    (0..pow(n, m))
        .map(|idx| CylinderCell::new(ifs, Word::from_index(idx, n, m)))
        .collect()
}

/// Images `gamma_w(x0)` for every depth-`m` word, computed by prepending:
/// `out_{k+1}[i n^k + j] = gamma_i(out_k[j])`. With `x0` the box centre
/// these are the cell centres, and the depth-`(m+r)` points grouped in
/// blocks of `n^r` are the centre quadrature nodes of the depth-`m` cells.
pub fn word_images(ifs: &IfsSystem, m: usize, x0: &[f64]) -> Vec<Vec<f64>> {
    let mut cur = vec![x0.to_vec()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(cur.len() * ifs.n());
        for g in ifs.branches() {
            for p in &cur {
                next.push(g.apply(p));
            }
        }
        cur = next;
    }
    cur
}

pub fn cell_centers(ifs: &IfsSystem, m: usize) -> Vec<Vec<f64>> {
    word_images(ifs, m, &ifs.ambient().center())
}

/// Bounding boxes of all depth-`m` cells (exact for axis-aligned branches).
pub fn cell_boxes(ifs: &IfsSystem, m: usize) -> Vec<AxisBox> {
    let mut cur = vec![Parallelotope::from_box(ifs.ambient())];
    for _ in 0..m {
        let mut next = Vec::with_capacity(cur.len() * ifs.n());
        for g in ifs.branches() {
            for p in &cur {
                next.push(g.image_of(p));
            }
        }
        cur = next;
    }
    cur.iter().map(|p| p.bounding_box()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn index_round_trip_and_labels() {
        let w = Word::parse("142", 4).unwrap();
        assert_eq!(w.letters(), &[0, 3, 1]);
        assert_eq!(w.index(4), 3 * 4 + 1);
        assert_eq!(Word::from_index(w.index(4), 4, 3), w);
        assert_eq!(w.label(4), "142");
        assert_eq!(w.tail().label(4), "42");
        assert_eq!(w.prepend(2).label(4), "3142");
        assert!(Word::parse("5", 4).is_err());
        assert_eq!(Word::new(vec![9, 10], 12).unwrap().label(12), "10.11");
    }

    #[test]
    fn centers_agree_with_composed_maps() {
        let e = catalog::tent_sigma();
        let s = &e.system;
        let c = cell_centers(s, 3);
        for (idx, cell) in cells(s, 3).iter().enumerate() {
            let direct = cell.center(s.ambient());
            for k in 0..2 {
                assert!((direct[k] - c[idx][k]).abs() < 1e-15);
            }
        }
        let boxes = cell_boxes(s, 2);
        let b = &boxes[Word::parse("16", 6).unwrap().index(6)];
        let cell = CylinderCell::new(s, Word::parse("16", 6).unwrap());
        assert!((b.center()[0] - cell.center(s.ambient())[0]).abs() < 1e-15);
    }
}
