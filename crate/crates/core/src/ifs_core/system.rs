use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, GEOM_TOL};

use super::affine::AffineContraction;

/// Tolerance on `sum p_i = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Closed-form expanding maps shipped with the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedMap {
    Identity,
    /// `tau` on `[0, 1]`.
    Tent,
    /// `sigma` on `[0, 1]`.
    Sigma,
    /// `(tau(x), tau(y))`.
    TentTent,
    /// `(tau(x), sigma(y))`.
    TentSigma,
}

pub fn tent(x: f64) -> f64 {
    if x <= 0.5 {
        2.0 * x
    } else {
        -2.0 * x + 2.0
    }
}

pub fn sigma(x: f64) -> f64 {
    if x <= 1.0 / 3.0 {
        3.0 * x
    } else if x <= 2.0 / 3.0 {
        -3.0 * x + 2.0
    } else {
        3.0 * x - 2.0
    }
}

impl NamedMap {
    pub fn name(self) -> &'static str {
        match self {
            NamedMap::Identity => "identity",
            NamedMap::Tent => "tent_1d",
            NamedMap::Sigma => "sigma_1d",
            NamedMap::TentTent => "tent_square",
            NamedMap::TentSigma => "tent_sigma",
        }
    }

    pub fn dim(self) -> Option<usize> {
        match self {
            NamedMap::Identity => None,
            NamedMap::Tent | NamedMap::Sigma => Some(1),
            NamedMap::TentTent | NamedMap::TentSigma => Some(2),
        }
    }

    pub fn eval(self, x: &[f64]) -> Vec<f64> {
        match self {
            NamedMap::Identity => x.to_vec(),
            NamedMap::Tent => vec![tent(x[0])],
            NamedMap::Sigma => vec![sigma(x[0])],
            NamedMap::TentTent => vec![tent(x[0]), tent(x[1])],
            NamedMap::TentSigma => vec![tent(x[0]), sigma(x[1])],
        }
    }
}

impl FromStr for NamedMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => NamedMap::Identity,
            "tent_1d" | "tent" => NamedMap::Tent,
            "sigma_1d" | "sigma" => NamedMap::Sigma,
            "tent_square" => NamedMap::TentTent,
            "tent_sigma" => NamedMap::TentSigma,
            other => return Err(Error::Parse(format!("unknown expanding map `{other}`"))),
        })
    }
}

/// On `domain`, the expanding map inverts branch `branch`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePiece {
    pub domain: AxisBox,
    pub branch: usize,
}

/// The expanding map `phi` with `phi o gamma_i = id`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpandingMap {
    Named(NamedMap),
    /// First piece whose (closed) domain contains the point wins; points
    /// outside every domain use the nearest one, which keeps the map total.
    Piecewise(Vec<PiecewisePiece>),
}

/// An iterated function system of affine proper contractions on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    ambient: AxisBox,
    branches: Vec<AffineContraction>,
    weights: Vec<f64>,
    phi: ExpandingMap,
}

impl IfsSystem {
    /// `weights = None` selects the Hutchinson weights `1/n`.
    pub fn new(
        ambient: AxisBox,
        branches: Vec<AffineContraction>,
        weights: Option<Vec<f64>>,
        phi: ExpandingMap,
    ) -> Result<Self> {
        if !ambient.has_interior() {
            return Err(Error::InvalidBox(
                "ambient box needs lo < hi on every axis".into(),
            ));
        }
        let d = ambient.dim();
        let n = branches.len();
        if n < 2 {
            return Err(Error::Parse(format!("need at least two branches, got {n}")));
        }
        for (i, b) in branches.iter().enumerate() {
            if b.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: b.dim(),
                });
            }
            let image = b.image_of_box(&ambient).bounding_box();
            let tol = GEOM_TOL * (1.0 + ambient.diameter());
            if !ambient.contains_box(&image, tol) {
                return Err(Error::BranchLeavesBox { branch: i });
            }
        }
        let weights = match weights {
            Some(w) => {
                validate_weights(&w, n)?;
                w
            }
            None => vec![1.0 / n as f64; n],
        };
        match &phi {
            ExpandingMap::Named(m) => {
                if let Some(md) = m.dim() {
                    if md != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: md,
                        });
                    }
                }
            }
            ExpandingMap::Piecewise(pieces) => {
                if pieces.is_empty() {
                    return Err(Error::Parse(
                        "piecewise map needs at least one piece".into(),
                    ));
                }
                for p in pieces {
                    if p.branch >= n {
                        return Err(Error::Parse(format!(
                            "piece refers to branch {} of {n}",
                            p.branch
                        )));
                    }
                    if p.domain.dim() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: p.domain.dim(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            ambient,
            branches,
            weights,
            phi,
        })
    }

    pub fn ambient(&self) -> &AxisBox {
        &self.ambient
    }

    pub fn branches(&self) -> &[AffineContraction] {
        &self.branches
    }

    pub fn branch(&self, i: usize) -> &AffineContraction {
        &self.branches[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn expanding_map(&self) -> &ExpandingMap {
        &self.phi
    }

    /// Number of branches.
    pub fn n(&self) -> usize {
        self.branches.len()
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    /// Largest upper contraction bound over all branches.
    pub fn max_ratio(&self) -> f64 {
        self.branches.iter().map(|b| b.c2()).fold(0.0, f64::max)
    }

    /// All weights equal `1/n` (bitwise, as produced by the default).
    pub fn is_hutchinson(&self) -> bool {
        let u = 1.0 / self.n() as f64;
        self.weights.iter().all(|&w| (w - u).abs() <= 1e-15)
    }

    pub fn with_phi(&self, phi: ExpandingMap) -> Result<Self> {
        Self::new(
            self.ambient.clone(),
            self.branches.clone(),
            Some(self.weights.clone()),
            phi,
        )
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(
            self.ambient.clone(),
            self.branches.clone(),
            Some(weights),
            self.phi.clone(),
        )
    }

    /// Evaluates the expanding map.
    pub fn phi(&self, x: &[f64]) -> Vec<f64> {
        match &self.phi {
            ExpandingMap::Named(m) => m.eval(x),
            ExpandingMap::Piecewise(pieces) => {
                let tol = GEOM_TOL * (1.0 + self.ambient.diameter());
                let piece = pieces
                    .iter()
                    .find(|p| p.domain.contains(x, tol))
                    .unwrap_or_else(|| {
                        pieces
                            .iter()
                            .min_by(|a, b| {
                                a.domain
                                    .distance_to_point(x)
                                    .total_cmp(&b.domain.distance_to_point(x))
                            })
                            .expect("non-empty")
                    });
                self.branches[piece.branch].invert(x)
            }
        }
    }
}

pub(crate) fn validate_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {n} branches",
            w.len()
        )));
    }
    if let Some(bad) = w.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidWeights(format!(
            "weight {bad} is not positive"
        )));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {s}, not 1")));
    }
    Ok(())
}

impl fmt::Display for IfsSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IFS with {} branches on {:?}",
            self.n(),
            self.ambient.intervals()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves() -> Vec<AffineContraction> {
        vec![
            AffineContraction::from_rows(&[vec![0.5]], &[0.0]).unwrap(),
            AffineContraction::from_rows(&[vec![-0.5]], &[1.0]).unwrap(),
        ]
    }

    #[test]
    fn weights_must_be_positive_and_normalised() {
        let b = AxisBox::unit(1);
        let phi = ExpandingMap::Named(NamedMap::Tent);
        assert!(IfsSystem::new(b.clone(), halves(), Some(vec![1.0, 0.0]), phi.clone()).is_err());
        assert!(IfsSystem::new(
            b.clone(),
            halves(),
            Some(vec![0.5, 0.5 + 1e-9]),
            phi.clone()
        )
        .is_err());
        assert!(IfsSystem::new(b.clone(), halves(), Some(vec![0.25, 0.75]), phi.clone()).is_ok());
        let s = IfsSystem::new(b, halves(), None, phi).unwrap();
        assert!(s.is_hutchinson());
    }

    #[test]
    fn branch_leaving_box_is_rejected() {
        let b = AxisBox::unit(1);
        let br = vec![
            AffineContraction::from_rows(&[vec![0.5]], &[0.0]).unwrap(),
            AffineContraction::from_rows(&[vec![0.5]], &[0.7]).unwrap(),
        ];
        assert!(matches!(
            IfsSystem::new(b, br, None, ExpandingMap::Named(NamedMap::Identity)),
            Err(Error::BranchLeavesBox { branch: 1 })
        ));
    }

    #[test]
    fn piecewise_phi_inverts_branches() {
        let pieces = vec![
            PiecewisePiece {
                domain: AxisBox::from_intervals(&[[0.0, 0.5]]).unwrap(),
                branch: 0,
            },
            PiecewisePiece {
                domain: AxisBox::from_intervals(&[[0.5, 1.0]]).unwrap(),
                branch: 1,
            },
        ];
        let s = IfsSystem::new(
            AxisBox::unit(1),
            halves(),
            None,
            ExpandingMap::Piecewise(pieces),
        )
        .unwrap();
        for &x in &[0.0, 0.1, 0.5, 0.8, 1.0] {
            assert!((s.phi(&[x])[0] - tent(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_is_continuous_at_breaks() {
        assert!((sigma(1.0 / 3.0) - 1.0).abs() < 1e-15);
        assert!((sigma(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(tent(0.5), 1.0);
    }
}
