//! Open set condition for box candidates.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{chebyshev_center, separating_axis, AxisBox, Parallelotope, GEOM_TOL};

use super::system::IfsSystem;

#[derive(Debug, Clone, PartialEq)]
pub enum OscViolation {
    /// `gamma_i(V)` leaves `V`; the witness `x` lies in `V` and `gamma_i(x)`
    /// does not.
    Containment { branch: usize, witness: Vec<f64> },
    /// `gamma_i(V)` and `gamma_j(V)` overlap; the witness lies in both.
    Overlap {
        pair: (usize, usize),
        witness: Vec<f64>,
    },
}

impl OscViolation {
    pub fn witness(&self) -> &[f64] {
        match self {
            OscViolation::Containment { witness, .. } | OscViolation::Overlap { witness, .. } => {
                witness
            }
        }
    }
}

impl fmt::Display for OscViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OscViolation::Containment { branch, witness } => {
                write!(
                    f,
                    "gamma_{}(V) is not contained in V (witness {:?})",
                    branch + 1,
                    witness
                )
            }
            OscViolation::Overlap { pair, witness } => write!(
                f,
                "gamma_{}(V) and gamma_{}(V) overlap (witness {:?})",
                pair.0 + 1,
                pair.1 + 1,
                witness
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscVerdict {
    pub violations: Vec<OscViolation>,
}

impl OscVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&OscViolation> {
        self.violations.first()
    }
}

/// Checks `gamma_i(V) ⊆ V` and pairwise disjointness of `gamma_i(V)` for
/// the open box `V` (given by its closure).
///
/// Containment is decided on the vertices of the image parallelotope, which
/// is exact because `V` is convex (for axis-aligned branches this coincides
/// with the interval image). Disjointness of the open images is decided by
/// the separating-axis test; on overlap the Chebyshev centre of the
/// intersection is reported.
pub fn check_open_set_condition(ifs: &IfsSystem, candidate: &AxisBox) -> Result<OscVerdict> {
    if !candidate.has_interior() {
        return Err(Error::DegenerateCandidate);
    }
    if candidate.dim() != ifs.dim() {
        return Err(Error::DimensionMismatch {
            expected: ifs.dim(),
            found: candidate.dim(),
        });
    }
    let tol = GEOM_TOL * (1.0 + candidate.diameter());
    let v = Parallelotope::from_box(candidate);
    let images: Vec<Parallelotope> = ifs.branches().iter().map(|g| g.image_of(&v)).collect();
    let mut violations = Vec::new();

    for (i, img) in images.iter().enumerate() {
        let outside = img
            .vertices()
            .iter()
            .map(|p| candidate.distance_to_point(p.as_slice()))
            .fold(0.0, f64::max);
        if outside > tol {
            violations.push(OscViolation::Containment {
                branch: i,
                witness: containment_witness(ifs, i, candidate, tol),
            });
        }
    }

    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if separating_axis(&images[i], &images[j], tol).is_some() {
                continue;
            }
            let witness = overlap_witness(&images[i], &images[j])
                .unwrap_or_else(|| images[i].center.iter().copied().collect());
            violations.push(OscViolation::Overlap {
                pair: (i, j),
                witness,
            });
        }
    }
    Ok(OscVerdict { violations })
}

/// A corner of `V`, pulled slightly towards the centre, whose image leaves
/// `V` by the largest margin.
fn containment_witness(ifs: &IfsSystem, branch: usize, v: &AxisBox, tol: f64) -> Vec<f64> {
    let g = ifs.branch(branch);
    let c = v.center();
    let mut best = (c.clone(), f64::NEG_INFINITY);
    for pull in [1e-6, 1e-3, 1e-1] {
        for corner in v.corners() {
            let x: Vec<f64> = corner
                .iter()
                .zip(&c)
                .map(|(a, m)| a + pull * (m - a))
                .collect();
            let out = v.distance_to_point(&g.apply(&x));
            if out > best.1 {
                best = (x, out);
            }
        }
        if best.1 > tol {
            break;
        }
    }
    best.0
}

fn overlap_witness(p: &Parallelotope, q: &Parallelotope) -> Option<Vec<f64>> {
    let mut hs = p.halfspaces()?;
    hs.extend(q.halfspaces()?);
    // normalise rows so the margin is a Euclidean distance
    let hs: Vec<(DVector<f64>, f64)> = hs
        .into_iter()
        .map(|(a, b)| {
            let n = a.norm();
            (a / n, b / n)
        })
        .collect();
    chebyshev_center(&hs)
        .filter(|(_, t)| *t > 0.0)
        .map(|(x, _)| x)
}
