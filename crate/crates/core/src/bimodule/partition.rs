//! Admissible symbols and tent-bump partitions of unity adapted to the
//! branch structure.

use crate::error::{Error, Result};
use crate::geometry::{separating_axis, AxisBox, Parallelotope};
use crate::ifs_core::{branch_index_set, BranchSets, IfsSystem};
use crate::symbols::SharedSymbol;

/// Default margin to `B_gamma`.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Default smallest half-width tried by the cover refinement.
pub const DEFAULT_MIN_SIZE: f64 = 1e-4;
/// `|a|` allowed on the `delta/2`-neighbourhood of `B_gamma`.
pub const VANISHING_TOL: f64 = 1e-12;

const SAT_TOL: f64 = 1e-12;

/// A symbol with a declared support box at distance at least `delta` from
/// the branch value set.
#[derive(Debug, Clone)]
pub struct AdmissibleSymbol {
    symbol: SharedSymbol,
    support: Option<AxisBox>,
    delta: f64,
}

fn sample_resolution(d: usize) -> usize {
    match d {
        1 => 2001,
        2 => 201,
        _ => 41,
    }
}

impl AdmissibleSymbol {
    /// Checks the declared support against `B_gamma` and samples `a` on the
    /// `delta/2`-neighbourhood of `B_gamma` and outside the support. The
    /// zero symbol needs no support.
    pub fn new(
        symbol: SharedSymbol,
        support: Option<AxisBox>,
        ifs: &IfsSystem,
        delta: f64,
    ) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::NotAdmissible(format!(
                "margin must be positive, got {delta}"
            )));
        }
        if symbol.is_zero() {
            return Ok(Self {
                symbol,
                support: None,
                delta,
            });
        }
        let support = support.ok_or_else(|| {
            Error::NotAdmissible("nonzero symbol without a declared support".into())
        })?;
        if support.dim() != ifs.dim() {
            return Err(Error::DimensionMismatch {
                expected: ifs.dim(),
                found: support.dim(),
            });
        }
        if !ifs.ambient().contains_box(&support, 0.0) {
            return Err(Error::NotAdmissible(
                "support leaves the ambient box".into(),
            ));
        }
        let sets = BranchSets::compute(ifs);
        let dist = sets.values_distance_to_box(&support);
        if dist < delta {
            return Err(Error::NotAdmissible(format!(
                "support is at distance {dist} from the branch value set, below {delta}"
            )));
        }
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for piece in &sets.values {
            for p in piece.sample_points(64) {
                for k in 0..p.len() {
                    for s in [-0.5, 0.5] {
                        let mut q = p.clone();
                        q[k] += s * delta;
                        probes.push(ifs.ambient().clamp(&q));
                    }
                }
                probes.push(p);
            }
        }
        for p in ifs.ambient().grid(sample_resolution(ifs.dim()), false) {
            if !support.contains(&p, 0.0) || sets.distance_to_values(&p) <= 0.5 * delta {
                probes.push(p);
            }
        }
        for p in &probes {
            let v = symbol.eval(p).norm();
            if v > VANISHING_TOL {
                return Err(Error::NotAdmissible(format!(
                    "|a| = {v:e} at {p:?}, outside the declared support or near the branch value set"
                )));
            }
        }
        Ok(Self {
            symbol,
            support: Some(support),
            delta,
        })
    }

    pub fn symbol(&self) -> &SharedSymbol {
        &self.symbol
    }

    pub fn support(&self) -> Option<&AxisBox> {
        self.support.as_ref()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_none()
    }
}

/// Tensor-product tent bumps `f_b(x) = prod_k max(0, 1 - |x_k - c_k| / h_k)`
/// on the grid `lo + j h`, restricted to nodes whose open support meets the
/// target box. They sum to one on the target.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpPartition {
    nodes: Vec<Vec<f64>>,
    h: Vec<f64>,
    supports: Vec<AxisBox>,
    target: Option<AxisBox>,
    delta: f64,
}

impl BumpPartition {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// Half-widths of the tents.
    pub fn half_widths(&self) -> &[f64] {
        &self.h
    }

    /// Closures of the (open) supports, clipped to the ambient box.
    pub fn supports(&self) -> &[AxisBox] {
        &self.supports
    }

    pub fn target(&self) -> Option<&AxisBox> {
        self.target.as_ref()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval(&self, b: usize, x: &[f64]) -> f64 {
        let c = &self.nodes[b];
        let mut v = 1.0;
        for k in 0..c.len() {
            let t = 1.0 - (x[k] - c[k]).abs() / self.h[k];
            if t <= 0.0 {
                return 0.0;
            }
            v *= t;
        }
        v
    }

    pub fn sum(&self, x: &[f64]) -> f64 {
        (0..self.len()).map(|b| self.eval(b, x)).sum()
    }

    /// Copy without bump `b`.
    pub fn without(&self, b: usize) -> BumpPartition {
        let mut p = self.clone();
        p.nodes.remove(b);
        p.supports.remove(b);
        p
    }
}

/// True when the open rectangle `u` around `node` passes the three cover
/// conditions.
fn rectangle_ok(ifs: &IfsSystem, sets: &BranchSets, node: &[f64], u: &AxisBox, delta: f64) -> bool {
    // (1) away from the delta/2-neighbourhood of B_gamma
    if sets.values_distance_to_box(u) <= 0.5 * delta {
        return false;
    }
    let pu = Parallelotope::from_box(u);
    let inside = branch_index_set(ifs, node).indices;
    let ambient = ifs.ambient();
    for i in 0..ifs.n() {
        if inside.contains(&i) {
            // (2) gamma_j gamma_i^{-1}(U) does not meet U
            let pre = ifs.branch(i).preimage_of(&pu);
            for j in (0..ifs.n()).filter(|&j| j != i) {
                if separating_axis(&ifs.branch(j).image_of(&pre), &pu, SAT_TOL).is_none() {
                    return false;
                }
            }
        } else if separating_axis(&ifs.branch(i).image_of_box(ambient), &pu, SAT_TOL).is_none() {
            // (3) U misses gamma_i(K)
            return false;
        }
    }
    true
}

/// Builds the partition with the default `min_size`.
pub fn build_bump_partition(
    a: &AdmissibleSymbol,
    ifs: &IfsSystem,
    delta: f64,
) -> Result<BumpPartition> {
    build_bump_partition_with(a, ifs, delta, DEFAULT_MIN_SIZE)
}

/// Starts from tents of half-width a quarter of the box and halves them
/// until every kept rectangle passes the three conditions.
pub fn build_bump_partition_with(
    a: &AdmissibleSymbol,
    ifs: &IfsSystem,
    delta: f64,
    min_size: f64,
) -> Result<BumpPartition> {
    let Some(target) = a.support() else {
        return Ok(BumpPartition {
            nodes: Vec::new(),
            h: (0..ifs.dim())
                .map(|k| 0.25 * ifs.ambient().width(k))
                .collect(),
            supports: Vec::new(),
            target: None,
            delta,
        });
    };
    let sets = BranchSets::compute(ifs);
    if sets.values_distance_to_box(target) < delta {
        return Err(Error::NotAdmissible(format!(
            "support is closer than {delta} to the branch value set"
        )));
    }
    let ambient = ifs.ambient();
    let d = ifs.dim();
    let mut h: Vec<f64> = (0..d).map(|k| 0.25 * ambient.width(k)).collect();
    loop {
        // grid index ranges whose open support meets the target
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|k| {
                let lo = ((target.lo()[k] - ambient.lo()[k]) / h[k]).floor() as i64;
                let hi = ((target.hi()[k] - ambient.lo()[k]) / h[k]).ceil() as i64;
                let first = (lo..=hi)
                    .find(|&j| ambient.lo()[k] + (j + 1) as f64 * h[k] > target.lo()[k])
                    .unwrap_or(hi);
                let last = (lo..=hi)
                    .rev()
                    .find(|&j| ambient.lo()[k] + (j - 1) as f64 * h[k] < target.hi()[k])
                    .unwrap_or(lo);
                (first, last)
            })
            .collect();
        let mut nodes = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            nodes.push(
                (0..d)
                    .map(|k| ambient.lo()[k] + idx[k] as f64 * h[k])
                    .collect::<Vec<f64>>(),
            );
            for k in (0..d).rev() {
                if idx[k] < ranges[k].1 {
                    idx[k] += 1;
                    continue 'outer;
                }
                idx[k] = ranges[k].0;
            }
            break;
        }
        let mut supports = Vec::with_capacity(nodes.len());
        let mut failed = None;
        for node in &nodes {
            let lo: Vec<f64> = (0..d)
                .map(|k| (node[k] - h[k]).max(ambient.lo()[k]))
                .collect();
            let hi: Vec<f64> = (0..d)
                .map(|k| (node[k] + h[k]).min(ambient.hi()[k]))
                .collect();
            let u = AxisBox::new(lo, hi)?;
            if !rectangle_ok(ifs, &sets, node, &u, delta) {
                failed = Some(node.clone());
                break;
            }
            supports.push(u);
        }
        match failed {
            None => {
                return Ok(BumpPartition {
                    nodes,
                    h,
                    supports,
                    target: Some(target.clone()),
                    delta,
                })
            }
            Some(point) => {
                h.iter_mut().for_each(|v| *v *= 0.5);
                if h.iter().any(|&v| v < min_size) {
                    return Err(Error::CoverFailure { point, min_size });
                }
            }
        }
    }
}
