//! Shipped example systems together with the facts they are expected to
//! satisfy.

use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::ifs_core::{
    AffineContraction, AffinePiece, ExpandingMap, IfsSystem, NamedMap, PiecewisePiece,
};

/// Expected geometric and measure-theoretic facts of a catalog system.
/// Sets are unions of convex pieces, each given by its vertices.
#[derive(Debug, Clone)]
pub struct ExpectedFacts {
    pub coincidence: Vec<Vec<Vec<f64>>>,
    pub values: Vec<Vec<Vec<f64>>>,
    pub finite_branch: bool,
    pub osc_candidate: AxisBox,
    pub satisfies_osc: bool,
    pub hutchinson_is_lebesgue: bool,
    pub attractor_is_box: bool,
    /// Support of the default admissible symbol used by reconstruction runs.
    pub symbol_support: Option<AxisBox>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub system: IfsSystem,
    pub facts: ExpectedFacts,
}

fn map(rows: &[Vec<f64>], t: &[f64]) -> AffineContraction {
    AffineContraction::from_rows(rows, t).expect("catalog branch")
}

fn diag2(a: f64, b: f64, t: [f64; 2]) -> AffineContraction {
    map(&[vec![a, 0.0], vec![0.0, b]], &t)
}

fn seg(a: [f64; 2], b: [f64; 2]) -> Vec<Vec<f64>> {
    vec![a.to_vec(), b.to_vec()]
}

fn pt(x: f64) -> Vec<Vec<f64>> {
    vec![vec![x]]
}

fn boxed(iv: &[[f64; 2]]) -> AxisBox {
    AxisBox::from_intervals(iv).expect("catalog box")
}

pub fn tent_square() -> CatalogEntry {
    let h = 0.5;
    let branches = vec![
        diag2(h, h, [0.0, 0.0]),
        diag2(h, -h, [0.0, 1.0]),
        diag2(-h, h, [1.0, 0.0]),
        diag2(-h, -h, [1.0, 1.0]),
    ];
    let system = IfsSystem::new(
        AxisBox::unit(2),
        branches,
        None,
        ExpandingMap::Named(NamedMap::TentTent),
    )
    .expect("tent_square");
    CatalogEntry {
        name: "tent_square",
        system,
        facts: ExpectedFacts {
            coincidence: vec![seg([0.0, 1.0], [1.0, 1.0]), seg([1.0, 0.0], [1.0, 1.0])],
            values: vec![seg([0.0, 0.5], [1.0, 0.5]), seg([0.5, 0.0], [0.5, 1.0])],
            finite_branch: false,
            osc_candidate: AxisBox::unit(2),
            satisfies_osc: true,
            hutchinson_is_lebesgue: true,
            attractor_is_box: true,
            symbol_support: Some(boxed(&[[0.1, 0.4], [0.1, 0.4]])),
        },
    }
}

pub fn tent_sigma() -> CatalogEntry {
    let (h, t) = (0.5, 1.0 / 3.0);
    let tt = 2.0 / 3.0;
    let branches = vec![
        diag2(h, t, [0.0, 0.0]),
        diag2(h, -t, [0.0, tt]),
        diag2(h, t, [0.0, tt]),
        diag2(-h, t, [1.0, 0.0]),
        diag2(-h, -t, [1.0, tt]),
        diag2(-h, t, [1.0, tt]),
    ];
    let system = IfsSystem::new(
        AxisBox::unit(2),
        branches,
        None,
        ExpandingMap::Named(NamedMap::TentSigma),
    )
    .expect("tent_sigma");
    CatalogEntry {
        name: "tent_sigma",
        system,
        facts: ExpectedFacts {
            coincidence: vec![
                seg([0.0, 0.0], [1.0, 0.0]),
                seg([0.0, 1.0], [1.0, 1.0]),
                seg([1.0, 0.0], [1.0, 1.0]),
            ],
            values: vec![
                seg([0.0, 1.0 / 3.0], [1.0, 1.0 / 3.0]),
                seg([0.0, 2.0 / 3.0], [1.0, 2.0 / 3.0]),
                seg([0.5, 0.0], [0.5, 1.0]),
            ],
            finite_branch: false,
            osc_candidate: AxisBox::unit(2),
            satisfies_osc: true,
            hutchinson_is_lebesgue: true,
            attractor_is_box: true,
            symbol_support: Some(boxed(&[[0.1, 0.4], [0.4, 0.6]])),
        },
    }
}

pub fn tent_1d() -> CatalogEntry {
    let branches = vec![map(&[vec![0.5]], &[0.0]), map(&[vec![-0.5]], &[1.0])];
    let system = IfsSystem::new(
        AxisBox::unit(1),
        branches,
        None,
        ExpandingMap::Named(NamedMap::Tent),
    )
    .expect("tent_1d");
    CatalogEntry {
        name: "tent_1d",
        system,
        facts: ExpectedFacts {
            coincidence: vec![pt(1.0)],
            values: vec![pt(0.5)],
            finite_branch: true,
            osc_candidate: AxisBox::unit(1),
            satisfies_osc: true,
            hutchinson_is_lebesgue: true,
            attractor_is_box: true,
            symbol_support: Some(boxed(&[[0.1, 0.4]])),
        },
    }
}

pub fn sigma_1d() -> CatalogEntry {
    let t = 1.0 / 3.0;
    let branches = vec![
        map(&[vec![t]], &[0.0]),
        map(&[vec![-t]], &[2.0 / 3.0]),
        map(&[vec![t]], &[2.0 / 3.0]),
    ];
    let system = IfsSystem::new(
        AxisBox::unit(1),
        branches,
        None,
        ExpandingMap::Named(NamedMap::Sigma),
    )
    .expect("sigma_1d");
    CatalogEntry {
        name: "sigma_1d",
        system,
        facts: ExpectedFacts {
            coincidence: vec![pt(0.0), pt(1.0)],
            values: vec![pt(1.0 / 3.0), pt(2.0 / 3.0)],
            finite_branch: true,
            osc_candidate: AxisBox::unit(1),
            satisfies_osc: true,
            hutchinson_is_lebesgue: true,
            attractor_is_box: true,
            symbol_support: Some(boxed(&[[0.4, 0.6]])),
        },
    }
}

/// Negative fixture: `{x/2, x/2 + 0.3}` on `[0, 1]`. The images overlap on
/// `[0.3, 0.5]` and the attractor is `[0, 0.6]`, not the box.
pub fn overlap_bad() -> CatalogEntry {
    let branches = vec![map(&[vec![0.5]], &[0.0]), map(&[vec![0.5]], &[0.3])];
    let phi = ExpandingMap::Piecewise(vec![
        PiecewisePiece {
            domain: boxed(&[[0.0, 0.5]]),
            branch: 0,
        },
        PiecewisePiece {
            domain: boxed(&[[0.5, 1.0]]),
            branch: 1,
        },
    ]);
    let system = IfsSystem::new(AxisBox::unit(1), branches, None, phi).expect("overlap_bad");
    CatalogEntry {
        name: "overlap_bad",
        system,
        facts: ExpectedFacts {
            coincidence: vec![],
            values: vec![],
            finite_branch: true,
            osc_candidate: AxisBox::unit(1),
            satisfies_osc: false,
            hutchinson_is_lebesgue: false,
            attractor_is_box: false,
            symbol_support: None,
        },
    }
}

/// All shipped entries, in a fixed order.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        tent_square(),
        tent_sigma(),
        tent_1d(),
        sigma_1d(),
        overlap_bad(),
    ]
}

pub fn names() -> Vec<&'static str> {
    vec![
        "tent_square",
        "tent_sigma",
        "tent_1d",
        "sigma_1d",
        "overlap_bad",
    ]
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| {
            Error::Parse(format!(
                "unknown catalog system `{name}` (known: {})",
                names().join(", ")
            ))
        })
}

/// Points spread over a convex piece given by its vertices.
fn sample_hull(vertices: &[Vec<f64>], per_edge: usize) -> Vec<Vec<f64>> {
    let piece = AffinePiece {
        pair: (0, 0),
        basepoint: vertices[0].clone(),
        basis: vec![],
        dimension: 0,
        vertices: vertices.to_vec(),
        image_under: None,
    };
    piece.sample_points(per_edge)
}

fn dist_to_union(p: &[f64], pieces: &[Vec<Vec<f64>>]) -> f64 {
    pieces
        .iter()
        .map(|v| crate::geometry::point_hull_distance(p, v))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric check that the union of `reported` pieces equals the union of
/// `expected` pieces: sample points of either side lie within `tol` of the
/// other. Returns the largest discrepancy seen.
pub fn union_discrepancy(reported: &[AffinePiece], expected: &[Vec<Vec<f64>>]) -> f64 {
    let rep: Vec<Vec<Vec<f64>>> = reported.iter().map(|p| p.vertices.clone()).collect();
    if rep.is_empty() && expected.is_empty() {
        return 0.0;
    }
    if rep.is_empty() || expected.is_empty() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for v in &rep {
        for p in sample_hull(v, 16) {
            worst = worst.max(dist_to_union(&p, expected));
        }
    }
    for v in expected {
        for p in sample_hull(v, 16) {
            worst = worst.max(dist_to_union(&p, &rep));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_is_found_by_name() {
        for name in names() {
            assert_eq!(lookup(name).unwrap().name, name);
        }
        assert!(lookup("nope").is_err());
        assert_eq!(tent_sigma().system.n(), 6);
    }
}
