mod common;

use common::{distance_to_segments, in_open_box, segment_samples};
use ifs_lab::catalog::{self, CatalogEntry};
use ifs_lab::geometry::AxisBox;
use ifs_lab::ifs_core::{
    branch_coincidence_set, branch_value_set, check_open_set_condition, export_system,
    is_finite_branch, parse_system, self_similarity_defect, verify_inverse_branches, AffinePiece,
    IfsSystem, OscViolation, ATTRACTOR_CHECK_RESOLUTION,
};

fn pieces_as_segments(p: &[AffinePiece]) -> Vec<Vec<Vec<f64>>> {
    p.iter().map(|q| q.vertices.clone()).collect()
}

// Every point of `a` lies within `tol` of `b` and vice versa.
fn same_union(a: &[Vec<Vec<f64>>], b: &[Vec<Vec<f64>>], tol: f64) -> bool {
    let covered = |x: &[Vec<Vec<f64>>], y: &[Vec<Vec<f64>>]| {
        x.iter()
            .flat_map(|s| segment_samples(s, 32))
            .all(|p| distance_to_segments(&p, y) <= tol)
    };
    covered(a, b) && covered(b, a)
}

fn brute_coincidences(ifs: &IfsSystem, res: usize) -> Vec<Vec<f64>> {
    ifs.ambient()
        .grid(res, false)
        .into_iter()
        .filter(|x| {
            (0..ifs.n()).any(|i| {
                (i + 1..ifs.n()).any(|j| {
                    let (a, b) = (ifs.branch(i).apply(x), ifs.branch(j).apply(x));
                    a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12)
                })
            })
        })
        .collect()
}

fn segments_of(e: &CatalogEntry) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<Vec<f64>>>) {
    (e.facts.coincidence.clone(), e.facts.values.clone())
}

#[test]
fn tent_square_branch_sets_are_the_two_edges_and_midlines() {
    let e = catalog::tent_square();
    let c = branch_coincidence_set(&e.system);
    let v = branch_value_set(&e.system, &c);
    let top = vec![vec![0.0, 1.0], vec![1.0, 1.0]];
    let right = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
    let hmid = vec![vec![0.0, 0.5], vec![1.0, 0.5]];
    let vmid = vec![vec![0.5, 0.0], vec![0.5, 1.0]];
    assert!(same_union(&pieces_as_segments(&c), &[top, right], 1e-12));
    assert!(same_union(&pieces_as_segments(&v), &[hmid, vmid], 1e-12));
    assert!(!is_finite_branch(&c));
}

#[test]
fn branch_sets_agree_with_brute_force_coincidences() {
    for name in ["tent_square", "tent_sigma", "tent_1d", "sigma_1d"] {
        let e = catalog::lookup(name).unwrap();
        let (cs, vs) = segments_of(&e);
        let c = branch_coincidence_set(&e.system);
        assert!(same_union(&pieces_as_segments(&c), &cs, 1e-12), "{name}");
        let v = branch_value_set(&e.system, &c);
        assert!(same_union(&pieces_as_segments(&v), &vs, 1e-12), "{name}");
        // grid points where two branches agree lie on the expected set and
        // every sample of the expected set is a coincidence
        for x in brute_coincidences(&e.system, 65) {
            assert!(distance_to_segments(&x, &cs) < 1e-12, "{name}: {x:?}");
        }
        for x in cs.iter().flat_map(|s| segment_samples(s, 8)) {
            let hit = (0..e.system.n()).any(|i| {
                (i + 1..e.system.n()).any(|j| {
                    let (a, b) = (e.system.branch(i).apply(&x), e.system.branch(j).apply(&x));
                    a.iter().zip(&b).all(|(u, w)| (u - w).abs() < 1e-12)
                })
            });
            assert!(hit, "{name}: {x:?}");
        }
        assert_eq!(is_finite_branch(&c), e.facts.finite_branch, "{name}");
    }
}

#[test]
fn finite_branch_only_for_the_interval_maps() {
    let c = branch_coincidence_set(&catalog::tent_1d().system);
    assert!(is_finite_branch(&c));
    assert_eq!(c.len(), 1);
    assert!((c[0].vertices[0][0] - 1.0).abs() < 1e-12);
    let v = branch_value_set(&catalog::tent_1d().system, &c);
    assert!((v[0].vertices[0][0] - 0.5).abs() < 1e-12);
    assert!(!is_finite_branch(&branch_coincidence_set(
        &catalog::tent_sigma().system
    )));
}

// Brute force: no point of the open box has two preimages in the open box,
// and every image corner stays in the closed box.
fn brute_osc(ifs: &IfsSystem) -> bool {
    let b = ifs.ambient();
    let (lo, hi) = (b.lo().to_vec(), b.hi().to_vec());
    let inside = b
        .corners()
        .iter()
        .all(|c| (0..ifs.n()).all(|i| b.contains(&ifs.branch(i).apply(c), 1e-12)));
    let disjoint = b.grid(97, true).iter().all(|y| {
        (0..ifs.n())
            .filter(|&i| in_open_box(&ifs.branch(i).invert(y), &lo, &hi, 1e-9))
            .count()
            <= 1
    });
    inside && disjoint
}

#[test]
fn open_set_condition_matches_brute_force() {
    for e in catalog::catalog() {
        let verdict = check_open_set_condition(&e.system, &e.facts.osc_candidate).unwrap();
        assert_eq!(verdict.passed(), e.facts.satisfies_osc, "{}", e.name);
        assert_eq!(brute_osc(&e.system), e.facts.satisfies_osc, "{}", e.name);
    }
}

#[test]
fn overlap_witness_lies_in_both_open_images() {
    let e = catalog::overlap_bad();
    let v = check_open_set_condition(&e.system, &AxisBox::unit(1)).unwrap();
    let overlap = v
        .violations
        .iter()
        .find_map(|x| match x {
            OscViolation::Overlap { pair, witness } => Some((*pair, witness.clone())),
            _ => None,
        })
        .expect("an overlap violation");
    assert_eq!(overlap.0, (0, 1));
    for i in [0, 1] {
        let pre = e.system.branch(i).invert(&overlap.1);
        assert!(in_open_box(&pre, &[0.0], &[1.0], 0.0), "{pre:?}");
    }
    // the images are [0, 0.5] and [0.3, 0.8]
    assert!(overlap.1[0] > 0.3 && overlap.1[0] < 0.5);
}

#[test]
fn inverse_branches_and_attractor_checks() {
    for name in ["tent_square", "tent_sigma", "tent_1d", "sigma_1d"] {
        let s = catalog::lookup(name).unwrap().system;
        assert!(verify_inverse_branches(&s, 64) <= 1e-12, "{name}");
        assert!(
            self_similarity_defect(&s, ATTRACTOR_CHECK_RESOLUTION) <= 1.0 / 64.0,
            "{name}"
        );
    }
    // one step of the map covers only [0, 0.8]
    assert!(
        self_similarity_defect(&catalog::overlap_bad().system, ATTRACTOR_CHECK_RESOLUTION) > 0.15
    );
}

#[test]
fn export_round_trips_catalog_systems() {
    for e in catalog::catalog() {
        let text = export_system(&e.system).unwrap();
        let back = parse_system(&text).unwrap();
        assert_eq!(back.n(), e.system.n());
        for (a, b) in back.branches().iter().zip(e.system.branches()) {
            assert!((a.linear() - b.linear()).abs().max() <= 1e-15);
            assert!((a.translation() - b.translation()).abs().max() <= 1e-15);
        }
        for (a, b) in back.weights().iter().zip(e.system.weights()) {
            assert!((a - b).abs() <= 1e-15);
        }
        for x in e.system.ambient().grid(9, true) {
            let (p, q) = (back.phi(&x), e.system.phi(&x));
            assert!(
                p.iter().zip(&q).all(|(u, v)| (u - v).abs() <= 1e-15),
                "{}",
                e.name
            );
        }
    }
}

#[test]
fn expanding_map_inverts_each_branch() {
    // phi(gamma_i(x)) = x away from the branch value set
    for name in ["tent_square", "tent_sigma"] {
        let s = catalog::lookup(name).unwrap().system;
        for x in s.ambient().grid(11, true) {
            for i in 0..s.n() {
                let y = s.phi(&s.branch(i).apply(&x));
                assert!(
                    y.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-12),
                    "{name} {i} {x:?}"
                );
            }
        }
    }
}
