mod common;

use std::sync::Arc;

use num_complex::Complex64;
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use common::{cell_center, segment_samples};
use ifs_lab::bimodule::{
    a_valued_inner, build_bump_partition, cograph_inverse, cograph_iso, covariant_rep_check,
    left_action, reconstruction_vectors, right_action, theta_apply, theta_operator,
    AdmissibleSymbol, CographFunction, DEFAULT_DELTA,
};
use ifs_lab::catalog;
use ifs_lab::geometry::AxisBox;
use ifs_lab::l2_operators::{CellFunction, Discretization};
use ifs_lab::symbols::{SinBump, Symbol, TrigSum};
use ifs_lab::Error;

fn random_cells(n: usize, depth: usize, seed: u64) -> CellFunction {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    let v = (0..n.pow(depth as u32))
        .map(|_| Complex64::new(u(), u()))
        .collect();
    CellFunction::new(n, depth, v).unwrap()
}

fn max_diff(a: &CellFunction, b: &CellFunction) -> f64 {
    a.sup_dist(b).unwrap()
}

#[test]
fn theta_matches_the_defining_formula() {
    let (n, d) = (4, 3);
    let (xi, eta, zeta) = (
        random_cells(n, d, 1),
        random_cells(n, d, 2),
        random_cells(n, d, 3),
    );
    let got = theta_apply(&xi, &eta, &zeta).unwrap();
    let len = n.pow(d as u32 - 1);
    for i in 0..n {
        for w in 0..len {
            let inner: Complex64 = (0..n)
                .map(|j| eta.values()[j * len + w].conj() * zeta.values()[j * len + w])
                .sum::<Complex64>()
                / n as f64;
            let want = xi.values()[i * len + w] * inner;
            assert!((got.values()[i * len + w] - want).norm() < 1e-15);
        }
    }
}

#[test]
fn theta_adjoint_swaps_the_pair() {
    let s = catalog::tent_sigma().system;
    let disc = Discretization::new(&s, 3).unwrap();
    let (xi, eta) = (random_cells(6, 3, 4), random_cells(6, 3, 5));
    let t = theta_operator(&disc, &[(xi.clone(), eta.clone())]).unwrap();
    let swapped = theta_operator(&disc, &[(eta, xi)]).unwrap();
    assert!(t.adjoint().max_entry_diff(&swapped).unwrap() < 1e-15);
}

#[test]
fn theta_output_is_a_right_multiple_of_xi() {
    // rank one over the coefficient algebra: theta(zeta)(i.w) = xi(i.w) c(w)
    let (n, d) = (4, 2);
    let (xi, eta, zeta) = (
        random_cells(n, d, 6),
        random_cells(n, d, 7),
        random_cells(n, d, 8),
    );
    let out = theta_apply(&xi, &eta, &zeta).unwrap();
    let len = n.pow(d as u32 - 1);
    for w in 0..len {
        let c0 = out.values()[w] / xi.values()[w];
        for i in 1..n {
            let ci = out.values()[i * len + w] / xi.values()[i * len + w];
            assert!((ci - c0).norm() < 1e-12);
        }
    }
}

#[test]
fn inner_product_is_positive_and_conjugate_symmetric() {
    for seed in 0..10 {
        let (xi, eta) = (random_cells(6, 2, seed), random_cells(6, 2, seed + 100));
        let xx = a_valued_inner(&xi, &xi).unwrap();
        assert!(xx
            .values()
            .iter()
            .all(|v| v.re >= 0.0 && v.im.abs() < 1e-16));
        let xe = a_valued_inner(&xi, &eta).unwrap();
        let ex = a_valued_inner(&eta, &xi).unwrap();
        assert!(max_diff(&xe, &ex.conj()) < 1e-15);
    }
}

#[test]
fn actions_are_compatible_with_the_inner_product() {
    let n = 4;
    let (xi, eta) = (random_cells(n, 3, 9), random_cells(n, 3, 10));
    let b = random_cells(n, 2, 11);
    let a = random_cells(n, 3, 12);
    // <xi, eta b> = <xi, eta> b
    let lhs = a_valued_inner(&xi, &right_action(&eta, &b).unwrap()).unwrap();
    let rhs = a_valued_inner(&xi, &eta).unwrap().mul(&b).unwrap();
    assert!(max_diff(&lhs, &rhs) < 1e-15);
    // <a xi, eta> = <xi, conj(a) eta>
    let lhs = a_valued_inner(&left_action(&a, &xi).unwrap(), &eta).unwrap();
    let rhs = a_valued_inner(&xi, &left_action(&a.conj(), &eta).unwrap()).unwrap();
    assert!(max_diff(&lhs, &rhs) < 1e-15);
}

#[test]
fn cograph_map_preserves_the_inner_product() {
    for n in [2, 4, 6] {
        let f =
            CographFunction::new((0..n).map(|i| random_cells(n, 2, i as u64)).collect()).unwrap();
        let g = CographFunction::new((0..n).map(|i| random_cells(n, 2, 50 + i as u64)).collect())
            .unwrap();
        let lhs = a_valued_inner(&cograph_iso(&f).unwrap(), &cograph_iso(&g).unwrap()).unwrap();
        assert!(max_diff(&lhs, &f.inner(&g).unwrap()) < 1e-14);
        let back = cograph_inverse(&cograph_iso(&f).unwrap()).unwrap();
        for (x, y) in back.components().iter().zip(f.components()) {
            for (u, v) in x.values().iter().zip(y.values()) {
                assert!((u - v).norm() <= f64::EPSILON * v.norm());
            }
        }
    }
}

#[test]
fn partition_avoids_the_branch_values_and_sums_to_one() {
    for name in ["tent_square", "tent_sigma"] {
        let e = catalog::lookup(name).unwrap();
        let support = e.facts.symbol_support.clone().unwrap();
        let a = AdmissibleSymbol::new(
            Arc::new(SinBump::new(support.clone())),
            Some(support.clone()),
            &e.system,
            DEFAULT_DELTA,
        )
        .unwrap();
        let p = build_bump_partition(&a, &e.system, DEFAULT_DELTA).unwrap();
        assert!(!p.is_empty());
        for x in support.grid(41, false) {
            assert!((p.sum(&x) - 1.0).abs() < 1e-12, "{name} {x:?}");
        }
        let b_samples: Vec<Vec<f64>> = e
            .facts
            .values
            .iter()
            .flat_map(|s| segment_samples(s, 400))
            .collect();
        for u in p.supports() {
            let d = b_samples
                .iter()
                .map(|y| u.distance_to_point(y))
                .fold(f64::INFINITY, f64::min);
            assert!(d >= DEFAULT_DELTA / 2.0, "{name}: {u:?} at {d}");
        }
    }
}

#[test]
fn inadmissible_symbols_are_refused() {
    let s = catalog::tent_square().system;
    // support crosses the midline y = 1/2
    let bad = AxisBox::from_intervals(&[[0.1, 0.4], [0.3, 0.6]]).unwrap();
    let r = AdmissibleSymbol::new(
        Arc::new(SinBump::new(bad.clone())),
        Some(bad),
        &s,
        DEFAULT_DELTA,
    );
    assert!(matches!(r, Err(Error::NotAdmissible(_))));
    // nonzero on the branch values although the declared support is fine
    let ok = AxisBox::from_intervals(&[[0.1, 0.4], [0.1, 0.4]]).unwrap();
    let r = AdmissibleSymbol::new(
        Arc::new(TrigSum::random(s.ambient(), 3, 1)),
        Some(ok),
        &s,
        DEFAULT_DELTA,
    );
    assert!(matches!(r, Err(Error::NotAdmissible(_))));
}

#[test]
fn rank_one_sum_reproduces_the_symbol_on_cells() {
    let s = catalog::tent_square().system;
    let support = AxisBox::from_intervals(&[[0.1, 0.4], [0.1, 0.4]]).unwrap();
    let sym = Arc::new(SinBump::new(support.clone()));
    let a = AdmissibleSymbol::new(sym.clone(), Some(support), &s, DEFAULT_DELTA).unwrap();
    let p = build_bump_partition(&a, &s, DEFAULT_DELTA).unwrap();
    let m = 3;
    let (xis, etas) = reconstruction_vectors(&s, &a, &p, m).unwrap();
    for seed in 0..3 {
        let zeta = random_cells(4, m + 1, 200 + seed);
        let mut acc = CellFunction::constant(4, m + 1, Complex64::new(0.0, 0.0));
        for (xi, eta) in xis.iter().zip(&etas) {
            acc = acc.add(&theta_apply(xi, eta, &zeta).unwrap()).unwrap();
        }
        for (u, v) in acc.values().iter().enumerate() {
            let want = sym.eval(&cell_center(&s, u, m + 1)) * zeta.values()[u];
            assert!((v - want).norm() < 1e-12, "cell {u}");
        }
    }
}

#[test]
fn covariant_relations_hold() {
    for name in ["tent_square", "tent_sigma"] {
        let s = catalog::lookup(name).unwrap().system;
        let r = covariant_rep_check(&s, 2, 5, 1).unwrap();
        assert!(
            r.left_module <= 1e-12 && r.inner_product <= 1e-12,
            "{name}: {r:?}"
        );
    }
    let skewed = catalog::tent_1d()
        .system
        .with_weights(vec![0.3, 0.7])
        .unwrap();
    assert!(matches!(
        covariant_rep_check(&skewed, 2, 1, 1),
        Err(Error::NonUniformWeights)
    ));
}
