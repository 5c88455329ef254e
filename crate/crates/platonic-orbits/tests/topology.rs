mod common;

use platonic_orbits::catalog::{self, entries};
use platonic_orbits::chambers::ChamberComplex;
use platonic_orbits::loops::{loop_from_sigma, GeneratingLoop};
use platonic_orbits::symmetry::{GroupKind, Vec3};
use platonic_orbits::topology::{self, condition_c_check, crossing_count_audit, crossing_sequence, invariant, same_cone, TopologyError};
use proptest::prelude::*;

#[test]
fn construction_and_extraction_are_inverse() {
    for e in entries() {
        let poly = e.polyhedron();
        for n in 1..=3 {
            let nu = e.nu(n).unwrap();
            let sigma = poly.sigma_from_nu(&nu).unwrap();
            assert_eq!(sigma.multiplicity, n, "{}", e.id);
            assert_eq!(poly.nu_from_sigma(&sigma).unwrap().canonical(), nu.canonical(), "{} n={n}", e.id);
            let lp = e.test_loop(n, 1.0, 64).unwrap();
            assert_eq!(invariant(&lp).unwrap(), sigma, "{} n={n}", e.id);
            // the chamber-centre construction lands in the same cone
            let other = loop_from_sigma(poly.complex(), &sigma, 1.0, 24 * sigma.period * n).unwrap();
            assert_eq!(invariant(&other).unwrap(), sigma, "{} n={n} via σ", e.id);
            let audit = crossing_count_audit(&lp, &sigma).unwrap();
            assert!(audit.matches, "{} n={n}: {audit:?}", e.id);
        }
    }
}

#[test]
fn distinct_catalog_cones_have_distinct_invariants() {
    for g in GroupKind::POLYHEDRAL {
        let group: Vec<_> = entries().iter().filter(|e| e.group == g && e.kind == catalog::EntryKind::Symmetric).collect();
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                let (la, lb) = (a.test_loop(1, 1.0, 64).unwrap(), b.test_loop(1, 1.0, 64).unwrap());
                assert!(!same_cone(&la, &lb).unwrap(), "{} {}", a.id, b.id);
            }
        }
    }
}

#[test]
fn invariant_transforms_with_the_group_action() {
    for e in entries() {
        let cx = e.polyhedron().complex();
        let lp = e.test_loop(1, 1.0, 64).unwrap();
        let sigma = invariant(&lp).unwrap();
        for g in [1, 5, cx.len() / 2 + 1] {
            let moved = lp.mapped(cx.element(g));
            let image: Vec<usize> = sigma.chambers.iter().map(|&c| cx.act(g, c)).collect();
            assert_eq!(invariant(&moved).unwrap(), cx.validate_sigma(&image, 1).unwrap(), "{}", e.id);
        }
    }
}

#[test]
fn invariant_ignores_parametrization() {
    let e = catalog::entry("O.nu4").unwrap();
    let lp = e.test_loop(1, 1.0, 96).unwrap();
    let sigma = invariant(&lp).unwrap();
    assert_eq!(invariant(&lp.shifted(17)).unwrap(), sigma);
    assert_eq!(invariant(&lp.resampled(331).unwrap()).unwrap(), sigma);
    assert_eq!(invariant(&lp.scaled(3.0)).unwrap(), sigma);
    let rev = invariant(&lp.reversed()).unwrap();
    let mut back = sigma.chambers.clone();
    back.reverse();
    assert_eq!(rev, ChamberComplex::get(lp.group).unwrap().validate_sigma(&back, 1).unwrap());
}

#[test]
fn loops_through_an_axis_are_rejected() {
    let e = catalog::entry("T.nu1").unwrap();
    let mut lp = e.test_loop(1, 1.0, 48).unwrap();
    let axis = lp.group.group().axes().axes[0].direction;
    lp.samples[10] = axis;
    assert!(matches!(invariant(&lp), Err(TopologyError::OnGamma { .. })));
}

#[test]
fn small_loops_around_one_axis_are_trivial() {
    // a circle about a 3-fold axis wraps a single pole: condition C fails
    let g = GroupKind::Tetrahedral;
    let axis = g.group().axes().axes.iter().find(|a| a.fold == 3).unwrap().direction;
    let t1 = axis.cross(&Vec3::new(0.3, 0.1, 0.9)).normalize();
    let t2 = axis.cross(&t1);
    let lp = GeneratingLoop::from_fn(g, 1.0, 120, |t| {
        let w = std::f64::consts::TAU * t;
        axis + (t1 * w.cos() + t2 * w.sin()) * 0.05
    })
    .unwrap();
    let seq = crossing_sequence(&lp).unwrap();
    assert_eq!(seq.crossings.len(), 6);
    let cx = ChamberComplex::get(g).unwrap();
    assert!(!condition_c_check(cx, &seq.itinerary()));
    assert!(matches!(invariant(&lp), Err(TopologyError::ConditionC { .. })));
}

#[test]
fn collision_loci_lie_on_gamma() {
    for e in entries().iter().filter(|e| e.group == GroupKind::Tetrahedral) {
        let cx = e.polyhedron().complex();
        let sigma = e.polyhedron().sigma_from_nu(&e.nu(1).unwrap()).unwrap();
        let loci = topology::collision_loci(cx, &sigma);
        assert_eq!(loci.len(), sigma.period, "{}", e.id);
        for l in &loci {
            let d = cx.poles[l.pole].direction;
            assert!(cx.chambers[l.chamber].poles.contains(&l.pole));
            assert!(e.group.group().axes().gamma_distance(&Vec3::new(d[0], d[1], d[2])) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn small_perturbations_keep_the_cone(seed in 0u64..10_000, k in 0usize..27) {
        let e = &entries()[k % entries().len()];
        let lp = e.test_loop(1, 1.0, 96).unwrap();
        let clearance = lp.min_gamma_distance();
        let mut rng = common::rng(seed);
        let bump = common::random_loop(&mut rng, e.group, 1.0, lp.m());
        let scale = 0.2 * clearance / bump.sup_norm();
        let moved = lp.with_samples(lp.samples.iter().zip(&bump.samples).map(|(a, b)| a + b * scale).collect());
        // segments may cut corners, but never by more than the perturbation
        prop_assume!(moved.min_gamma_distance() > 0.5 * clearance);
        prop_assert_eq!(invariant(&moved).unwrap(), invariant(&lp).unwrap());
    }
}
