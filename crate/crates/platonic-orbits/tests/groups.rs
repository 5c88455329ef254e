use platonic_orbits::archimedean::ArchimedeanPolyhedron;
use platonic_orbits::chambers::{chamber_center, ChamberComplex, Location};
use platonic_orbits::symmetry::{matrix_distance, GroupKind, Mat3, Vec3};
use proptest::prelude::*;

const ALL: [GroupKind; 5] = [GroupKind::Tetrahedral, GroupKind::Octahedral, GroupKind::Icosahedral, GroupKind::Klein4, GroupKind::Binary];

#[test]
fn groups_are_closed_rotation_groups() {
    for k in ALL {
        let g = k.group();
        assert_eq!(g.order(), k.order());
        for a in 0..g.order() {
            let m = g.matrix(a);
            assert!((m.determinant() - 1.0).abs() < 1e-12);
            assert!(matrix_distance(&(m.transpose() * m), &Mat3::identity()) < 1e-12);
            assert_eq!(g.compose(a, g.inverse(a)), 0, "{k}");
            for b in 0..g.order() {
                let c = g.compose(a, b);
                assert!(matrix_distance(g.matrix(c), &(m * g.matrix(b))) < 1e-12);
            }
        }
    }
}

#[test]
fn axis_folds_match_the_solids() {
    let expect: [(GroupKind, &[(usize, usize)]); 3] = [
        (GroupKind::Tetrahedral, &[(2, 3), (3, 4)]),
        (GroupKind::Octahedral, &[(2, 6), (3, 4), (4, 3)]),
        (GroupKind::Icosahedral, &[(2, 15), (3, 10), (5, 6)]),
    ];
    for (k, folds) in expect {
        let axes = &k.group().axes().axes;
        for &(fold, count) in folds {
            assert_eq!(axes.iter().filter(|a| a.fold == fold).count(), count, "{k} {fold}-fold");
        }
        // every non-identity element lies on exactly one axis
        let covered: usize = axes.iter().map(|a| a.fold - 1).sum();
        assert_eq!(covered, k.order() - 1);
    }
}

#[test]
fn conjugation_by_reflection_group_permutes_rotations() {
    for k in GroupKind::POLYHEDRAL {
        let cx = ChamberComplex::get(k).unwrap();
        let g = k.group();
        for p in 0..cx.len() {
            let r = cx.element(p);
            let mut seen = vec![false; g.order()];
            for m in g.matrices() {
                let c = r.transpose() * m * r;
                let i = g.find(&c).expect("conjugate stays in the group");
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
    }
}

#[test]
fn chamber_adjacency_is_symmetric_and_local() {
    for k in GroupKind::POLYHEDRAL {
        let cx = ChamberComplex::get(k).unwrap();
        for c in 0..cx.len() {
            assert_eq!(cx.locate(&chamber_center(cx, c)).unwrap(), Location::Chamber(c));
            for kind in 0..3 {
                let d = cx.neighbor(c, kind);
                assert_ne!(d, c);
                assert_eq!(cx.neighbor(d, kind), c);
                assert_eq!(cx.face_kind_between(c, d), Some(kind));
                // neighbours share exactly two of the three vertex directions
                let shared = cx.chambers[c].vertices.iter().filter(|v| cx.chambers[d].vertices.iter().any(|w| (*v - w).norm() < 1e-12)).count();
                assert_eq!(shared, 2);
            }
        }
    }
}

#[test]
fn qr_edges_connect_adjacent_chambers() {
    for k in GroupKind::POLYHEDRAL {
        let poly = ArchimedeanPolyhedron::get(k).unwrap();
        let cx = poly.complex();
        for e in &poly.edges {
            let (a, b) = poly.edge_chambers(e.a, e.b).expect("edge joins two chambers");
            assert!(cx.face_between(a, b).is_some());
            assert_eq!(poly.edge_orbit_class(e.a, e.b).unwrap(), e.orbit);
        }
        for g in 0..cx.len() {
            for e in &poly.edges {
                assert!(poly.edge(poly.act_vertex(g, e.a), poly.act_vertex(g, e.b)).is_some());
            }
        }
        for (v, p) in poly.vertices.iter().enumerate() {
            assert!((p.norm() - poly.vertices[0].norm()).abs() < 1e-12);
            assert_eq!(poly.edges.iter().filter(|e| e.a == v || e.b == v).count(), 4);
        }
    }
}

fn point() -> impl Strategy<Value = Vec3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-2).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #[test]
    fn chamber_of_is_equivariant(x in point(), gi in 0usize..120, k in 0usize..3) {
        let cx = ChamberComplex::get(GroupKind::POLYHEDRAL[k]).unwrap();
        let g = gi % cx.len();
        if let Some(c) = cx.chamber_of(&x) {
            prop_assert_eq!(cx.chamber_of(&(cx.element(g) * x)), Some(cx.act(g, c)));
        }
    }

    #[test]
    fn gamma_distance_is_invariant(x in point(), gi in 0usize..60, k in 0usize..3) {
        let g = GroupKind::POLYHEDRAL[k].group();
        let axes = g.axes();
        let r = g.matrix(gi % g.order());
        prop_assert!((axes.gamma_distance(&(r * x)) - axes.gamma_distance(&x)).abs() < 1e-12);
    }

    #[test]
    fn potential_sum_is_invariant(x in point(), gi in 0usize..60, k in 0usize..3) {
        let g = GroupKind::POLYHEDRAL[k].group();
        prop_assume!(g.axes().gamma_distance(&x) > 1e-3);
        let r = g.matrix(gi % g.order());
        let a = g.potential_sum(&x, 1.0);
        prop_assert!((g.potential_sum(&(r * x), 1.0) - a).abs() < 1e-11 * a);
    }
}
