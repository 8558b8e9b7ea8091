mod common;

use braidscape::arcs::{eta, OrientedArc};
use braidscape::clouds::{leq, CloudDiagram};
use braidscape::complex::{classify_cell, critical_cells, enumerate_cells, CellClass, DEFAULT_CELL_CAP};
use braidscape::planner::{
    canonical_path, plan_ordered, plan_unordered, random_configuration, stratum, validate_path, Configuration,
};
use braidscape::tc::{decide_tc, verify_certificate, TcOutcome};
use braidscape::tree::{Point, Tree, TreeStats};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_tree(max_vertices: usize) -> impl Strategy<Value = Tree> {
    prop::collection::vec(0usize..64, 1..max_vertices).prop_map(|p| common::tree_from_parents(&p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn numbering_is_preorder(tree in small_tree(12)) {
        let order = tree.order();
        for v in 1..order.len() {
            let p = order.parent(v).unwrap();
            prop_assert!(p < v);
            prop_assert_eq!(order.direction_from_parent(v) > 0, true);
        }
    }

    #[test]
    fn subdivision_is_sufficient_and_idempotent(tree in small_tree(10), n in 1usize..6) {
        let sub = tree.subdivide_for(n);
        prop_assert!(sub.is_sufficiently_subdivided(n));
        prop_assert_eq!(sub.subdivide_for(n), sub.clone());
        let (a, b) = (TreeStats::compute(&tree.order()), TreeStats::compute(&sub.order()));
        prop_assert_eq!((a.m, a.r, a.s), (b.m, b.r, b.s));
    }

    #[test]
    fn json_round_trip(tree in small_tree(12)) {
        prop_assert_eq!(Tree::parse_json(&tree.to_json()).unwrap(), tree);
    }

    #[test]
    fn distances_are_a_metric(tree in small_tree(10), seed in any::<u64>()) {
        let order = tree.subdivide_for(3).order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_configuration(&order, 3, &mut rng).unwrap();
        let [a, b, c] = [&pts.points()[0], &pts.points()[1], &pts.points()[2]];
        prop_assert_eq!(order.distance(a, b), order.distance(b, a));
        prop_assert!(order.distance(a, c) <= order.distance(a, b) + order.distance(b, c));
        prop_assert!(order.distance(a, a) == num_rational::BigRational::from_integer(0.into()));
    }

    #[test]
    fn critical_cells_respect_dimension_bound(tree in small_tree(8), n in 1usize..5) {
        let order = tree.subdivide_for(n).order();
        let m = TreeStats::compute(&order).m;
        for k in (n / 2).min(m) + 1..=n {
            prop_assert!(critical_cells(&order, n, k, DEFAULT_CELL_CAP).unwrap().is_empty());
        }
        for c in critical_cells(&order, n, (n / 2).min(m), DEFAULT_CELL_CAP).unwrap() {
            prop_assert_eq!(classify_cell(&order, &c), CellClass::Critical);
            prop_assert_eq!(c.size(), n);
        }
    }

    #[test]
    fn representatives_stay_in_class(tree in small_tree(8), n in 1usize..4) {
        let order = tree.subdivide_for(n).order();
        let dims: Vec<usize> = (0..=n).collect();
        for cell in enumerate_cells(&order, n, &dims, DEFAULT_CELL_CAP).unwrap().iter().take(300) {
            let d = CloudDiagram::of_cell(&order, cell);
            prop_assert_eq!(CloudDiagram::of_cell(&order, &d.representative(&order)), d.clone());
            prop_assert!(leq(&order, &d, &d).unwrap());
            let json = d.to_json(&order);
            prop_assert_eq!(CloudDiagram::from_json(&order, n, &json).unwrap(), d);
        }
    }

    #[test]
    fn eta_cancels_and_reverses(tree in small_tree(12), picks in prop::collection::vec((0usize..64, 0usize..64, any::<bool>(), any::<bool>()), 1..5)) {
        let order = tree.subdivide_for(2).order();
        let arcs: Vec<OrientedArc> = picks
            .iter()
            .filter_map(|&(a, b, si, ei)| {
                let (a, b) = (a % order.len(), b % order.len());
                (a != b).then(|| OrientedArc::new(&order, order.vertex_path(a, b), si, ei).unwrap())
            })
            .collect();
        let reversed: Vec<OrientedArc> = arcs.iter().map(|a| a.reversed()).collect();
        for v in 1..order.len() {
            let sums = eta(&order, &arcs, v).unwrap();
            let back = eta(&order, &reversed, v).unwrap();
            prop_assert!(sums.iter().zip(&back).all(|(x, y)| *x == -*y));
            if !arcs.iter().any(|a| a.is_endpoint(v)) {
                prop_assert_eq!(sums.iter().sum::<i64>(), 0);
            }
        }
    }

    #[test]
    fn plans_are_valid(tree in small_tree(10), n in 1usize..5, seed in any::<u64>()) {
        let order = tree.subdivide_for(n).order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_configuration(&order, n, &mut rng).unwrap();
        let y = random_configuration(&order, n, &mut rng).unwrap();
        let hub = canonical_path(&order, &x).unwrap();
        prop_assert!(Configuration::new(&order, hub.end().to_vec()).unwrap().same_unordered(&Configuration::canonical(n)));
        prop_assert!(stratum(&x).1 <= n);
        let p = plan_unordered(&order, &x, &y).unwrap();
        prop_assert!(validate_path(&order, &p).valid);
        prop_assert_eq!(p.start(), x.points());
        prop_assert!(plan_unordered(&order, &y, &x).unwrap().reversed().same_trace(&p));
        if TreeStats::compute(&order).m > 0 {
            let q = plan_ordered(&order, &x, &y).unwrap();
            prop_assert!(validate_path(&order, &q).valid);
            prop_assert_eq!(q.end(), y.points());
            // Forgetting labels keeps the path valid.
            for k in &q.keyframes {
                let mut pts: Vec<Point> = k.points.clone();
                pts.sort();
                prop_assert!(Configuration::new(&order, pts).is_ok());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_verify(tree in small_tree(9), n in 1usize..6) {
        let cert = decide_tc(&tree, n).unwrap();
        let m = cert.stats.m;
        match &cert.outcome {
            TcOutcome::Determined(d) => {
                prop_assert!(d.value <= 2 * m + 1);
                prop_assert_eq!(d.value % 2, 1);
                prop_assert!(verify_certificate(&cert).unwrap().passed());
            }
            TcOutcome::NotApplicable { .. } => prop_assert!(n >= 2 && m >= 1),
        }
    }
}

#[test]
fn certificate_with_non_critical_upper_bound_verifies() {
    let tree = Tree::parse_json(
        r#"{"vertices":["v0","v1","v2","v3","v4","v5","v6","v7","v8"],"base":"v0",
            "rotation":{"v0":["v1"],"v1":["v0","v2","v8"],"v2":["v1","v3"],"v3":["v2","v4"],
            "v4":["v3","v5","v6"],"v5":["v4","v7"],"v6":["v4"],"v7":["v5"],"v8":["v1"]}}"#,
    )
    .unwrap();
    let cert = decide_tc(&tree, 5).unwrap();
    let TcOutcome::Determined(d) = &cert.outcome else {
        panic!("expected a value")
    };
    assert_eq!(d.value, 5);
    assert!(verify_certificate(&cert).unwrap().passed());
}
