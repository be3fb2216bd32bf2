mod common;

use cdimlab::coverings::doubling_colored_cover;
use cdimlab::hyperbolic::*;
use cdimlab::spaces::{unit_grid, RootedTree};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn annulus_mesh_decays() {
    let cone = ConeSpace::new(unit_grid(20)).unwrap();
    let ts: Vec<f64> = (0..=128).map(|i| i as f64 * 0.125).collect();
    let sample = cone.sample(&ts).unwrap();
    let u = doubling_colored_cover(&sample.space, 1.0);
    let meshes: Vec<f64> = [1, 2, 4, 8].iter().map(|&k| annulus_contract(&sample, &u, k).unwrap().stats.mesh).collect();
    assert!(meshes.windows(2).all(|w| w[1] < w[0]), "{meshes:?}");
    let with_vertex = u.members.iter().position(|m| m.contains(0)).unwrap();
    assert!(u.members[with_vertex].contains(sample.id_of(5, 0.0).unwrap()));
}

#[test]
fn product_comparison_on_random_tree_quadruples() {
    let t = RootedTree::new(2, 8).unwrap();
    let x = t.space();
    let mut r = common::rng(61);
    let mut admissible = 0;
    for _ in 0..20000 {
        let q: Vec<usize> = (0..4).map(|_| r.gen_range(0..t.node_count())).collect();
        let (o, g, a, b) = (q[0], q[1], q[2], q[3]);
        let og = x.dist(o, g);
        let sigma = (og - x.gromov_product(o, a, g).min(x.gromov_product(o, b, g))).max(0.0);
        let rep = check_product_compare(&x, o, g, a, b, sigma);
        assert!(rep.hypothesis_met);
        assert!(rep.passed, "{q:?} {rep:?}");
        admissible += 1;
    }
    assert_eq!(admissible, 20000);
}

#[test]
fn hypothesis_failure_is_reported() {
    let x = RootedTree::new(2, 3).unwrap().space();
    let rep = check_product_compare(&x, 0, 14, 7, 8, 0.0);
    assert!(!rep.hypothesis_met);
    assert!(rep.passed);
}

proptest! {
    #[test]
    fn cone_triangle_inequality(z in prop::collection::vec(0usize..11, 3), t in prop::collection::vec(0.0f64..6.0, 3)) {
        let cone = ConeSpace::new(unit_grid(10)).unwrap();
        let p: Vec<(usize, f64)> = z.into_iter().zip(t).collect();
        let d = |i: usize, j: usize| cone.distance(p[i], p[j]).unwrap();
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
    }

    #[test]
    fn cone_distance_grows_with_angle(t in 0.0f64..5.0, tp in 0.0f64..5.0, a in 0.0f64..std::f64::consts::PI, b in 0.0f64..std::f64::consts::PI) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(comparison_side(t, tp, lo).unwrap() <= comparison_side(t, tp, hi).unwrap() + 1e-12);
    }

    #[test]
    fn visual_metric_is_ultrametric(x in 0usize..256, y in 0usize..256, z in 0usize..256) {
        let m = VisualBoundaryModel::new(2, 8, 2.0, 1.0, 1.0).unwrap();
        prop_assert!(m.distance(x, z) <= m.distance(x, y).max(m.distance(y, z)));
    }
}
