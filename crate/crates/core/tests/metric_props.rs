use cdimlab::metric::{Covering, FiniteMetricSpace, Member};
use cdimlab::spaces::{circle_chordal, unit_grid, RootedTree};
use proptest::prelude::*;

/// Exhaustive four-point scan computed offline for 20 points on the unit
/// circle with the chordal metric.
const CIRCLE_20_DELTA: f64 = 0.585786437626905;

#[test]
fn circle_delta_matches_offline_scan() {
    let x = circle_chordal(20);
    let rep = x.delta_hyperbolicity().unwrap();
    assert!((rep.delta - CIRCLE_20_DELTA).abs() < 1e-12, "{}", rep.delta);
    let (o, a, b, c) = rep.witness;
    let w = x.gromov_product(o, a, c).min(x.gromov_product(o, c, b)) - x.gromov_product(o, a, b);
    assert!((w - rep.delta).abs() < 1e-12);
}

#[test]
fn tree_is_zero_hyperbolic() {
    let t = RootedTree::new(2, 4).unwrap().space();
    assert!(t.delta_hyperbolicity().unwrap().delta.abs() < 1e-12);
    let tiny = FiniteMetricSpace::from_line(vec![0.0, 1.0, 5.0]).unwrap();
    assert_eq!(tiny.delta_hyperbolicity().unwrap().delta, 0.0);
}

#[test]
fn delta_scan_refuses_large_spaces() {
    let x = unit_grid(400);
    assert!(x.delta_hyperbolicity().is_err());
}

#[test]
fn lebesgue_example_on_the_hundredth_grid() {
    let x = unit_grid(100);
    let left: Vec<usize> = (0..60).collect();
    let right: Vec<usize> = (41..=100).collect();
    let c = Covering::new(x.all_points(), vec![Member::new(left), Member::new(right)]);
    let s = x.covering_stats(&c).unwrap();
    assert_eq!(s.multiplicity, 2);
    assert!((s.lebesgue - 0.1).abs() < 1e-12);
    assert!((s.mesh - 0.59).abs() < 1e-12);
}

#[test]
fn negative_neighborhood_example() {
    let x = unit_grid(10);
    let u: Vec<usize> = (2..=8).collect();
    assert_eq!(x.neighborhood(&u, -0.1), vec![3, 4, 5, 6, 7]);
    assert_eq!(x.neighborhood(&u, 0.0), u);
    assert_eq!(x.neighborhood(&x.all_points(), -1.0), x.all_points());
}

#[test]
fn text_round_trip() {
    let x = circle_chordal(7);
    let back = FiniteMetricSpace::from_text(&x.to_text()).unwrap();
    for i in 0..7 {
        for j in 0..7 {
            assert!((x.dist(i, j) - back.dist(i, j)).abs() < 1e-12);
        }
    }
}

fn sample_space() -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec(-10.0f64..10.0, 2..24).prop_map(|mut xs| {
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        FiniteMetricSpace::from_line(xs).unwrap()
    })
}

fn plane_space() -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..14).prop_map(|pts| {
        let data = pts.into_iter().flat_map(|(a, b)| [a, b]).collect();
        FiniteMetricSpace::from_coords(2, data, cdimlab::metric::Norm::Euclidean).unwrap()
    })
}

proptest! {
    #[test]
    fn neighborhoods_are_monotone(x in sample_space(), seed in any::<u64>(), r in 0.0f64..3.0, dr in 0.0f64..3.0) {
        let n = x.len();
        let u: Vec<usize> = (0..n).filter(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let small = x.neighborhood(&u, r);
        let big = x.neighborhood(&u, r + dr);
        prop_assert!(small.iter().all(|p| big.contains(p)));
        let inner = x.neighborhood(&u, -r);
        prop_assert!(inner.iter().all(|p| u.contains(p)));
        prop_assert!(u.iter().all(|p| small.contains(p) || r == 0.0));
    }

    #[test]
    fn lebesgue_balls_fit_in_members(x in sample_space(), cuts in prop::collection::vec(0.0f64..1.0, 1..5), w in 0.5f64..6.0) {
        let n = x.len();
        let mut members = Vec::new();
        for c in cuts {
            let center = -10.0 + 20.0 * c;
            let ids: Vec<usize> = (0..n).filter(|&i| (x.coords(i).unwrap()[0] - center).abs() < w).collect();
            if !ids.is_empty() { members.push(Member::new(ids)); }
        }
        let c = Covering::new(x.all_points(), members.clone());
        if c.uncovered(n).is_empty() {
            let s = x.covering_stats(&c).unwrap();
            prop_assert!(s.multiplicity >= 1);
            if s.lebesgue.is_finite() {
                for z in 0..n {
                    let ball: Vec<usize> = (0..n).filter(|&p| x.dist(z, p) < s.lebesgue).collect();
                    prop_assert!(members.iter().any(|m| ball.iter().all(|p| m.contains(*p))));
                }
            }
        } else {
            prop_assert!(x.covering_stats(&c).is_err());
        }
    }

    #[test]
    fn gromov_product_bounds(x in plane_space(), o in 0usize..4, a in 0usize..4, b in 0usize..4) {
        let p = x.gromov_product(o, a, b);
        prop_assert!((p - x.gromov_product(o, b, a)).abs() < 1e-12);
        prop_assert!(p >= -1e-12);
        prop_assert!(p <= x.dist(o, a).min(x.dist(o, b)) + 1e-12);
    }

    #[test]
    fn delta_of_subspace_is_no_larger(x in plane_space(), mask in any::<u16>()) {
        let ids: Vec<usize> = (0..x.len()).filter(|i| (mask >> i) & 1 == 1).collect();
        prop_assume!(!ids.is_empty());
        let parent = x.delta_hyperbolicity().unwrap().delta;
        let sub = x.subspace(&ids).delta_hyperbolicity().unwrap().delta;
        prop_assert!(sub <= parent + 1e-12);
    }
}
