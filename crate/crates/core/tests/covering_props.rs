mod common;

use cdimlab::coverings::*;
use cdimlab::metric::{Covering, FiniteMetricSpace, Member};
use cdimlab::spaces::{cantor_ka, cantor_ternary, harmonic_points, unit_grid, KaParams};
use common::*;
use proptest::prelude::*;

fn check_doubling(x: &FiniteMetricSpace, r: f64) -> Result<(), String> {
    let c = doubling_colored_cover(x, r);
    let s = x.covering_stats(&c).map_err(|e| e.to_string())?;
    if s.mesh > 4.0 * r + 1e-12 || s.lebesgue < r - 1e-12 {
        return Err(format!("mesh {} lebesgue {} at r = {r}", s.mesh, s.lebesgue));
    }
    for (i, a) in c.members.iter().enumerate() {
        for b in &c.members[i + 1..] {
            if a.color == b.color && x.set_distance(&a.ids, &b.ids).unwrap() <= 0.0 {
                return Err("same-colored members touch".into());
            }
        }
    }
    let net = maximal_separated_net(x, r, None);
    for (i, &p) in net.iter().enumerate() {
        for &q in &net[i + 1..] {
            if x.dist(p, q) <= r {
                return Err("net not separated".into());
            }
        }
    }
    for z in 0..x.len() {
        if x.dist_to_set(z, &net) > 2.0 * r {
            return Err(format!("point {z} far from the net"));
        }
    }
    Ok(())
}

#[test]
fn doubling_examples() {
    check_doubling(&unit_grid(100), 0.1).unwrap();
    let k = cantor_ternary(4).unwrap();
    check_doubling(&k.space, 3f64.powi(-4)).unwrap();
}

#[test]
fn merge_on_explicit_halves() {
    let x = unit_grid(40);
    let left: Vec<usize> = (0..=20).collect();
    let right: Vec<usize> = (20..x.len()).collect();
    let u = Covering::new(left, vec![Member::new((0..=14).collect()), Member::new((8..=24).collect())]);
    let v = Covering::new(
        right,
        (0..10).map(|i| Member::new((20 + 2 * i..=22 + 2 * i).collect())).collect(),
    );
    check_merge(&MergeInstance { x, u, v }).unwrap();
}

#[test]
fn merge_rejects_coarse_v() {
    let x = unit_grid(20);
    let u = Covering::new(x.all_points(), vec![Member::new((0..=12).collect()), Member::new((8..=20).collect())]);
    let v = Covering::new(x.all_points(), vec![Member::new(x.all_points())]);
    let err = merge_coverings(&x, &u, &v).unwrap_err();
    assert!(err.to_string().contains("mesh(V) exceeds L(U)/2"), "{err}");
}

#[test]
fn amalgamate_cantor_cylinders() {
    let k = cantor_ternary(6).unwrap();
    let x = &k.space;
    let even: Vec<usize> = (0..x.len()).filter(|p| (p / 16) % 2 == 0).collect();
    let odd: Vec<usize> = (0..x.len()).filter(|p| (p / 16) % 2 == 1).collect();
    let fams = vec![
        (even, k.cylinder_cover(2).unwrap()),
        (odd, k.cylinder_cover(4).unwrap()),
    ];
    check_amalgamation(&AmalgamationInstance { x: x.clone(), families: fams }).unwrap();
}

#[test]
fn amalgamation_is_deterministic() {
    let inst = amalgamation_instance(7);
    let a = amalgamate_colored(&inst.x, &inst.families).unwrap();
    let b = amalgamate_colored(&inst.x, &inst.families).unwrap();
    assert_eq!(a, b);
}

#[test]
fn refinement_members_lie_in_one_v_member() {
    let k = cantor_ternary(6).unwrap();
    let x = &k.space;
    for j in 1..=3 {
        let tau = 3f64.powi(-(j as i32));
        let v = k.cylinder_cover(j).unwrap();
        let model = vec![k.cylinder_cover(2).unwrap()];
        let provider = FnProvider { lambda: 1.0, lambda0: 1.0, map: cantor_shift_provider(&k) };
        let rep = refine_via_selfsimilarity(x, &v, x, &model, &provider, ScaleParams::Local { tau, delta: 0.9 }).unwrap();
        for m in &rep.covering.members {
            assert!(v.members.iter().any(|vm| m.ids.iter().all(|p| vm.contains(*p))));
        }
    }
}

#[test]
fn pushforward_from_ka() {
    let ka = cantor_ka(&KaParams::harmonic(5)).unwrap();
    let x = &ka.space;
    let y = unit_grid(50);
    let h: Vec<usize> = (0..x.len()).map(|p| (coord(x, p) * 50.0).round() as usize).collect();
    let gap = (0..=50).map(|q| y.dist_to_set(q, &h)).fold(0.0, f64::max);
    let u = Covering::new(x.all_points(), vec![Member::new(x.all_points()), Member::new(ka.cylinder(1, 0))]);
    let mu = x.covering_stats(&u).unwrap().multiplicity;
    let rep = pushforward_cover(x, &u, &y, &h, gap * 1.01 + 1e-9).unwrap();
    let s = y.covering_stats(&rep.covering).unwrap();
    assert!(s.multiplicity <= mu);
    assert!(rep.covering.uncovered(y.len()).is_empty());
}

#[test]
fn pushforward_from_harmonic_tail() {
    let pts = harmonic_points(50);
    let x = FiniteMetricSpace::from_line(pts.clone()).unwrap();
    let y = unit_grid(100);
    // The tail {1/m : 25 ≤ m ≤ 50} is stretched onto [0,1] by z ↦ 50 z − 1.
    let tail: Vec<usize> = (0..pts.len()).filter(|&i| pts[i] >= 1.0 / 50.0 - 1e-12 && pts[i] <= 1.0 / 25.0 + 1e-12).collect();
    let h: Vec<usize> = tail.iter().map(|&i| ((50.0 * pts[i] - 1.0) * 100.0).round() as usize).collect();
    let eps = 0.045;
    let lo: Vec<usize> = tail.iter().copied().filter(|&i| 50.0 * pts[i] - 1.0 <= 0.75).collect();
    let hi: Vec<usize> = tail.iter().copied().filter(|&i| 50.0 * pts[i] - 1.0 >= 0.25).collect();
    let u = Covering::new(tail.clone(), vec![Member::new(lo), Member::new(hi)]);
    let rep = pushforward_cover(&x, &u, &y, &h, eps).unwrap();
    let s = y.covering_stats(&rep.covering).unwrap();
    assert!(s.multiplicity <= 2);
    assert_eq!(rep.source.len(), rep.covering.members.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn doubling_cover_invariants(seed in any::<u64>(), r in 0.01f64..0.3) {
        let x = random_space(&mut rng(seed));
        prop_assert_eq!(check_doubling(&x, r), Ok(()));
    }

    #[test]
    fn merge_postconditions(seed in any::<u64>()) {
        prop_assert_eq!(check_merge(&merge_instance(seed)), Ok(()));
    }

    #[test]
    fn amalgamation_bounds(seed in any::<u64>()) {
        prop_assert_eq!(check_amalgamation(&amalgamation_instance(seed)), Ok(()));
    }

    #[test]
    fn shrink_below_lebesgue_keeps_coverage(seed in any::<u64>(), frac in 0.0f64..0.99) {
        let mut r = rng(seed);
        let x = random_space(&mut r);
        let c = doubling_colored_cover(&x, 0.1);
        let l = x.covering_stats(&c).unwrap().lebesgue;
        let s = shrink_cover(&x, &c, frac * l).unwrap();
        prop_assert!(s.uncovered(x.len()).is_empty());
    }
}
