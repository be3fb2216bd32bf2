//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::time::{Duration, Instant};

use cdimlab::complexes::*;
use cdimlab::coverings::{refine_via_selfsimilarity, FnProvider, ScaleParams};
use cdimlab::estimators::{box_count_from_counts, capacity_profile, quasi_homothety_coefficient};
use cdimlab::hyperbolic::{annulus_contract, check_product_compare, ConeSpace};
use cdimlab::spaces::{cantor_ka, cantor_ternary, unit_grid, KaParams, RootedTree};
use rand::Rng;

const DIAM_BOUND: f64 = 3.6;
const DIM_TOL: f64 = 0.15;
const EXACT: f64 = 1e-12;
const TRIANGLE_TOL: f64 = 1e-9;
const CRIT1_BUDGET: Duration = Duration::from_secs(10);
const CRIT2_BUDGET: Duration = Duration::from_secs(120);

type Outcome = (bool, String);

fn p23() -> TemplateParams {
    TemplateParams::new(2, 3).unwrap()
}

fn random_point(r: &mut impl Rng, faces: usize) -> ComplexPoint {
    ComplexPoint::new(r.gen_range(0..faces), r.gen::<f64>(), r.gen::<f64>())
}

/// All pairwise graph distances among `pts`.
fn pairwise(g: &MetricGraph, pts: &[ComplexPoint]) -> Vec<Vec<f64>> {
    let att: Vec<GraphPoint> = pts.iter().map(|&p| g.attach(p).unwrap()).collect();
    att.iter().map(|a| g.distances(a, &att).unwrap()).collect()
}

fn pairs(n: usize, limit: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).take(limit).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (m, k) in [(2usize, 3usize), (2, 5), (3, 3)] {
        let oracle = (k * m).pow(2) + 3 * m * m;
        let built = build_template(TemplateParams::new(m, k).unwrap(), 1).unwrap().faces;
        ok &= built == oracle;
        notes.push(format!("({m},{k}) {built}/{oracle}"));
    }
    for d in 1..=3 {
        let a = audit_template(&build_template(p23(), d).unwrap()).unwrap();
        let want: Vec<usize> = (1..=d).map(|i| 48usize.pow(i as u32)).collect();
        ok &= a.blocks_per_level == want && a.faces == a.expected_faces && a.subblocks_match_first_template;
    }
    let el = start.elapsed();
    ok &= el < CRIT1_BUDGET;
    (ok, format!("faces {}; blocks s^i at depth 1..3; {:.2}s", notes.join(", "), el.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let limit = DIAM_BOUND * (1.0 + GRID_STRETCH);
    let mut ok = true;
    let mut notes = Vec::new();
    for d in 0..=3 {
        let g = MetricGraph::build(&build_template(p23(), d).unwrap(), 8);
        let delta = g.boundary_distances().into_iter().fold(0.0, f64::max);
        let certified = 2.0 * delta + 2.0;
        let probes = [g.attach_node(g.corner_node(0, 0) as u32), g.attach(ComplexPoint::new(word_face(&p23(), &vec![p23().middle_letter(); d]), 0.5, 0.5)).unwrap()];
        let measured = probes.iter().map(|p| g.eccentricity(p).unwrap()).fold(0.0, f64::max);
        ok &= certified <= limit && measured <= certified;
        notes.push(format!("P^{d} ecc {measured:.4} <= bound {certified:.4}"));
    }
    let el = start.elapsed();
    ok &= el < CRIT2_BUDGET;
    (ok, format!("{} vs {limit:.4}; {:.1}s", notes.join(", "), el.as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let p = p23();
    let formula = 2.0 + (4.0f64 / 3.0).ln() / 6f64.ln();
    let oracle = (p.s() as f64).ln() / (p.mk() as f64).ln();
    let g = MetricGraph::build(&build_template(p, 3).unwrap(), 2);
    let scales: Vec<f64> = (0..10).map(|i| 0.3 * (0.01f64 / 0.3).powf(i as f64 / 9.0)).collect();
    let rep = box_count_from_counts(&scales, &|e| g.greedy_ball_count(e)).unwrap();
    let ok = (oracle - formula).abs() < EXACT && (rep.fitted_slope - formula).abs() <= DIM_TOL;
    (ok, format!("slope {:.4}, target {formula:.4} +/- {DIM_TOL}, oracle gap {:.1e}", rep.fitted_slope, (oracle - formula).abs()))
}

fn criterion_4() -> Outcome {
    let p = p23();
    let g1 = MetricGraph::build(&build_template(p, 1).unwrap(), 8);
    let g2 = MetricGraph::build(&build_template(p, 2).unwrap(), 8);
    let limit = 1.0 + 2.0 * GRID_STRETCH;
    let r = 1.0 / p.mk() as f64;
    let mut rng = common::rng(4);
    let mut worst = 1.0f64;
    for a in 0..p.s() {
        let pts: Vec<ComplexPoint> = (0..33).map(|_| random_point(&mut rng, p.s())).collect();
        let imgs: Vec<ComplexPoint> = pts.iter().map(|&x| selfsimilarity_map(&p, a, 1, x).unwrap()).collect();
        let (d, dp) = (pairwise(&g1, &pts), pairwise(&g2, &imgs));
        let sample: Vec<(f64, f64)> = pairs(pts.len(), 500).into_iter().map(|(i, j)| (d[i][j], dp[i][j])).collect();
        worst = worst.max(quasi_homothety_coefficient(&sample, r).unwrap().lambda_measured);
    }
    let mut osc_ok = true;
    for d in 1..=3 {
        let a = osc_audit(&build_template(p, d).unwrap(), 2).unwrap();
        osc_ok &= a.interior_overlaps == 0 && a.uncovered_faces == 0;
    }
    (worst <= limit && osc_ok, format!("max lambda {worst:.4} <= {limit:.4} over 48 letters; OSC overlaps none: {osc_ok}"))
}

fn criterion_5() -> Outcome {
    let p = p23();
    let graphs: Vec<MetricGraph> =
        (0..=3).map(|d| MetricGraph::build(&build_template(p, d).unwrap(), if d == 3 { 2 } else { 8 })).collect();
    let mut rng = common::rng(5);
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=3 {
        let pts: Vec<ComplexPoint> = (0..46).map(|_| random_point(&mut rng, p.s().pow(i as u32))).collect();
        let low: Vec<ComplexPoint> = pts.iter().map(|&x| bonding_map(&p, i - 1, x).unwrap()).collect();
        let (top, bot) = (pairwise(&graphs[i], &pts), pairwise(&graphs[i - 1], &low));
        let tol = graphs[i - 1].abs_tol();
        for (a, b) in pairs(pts.len(), 1000) {
            worst = worst.max(bot[a][b] - (1.0 + GRID_STRETCH) * top[a][b] - tol);
        }
    }
    let pts: Vec<ComplexPoint> = (0..21).map(|_| random_point(&mut rng, p.s().pow(3))).collect();
    let proj: Vec<Vec<ComplexPoint>> = pts.iter().map(|&x| project_all(&p, 3, x).unwrap()).collect();
    let per_level: Vec<Vec<Vec<f64>>> = (0..=3)
        .map(|l| pairwise(&graphs[l], &proj.iter().map(|v| v[l]).collect::<Vec<_>>()))
        .collect();
    let mut mono = f64::NEG_INFINITY;
    for (a, b) in pairs(pts.len(), 200) {
        for l in 0..3 {
            mono = mono.max(per_level[l][a][b] - (1.0 + GRID_STRETCH) * per_level[l + 1][a][b] - graphs[l].abs_tol());
        }
    }
    let refs: Vec<&MetricGraph> = graphs.iter().collect();
    let seq = limit_distance(&p, &refs, pts[0], pts[1]).unwrap();
    let agree = (0..=3).all(|l| (seq[l] - per_level[l][0][1]).abs() < 1e-9);
    (worst <= 0.0 && mono <= 0.0 && agree, format!("Lipschitz excess {worst:.4}, monotonicity excess {mono:.4} (both <= 0)"))
}

fn criterion_6() -> Outcome {
    let merge_fail = (0..200).filter(|&s| common::check_merge(&common::merge_instance(s)).is_err()).count();
    let amal_fail = (0..50).filter(|&s| common::check_amalgamation(&common::amalgamation_instance(s)).is_err()).count();
    (merge_fail + amal_fail == 0, format!("merge failures {merge_fail}/200, amalgamation failures {amal_fail}/50"))
}

fn criterion_7() -> Outcome {
    let k = cantor_ternary(6).unwrap();
    let x = &k.space;
    let delta = 0.9;
    let model = vec![k.cylinder_cover(1).unwrap()];
    let l = x.covering_stats(&model[0]).unwrap().lebesgue;
    let provider = FnProvider { lambda: 1.0, lambda0: 1.0, map: common::cantor_shift_provider(&k) };
    let mut failures = 0;
    for j in 1..=5 {
        let tau = 3f64.powi(-j);
        let v = k.cylinder_cover(j as usize).unwrap();
        let ok = refine_via_selfsimilarity(x, &v, x, &model, &provider, ScaleParams::Local { tau, delta })
            .ok()
            .and_then(|rep| x.covering_stats(&rep.covering).ok())
            .is_some_and(|s| {
                s.multiplicity <= model.len()
                    && s.mesh <= delta * tau / 2.0 * (1.0 + 1e-9)
                    && s.lebesgue >= l * tau * (1.0 - 1e-9)
            });
        failures += usize::from(!ok);
    }
    (failures == 0, format!("{failures} failures over tau = 3^-1..3^-5"))
}

fn criterion_8() -> Outcome {
    let c = cantor_ternary(6).unwrap();
    let taus: Vec<f64> = (2..=5).map(|j| 3f64.powi(-j)).collect();
    let prof = capacity_profile(&c.space, &taus, 1).unwrap();
    let cantor_min = prof.rows.iter().map(|r| r.best_delta).fold(f64::INFINITY, f64::min);
    let ka = cantor_ka(&KaParams::harmonic(10)).unwrap();
    let probes: Vec<f64> = (2..=9).map(|k| ka.levels[k - 1].l).collect();
    let prof = capacity_profile(&ka.space, &probes, 2).unwrap();
    let one: Vec<f64> = probes.iter().map(|&t| prof.get(t, 1).unwrap().best_delta).collect();
    let two_min = probes.iter().map(|&t| prof.get(t, 2).unwrap().best_delta).fold(f64::INFINITY, f64::min);
    let decay = one[0] / one[one.len() - 1];
    let ok = cantor_min >= 0.5 && decay >= 4.0 && two_min >= 0.2;
    (ok, format!("Cantor 1-color min {cantor_min:.3}; K_a 1-color decay {decay:.2}x, 2-color min {two_min:.3}"))
}

fn criterion_9() -> Outcome {
    let cone = ConeSpace::new(unit_grid(10)).unwrap();
    let mut rng = common::rng(9);
    let mut ident = 0.0f64;
    for _ in 0..1000 {
        let (t, tp) = (rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
        let z = rng.gen_range(0..=10);
        let same = cone.distance((z, t), (z, tp)).unwrap();
        let opposite = cone.distance((0, t), (10, tp)).unwrap();
        ident = ident.max((same - (t - tp).abs()).abs() / (1.0 + t + tp));
        ident = ident.max((opposite - (t + tp)).abs() / (1.0 + t + tp));
    }
    let mut tri = 0.0f64;
    for _ in 0..10_000 {
        let q: Vec<(usize, f64)> = (0..3).map(|_| (rng.gen_range(0..=10), rng.gen_range(0.0..8.0))).collect();
        let d = |i: usize, j: usize| cone.distance(q[i], q[j]).unwrap();
        tri = tri.max(d(0, 2) - d(0, 1) - d(1, 2));
    }
    let t = RootedTree::new(2, 8).unwrap();
    let x = t.space();
    let mut compare_fail = 0;
    for _ in 0..20_000 {
        let q: Vec<usize> = (0..4).map(|_| rng.gen_range(0..t.node_count())).collect();
        let og = x.dist(q[0], q[1]);
        let sigma = (og - x.gromov_product(q[0], q[2], q[1]).min(x.gromov_product(q[0], q[3], q[1]))).max(0.0);
        let sigma = sigma + rng.gen_range(0.0..2.0);
        let rep = check_product_compare(&x, q[0], q[1], q[2], q[3], sigma);
        compare_fail += usize::from(!rep.hypothesis_met || !rep.passed);
    }
    let base = ConeSpace::new(unit_grid(20)).unwrap();
    let ts: Vec<f64> = (0..=128).map(|i| i as f64 * 0.125).collect();
    let sample = base.sample(&ts).unwrap();
    let u = cdimlab::coverings::doubling_colored_cover(&sample.space, 1.0);
    let meshes: Vec<f64> = [1, 2, 4, 8].iter().map(|&k| annulus_contract(&sample, &u, k).unwrap().stats.mesh).collect();
    let decreasing = meshes.windows(2).all(|w| w[1] < w[0]);
    let ok = ident <= EXACT && tri <= TRIANGLE_TOL && compare_fail == 0 && decreasing;
    (ok, format!("identity error {ident:.1e}, triangle excess {tri:.1e}, product comparison failures {compare_fail}/20000, annulus mesh {meshes:?}"))
}

/// Point sets straddling the seams of level-`t` blocks at one coarse vertex.
fn adversarial(model: &HatPiModel, rng: &mut impl Rng) -> Vec<ComplexPoint> {
    let p = model.params;
    let n = model.levels;
    let t = rng.gen_range(0..n);
    let coarse = MetricGraph::build(&build_template(p, n - t).unwrap(), 1);
    let prefix = rng.gen_range(0..p.s().pow((n - t) as u32));
    let vertex = coarse.corner_node(prefix, rng.gen_range(0..4u8)) as u32;
    let mut out = Vec::new();
    for (f, i, j) in coarse.node_slots(vertex) {
        if out.len() == 4 || (out.len() >= 2 && rng.gen_bool(0.3)) {
            break;
        }
        let corner = match (i, j) {
            (0, 0) => 0u8,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        };
        let (cu, cv) = corner_uv(corner);
        let (du, dv) = (rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3));
        let u = if cu == 0.0 { du } else { 1.0 - du };
        let v = if cv == 0.0 { dv } else { 1.0 - dv };
        out.push(ComplexPoint::new(model.corner_face(f, corner, t), u, v));
    }
    out
}

fn criterion_10() -> Outcome {
    let model = HatPiModel::new(p23(), 3, 2).unwrap();
    let mut rng = common::rng(10);
    let mut failures = 0;
    let mut worst_j = 0;
    for _ in 0..50 {
        let a = adversarial(&model, &mut rng);
        match model.find_copy_level(&a) {
            Ok(rep) => {
                failures += usize::from(!rep.bound_holds);
                worst_j = worst_j.max(rep.j);
            }
            Err(_) => failures += 1,
        }
    }
    let p = p23();
    let gap = x0_boundary_distance(p, 8).unwrap();
    let want = model.lambda() * (p.m * p.l()) as f64;
    let ok = failures == 0 && gap >= want * (1.0 - 1e-9);
    (ok, format!("{failures}/50 placements with j > i+1 (max j {worst_j}); dist(X_0, dX_1) {gap:.3} >= {want}"))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let (ok, detail) = f();
        failed += usize::from(!ok);
        println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
