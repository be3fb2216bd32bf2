//! Fast invariant checks run by `cdimlab check`.

use cdimlab::complexes::{bonding_map, build_template, x0_boundary_distance, ComplexPoint, MetricGraph, TemplateParams};
use cdimlab::coverings::{doubling_colored_cover, merge_coverings};
use cdimlab::estimators::capacity_profile;
use cdimlab::hyperbolic::ConeSpace;
use cdimlab::spaces::{cantor_ternary, circle_chordal, unit_grid};
use cdimlab::{Covering, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct CheckRow {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn row(name: &'static str, outcome: cdimlab::Result<(bool, String)>) -> CheckRow {
    match outcome {
        Ok((passed, detail)) => CheckRow { name, passed, detail },
        Err(e) => CheckRow { name, passed: false, detail: e.to_string() },
    }
}

fn face_counts() -> cdimlab::Result<(bool, String)> {
    let mut ok = true;
    let mut seen = Vec::new();
    for (m, k) in [(2, 3), (2, 5), (3, 3)] {
        let faces = build_template(TemplateParams::new(m, k)?, 1)?.faces;
        ok &= faces == (k * m) * (k * m) + 3 * m * m;
        seen.push(faces.to_string());
    }
    Ok((ok, seen.join(" ")))
}

fn circle_delta() -> cdimlab::Result<(bool, String)> {
    let d = circle_chordal(20).delta_hyperbolicity()?.delta;
    Ok(((d - (2.0 - 2f64.sqrt())).abs() < 1e-12, format!("delta {d}")))
}

fn cantor_profile() -> cdimlab::Result<(bool, String)> {
    let c = cantor_ternary(6)?;
    let tau = 3f64.powi(-4);
    let best = capacity_profile(&c.space, &[tau], 1)?.rows[0].best_delta;
    Ok((best >= 0.5, format!("best_delta {best} at 3^-4")))
}

fn merge_bounds() -> cdimlab::Result<(bool, String)> {
    let x = unit_grid(100);
    let mut u = doubling_colored_cover(&x, 0.1);
    u.carrier = (0..=60).collect();
    let lu = x.covering_stats(&u)?.lebesgue;
    let mut v = doubling_colored_cover(&x, lu / 8.0);
    v.carrier = (40..=100).collect();
    let w = merge_coverings(&x, &u, &v)?.result;
    let s = x.covering_stats(&Covering { carrier: x.all_points(), ..w })?;
    let mut coarse = doubling_colored_cover(&x, 0.3);
    coarse.carrier = v.carrier.clone();
    let refused = matches!(merge_coverings(&x, &u, &coarse), Err(Error::MergeHypothesis { .. }));
    Ok((refused && s.multiplicity <= 3, format!("multiplicity {}, coarse V refused: {refused}", s.multiplicity)))
}

fn cone_identities() -> cdimlab::Result<(bool, String)> {
    let cone = ConeSpace::new(unit_grid(10))?;
    let same = cone.distance((3, 2.5), (3, 0.5))?;
    let opposite = cone.distance((0, 2.5), (10, 0.5))?;
    let err = (same - 2.0).abs().max((opposite - 3.0).abs());
    Ok((err < 1e-12, format!("error {err:e}")))
}

fn bonding_lipschitz() -> cdimlab::Result<(bool, String)> {
    let p = TemplateParams::new(2, 3)?;
    let g1 = MetricGraph::build(&build_template(p, 1)?, 4);
    let g0 = MetricGraph::build(&build_template(p, 0)?, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let x = ComplexPoint::new(rng.gen_range(0..p.s()), rng.gen(), rng.gen());
        let y = ComplexPoint::new(rng.gen_range(0..p.s()), rng.gen(), rng.gen());
        let top = g1.distance(x, y)?;
        let low = g0.distance(bonding_map(&p, 0, x)?, bonding_map(&p, 0, y)?)?;
        worst = worst.max(low - (1.0 + cdimlab::complexes::GRID_STRETCH) * top - g0.abs_tol());
    }
    Ok((worst <= 0.0, format!("excess {worst:.4}")))
}

fn x0_gap() -> cdimlab::Result<(bool, String)> {
    let p = TemplateParams::new(2, 3)?;
    let d = x0_boundary_distance(p, 4)?;
    let want = (p.mk() * p.m * p.l()) as f64;
    Ok((d >= want, format!("{d} >= {want}")))
}

pub fn run_suite() -> Vec<CheckRow> {
    vec![
        row("face_counts", face_counts()),
        row("circle_delta", circle_delta()),
        row("cantor_profile", cantor_profile()),
        row("merge_bounds", merge_bounds()),
        row("cone_identities", cone_identities()),
        row("bonding_lipschitz", bonding_lipschitz()),
        row("x0_boundary_gap", x0_gap()),
    ]
}
