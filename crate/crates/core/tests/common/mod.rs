//! Randomized instance generators shared by the integration tests.
#![allow(dead_code)]

use cdimlab::coverings::doubling_colored_cover;
use cdimlab::metric::{Covering, FiniteMetricSpace, PointId};
use cdimlab::spaces::{cantor_ternary, unit_grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A `[0,1]` grid or a ternary Cantor sample.
pub fn random_space(r: &mut ChaCha8Rng) -> FiniteMetricSpace {
    if r.gen_bool(0.5) {
        unit_grid(r.gen_range(20..=80))
    } else {
        cantor_ternary(r.gen_range(3..=6)).unwrap().space
    }
}

pub fn coord(x: &FiniteMetricSpace, p: PointId) -> f64 {
    x.coords(p).unwrap()[0]
}

pub fn with_carrier(mut c: Covering, carrier: Vec<PointId>) -> Covering {
    c.carrier = carrier;
    c
}

pub struct MergeInstance {
    pub x: FiniteMetricSpace,
    pub u: Covering,
    pub v: Covering,
}

/// `U` covers `A = {z ≤ a}`, `V` covers `B = {z ≥ b}`, with
/// `mesh(V) ≤ L(U)/2` by construction.
pub fn merge_instance(seed: u64) -> MergeInstance {
    let mut r = rng(seed);
    let x = random_space(&mut r);
    let a_cut = r.gen_range(0.3..1.0);
    let b_cut = r.gen_range(0.0..a_cut);
    let a: Vec<PointId> = (0..x.len()).filter(|&p| coord(&x, p) <= a_cut).collect();
    let mut b: Vec<PointId> = (0..x.len()).filter(|&p| coord(&x, p) >= b_cut).collect();
    if b.is_empty() {
        b.push(x.len() - 1);
    }
    let ru = r.gen_range(0.03..0.2);
    let u = with_carrier(doubling_colored_cover(&x, ru), a);
    let lu = x.covering_stats(&u).unwrap().lebesgue;
    let rv = if lu.is_finite() {
        lu / 8.0 * r.gen_range(0.3..1.0)
    } else {
        r.gen_range(0.01..0.05)
    };
    let v = with_carrier(doubling_colored_cover(&x, rv), b);
    MergeInstance { x, u, v }
}

pub struct AmalgamationInstance {
    pub x: FiniteMetricSpace,
    pub families: Vec<(Vec<PointId>, Covering)>,
}

/// Random partition of the sample into `N + 1` color classes, each carrying a
/// doubling cover of the whole sample at a scale small enough for the next
/// class to satisfy `mesh(U_{a+1}) ≤ ½ min{L(U_a), mesh(U_a)}`.
pub fn amalgamation_instance(seed: u64) -> AmalgamationInstance {
    let mut r = rng(seed);
    let x = unit_grid(r.gen_range(60..=160));
    let classes = r.gen_range(1..=3usize);
    let mut carriers = vec![Vec::new(); classes];
    for p in 0..x.len() {
        carriers[r.gen_range(0..classes)].push(p);
    }
    let mut families = Vec::new();
    let mut rad = r.gen_range(0.05..0.15);
    for carrier in carriers {
        let c = with_carrier(doubling_colored_cover(&x, rad), carrier.clone());
        if carrier.is_empty() {
            families.push((carrier, c));
            continue;
        }
        let s = x.covering_stats(&c).unwrap();
        families.push((carrier, c));
        rad = 0.5 * s.lebesgue.min(s.mesh) / 4.0 * r.gen_range(0.5..1.0);
    }
    AmalgamationInstance { x, families }
}

fn union(a: &[PointId], b: &[PointId]) -> Vec<PointId> {
    let mut u: Vec<PointId> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Coverage, multiplicity, mesh and Lebesgue bounds of the merge, checked
/// against `covering_stats`.
pub fn check_merge(inst: &MergeInstance) -> Result<(), String> {
    let x = &inst.x;
    let su = x.covering_stats(&inst.u).map_err(|e| e.to_string())?;
    let sv = x.covering_stats(&inst.v).map_err(|e| e.to_string())?;
    let rep = cdimlab::coverings::merge_coverings(x, &inst.u, &inst.v).map_err(|e| e.to_string())?;
    if su.lebesgue.is_infinite() {
        return if rep.result == inst.u { Ok(()) } else { Err("infinite L(U) must return U".into()) };
    }
    let mut w = rep.result.clone();
    w.carrier = union(&inst.u.carrier, &inst.v.carrier);
    let sw = x.covering_stats(&w).map_err(|e| format!("coverage: {e}"))?;
    let m = su.multiplicity.max(sv.multiplicity);
    if sw.multiplicity > m {
        return Err(format!("multiplicity {} > {m}", sw.multiplicity));
    }
    if sw.mesh > su.mesh.max(sv.mesh) + 1e-12 {
        return Err(format!("mesh {} > {}", sw.mesh, su.mesh.max(sv.mesh)));
    }
    let lb = (su.lebesgue / 2.0).min(sv.lebesgue);
    if sw.lebesgue < lb - 1e-12 {
        return Err(format!("lebesgue {} < {lb}", sw.lebesgue));
    }
    let mut seen: Vec<usize> = rep.absorbed.iter().map(|p| p[0]).collect();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err("a V-member was absorbed twice".into());
    }
    Ok(())
}

/// Final bounds of the colored amalgamation.
pub fn check_amalgamation(inst: &AmalgamationInstance) -> Result<(), String> {
    let x = &inst.x;
    let out = cdimlab::coverings::amalgamate_colored(x, &inst.families).map_err(|e| e.to_string())?;
    let live: Vec<&(Vec<PointId>, Covering)> = inst.families.iter().filter(|(c, _)| !c.is_empty()).collect();
    let stats: Vec<_> = live.iter().map(|(_, c)| x.covering_stats(c).unwrap()).collect();
    let carrier = live.iter().fold(Vec::new(), |acc, (c, _)| union(&acc, c));
    let mut w = out.clone();
    w.carrier = carrier;
    let sw = x.covering_stats(&w).map_err(|e| format!("coverage: {e}"))?;
    let m = stats.iter().map(|s| s.multiplicity).max().unwrap();
    if sw.multiplicity > m {
        return Err(format!("multiplicity {} > {m}", sw.multiplicity));
    }
    if sw.mesh > stats[0].mesh + 1e-12 {
        return Err(format!("mesh {} > mesh(U_0) = {}", sw.mesh, stats[0].mesh));
    }
    let n = stats.len() - 1;
    let lb = stats
        .iter()
        .enumerate()
        .map(|(a, s)| s.lebesgue / 2f64.powi((n - a) as i32))
        .fold(f64::INFINITY, f64::min);
    if sw.lebesgue < lb - 1e-12 {
        return Err(format!("lebesgue {} < {lb}", sw.lebesgue));
    }
    Ok(())
}

/// Charts of the ternary Cantor sample onto itself, keyed by coefficient `3^j`.
pub fn cantor_shift_provider(
    k: &cdimlab::spaces::IntervalSample,
) -> impl Fn(usize, &[usize], f64) -> Result<Vec<usize>, String> + '_ {
    move |_, member, coef| {
        let j = (coef.ln() / 3f64.ln()).round() as usize;
        k.cylinder_chart(j, member).map_err(|e| e.to_string())
    }
}
