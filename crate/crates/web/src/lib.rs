//! Browser bindings: capacity profiles of interval sets, template audits
//! with box counts, and hyperbolic cone distances.

use cdimlab::complexes::{audit_template, build_template_with_cap, MetricGraph, TemplateParams};
use cdimlab::estimators::{box_count_from_counts, capacity_profile};
use cdimlab::hyperbolic::ConeSpace;
use cdimlab::spaces::{cantor_ka, cantor_ternary, unit_grid, KaParams};
use wasm_bindgen::prelude::*;

/// Face budget for templates built in the page.
const PAGE_FACE_CAP: usize = 150_000;
const PAGE_MAX_DEPTH: usize = 9;

fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .filter(|w| !w.trim().is_empty())
        .map(|w| {
            let w = w.trim();
            match w.split_once('^') {
                Some((b, e)) => {
                    let b: f64 = b.parse().map_err(|_| format!("bad base in {w:?}"))?;
                    let e: i32 = e.parse().map_err(|_| format!("bad exponent in {w:?}"))?;
                    Ok(b.powi(e))
                }
                None => w.parse().map_err(|_| format!("{w:?} is not a number")),
            }
        })
        .collect()
}

/// CSV rows `tau,colors,best_delta,method` for the Cantor set (`kind = "cantor"`)
/// or `K_a` with `ε_k = 1/(k+2)` (`kind = "ka"`).
pub fn profile_csv(kind: &str, depth: usize, taus: &str, colors: usize) -> Result<String, String> {
    if depth > PAGE_MAX_DEPTH {
        return Err(format!("depth {depth} exceeds the page limit {PAGE_MAX_DEPTH}"));
    }
    let sample = match kind {
        "cantor" => cantor_ternary(depth),
        "ka" => cantor_ka(&KaParams::harmonic(depth)),
        other => return Err(format!("unknown space {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    let taus = parse_grid(taus)?;
    let p = capacity_profile(&sample.space, &taus, colors).map_err(|e| e.to_string())?;
    Ok(p.to_csv())
}

/// Template audit plus a box-counting slope over `scales`, as JSON.
pub fn template_report(m: usize, k: usize, depth: usize, g: usize, scales: &str) -> Result<String, String> {
    let params = TemplateParams::new(m, k).map_err(|e| e.to_string())?;
    let c = build_template_with_cap(params, depth, PAGE_FACE_CAP).map_err(|e| e.to_string())?;
    let audit = audit_template(&c).map_err(|e| e.to_string())?;
    let scales = parse_grid(scales)?;
    let graph = MetricGraph::build(&c, g.max(1));
    let boxes = box_count_from_counts(&scales, &|e| graph.greedy_ball_count(e)).map_err(|e| e.to_string())?;
    let out = serde_json::json!({
        "audit": audit,
        "hausdorff_dim": params.hausdorff_dim(),
        "diam_bound": params.diam_bound(),
        "boxcount": boxes,
    });
    Ok(out.to_string())
}

/// Distance in the cone over `{0, 1/n, …, 1}` between `(i/n, t)` and `(j/n, s)`.
pub fn cone_distance_value(n: usize, i: usize, t: f64, j: usize, s: f64) -> Result<f64, String> {
    if n == 0 || i > n || j > n {
        return Err(format!("base points must lie in 0..={n}"));
    }
    let cone = ConeSpace::new(unit_grid(n)).map_err(|e| e.to_string())?;
    cone.distance((i, t), (j, s)).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn profile(kind: &str, depth: usize, taus: &str, colors: usize) -> Result<String, JsValue> {
    profile_csv(kind, depth, taus, colors).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn template(m: usize, k: usize, depth: usize, g: usize, scales: &str) -> Result<String, JsValue> {
    template_report(m, k, depth, g, scales).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cone_distance(n: usize, i: usize, t: f64, j: usize, s: f64) -> Result<f64, JsValue> {
    cone_distance_value(n, i, t, j, s).map_err(|e| JsValue::from_str(&e))
}
