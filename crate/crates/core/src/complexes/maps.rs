//! Bonding maps `q_i^{i+1}`, the band collapse, self-similarity homotheties
//! and finite-depth limit distances.

use super::{face_word, word_face, ComplexPoint, Letter, MetricGraph, TemplateParams};
use crate::error::{Error, Result};

/// Point at arc fraction `s ∈ [0,1]` of the boundary of the square
/// `[x0, x0+w] × [y0, y0+w]`, counterclockwise from its lower-left corner.
fn perimeter_point(x0: f64, y0: f64, w: f64, s: f64) -> (f64, f64) {
    let t = (s * 4.0).clamp(0.0, 4.0);
    if t <= 1.0 {
        (x0 + t * w, y0)
    } else if t <= 2.0 {
        (x0 + w, y0 + (t - 1.0) * w)
    } else if t <= 3.0 {
        (x0 + (3.0 - t) * w, y0 + w)
    } else {
        (x0, y0 + (4.0 - t) * w)
    }
}

fn radial(x0: f64, y0: f64, w: f64, s: f64, y: f64) -> (f64, f64) {
    let (px, py) = perimeter_point(x0, y0, w, s);
    let (cx, cy) = (x0 + w / 2.0, y0 + w / 2.0);
    (cx + y * (px - cx), cy + y * (py - cy))
}

/// The bonding map `q_0^1 : P^1 → P^0` on face `letter` at chart `(u, v)`.
/// Identity on the `Q_k` cells, band collapse on the middle square.
pub fn q01(params: &TemplateParams, letter: usize, u: f64, v: f64) -> (f64, f64) {
    let n = params.mk() as f64;
    match params.letter(letter) {
        Letter::Q { x, y } => ((x as f64 + u) / n, (y as f64 + v) / n),
        Letter::Band { j, r, c } => {
            let m = params.m as f64;
            let s = (params.segment_of_band(j, c) as f64 + u) / (4.0 * m);
            let k = params.k as f64;
            let lo = params.l() as f64 / k;
            radial(lo, lo, 1.0 / k, s, (r as f64 + v) / m)
        }
    }
}

/// Collapse of the band `B_m(4a/m, b)` onto the square `[0,a]²`:
/// the boundary is laid along `∂[0,a]²` by arc length, the singular
/// locus goes to the center, and radial segments map affinely.
pub fn band_collapse_map(m: usize, a: f64, b: f64, p: ComplexPoint) -> Result<(f64, f64)> {
    if m < 2 || !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("band collapse needs m >= 2 and a > 0 (got m = {m}, a = {a})")));
    }
    if b < a * std::f64::consts::SQRT_2 / 2.0 {
        return Err(Error::Precondition(format!("band height b = {b} is below a*sqrt(2)/2 = {}", a * std::f64::consts::SQRT_2 / 2.0)));
    }
    if p.face >= m {
        return Err(Error::InvalidParameter(format!("face {} is not in a band with {m} squares", p.face)));
    }
    let s = (((m - p.face) % m) as f64 + p.u) / m as f64;
    Ok(radial(0.0, 0.0, a, s, p.v))
}

/// `q_i^{i+1} : P^{i+1} → P^i`: collapses each deepest block onto the face
/// it replaced.
pub fn bonding_map(params: &TemplateParams, i: usize, p: ComplexPoint) -> Result<ComplexPoint> {
    let s = params.s();
    let faces = s.checked_pow(i as u32 + 1).ok_or_else(|| Error::InvalidParameter("depth too large".into()))?;
    if p.face >= faces {
        return Err(Error::InvalidParameter(format!("face {} is not in P^{}", p.face, i + 1)));
    }
    let (u, v) = q01(params, p.face % s, p.u, p.v);
    Ok(ComplexPoint::new(p.face / s, u, v))
}

/// `f_a^i : P^i → P^{i+1}`, the `1/(mk)`-homothety onto block `a`.
pub fn selfsimilarity_map(params: &TemplateParams, a: usize, i: usize, p: ComplexPoint) -> Result<ComplexPoint> {
    let s = params.s();
    if a >= s {
        return Err(Error::InvalidParameter(format!("letter {a} is outside the alphabet of size {s}")));
    }
    let block = s.pow(i as u32);
    if p.face >= block {
        return Err(Error::InvalidParameter(format!("face {} is not in P^{i}", p.face)));
    }
    let mut w = face_word(params, i, p.face);
    w.insert(0, a);
    Ok(ComplexPoint::new(word_face(params, &w), p.u, p.v))
}

/// Projections `x_i` of a depth-`d` point to every `P^i`, coarsest first.
pub fn project_all(params: &TemplateParams, d: usize, p: ComplexPoint) -> Result<Vec<ComplexPoint>> {
    let mut out = vec![p];
    for i in (0..d).rev() {
        let next = bonding_map(params, i, *out.last().unwrap())?;
        out.push(next);
    }
    out.reverse();
    Ok(out)
}

/// The sequence `|x_i x'_i|` for `i = 0..=d`, with `graphs[i]` the metric
/// graph of `P^i`.
pub fn limit_distance(
    params: &TemplateParams,
    graphs: &[&MetricGraph],
    x: ComplexPoint,
    y: ComplexPoint,
) -> Result<Vec<f64>> {
    if graphs.is_empty() {
        return Err(Error::InvalidParameter("no metric graphs supplied".into()));
    }
    let d = graphs.len() - 1;
    let xs = project_all(params, d, x)?;
    let ys = project_all(params, d, y)?;
    (0..=d).map(|i| graphs[i].distance(xs[i], ys[i])).collect()
}
