//! The nested block model `X_0 ⊂ X_1 ⊂ … ⊂ X_N` and copy relocation.
//!
//! The model is `P^N` scaled so that its faces have side `mk`. `X_t` is the
//! block addressed by the prefix `c^{N−t}`, where `c` is the middle letter;
//! it is a copy of `P^t` with total side `(mk)^{t+1}`, so `X_t = λ^t X_0`
//! with `λ = mk`.

use serde::Serialize;

use super::{
    build_template, build_template_with_cap, word_face, ComplexPoint, MetricGraph, SquareComplex, TemplateParams,
    DEFAULT_FACE_CAP, GRID_STRETCH,
};
use crate::error::{Error, Result};

/// Per-corner gluing data for the two sides at one vertex of a star.
type SideSignature = [Vec<(usize, u8, bool)>; 2];

pub struct HatPiModel {
    pub params: TemplateParams,
    pub levels: usize,
    pub complex: SquareComplex,
    pub graph: MetricGraph,
    /// `coarse[L]`: `P^L` with a unit grid, for block adjacency.
    coarse: Vec<(SquareComplex, MetricGraph)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CopyReport {
    /// Least `t` such that a verified copy of `A` lies in `X_t`.
    pub t_min: usize,
    pub j: usize,
    pub i: usize,
    pub diam: f64,
    pub method: String,
    pub copy: Vec<ComplexPoint>,
    /// Largest deviation between pairwise distances of `A` and its copy.
    pub distortion: f64,
    pub bound_holds: bool,
}

/// A star entry: face and the corner index at the star's vertex.
type Star = Vec<(usize, u8)>;

/// Sides incident to a corner, with whether the corner is the parameter end.
fn incident(corner: u8) -> [(u8, bool); 2] {
    match corner {
        0 => [(0, false), (3, false)],
        1 => [(0, true), (1, false)],
        2 => [(1, true), (2, true)],
        _ => [(2, false), (3, true)],
    }
}

fn corner_at(side: u8, at_end: bool) -> u8 {
    let (a, b) = super::side_corners(side);
    if at_end {
        b
    } else {
        a
    }
}

impl HatPiModel {
    pub fn new(params: TemplateParams, levels: usize, g: usize) -> Result<Self> {
        Self::with_cap(params, levels, g, DEFAULT_FACE_CAP)
    }

    pub fn with_cap(params: TemplateParams, levels: usize, g: usize, face_cap: usize) -> Result<Self> {
        let mut complex = build_template_with_cap(params, levels, face_cap)?;
        let mk = params.mk() as f64;
        complex.face_w = mk;
        complex.face_h = mk;
        let graph = MetricGraph::build(&complex, g);
        let mut coarse = Vec::with_capacity(levels + 1);
        for l in 0..=levels {
            let c = build_template(params, l)?;
            let gr = MetricGraph::build(&c, 1);
            coarse.push((c, gr));
        }
        Ok(HatPiModel {
            params,
            levels,
            complex,
            graph,
            coarse,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.params.mk() as f64
    }

    /// Face id offset and block size of `X_t` inside the model.
    pub fn block_of_level(&self, t: usize) -> (usize, usize) {
        let s = self.params.s();
        let c = self.params.middle_letter();
        let prefix = word_face(&self.params, &vec![c; self.levels - t]);
        let size = s.pow(t as u32);
        (prefix * size, size)
    }

    pub fn in_level(&self, p: &ComplexPoint, t: usize) -> bool {
        let (base, size) = self.block_of_level(t);
        (base..base + size).contains(&p.face)
    }

    /// Face of block `prefix` (a face of `P^{N−t}`) sitting at its coarse
    /// corner `corner`.
    pub fn corner_face(&self, prefix: usize, corner: u8, t: usize) -> usize {
        let n = self.params.mk();
        let (x, y) = match corner {
            0 => (0, 0),
            1 => (n - 1, 0),
            2 => (n - 1, n - 1),
            _ => (0, n - 1),
        };
        let a = self.params.q_letter(x, y).unwrap();
        let mut f = prefix;
        for _ in 0..t {
            f = f * self.params.s() + a;
        }
        f
    }

    fn pairwise(&self, pts: &[ComplexPoint]) -> Result<Vec<Vec<f64>>> {
        let att: Vec<_> = pts.iter().map(|&p| self.graph.attach(p)).collect::<Result<_>>()?;
        att.iter().map(|a| self.graph.distances(a, &att)).collect()
    }

    /// Graph diameter of a point set.
    pub fn diameter(&self, pts: &[ComplexPoint]) -> Result<f64> {
        Ok(self.pairwise(pts)?.into_iter().flatten().fold(0.0, f64::max))
    }

    fn distortion(&self, a: &[Vec<f64>], copy: &[ComplexPoint]) -> Result<(f64, bool)> {
        let b = self.pairwise(copy)?;
        let abs = 2.0 * self.graph.abs_tol();
        let mut worst = 0.0f64;
        let mut ok = true;
        for (ra, rb) in a.iter().zip(&b) {
            for (&x, &y) in ra.iter().zip(rb) {
                let dev = (x - y).abs();
                worst = worst.max(dev);
                if dev > GRID_STRETCH * x.max(y) + abs {
                    ok = false;
                }
            }
        }
        Ok((worst, ok))
    }

    fn star(&self, l: usize, node: u32) -> Star {
        let gr = &self.coarse[l].1;
        gr.node_slots(node)
            .map(|(f, i, j)| {
                let corner = match (i, j) {
                    (0, 0) => 0,
                    (1, 0) => 1,
                    (1, 1) => 2,
                    _ => 3,
                };
                (f, corner)
            })
            .collect()
    }

    /// Gluing signature of a star: for entry `e` and incident side `k`, the
    /// partner entries `(index, side, relative reversal)`, or empty if free.
    fn signature(&self, l: usize, star: &Star) -> Vec<SideSignature> {
        let c = &self.coarse[l].0;
        star.iter()
            .map(|&(f, corner)| {
                let mut out: SideSignature = Default::default();
                for (k, &(side, at_end)) in incident(corner).iter().enumerate() {
                    let Some(cl) = c.side_class(f, side) else { continue };
                    let entries = c.class(cl);
                    let me = entries.iter().find(|e| e.face as usize == f && e.side == side).unwrap();
                    for e in entries {
                        if e.face as usize == f && e.side == side {
                            continue;
                        }
                        let rel = me.reversed != e.reversed;
                        let pc = corner_at(e.side, at_end != rel);
                        if let Some(idx) = star.iter().position(|&s| s == (e.face as usize, pc)) {
                            out[k].push((idx, e.side, rel));
                        }
                    }
                    out[k].sort();
                }
                out
            })
            .collect()
    }

    /// Corner-preserving isomorphisms between stars, by backtracking.
    fn star_isomorphisms(&self, l: usize, a: &Star, b: &Star, limit: usize) -> Vec<Vec<usize>> {
        if a.len() != b.len() {
            return Vec::new();
        }
        let sa = self.signature(l, a);
        let sb = self.signature(l, b);
        let mut out = Vec::new();
        let mut phi = vec![usize::MAX; a.len()];
        let mut used = vec![false; b.len()];
        #[allow(clippy::too_many_arguments)]
        fn rec(
            e: usize,
            a: &Star,
            b: &Star,
            sa: &[SideSignature],
            sb: &[SideSignature],
            phi: &mut Vec<usize>,
            used: &mut Vec<bool>,
            out: &mut Vec<Vec<usize>>,
            limit: usize,
        ) {
            if out.len() >= limit {
                return;
            }
            if e == a.len() {
                // Check every gluing maps to a gluing.
                for x in 0..a.len() {
                    for k in 0..2 {
                        let mut mapped: Vec<(usize, u8, bool)> =
                            sa[x][k].iter().map(|&(i, s, r)| (phi[i], s, r)).collect();
                        mapped.sort();
                        if mapped != sb[phi[x]][k] {
                            return;
                        }
                    }
                }
                out.push(phi.clone());
                return;
            }
            for cand in 0..b.len() {
                if used[cand] || b[cand].1 != a[e].1 {
                    continue;
                }
                if sa[e][0].len() != sb[cand][0].len() || sa[e][1].len() != sb[cand][1].len() {
                    continue;
                }
                phi[e] = cand;
                used[cand] = true;
                rec(e + 1, a, b, sa, sb, phi, used, out, limit);
                used[cand] = false;
                phi[e] = usize::MAX;
            }
        }
        rec(0, a, b, &sa, &sb, &mut phi, &mut used, &mut out, limit);
        out
    }

    /// Finds the least level `t` such that a verified translated copy of `A`
    /// lies in `X_t`, and reports `j = max(0, t − 1)` against the level `i`
    /// determined by `λ^i < Λ₀·diam A ≤ λ^{i+1}` with `Λ₀ = λ`.
    pub fn find_copy_level(&self, a: &[ComplexPoint]) -> Result<CopyReport> {
        if a.is_empty() {
            return Err(Error::EmptyOperand);
        }
        for p in a {
            if p.face >= self.complex.faces {
                return Err(Error::InvalidParameter(format!("face {} exceeds the model", p.face)));
            }
        }
        let base = self.pairwise(a)?;
        let diam = base.iter().flatten().copied().fold(0.0, f64::max);
        let lambda = self.lambda();
        let mut i = 0usize;
        while lambda * diam > lambda.powi(i as i32 + 1) * (1.0 + 1e-12) {
            i += 1;
        }
        let s = self.params.s();
        let c = self.params.middle_letter();
        let finish = |t: usize, method: &str, copy: Vec<ComplexPoint>, distortion: f64| {
            let j = t.saturating_sub(1);
            CopyReport {
                t_min: t,
                j,
                i,
                diam,
                method: method.to_string(),
                copy,
                distortion,
                bound_holds: j <= i + 1,
            }
        };
        for t in 0..=self.levels {
            let l = self.levels - t;
            let block = s.pow(t as u32);
            let target = word_face(&self.params, &vec![c; l]);
            let prefixes: Vec<usize> = a.iter().map(|p| p.face / block).collect();
            if prefixes.iter().all(|&w| w == prefixes[0]) {
                let copy: Vec<ComplexPoint> = a
                    .iter()
                    .map(|p| ComplexPoint::new(target * block + p.face % block, p.u, p.v))
                    .collect();
                let (dist, ok) = self.distortion(&base, &copy)?;
                if ok {
                    return Ok(finish(t, "translate", copy, dist));
                }
            }
            if l == 0 {
                continue;
            }
            if let Some((copy, dist)) = self.star_copy(a, &base, l, t)? {
                return Ok(finish(t + 1, "star", copy, dist));
            }
        }
        Err(Error::Precondition("no verified copy found at any level".into()))
    }

    fn star_copy(
        &self,
        a: &[ComplexPoint],
        base: &[Vec<f64>],
        l: usize,
        t: usize,
    ) -> Result<Option<(Vec<ComplexPoint>, f64)>> {
        let s = self.params.s();
        let block = s.pow(t as u32);
        let gr = &self.coarse[l].1;
        let mut prefixes: Vec<usize> = a.iter().map(|p| p.face / block).collect();
        prefixes.sort();
        prefixes.dedup();
        // Coarse vertices shared by every block touched by A.
        let mut common: Option<Vec<u32>> = None;
        for &w in &prefixes {
            let mut corners: Vec<u32> = (0..4).map(|k| gr.corner_node(w, k) as u32).collect();
            corners.sort();
            corners.dedup();
            common = Some(match common {
                None => corners,
                Some(prev) => prev.into_iter().filter(|x| corners.contains(x)).collect(),
            });
        }
        let c = self.params.middle_letter();
        let host = word_face(&self.params, &vec![c; l - 1]);
        let candidates: Vec<u32> = (0..gr.node_count() as u32)
            .filter(|&n| gr.node_slots(n).all(|(f, _, _)| f / s == host))
            .collect();
        for p in common.unwrap_or_default() {
            let star_p = self.star(l, p);
            for &q in &candidates {
                let star_q = self.star(l, q);
                for phi in self.star_isomorphisms(l, &star_p, &star_q, 8) {
                    let mut remap = std::collections::HashMap::new();
                    for (e, &(f, _)) in star_p.iter().enumerate() {
                        remap.insert(f, star_q[phi[e]].0);
                    }
                    let copy: Option<Vec<ComplexPoint>> = a
                        .iter()
                        .map(|pt| {
                            remap
                                .get(&(pt.face / block))
                                .map(|&w| ComplexPoint::new(w * block + pt.face % block, pt.u, pt.v))
                        })
                        .collect();
                    let Some(copy) = copy else { continue };
                    let (dist, ok) = self.distortion(base, &copy)?;
                    if ok {
                        return Ok(Some((copy, dist)));
                    }
                }
            }
        }
        Ok(None)
    }
}

/// `dist(X_0, ∂X_1)` measured on `P^1` scaled to faces of side `mk`, where
/// `X_0` is the middle-letter face.
pub fn x0_boundary_distance(params: TemplateParams, g: usize) -> Result<f64> {
    let mut c = build_template(params, 1)?;
    let mk = params.mk() as f64;
    c.face_w = mk;
    c.face_h = mk;
    let gr = MetricGraph::build(&c, g);
    let bd = gr.boundary_distances();
    let mid = params.middle_letter();
    let mut best = f64::INFINITY;
    for i in 0..=g {
        for j in 0..=g {
            best = best.min(bd[gr.node_at(mid, i, j) as usize]);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_blocks_are_nested() {
        let p = TemplateParams::new(2, 3).unwrap();
        let m = HatPiModel::new(p, 2, 1).unwrap();
        let (b0, s0) = m.block_of_level(0);
        let (b1, s1) = m.block_of_level(1);
        assert_eq!(s0, 1);
        assert_eq!(s1, 48);
        assert!(b1 <= b0 && b0 < b1 + s1);
        assert_eq!(m.block_of_level(2), (0, 48 * 48));
    }

    #[test]
    fn single_point_needs_no_level() {
        let p = TemplateParams::new(2, 3).unwrap();
        let m = HatPiModel::new(p, 2, 1).unwrap();
        let r = m.find_copy_level(&[ComplexPoint::new(5, 0.5, 0.5)]).unwrap();
        assert_eq!(r.t_min, 0);
        assert_eq!(r.j, 0);
        assert!(r.bound_holds);
        assert!(m.in_level(&r.copy[0], 0));
    }

    #[test]
    fn x0_is_far_from_the_boundary() {
        let p = TemplateParams::new(2, 3).unwrap();
        let d = x0_boundary_distance(p, 4).unwrap();
        assert!(d >= 12.0, "{d}");
    }
}
