//! Square complexes modelling self-similar Pontryagin surfaces: the `m`-band,
//! the templates `P^i_{m,k}`, their intrinsic metrics, bonding maps and
//! self-similarity homotheties.
//!
//! Every face carries a chart `(u, v) ∈ [0,1]²`. Sides are numbered
//! `0: v = 0`, `1: u = 1`, `2: v = 1`, `3: u = 0`; sides 0 and 2 are
//! parametrized by `u`, sides 1 and 3 by `v`.

mod graph;
mod hat_pi;
mod maps;

pub use graph::{GraphPoint, MetricGraph};
pub use hat_pi::{x0_boundary_distance, CopyReport, HatPiModel};
pub use maps::{band_collapse_map, bonding_map, limit_distance, project_all, q01, selfsimilarity_map};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative stretch of the 8-neighbor grid metric, `1/cos(π/8) − 1`.
pub const GRID_STRETCH: f64 = 0.082_392_200_292_393_97;

/// Default cap on the number of faces of a built template.
pub const DEFAULT_FACE_CAP: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemplateParams {
    pub m: usize,
    pub k: usize,
}

/// Position of a letter inside the first template `P^1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    /// Cell `(x, y)` of the `km × km` grid outside the middle block.
    Q { x: usize, y: usize },
    /// Cell `(c, r)` of the `4 × m` grid on band square `j`; row 0 is singular.
    Band { j: usize, r: usize, c: usize },
}

impl TemplateParams {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m = {m} must be at least 2")));
        }
        if k < 3 || k.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("k = {k} must be odd and at least 3")));
        }
        Ok(TemplateParams { m, k })
    }

    pub fn l(&self) -> usize {
        (self.k - 1) / 2
    }

    pub fn mk(&self) -> usize {
        self.m * self.k
    }

    /// Number of letters, `(km)² + 3m²`.
    pub fn s(&self) -> usize {
        self.mk() * self.mk() + 3 * self.m * self.m
    }

    /// Diameter bound `2m(l+1)/(mk−1) + 2`.
    pub fn diam_bound(&self) -> f64 {
        2.0 * (self.m * (self.l() + 1)) as f64 / (self.mk() - 1) as f64 + 2.0
    }

    /// `(l+1)/k`, the largest distance to the boundary in `P^1`.
    pub fn delta1(&self) -> f64 {
        (self.l() + 1) as f64 / self.k as f64
    }

    /// Hausdorff dimension `2 + log(1 + 3/k²)/log(mk)` of the limit space.
    pub fn hausdorff_dim(&self) -> f64 {
        let k = self.k as f64;
        2.0 + (1.0 + 3.0 / (k * k)).ln() / (self.mk() as f64).ln()
    }

    pub fn q_count(&self) -> usize {
        self.mk() * self.mk() - self.m * self.m
    }

    fn in_middle(&self, x: usize, y: usize) -> bool {
        let lo = self.l() * self.m;
        (lo..lo + self.m).contains(&x) && (lo..lo + self.m).contains(&y)
    }

    /// Letter of grid cell `(x, y)`, `None` inside the removed middle block.
    pub fn q_letter(&self, x: usize, y: usize) -> Option<usize> {
        let n = self.mk();
        if x >= n || y >= n || self.in_middle(x, y) {
            return None;
        }
        let lo = self.l() * self.m;
        let mut idx = y * n + x;
        if y >= lo + self.m {
            idx -= self.m * self.m;
        } else if y >= lo {
            idx -= (y - lo) * self.m;
            if x >= lo + self.m {
                idx -= self.m;
            }
        }
        Some(idx)
    }

    pub fn band_letter(&self, j: usize, r: usize, c: usize) -> usize {
        self.q_count() + (j * self.m + r) * 4 + c
    }

    pub fn letter(&self, a: usize) -> Letter {
        let nq = self.q_count();
        if a >= nq {
            let b = a - nq;
            return Letter::Band {
                j: b / (4 * self.m),
                r: (b / 4) % self.m,
                c: b % 4,
            };
        }
        let n = self.mk();
        let lo = self.l() * self.m;
        let before = lo * n;
        if a < before {
            return Letter::Q { x: a % n, y: a / n };
        }
        let mid_rows = self.m * (n - self.m);
        if a < before + mid_rows {
            let t = a - before;
            let y = lo + t / (n - self.m);
            let mut x = t % (n - self.m);
            if x >= lo {
                x += self.m;
            }
            return Letter::Q { x, y };
        }
        let t = a - before - mid_rows;
        Letter::Q {
            x: t % n,
            y: lo + self.m + t / n,
        }
    }

    /// Letter of the band cell used as the distinguished middle block.
    pub fn middle_letter(&self) -> usize {
        self.band_letter(0, 0, 0)
    }

    /// The `4m` segments of `∂q_k`, counterclockwise from its lower-left corner.
    fn inner_boundary(&self) -> Vec<SideRef> {
        let (m, lo) = (self.m, self.l() * self.m);
        let mut out = Vec::with_capacity(4 * m);
        for p in 0..m {
            out.push(SideRef::new(self.q_letter(lo + p, lo - 1).unwrap(), 2, false));
        }
        for p in 0..m {
            out.push(SideRef::new(self.q_letter(lo + m, lo + p).unwrap(), 3, false));
        }
        for p in 0..m {
            out.push(SideRef::new(self.q_letter(lo + m - 1 - p, lo + m).unwrap(), 0, true));
        }
        for p in 0..m {
            out.push(SideRef::new(self.q_letter(lo - 1, lo + m - 1 - p).unwrap(), 1, true));
        }
        out
    }

    /// Band square glued to segment `p` of `∂q_k`, with its column.
    pub fn band_square_of_segment(&self, p: usize) -> (usize, usize) {
        let q = p / 4;
        ((self.m - q % self.m) % self.m, p % 4)
    }

    /// Boundary segment index of band square `j`, column `c`.
    pub fn segment_of_band(&self, j: usize, c: usize) -> usize {
        ((self.m - j) % self.m) * 4 + c
    }

    fn first_template_classes(&self) -> Vec<(ClassKind, Vec<SideRef>)> {
        let (m, n) = (self.m, self.mk());
        let mut out = Vec::new();
        for y in 0..n {
            for x in 0..n {
                let Some(a) = self.q_letter(x, y) else { continue };
                if let Some(b) = self.q_letter(x + 1, y) {
                    out.push((
                        ClassKind::Interior,
                        vec![SideRef::new(a, 1, false), SideRef::new(b, 3, false)],
                    ));
                }
                if let Some(b) = self.q_letter(x, y + 1) {
                    out.push((
                        ClassKind::Interior,
                        vec![SideRef::new(a, 2, false), SideRef::new(b, 0, false)],
                    ));
                }
            }
        }
        for j in 0..m {
            for r in 0..m {
                for c in 0..4 {
                    let a = self.band_letter(j, r, c);
                    if c < 3 {
                        let b = self.band_letter(j, r, c + 1);
                        out.push((
                            ClassKind::Interior,
                            vec![SideRef::new(a, 1, false), SideRef::new(b, 3, false)],
                        ));
                    }
                    if r + 1 < m {
                        let b = self.band_letter(j, r + 1, c);
                        out.push((
                            ClassKind::Interior,
                            vec![SideRef::new(a, 2, false), SideRef::new(b, 0, false)],
                        ));
                    }
                }
                let left = self.band_letter(j, r, 0);
                let right = self.band_letter((j + 1) % m, r, 3);
                out.push((
                    ClassKind::Interior,
                    vec![SideRef::new(left, 3, false), SideRef::new(right, 1, false)],
                ));
            }
        }
        for c in 0..4 {
            let entries = (0..m)
                .map(|j| SideRef::new(self.band_letter(j, 0, c), 0, false))
                .collect();
            out.push((ClassKind::Singular, entries));
        }
        for (p, inner) in self.inner_boundary().into_iter().enumerate() {
            let (j, c) = self.band_square_of_segment(p);
            out.push((
                ClassKind::Interior,
                vec![SideRef::new(self.band_letter(j, m - 1, c), 2, false), inner],
            ));
        }
        out
    }

    /// Boundary of `P^1`, side by side, in parameter order.
    fn first_template_boundary(&self) -> [Vec<u32>; 4] {
        let n = self.mk();
        let q = |x, y| self.q_letter(x, y).unwrap() as u32;
        [
            (0..n).map(|x| q(x, 0)).collect(),
            (0..n).map(|y| q(n - 1, y)).collect(),
            (0..n).map(|x| q(x, n - 1)).collect(),
            (0..n).map(|y| q(0, y)).collect(),
        ]
    }
}

/// A face side, optionally traversed against its parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SideRef {
    pub face: u32,
    pub side: u8,
    pub reversed: bool,
}

impl SideRef {
    pub fn new(face: usize, side: u8, reversed: bool) -> Self {
        SideRef {
            face: face as u32,
            side,
            reversed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassKind {
    /// Two sides glued.
    Interior,
    /// Three or more sides glued along one edge.
    Singular,
}

/// A point of a complex in face coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub face: usize,
    pub u: f64,
    pub v: f64,
}

impl ComplexPoint {
    pub fn new(face: usize, u: f64, v: f64) -> Self {
        ComplexPoint { face, u, v }
    }
}

/// Faces of common size glued along edge classes.
#[derive(Clone, Debug)]
pub struct SquareComplex {
    pub faces: usize,
    pub face_w: f64,
    pub face_h: f64,
    class_off: Vec<u32>,
    class_entries: Vec<SideRef>,
    class_kind: Vec<ClassKind>,
    /// `side_class[4 f + σ]`: class containing side `σ` of face `f`.
    side_class: Vec<u32>,
    /// Outer boundary, for templates: four sides in parameter order.
    boundary: Option<[Vec<u32>; 4]>,
    template: Option<(TemplateParams, usize)>,
}

const NO_CLASS: u32 = u32::MAX;

impl SquareComplex {
    fn from_classes(
        faces: usize,
        face_w: f64,
        face_h: f64,
        class_off: Vec<u32>,
        class_entries: Vec<SideRef>,
        class_kind: Vec<ClassKind>,
    ) -> Result<Self> {
        let mut side_class = vec![NO_CLASS; 4 * faces];
        for c in 0..class_kind.len() {
            for e in &class_entries[class_off[c] as usize..class_off[c + 1] as usize] {
                let slot = &mut side_class[4 * e.face as usize + e.side as usize];
                if *slot != NO_CLASS {
                    return Err(Error::InvalidParameter(format!(
                        "side {} of face {} is glued twice",
                        e.side, e.face
                    )));
                }
                *slot = c as u32;
            }
        }
        Ok(SquareComplex {
            faces,
            face_w,
            face_h,
            class_off,
            class_entries,
            class_kind,
            side_class,
            boundary: None,
            template: None,
        })
    }

    pub fn class_count(&self) -> usize {
        self.class_kind.len()
    }

    pub fn class(&self, c: usize) -> &[SideRef] {
        &self.class_entries[self.class_off[c] as usize..self.class_off[c + 1] as usize]
    }

    pub fn class_kind(&self, c: usize) -> ClassKind {
        self.class_kind[c]
    }

    pub fn side_class(&self, face: usize, side: u8) -> Option<usize> {
        let c = self.side_class[4 * face + side as usize];
        (c != NO_CLASS).then_some(c as usize)
    }

    pub fn template(&self) -> Option<(TemplateParams, usize)> {
        self.template
    }

    /// Outer boundary sides `0..4`, each a list of faces in parameter order.
    pub fn boundary_sides(&self) -> Option<&[Vec<u32>; 4]> {
        self.boundary.as_ref()
    }

    /// Free face sides (not glued to anything).
    pub fn free_sides(&self) -> Vec<(usize, u8)> {
        (0..self.faces)
            .flat_map(|f| (0..4u8).map(move |s| (f, s)))
            .filter(|&(f, s)| self.side_class(f, s).is_none())
            .collect()
    }

    fn side_length(&self, side: u8) -> f64 {
        if side.is_multiple_of(2) {
            self.face_w
        } else {
            self.face_h
        }
    }

    /// Cycles formed by a set of face sides, as `(edge count, length)`.
    fn cycles_of(&self, sides: &[(usize, u8)]) -> Vec<(usize, f64)> {
        let g = MetricGraph::build(self, 1);
        let mut parent: Vec<usize> = (0..g.node_count()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut used = vec![false; g.node_count()];
        for &(f, s) in sides {
            let (a, b) = side_corners(s);
            let na = g.corner_node(f, a);
            let nb = g.corner_node(f, b);
            used[na] = true;
            used[nb] = true;
            let (ra, rb) = (find(&mut parent, na), find(&mut parent, nb));
            parent[ra] = rb;
        }
        let mut comps: std::collections::BTreeMap<usize, (usize, f64)> = Default::default();
        for &(f, s) in sides {
            let (a, _) = side_corners(s);
            let r = find(&mut parent, g.corner_node(f, a));
            let e = comps.entry(r).or_default();
            e.0 += 1;
            e.1 += self.side_length(s);
        }
        comps.into_values().collect()
    }

    /// Boundary cycles as `(edge count, length)`.
    pub fn boundary_cycles(&self) -> Vec<(usize, f64)> {
        self.cycles_of(&self.free_sides())
    }

    /// Singular-locus cycles (edges where three or more faces meet).
    pub fn singular_cycles(&self) -> Vec<(usize, f64)> {
        let sides: Vec<(usize, u8)> = (0..self.class_count())
            .filter(|&c| self.class_kind[c] == ClassKind::Singular)
            .map(|c| {
                let e = self.class(c)[0];
                (e.face as usize, e.side)
            })
            .collect();
        self.cycles_of(&sides)
    }

    /// Checks that every class has consistent entries and that gluing is a
    /// partial involution on sides.
    pub fn check_gluings(&self) -> Result<()> {
        for c in 0..self.class_count() {
            let cls = self.class(c);
            let arity_ok = match self.class_kind[c] {
                ClassKind::Interior => cls.len() == 2,
                ClassKind::Singular => cls.len() >= 2,
            };
            if !arity_ok {
                return Err(Error::InvalidParameter(format!("malformed class {c}")));
            }
            let len = self.side_length(cls[0].side);
            if cls.iter().any(|e| (self.side_length(e.side) - len).abs() > 1e-12) {
                return Err(Error::InvalidParameter(format!("class {c} joins sides of unequal length")));
            }
            for e in cls {
                if self.side_class(e.face as usize, e.side) != Some(c) {
                    return Err(Error::InvalidParameter(format!("class {c} index mismatch")));
                }
            }
        }
        Ok(())
    }

    /// Lowest-face representative of a point on a glued side.
    pub fn canonical_point(&self, p: ComplexPoint) -> ComplexPoint {
        let mut best = p;
        let mut frontier = vec![p];
        let mut seen = 0;
        while let Some(q) = frontier.pop() {
            seen += 1;
            if seen > 64 {
                break;
            }
            for side in sides_of_point(q.u, q.v) {
                let Some(c) = self.side_class(q.face, side) else { continue };
                let cls = self.class(c);
                let me = cls.iter().find(|e| e.face as usize == q.face && e.side == side).unwrap();
                let t = side_param(side, q.u, q.v);
                let pos = if me.reversed { 1.0 - t } else { t };
                for e in cls {
                    let tt = if e.reversed { 1.0 - pos } else { pos };
                    let (u, v) = side_point(e.side, tt);
                    let cand = ComplexPoint::new(e.face as usize, u, v);
                    if cand.face < best.face {
                        best = cand;
                        frontier.push(cand);
                    }
                }
            }
        }
        best
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gluings: Vec<serde_json::Value> = (0..self.class_count())
            .map(|c| {
                serde_json::json!({
                    "kind": match self.class_kind[c] { ClassKind::Interior => "interior", ClassKind::Singular => "singular" },
                    "sides": self.class(c).iter().map(|e| [e.face as u64, e.side as u64, e.reversed as u64]).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "faces": self.faces,
            "face_width": self.face_w,
            "face_height": self.face_h,
            "gluings": gluings,
        })
    }
}

/// Corner indices `0: (0,0)`, `1: (1,0)`, `2: (1,1)`, `3: (0,1)` at the
/// start and end of a side's parameter.
pub fn side_corners(side: u8) -> (u8, u8) {
    match side {
        0 => (0, 1),
        1 => (1, 2),
        2 => (3, 2),
        _ => (0, 3),
    }
}

pub fn corner_uv(corner: u8) -> (f64, f64) {
    match corner {
        0 => (0.0, 0.0),
        1 => (1.0, 0.0),
        2 => (1.0, 1.0),
        _ => (0.0, 1.0),
    }
}

fn sides_of_point(u: f64, v: f64) -> Vec<u8> {
    let mut s = Vec::new();
    if v == 0.0 {
        s.push(0);
    }
    if u == 1.0 {
        s.push(1);
    }
    if v == 1.0 {
        s.push(2);
    }
    if u == 0.0 {
        s.push(3);
    }
    s
}

fn side_param(side: u8, u: f64, v: f64) -> f64 {
    if side.is_multiple_of(2) {
        u
    } else {
        v
    }
}

fn side_point(side: u8, t: f64) -> (f64, f64) {
    match side {
        0 => (t, 0.0),
        1 => (1.0, t),
        2 => (t, 1.0),
        _ => (0.0, t),
    }
}

/// The band `B_m(a, b)`: `m` rectangles `a × b` sharing their bottom side,
/// with the left side of square `j` glued to the right side of square `j+1`.
pub fn build_band(m: usize, a: f64, b: f64) -> Result<SquareComplex> {
    if m < 2 || !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("band needs m >= 2, a, b > 0 (got m = {m}, a = {a}, b = {b})")));
    }
    let mut off = vec![0u32];
    let mut entries = Vec::new();
    let mut kinds = Vec::new();
    for j in 0..m {
        entries.push(SideRef::new(j, 3, false));
        entries.push(SideRef::new((j + 1) % m, 1, false));
        off.push(entries.len() as u32);
        kinds.push(ClassKind::Interior);
    }
    entries.extend((0..m).map(|j| SideRef::new(j, 0, false)));
    off.push(entries.len() as u32);
    kinds.push(ClassKind::Singular);
    SquareComplex::from_classes(m, a, b, off, entries, kinds)
}

/// Builds `P^depth_{m,k}` with faces of side `(mk)^{−depth}`. Face ids are
/// base-`s` words with the coarsest letter most significant.
pub fn build_template(params: TemplateParams, depth: usize) -> Result<SquareComplex> {
    build_template_with_cap(params, depth, DEFAULT_FACE_CAP)
}

pub fn build_template_with_cap(
    params: TemplateParams,
    depth: usize,
    face_cap: usize,
) -> Result<SquareComplex> {
    let s = params.s();
    let faces = (s as f64).powi(depth as i32);
    if faces > face_cap as f64 {
        return Err(Error::CapExceeded {
            what: format!("template P^{depth}"),
            size: faces.min(usize::MAX as f64) as usize,
            cap: face_cap,
        });
    }
    let faces = faces as usize;
    let side = (params.mk() as f64).powi(-(depth as i32));
    let mut c = if depth == 0 {
        SquareComplex::from_classes(1, 1.0, 1.0, vec![0], Vec::new(), Vec::new())?
    } else {
        let first = params.first_template_classes();
        let mut off = vec![0u32];
        let mut entries: Vec<SideRef> = Vec::new();
        let mut kinds = Vec::new();
        emit_classes(
            &params,
            &first,
            depth,
            0,
            &mut off,
            &mut entries,
            &mut kinds,
        );
        SquareComplex::from_classes(faces, side, side, off, entries, kinds)?
    };
    c.boundary = Some(template_boundary(&params, depth));
    c.template = Some((params, depth));
    Ok(c)
}

/// Outer boundary of `P^depth`, side by side.
pub fn template_boundary(params: &TemplateParams, depth: usize) -> [Vec<u32>; 4] {
    if depth == 0 {
        return [vec![0], vec![0], vec![0], vec![0]];
    }
    let first = params.first_template_boundary();
    let inner = template_boundary(params, depth - 1);
    let block = (params.s() as u64).pow(depth as u32 - 1);
    let mut out: [Vec<u32>; 4] = Default::default();
    for side in 0..4 {
        out[side] = first[side]
            .iter()
            .flat_map(|&a| inner[side].iter().map(move |&f| (a as u64 * block + f as u64) as u32))
            .collect();
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn emit_classes(
    params: &TemplateParams,
    first: &[(ClassKind, Vec<SideRef>)],
    depth: usize,
    offset: u64,
    off: &mut Vec<u32>,
    entries: &mut Vec<SideRef>,
    kinds: &mut Vec<ClassKind>,
) {
    let s = params.s() as u64;
    let block = s.pow(depth as u32 - 1);
    if depth > 1 {
        for a in 0..s {
            emit_classes(params, first, depth - 1, offset + a * block, off, entries, kinds);
        }
    }
    let inner = if depth > 1 {
        template_boundary(params, depth - 1)
    } else {
        [vec![0], vec![0], vec![0], vec![0]]
    };
    let n = inner[0].len();
    for (kind, cls) in first {
        for q in 0..n {
            for e in cls {
                let list = &inner[e.side as usize];
                let fine = if e.reversed { list[n - 1 - q] } else { list[q] };
                entries.push(SideRef {
                    face: (offset + e.face as u64 * block + fine as u64) as u32,
                    side: e.side,
                    reversed: e.reversed,
                });
            }
            off.push(entries.len() as u32);
            kinds.push(*kind);
        }
    }
}

/// Letters of a face id of `P^depth`, coarsest first.
pub fn face_word(params: &TemplateParams, depth: usize, mut face: usize) -> Vec<usize> {
    let s = params.s();
    let mut w = vec![0; depth];
    for i in (0..depth).rev() {
        w[i] = face % s;
        face /= s;
    }
    w
}

pub fn word_face(params: &TemplateParams, word: &[usize]) -> usize {
    word.iter().fold(0, |acc, &a| acc * params.s() + a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateAudit {
    pub m: usize,
    pub k: usize,
    pub depth: usize,
    pub faces: usize,
    pub expected_faces: usize,
    pub blocks_per_level: Vec<usize>,
    pub singular_classes: usize,
    pub boundary_segments: [usize; 4],
    pub subblocks_match_first_template: bool,
}

/// Structural audit: face count, distinct prefixes per level, boundary
/// structure, and (for depth ≥ 2) isomorphism of every top-level block
/// with the previous template.
pub fn audit_template(c: &SquareComplex) -> Result<TemplateAudit> {
    let (params, depth) = c
        .template()
        .ok_or_else(|| Error::InvalidParameter("not a template".into()))?;
    c.check_gluings()?;
    let s = params.s();
    let blocks_per_level = (1..=depth)
        .map(|lvl| {
            let div = s.pow((depth - lvl) as u32);
            let mut seen = vec![false; s.pow(lvl as u32)];
            for f in 0..c.faces {
                seen[f / div] = true;
            }
            seen.iter().filter(|&&b| b).count()
        })
        .collect();
    let singular_classes = (0..c.class_count())
        .filter(|&i| c.class_kind(i) == ClassKind::Singular)
        .count();
    let b = c.boundary_sides().unwrap();
    let boundary_segments = [b[0].len(), b[1].len(), b[2].len(), b[3].len()];
    let mut subblocks_match = true;
    if depth >= 2 {
        let prev = build_template(params, depth - 1)?;
        let block = s.pow(depth as u32 - 1);
        let mut reference: Vec<Vec<SideRef>> = (0..prev.class_count())
            .map(|i| {
                let mut v = prev.class(i).to_vec();
                v.sort();
                v
            })
            .collect();
        reference.sort();
        let mut per_block: Vec<Vec<Vec<SideRef>>> = vec![Vec::new(); s];
        for i in 0..c.class_count() {
            let cls = c.class(i);
            let a = cls[0].face as usize / block;
            if cls.iter().all(|e| e.face as usize / block == a) {
                let mut v: Vec<SideRef> = cls
                    .iter()
                    .map(|e| SideRef {
                        face: (e.face as usize % block) as u32,
                        ..*e
                    })
                    .collect();
                v.sort();
                per_block[a].push(v);
            }
        }
        for mut blk in per_block {
            blk.sort();
            if blk != reference {
                subblocks_match = false;
            }
        }
    }
    Ok(TemplateAudit {
        m: params.m,
        k: params.k,
        depth,
        faces: c.faces,
        expected_faces: s.pow(depth as u32),
        blocks_per_level,
        singular_classes,
        boundary_segments,
        subblocks_match_first_template: subblocks_match,
    })
}

/// Open set condition audit for the homotheties `f_a : P^{d−1} → P^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscAudit {
    pub letters: usize,
    pub nodes_checked: usize,
    /// Grid nodes interior to one image that also lie in another image.
    pub interior_overlaps: usize,
    /// Faces not covered by any image.
    pub uncovered_faces: usize,
}

/// Checks that the images `f_a(P^{d−1})` have pairwise disjoint interiors
/// and cover `P^d`, on the grid graph of resolution `g`.
pub fn osc_audit(c: &SquareComplex, g: usize) -> Result<OscAudit> {
    let (params, depth) = c
        .template()
        .ok_or_else(|| Error::InvalidParameter("not a template".into()))?;
    if depth == 0 {
        return Err(Error::InvalidParameter("P^0 has no block structure".into()));
    }
    let s = params.s();
    let block = s.pow(depth as u32 - 1);
    let inner = template_boundary(&params, depth - 1);
    let mut on_block_boundary = vec![[false; 4]; block];
    for (side, faces) in inner.iter().enumerate() {
        for &f in faces {
            on_block_boundary[f as usize][side] = true;
        }
    }
    let graph = MetricGraph::build(c, g);
    let mut overlaps = 0;
    for n in 0..graph.node_count() as u32 {
        let mut blocks: Vec<usize> = Vec::new();
        let mut interior_in: Option<usize> = None;
        for (f, i, j) in graph.node_slots(n) {
            let a = f / block;
            blocks.push(a);
            let local = f % block;
            let mut sides = Vec::new();
            if j == 0 {
                sides.push(0);
            }
            if i == g {
                sides.push(1);
            }
            if j == g {
                sides.push(2);
            }
            if i == 0 {
                sides.push(3);
            }
            if !sides.iter().any(|&sd| on_block_boundary[local][sd]) {
                interior_in = Some(a);
            }
        }
        blocks.sort();
        blocks.dedup();
        if interior_in.is_some() && blocks.len() > 1 {
            overlaps += 1;
        }
    }
    let mut covered = vec![false; c.faces];
    for a in 0..s {
        for f in 0..block {
            covered[a * block + f] = true;
        }
    }
    Ok(OscAudit {
        letters: s,
        nodes_checked: graph.node_count(),
        interior_overlaps: overlaps,
        uncovered_faces: covered.iter().filter(|&&b| !b).count(),
    })
}
