//! Grid-graph approximation of the intrinsic metric of a square complex.
//!
//! Each face is subdivided into a `g × g` grid; grid points on glued sides
//! are identified, and every grid cell contributes its four sides and two
//! diagonals as weighted edges. Graph paths are genuine paths in the
//! complex, so graph distances never underestimate the intrinsic metric.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{ComplexPoint, SquareComplex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// A complex point attached to the graph: nodes with connector lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPoint {
    pub point: ComplexPoint,
    pub anchors: Vec<(u32, f64)>,
}

pub struct MetricGraph {
    g: usize,
    faces: usize,
    face_w: f64,
    face_h: f64,
    slot_node: Vec<u32>,
    node_off: Vec<u32>,
    node_slots: Vec<u32>,
    boundary: Vec<bool>,
    hu: f64,
    hv: f64,
    hd: f64,
}

const DIRS: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

fn find(p: &mut [u32], mut x: u32) -> u32 {
    while p[x as usize] != x {
        let up = p[p[x as usize] as usize];
        p[x as usize] = up;
        x = up;
    }
    x
}

impl MetricGraph {
    pub fn build(c: &SquareComplex, g: usize) -> Self {
        let g = g.max(1);
        let side = g + 1;
        let per = side * side;
        let n_slots = c.faces * per;
        let slot_of = |face: usize, i: usize, j: usize| (face * per + j * side + i) as u32;
        let side_slot = |face: usize, s: u8, t: usize| match s {
            0 => slot_of(face, t, 0),
            1 => slot_of(face, g, t),
            2 => slot_of(face, t, g),
            _ => slot_of(face, 0, t),
        };
        let mut parent: Vec<u32> = (0..n_slots as u32).collect();
        for cl in 0..c.class_count() {
            let entries = c.class(cl);
            for t in 0..=g {
                let pos = |e: &super::SideRef| if e.reversed { g - t } else { t };
                let a = side_slot(entries[0].face as usize, entries[0].side, pos(&entries[0]));
                for e in &entries[1..] {
                    let b = side_slot(e.face as usize, e.side, pos(e));
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        // Keep the lowest slot as representative.
                        if ra < rb {
                            parent[rb as usize] = ra;
                        } else {
                            parent[ra as usize] = rb;
                        }
                    }
                }
            }
        }
        let mut slot_node = vec![u32::MAX; n_slots];
        let mut count = 0u32;
        for s in 0..n_slots as u32 {
            let r = find(&mut parent, s);
            if r == s {
                slot_node[s as usize] = count;
                count += 1;
            }
        }
        for s in 0..n_slots {
            let r = parent[s] as usize;
            slot_node[s] = slot_node[r];
        }
        drop(parent);
        let nodes = count as usize;
        let mut node_off = vec![0u32; nodes + 1];
        for &n in &slot_node {
            node_off[n as usize + 1] += 1;
        }
        for i in 0..nodes {
            node_off[i + 1] += node_off[i];
        }
        let mut fill = node_off.clone();
        let mut node_slots = vec![0u32; n_slots];
        for (s, &n) in slot_node.iter().enumerate() {
            node_slots[fill[n as usize] as usize] = s as u32;
            fill[n as usize] += 1;
        }
        let mut boundary = vec![false; nodes];
        for (f, s) in c.free_sides() {
            for t in 0..=g {
                boundary[slot_node[side_slot(f, s, t) as usize] as usize] = true;
            }
        }
        let hu = c.face_w / g as f64;
        let hv = c.face_h / g as f64;
        MetricGraph {
            g,
            faces: c.faces,
            face_w: c.face_w,
            face_h: c.face_h,
            slot_node,
            node_off,
            node_slots,
            boundary,
            hu,
            hv,
            hd: (hu * hu + hv * hv).sqrt(),
        }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn node_count(&self) -> usize {
        self.node_off.len() - 1
    }

    /// Longest grid edge, the scale of discretization error.
    pub fn mesh_size(&self) -> f64 {
        self.hd
    }

    /// Additive error allowance for distances between arbitrary points.
    pub fn abs_tol(&self) -> f64 {
        2.0 * self.hd
    }

    pub fn is_boundary(&self, node: u32) -> bool {
        self.boundary[node as usize]
    }

    pub fn boundary_nodes(&self) -> Vec<u32> {
        (0..self.node_count() as u32).filter(|&n| self.boundary[n as usize]).collect()
    }

    fn slot(&self, face: usize, i: usize, j: usize) -> usize {
        let side = self.g + 1;
        face * side * side + j * side + i
    }

    pub fn node_at(&self, face: usize, i: usize, j: usize) -> u32 {
        self.slot_node[self.slot(face, i, j)]
    }

    pub fn corner_node(&self, face: usize, corner: u8) -> usize {
        let g = self.g;
        let (i, j) = match corner {
            0 => (0, 0),
            1 => (g, 0),
            2 => (g, g),
            _ => (0, g),
        };
        self.node_at(face, i, j) as usize
    }

    /// Face-local slots `(face, i, j)` of a node, lowest face first.
    pub fn node_slots(&self, node: u32) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let side = self.g + 1;
        let per = side * side;
        self.node_slots[self.node_off[node as usize] as usize..self.node_off[node as usize + 1] as usize]
            .iter()
            .map(move |&s| {
                let s = s as usize;
                (s / per, (s % per) % side, (s % per) / side)
            })
    }

    /// Canonical chart point of a node (lowest face id).
    pub fn node_point(&self, node: u32) -> ComplexPoint {
        let (f, i, j) = self.node_slots(node).next().expect("node has a slot");
        ComplexPoint::new(f, i as f64 / self.g as f64, j as f64 / self.g as f64)
    }

    /// Attaches a point to the corners of its grid cell.
    pub fn attach(&self, p: ComplexPoint) -> Result<GraphPoint> {
        if p.face >= self.faces || !(0.0..=1.0).contains(&p.u) || !(0.0..=1.0).contains(&p.v) {
            return Err(Error::InvalidParameter(format!("point {p:?} is not in the complex")));
        }
        let g = self.g as f64;
        let (x, y) = (p.u * g, p.v * g);
        let (rx, ry) = (x.round(), y.round());
        if (x - rx).abs() < 1e-9 && (y - ry).abs() < 1e-9 {
            let n = self.node_at(p.face, rx as usize, ry as usize);
            return Ok(GraphPoint {
                point: p,
                anchors: vec![(n, 0.0)],
            });
        }
        let i0 = (x.floor() as usize).min(self.g - 1);
        let j0 = (y.floor() as usize).min(self.g - 1);
        let mut anchors = Vec::with_capacity(4);
        for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let (i, j) = (i0 + di, j0 + dj);
            let dx = (x - i as f64) * self.hu;
            let dy = (y - j as f64) * self.hv;
            anchors.push((self.node_at(p.face, i, j), (dx * dx + dy * dy).sqrt()));
        }
        Ok(GraphPoint { point: p, anchors })
    }

    pub fn attach_node(&self, node: u32) -> GraphPoint {
        GraphPoint {
            point: self.node_point(node),
            anchors: vec![(node, 0.0)],
        }
    }

    fn relax_from(&self, node: u32, d: f64, dist: &mut [f64], heap: &mut BinaryHeap<Entry>, touched: &mut Vec<u32>) {
        let g = self.g as i32;
        for (f, i, j) in self.node_slots(node) {
            for (di, dj) in DIRS {
                let (ni, nj) = (i as i32 + di, j as i32 + dj);
                if ni < 0 || nj < 0 || ni > g || nj > g {
                    continue;
                }
                let w = if di == 0 {
                    self.hv
                } else if dj == 0 {
                    self.hu
                } else {
                    self.hd
                };
                let nb = self.node_at(f, ni as usize, nj as usize);
                let nd = d + w;
                let slot = &mut dist[nb as usize];
                if nd < *slot {
                    if slot.is_infinite() {
                        touched.push(nb);
                    }
                    *slot = nd;
                    heap.push(Entry(nd, nb));
                }
            }
        }
    }

    /// Dijkstra from weighted sources. Stops once every node in `targets`
    /// is settled (when given) or when the frontier exceeds `radius`.
    pub fn dijkstra(&self, sources: &[(u32, f64)], targets: Option<&[u32]>, radius: f64) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count()];
        let mut touched = Vec::new();
        self.dijkstra_into(sources, targets, radius, &mut dist, &mut touched);
        dist
    }

    fn dijkstra_into(
        &self,
        sources: &[(u32, f64)],
        targets: Option<&[u32]>,
        radius: f64,
        dist: &mut [f64],
        touched: &mut Vec<u32>,
    ) {
        let mut heap = BinaryHeap::new();
        for &(n, d) in sources {
            if d < dist[n as usize] {
                if dist[n as usize].is_infinite() {
                    touched.push(n);
                }
                dist[n as usize] = d;
                heap.push(Entry(d, n));
            }
        }
        let mut pending: Option<std::collections::HashSet<u32>> =
            targets.map(|t| t.iter().copied().collect());
        while let Some(Entry(d, n)) = heap.pop() {
            if d > dist[n as usize] {
                continue;
            }
            if d > radius {
                break;
            }
            if let Some(p) = pending.as_mut() {
                p.remove(&n);
                if p.is_empty() {
                    break;
                }
            }
            self.relax_from(n, d, dist, &mut heap, touched);
        }
    }

    /// Distances from `p` to each of `targets`.
    pub fn distances(&self, p: &GraphPoint, targets: &[GraphPoint]) -> Result<Vec<f64>> {
        let goal: Vec<u32> = targets.iter().flat_map(|t| t.anchors.iter().map(|a| a.0)).collect();
        let dist = self.dijkstra(&p.anchors, Some(&goal), f64::INFINITY);
        targets
            .iter()
            .map(|t| {
                let mut d = t
                    .anchors
                    .iter()
                    .map(|&(n, o)| dist[n as usize] + o)
                    .fold(f64::INFINITY, f64::min);
                if t.point.face == p.point.face {
                    let du = (t.point.u - p.point.u) * self.face_w;
                    let dv = (t.point.v - p.point.v) * self.face_h;
                    d = d.min((du * du + dv * dv).sqrt());
                }
                if d.is_finite() {
                    Ok(d)
                } else {
                    Err(Error::Disconnected)
                }
            })
            .collect()
    }

    pub fn distance(&self, p: ComplexPoint, q: ComplexPoint) -> Result<f64> {
        let a = self.attach(p)?;
        let b = self.attach(q)?;
        Ok(self.distances(&a, &[b])?[0])
    }

    /// Largest graph distance from `p` to any node.
    pub fn eccentricity(&self, p: &GraphPoint) -> Result<f64> {
        let dist = self.dijkstra(&p.anchors, None, f64::INFINITY);
        let e = dist.iter().copied().fold(0.0, f64::max);
        if dist.iter().any(|d| d.is_infinite()) {
            return Err(Error::Disconnected);
        }
        Ok(e)
    }

    /// Distances from the whole boundary to every node.
    pub fn boundary_distances(&self) -> Vec<f64> {
        let src: Vec<(u32, f64)> = self.boundary_nodes().into_iter().map(|n| (n, 0.0)).collect();
        self.dijkstra(&src, None, f64::INFINITY)
    }

    /// Number of centers picked by greedy ball carving of radius `eps` over
    /// nodes in id order: a maximal `eps`-separated set of nodes.
    pub fn greedy_ball_count(&self, eps: f64) -> usize {
        let n = self.node_count();
        let mut covered = vec![false; n];
        let mut dist = vec![f64::INFINITY; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut count = 0;
        for s in 0..n as u32 {
            if covered[s as usize] {
                continue;
            }
            count += 1;
            self.dijkstra_into(&[(s, 0.0)], None, eps, &mut dist, &mut touched);
            for &t in &touched {
                if dist[t as usize] <= eps {
                    covered[t as usize] = true;
                }
                dist[t as usize] = f64::INFINITY;
            }
            touched.clear();
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn flat_face_distances() {
        let p = TemplateParams::new(2, 3).unwrap();
        let c = build_template(p, 0).unwrap();
        let g = MetricGraph::build(&c, 8);
        let d = g.distance(ComplexPoint::new(0, 0.1, 0.2), ComplexPoint::new(0, 0.7, 0.9)).unwrap();
        let e = (0.6f64.powi(2) + 0.7f64.powi(2)).sqrt();
        assert!((d - e).abs() < 1e-12);
        let corner = g.distance(ComplexPoint::new(0, 0.0, 0.0), ComplexPoint::new(0, 1.0, 1.0)).unwrap();
        assert!((corner - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn strip_of_two_faces() {
        // Two unit faces side by side inside P^1: opposite corners of a 2x1 strip.
        let p = TemplateParams::new(2, 3).unwrap();
        let c = build_template(p, 1).unwrap();
        let g = MetricGraph::build(&c, 8);
        let a = ComplexPoint::new(p.q_letter(0, 0).unwrap(), 0.0, 0.0);
        let b = ComplexPoint::new(p.q_letter(1, 0).unwrap(), 1.0, 1.0);
        let d = g.distance(a, b).unwrap();
        let exact = 5f64.sqrt() / 6.0;
        assert!(d >= exact - 1e-12);
        assert!(d <= exact * (1.0 + GRID_STRETCH) + 1e-12);
    }

    #[test]
    fn band_boundary_is_geodesic() {
        let band = build_band(3, 1.0, 1.0).unwrap();
        let g = MetricGraph::build(&band, 8);
        // Boundary points half way around the boundary circle of length 3.
        let d = g.distance(ComplexPoint::new(0, 0.0, 1.0), ComplexPoint::new(2, 0.5, 1.0)).unwrap();
        assert!((d - 1.5).abs() < 1e-9, "{d}");
        let bd = g.boundary_distances();
        for n in 0..g.node_count() as u32 {
            let pt = g.node_point(n);
            if pt.v == 0.0 {
                assert!(bd[n as usize] >= 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn ball_count_of_square() {
        let p = TemplateParams::new(2, 3).unwrap();
        let c = build_template(p, 0).unwrap();
        let g = MetricGraph::build(&c, 4);
        assert_eq!(g.greedy_ball_count(10.0), 1);
        assert_eq!(g.greedy_ball_count(0.1), 25);
    }
}
