//! Empirical dimension functionals on finite samples.
//!
//! Capacity profiles are lower bounds: each cell records the best
//! `L(U)/τ` among the coverings the construction suite tried, not the optimum.

use serde::{Deserialize, Serialize};

use crate::coverings::{doubling_colored_cover, le, maximal_separated_net};
use crate::error::{Error, Result};
use crate::metric::{Covering, FiniteMetricSpace, PointId};

/// Stand-in for an infinite `best_delta` (a member equal to the whole space).
pub const DELTA_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub tau: f64,
    pub colors: usize,
    pub best_delta: f64,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    /// Sorted by `tau` descending, then by `colors` ascending.
    pub rows: Vec<ProfileRow>,
}

impl CapacityProfile {
    pub fn get(&self, tau: f64, colors: usize) -> Option<&ProfileRow> {
        self.rows
            .iter()
            .find(|r| r.colors == colors && (r.tau - tau).abs() <= 1e-12 * tau.abs())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,colors,best_delta,method\n");
        for r in &self.rows {
            s.push_str(&format!("{:?},{},{:?},{}\n", r.tau, r.colors, r.best_delta, r.method));
        }
        s
    }
}

struct Candidate {
    colors: usize,
    delta: f64,
    method: &'static str,
}

/// Minimum spanning tree edges of the complete distance graph, ascending.
fn mst_edges(x: &FiniteMetricSpace) -> Vec<(f64, PointId, PointId)> {
    let n = x.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = x.dist(cur, j);
            if d < best[j] {
                best[j] = d;
                from[j] = cur;
            }
            if best[j] < next_d || next == usize::MAX {
                next_d = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((next_d, from[next], next));
        cur = next;
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    edges
}

/// Best one-color `L/τ` via single-linkage components. Optimal among all
/// partitions: any partition with gap `g` refines into linkage components
/// below `g`.
fn linkage_delta(x: &FiniteMetricSpace, edges: &[(f64, PointId, PointId)], tau: f64) -> Option<f64> {
    let n = x.len();
    let mut comp: Vec<Vec<PointId>> = (0..n).map(|i| vec![i]).collect();
    let mut owner: Vec<usize> = (0..n).collect();
    let mut diam = vec![0.0f64; n];
    for &(w, a, b) in edges {
        let (ca, cb) = (owner[a], owner[b]);
        let mut d = diam[ca].max(diam[cb]);
        for &p in &comp[ca] {
            for &q in &comp[cb] {
                d = d.max(x.dist(p, q));
            }
        }
        if !le(d, tau) {
            return if diam.iter().all(|&m| le(m, tau)) {
                Some(w / tau)
            } else {
                None
            };
        }
        let (keep, gone) = if comp[ca].len() >= comp[cb].len() { (ca, cb) } else { (cb, ca) };
        let moved = std::mem::take(&mut comp[gone]);
        for &p in &moved {
            owner[p] = keep;
        }
        comp[keep].extend(moved);
        diam[keep] = d;
        diam[gone] = 0.0;
    }
    Some(f64::INFINITY)
}

/// Mesh and Lebesgue number of a cover of sorted 1-D points by index ranges.
fn range_stats(xs: &[f64], ranges: &[(usize, usize)]) -> Option<(f64, f64)> {
    let n = xs.len();
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut mesh = 0.0f64;
    for &(i0, i1) in ranges {
        mesh = mesh.max(xs[i1] - xs[i0]);
        for z in i0..=i1 {
            let left = if i0 > 0 { xs[z] - xs[i0 - 1] } else { f64::INFINITY };
            let right = if i1 + 1 < n { xs[i1 + 1] - xs[z] } else { f64::INFINITY };
            best[z] = best[z].max(left.min(right));
        }
    }
    let l = best.iter().copied().fold(f64::INFINITY, f64::min);
    (l > f64::NEG_INFINITY).then_some((mesh, l))
}

/// Two-colored covers of a 1-D sample by windows of length `τ` at step `s`.
fn interval2_delta(xs: &[f64], tau: f64) -> Option<f64> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let mut best: Option<f64> = None;
    for step_frac in [0.51, 0.55, 0.6, 0.65, 2.0 / 3.0, 0.7, 0.75, 0.8, 0.9] {
        let s = step_frac * tau;
        for off in 0..12 {
            let start = lo - s * (off as f64 / 12.0) - tau;
            let mut ranges = Vec::new();
            let mut c = start;
            while c <= hi {
                let i0 = xs.partition_point(|&v| v < c);
                let i1 = xs.partition_point(|&v| v <= c + tau);
                if i0 < i1 {
                    ranges.push((i0, i1 - 1));
                }
                c += s;
            }
            // Same-colored windows are disjoint when `2s > τ`.
            if let Some((mesh, l)) = range_stats(xs, &ranges) {
                if le(mesh, tau) && l > 0.0 {
                    let d = l / tau;
                    best = Some(best.map_or(d, |b: f64| b.max(d)));
                }
            }
        }
    }
    best
}

fn sorted_line(x: &FiniteMetricSpace) -> Option<Vec<f64>> {
    if x.dim() != Some(1) {
        return None;
    }
    let mut xs: Vec<f64> = (0..x.len()).map(|i| x.coords(i).unwrap()[0]).collect();
    xs.sort_by(f64::total_cmp);
    Some(xs)
}

fn doubling_candidates(x: &FiniteMetricSpace, tau: f64, out: &mut Vec<Candidate>) {
    for f in [4.0, 4.5, 5.0, 6.0, 8.0, 12.0] {
        let c: Covering = doubling_colored_cover(x, tau / f);
        if let Ok(s) = x.covering_stats(&c) {
            if le(s.mesh, tau) {
                out.push(Candidate {
                    colors: c.color_count(),
                    delta: s.lebesgue / tau,
                    method: "doubling",
                });
            }
        }
    }
}

/// Best `L/τ` over the construction suite for each `τ` and color budget `1..=max_colors`.
pub fn capacity_profile(
    x: &FiniteMetricSpace,
    scales: &[f64],
    max_colors: usize,
) -> Result<CapacityProfile> {
    if max_colors == 0 {
        return Err(Error::InvalidParameter("max_colors must be at least 1".into()));
    }
    if scales.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("scales must be positive".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptyOperand);
    }
    let mut taus = scales.to_vec();
    taus.sort_by(|a, b| b.total_cmp(a));
    taus.dedup();
    let edges = mst_edges(x);
    let line = sorted_line(x);
    let mut rows = Vec::new();
    for &tau in &taus {
        let mut cands = Vec::new();
        if let Some(d) = linkage_delta(x, &edges, tau) {
            cands.push(Candidate {
                colors: 1,
                delta: d,
                method: "linkage",
            });
        }
        if max_colors >= 2 {
            if let Some(xs) = &line {
                if let Some(d) = interval2_delta(xs, tau) {
                    cands.push(Candidate {
                        colors: 2,
                        delta: d,
                        method: "interval2",
                    });
                }
            }
        }
        doubling_candidates(x, tau, &mut cands);
        for c in 1..=max_colors {
            let best = cands
                .iter()
                .filter(|k| k.colors <= c)
                .max_by(|a, b| a.delta.total_cmp(&b.delta));
            let row = match best {
                Some(k) => ProfileRow {
                    tau,
                    colors: c,
                    best_delta: k.delta.min(DELTA_CAP),
                    method: k.method.to_string(),
                },
                None => ProfileRow {
                    tau,
                    colors: c,
                    best_delta: 0.0,
                    method: "none".into(),
                },
            };
            rows.push(row);
        }
    }
    Ok(CapacityProfile { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountRow {
    pub epsilon: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxCountReport {
    /// Sorted by `epsilon` descending.
    pub rows: Vec<BoxCountRow>,
    pub fitted_slope: f64,
    /// Root-mean-square residual of the fit in `log N`.
    pub residual: f64,
}

impl BoxCountReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,count\n");
        for r in &self.rows {
            s.push_str(&format!("{:?},{}\n", r.epsilon, r.count));
        }
        s
    }
}

fn check_scales(scales: &[f64]) -> Result<Vec<f64>> {
    let mut eps = scales.to_vec();
    if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("scales must be positive".into()));
    }
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 2 || eps[eps.len() - 1] / eps[0] < 10.0 {
        return Err(Error::InvalidParameter(
            "need at least two scales spanning an order of magnitude".into(),
        ));
    }
    Ok(eps)
}

/// Builds the report from raw counts at ascending scales.
pub fn box_count_from_counts(scales: &[f64], raw: &dyn Fn(f64) -> usize) -> Result<BoxCountReport> {
    let eps = check_scales(scales)?;
    let mut counts: Vec<usize> = Vec::with_capacity(eps.len());
    for &e in &eps {
        let c = raw(e);
        let c = counts.last().map_or(c, |&prev: &usize| c.min(prev));
        counts.push(c);
    }
    let mut pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(&counts)
        .map(|(&e, &c)| ((1.0 / e).ln(), (c as f64).ln()))
        .collect();
    if pts.len() >= 6 {
        pts = pts[1..pts.len() - 1].to_vec();
    }
    let (slope, residual) = least_squares(&pts);
    let rows = eps
        .iter()
        .zip(&counts)
        .rev()
        .map(|(&epsilon, &count)| BoxCountRow { epsilon, count })
        .collect();
    Ok(BoxCountReport {
        rows,
        fitted_slope: slope.max(0.0),
        residual,
    })
}

/// Greedy-net ball counts `N(ε)` and the fitted slope of `log N` against `log 1/ε`.
pub fn box_counting(x: &FiniteMetricSpace, scales: &[f64]) -> Result<BoxCountReport> {
    if x.is_empty() {
        return Err(Error::EmptyOperand);
    }
    box_count_from_counts(scales, &|e| maximal_separated_net(x, e, None).len())
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

/// Max over centers of the greedy count of `r`-balls covering the `2r`-ball.
pub fn doubling_constant(x: &FiniteMetricSpace, r: f64) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    let mut worst = 0;
    for c in 0..x.len() {
        let ball: Vec<PointId> = (0..x.len()).filter(|&p| x.dist(c, p) <= 2.0 * r).collect();
        worst = worst.max(maximal_separated_net(x, r, Some(&ball)).len());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiHomothetyReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub lambda_measured: f64,
    /// Index of the pair attaining the maximum.
    pub worst_pair: Option<usize>,
}

/// Least `λ ≥ 1` with `R d/λ ≤ d' ≤ λ R d` over sampled `(d, d')` pairs.
/// Pairs with `d = d' = 0` are ignored.
pub fn quasi_homothety_coefficient(pairs: &[(f64, f64)], r: f64) -> Result<QuasiHomothetyReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("coefficient {r} must be positive")));
    }
    let mut lambda = 1.0f64;
    let mut worst = None;
    for (i, &(d, dp)) in pairs.iter().enumerate() {
        if d == 0.0 {
            if dp > 0.0 {
                return Err(Error::NotInjective(i, i));
            }
            continue;
        }
        let v = if dp == 0.0 {
            f64::INFINITY
        } else {
            (dp / (r * d)).max(r * d / dp)
        };
        if v > lambda {
            lambda = v;
            worst = Some(i);
        }
    }
    Ok(QuasiHomothetyReport {
        r,
        lambda_measured: lambda,
        worst_pair: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{cantor_ternary, unit_grid};

    #[test]
    fn cantor_cylinder_delta() {
        let c = cantor_ternary(5).unwrap();
        for k in 1..=5 {
            let tau = 3f64.powi(-k);
            let p = capacity_profile(&c.space, &[tau], 1).unwrap();
            assert!(p.rows[0].best_delta >= 1.0 - 1e-9, "k = {k}: {:?}", p.rows[0]);
        }
    }

    #[test]
    fn one_point_is_capped() {
        let x = FiniteMetricSpace::from_line(vec![0.5]).unwrap();
        let p = capacity_profile(&x, &[0.1], 2).unwrap();
        assert_eq!(p.rows[0].best_delta, DELTA_CAP);
    }

    #[test]
    fn grid_profile_one_color_is_poor() {
        let x = unit_grid(100);
        let p = capacity_profile(&x, &[0.2], 2).unwrap();
        let one = p.get(0.2, 1).unwrap().best_delta;
        let two = p.get(0.2, 2).unwrap().best_delta;
        assert!(one <= 0.05 + 1e-9);
        assert!(two > one);
    }

    #[test]
    fn box_counting_line() {
        let x = unit_grid(999);
        let scales: Vec<f64> = (1..=8).map(|j| 0.5f64.powi(j)).collect();
        let r = box_counting(&x, &scales).unwrap();
        assert!((r.fitted_slope - 1.0).abs() < 0.1, "{}", r.fitted_slope);
        assert!(box_counting(&x, &[0.1, 0.05]).is_err());
    }

    #[test]
    fn qh_examples() {
        let pairs = [(1.0, 3.0), (2.0, 6.0)];
        assert_eq!(quasi_homothety_coefficient(&pairs, 3.0).unwrap().lambda_measured, 1.0);
        assert_eq!(quasi_homothety_coefficient(&pairs, 1.5).unwrap().lambda_measured, 2.0);
        assert_eq!(
            quasi_homothety_coefficient(&[(0.0, 1.0)], 1.0),
            Err(Error::NotInjective(0, 0))
        );
    }

    #[test]
    fn doubling_two_points() {
        let x = FiniteMetricSpace::from_line(vec![0.0, 1.0]).unwrap();
        for r in [0.1, 0.5, 1.0, 5.0] {
            let c = doubling_constant(&x, r).unwrap();
            assert!(c == 1 || c == 2);
        }
    }
}
