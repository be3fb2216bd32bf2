//! Hyperbolic cones over bounded spaces, annulus contractions, the Gromov
//! product comparison under a change of base point, and visual metrics on
//! finite-depth tree boundaries.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{quasi_homothety_coefficient, QuasiHomothetyReport};
use crate::metric::{Covering, CoveringStats, FiniteMetricSpace, Member, PointId};

/// Side of the comparison triangle in `H²` with legs `t, t'` and angle `θ`.
///
/// Uses `sinh²(d/2) = sinh²((t−t')/2) + sinh t sinh t' sin²(θ/2)`, the law
/// of cosines rewritten to avoid cancellation.
pub fn comparison_side(t: f64, tp: f64, theta: f64) -> Result<f64> {
    if !(t >= 0.0) || !(tp >= 0.0) {
        return Err(Error::InvalidParameter(format!("cone radii must be nonnegative (got {t}, {tp})")));
    }
    let theta = theta.clamp(0.0, std::f64::consts::PI);
    let a = ((t - tp) / 2.0).sinh();
    let h = (theta / 2.0).sin();
    let q = a * a + t.sinh() * tp.sinh() * h * h;
    Ok(2.0 * q.sqrt().asinh())
}

/// The hyperbolic cone `Co(Z)` over a finite base.
#[derive(Clone, Debug)]
pub struct ConeSpace {
    base: FiniteMetricSpace,
    mu: f64,
}

impl ConeSpace {
    pub fn new(base: FiniteMetricSpace) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::EmptyOperand);
        }
        let diam = base.diameter();
        let mu = if diam > 0.0 { std::f64::consts::PI / diam } else { 0.0 };
        Ok(ConeSpace { base, mu })
    }

    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    /// `π / diam Z`; zero on a one-point base.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_degenerate(&self) -> bool {
        self.mu == 0.0
    }

    /// Distance between `(z, t)` and `(z', t')`.
    pub fn distance(&self, x: (PointId, f64), y: (PointId, f64)) -> Result<f64> {
        if self.is_degenerate() {
            if !(x.1 >= 0.0) || !(y.1 >= 0.0) {
                return Err(Error::InvalidParameter("cone radii must be nonnegative".into()));
            }
            return Ok((x.1 - y.1).abs());
        }
        comparison_side(x.1, y.1, self.mu * self.base.dist(x.0, y.0))
    }

    /// Grid sample `{o} ∪ {(z, t) : t ∈ t_grid, t > 0}`. Point 0 is the vertex.
    pub fn sample(&self, t_grid: &[f64]) -> Result<ConeSample> {
        let mut ts: Vec<f64> = t_grid.iter().copied().filter(|&t| t > 0.0).collect();
        if ts.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("cone radii must be finite".into()));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut points = vec![(0usize, 0.0)];
        for &t in &ts {
            for z in 0..self.base.len() {
                points.push((z, t));
            }
        }
        let pts = Arc::new(points.clone());
        let cone = self.clone();
        let oracle = Arc::new(move |i: PointId, j: PointId| cone.distance(pts[i], pts[j]).unwrap_or(f64::NAN));
        let space = FiniteMetricSpace::from_oracle(points.len(), oracle, 1e-9);
        Ok(ConeSample {
            points,
            t_grid: ts,
            base_len: self.base.len(),
            space,
        })
    }
}

/// Finite cone sample with its `(z, t)` coordinates.
#[derive(Clone, Debug)]
pub struct ConeSample {
    pub points: Vec<(PointId, f64)>,
    pub t_grid: Vec<f64>,
    base_len: usize,
    pub space: FiniteMetricSpace,
}

impl ConeSample {
    /// Id of `(z, t)` when `t` lies on the grid (within `1e-9`).
    pub fn id_of(&self, z: PointId, t: f64) -> Option<PointId> {
        if t.abs() < 1e-9 {
            return Some(0);
        }
        let pos = self.t_grid.partition_point(|&s| s < t - 1e-9);
        let s = *self.t_grid.get(pos)?;
        ((s - t).abs() < 1e-9 && z < self.base_len).then(|| 1 + pos * self.base_len + z)
    }

    /// Ids with `lo ≤ t ≤ hi`; the vertex is included when `lo ≤ 0`.
    pub fn shell(&self, lo: f64, hi: f64) -> Vec<PointId> {
        (0..self.points.len())
            .filter(|&i| {
                let t = self.points[i].1;
                t >= lo - 1e-12 && t <= hi + 1e-12
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusReport {
    pub k: usize,
    /// The restricted covering, with ids of the annulus subspace.
    pub covering: Covering,
    /// Cone-sample ids of the annulus points, in subspace order.
    pub annulus: Vec<PointId>,
    pub stats: CoveringStats,
}

/// Applies `F_k(z, t) = (z, t/k)` to each member and restricts to the
/// annulus `1 ≤ |xo| ≤ 2`.
pub fn annulus_contract(sample: &ConeSample, u: &Covering, k: usize) -> Result<AnnulusReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("contraction factor k must be at least 1".into()));
    }
    let annulus = sample.shell(1.0, 2.0);
    if annulus.is_empty() {
        return Err(Error::Precondition("cone sample misses the annulus 1 ≤ t ≤ 2".into()));
    }
    let kf = k as f64;
    let mut members = Vec::new();
    for m in &u.members {
        let ids: Vec<PointId> = annulus
            .iter()
            .enumerate()
            .filter(|&(_, &a)| {
                let (z, t) = sample.points[a];
                sample.id_of(z, kf * t).is_some_and(|src| m.contains(src))
            })
            .map(|(i, _)| i)
            .collect();
        if !ids.is_empty() {
            members.push(Member { color: m.color, ids });
        }
    }
    let covering = Covering::new((0..annulus.len()).collect(), members);
    let sub = sample.space.subspace(&annulus);
    let stats = sub.covering_stats(&covering)?;
    Ok(AnnulusReport {
        k,
        covering,
        annulus,
        stats,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCompareReport {
    pub hypothesis_met: bool,
    /// `(x'|x'')_g + |og| − (x'|x'')_o`, nonnegative when the left inequality holds.
    pub lower_slack: f64,
    /// `(x'|x'')_o + 2σ − (x'|x'')_g − |og|`, nonnegative when the right one holds.
    pub upper_slack: f64,
    pub passed: bool,
}

/// Checks `(x'|x'')_o ≤ (x'|x'')_g + |og| ≤ (x'|x'')_o + 2σ` under the
/// hypothesis `(x'|g)_o, (x''|g)_o ≥ |og| − σ`.
pub fn check_product_compare(
    x: &FiniteMetricSpace,
    o: PointId,
    g: PointId,
    x1: PointId,
    x2: PointId,
    sigma: f64,
) -> ProductCompareReport {
    let og = x.dist(o, g);
    let slack = 1e-9 * (1.0 + og);
    let hypothesis_met =
        x.gromov_product(o, x1, g) >= og - sigma - slack && x.gromov_product(o, x2, g) >= og - sigma - slack;
    let po = x.gromov_product(o, x1, x2);
    let pg = x.gromov_product(g, x1, x2);
    let lower_slack = pg + og - po;
    let upper_slack = po + 2.0 * sigma - pg - og;
    ProductCompareReport {
        hypothesis_met,
        lower_slack,
        upper_slack,
        passed: !hypothesis_met || (lower_slack >= -slack && upper_slack >= -slack),
    }
}

/// Boundary of the rooted `b`-ary tree of depth `D`, with the visual metric
/// `d(ξ, ξ') = c·a^{−(ξ|ξ')_o}`. Leaves are numbered so that the base-`b`
/// digits of a leaf, most significant first, spell its path from the root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisualBoundaryModel {
    pub branching: usize,
    pub depth: usize,
    pub a: f64,
    pub c: f64,
    pub rho: f64,
}

impl VisualBoundaryModel {
    pub fn new(branching: usize, depth: usize, a: f64, c: f64, rho: f64) -> Result<Self> {
        if branching < 2 || depth == 0 {
            return Err(Error::InvalidParameter("tree needs branching >= 2 and depth >= 1".into()));
        }
        if !(a > 1.0) || !(c >= 1.0) || !(rho >= 0.0) {
            return Err(Error::InvalidParameter(format!("need a > 1, c >= 1, rho >= 0 (got {a}, {c}, {rho})")));
        }
        let leaves = (branching as f64).powi(depth as i32);
        if leaves > crate::spaces::DEFAULT_SPACE_CAP as f64 {
            return Err(Error::CapExceeded {
                what: "tree boundary".into(),
                size: leaves as usize,
                cap: crate::spaces::DEFAULT_SPACE_CAP,
            });
        }
        Ok(VisualBoundaryModel {
            branching,
            depth,
            a,
            c,
            rho,
        })
    }

    pub fn leaf_count(&self) -> usize {
        self.branching.pow(self.depth as u32)
    }

    /// `(ξ|ξ')_o`: depth of the deepest common ancestor.
    pub fn gromov_product(&self, x: usize, y: usize) -> usize {
        if x == y {
            return self.depth;
        }
        let (mut x, mut y, mut k) = (x, y, self.depth);
        while x != y {
            x /= self.branching;
            y /= self.branching;
            k -= 1;
        }
        k
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        if x == y {
            0.0
        } else {
            self.c * self.a.powi(-(self.gromov_product(x, y) as i32))
        }
    }

    pub fn space(&self) -> FiniteMetricSpace {
        let n = self.leaf_count();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.distance(i, j);
            }
        }
        FiniteMetricSpace::from_matrix(n, m).expect("visual metric is a metric")
    }

    /// Leaves below the `idx`-th node at depth `j`.
    pub fn cylinder(&self, j: usize, idx: usize) -> Vec<usize> {
        let width = self.branching.pow((self.depth - j.min(self.depth)) as u32);
        (idx * width..(idx + 1) * width).collect()
    }

    /// `λ = c² a^{ρ + 4δ}` with `δ = 0`.
    pub fn lambda(&self) -> f64 {
        self.c * self.c * self.a.powf(self.rho)
    }

    /// `Λ₀ = min{1, diam ∂ / λ}`.
    pub fn lambda0(&self) -> f64 {
        (self.c / self.lambda()).min(1.0)
    }

    /// Shift removing the first `j` letters and padding with zeros.
    pub fn shift(&self, j: usize, x: usize) -> usize {
        let j = j.min(self.depth);
        let keep = self.branching.pow((self.depth - j) as u32);
        (x % keep) * self.branching.pow(j as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarityReport {
    pub report: QuasiHomothetyReport,
    pub shift: usize,
    pub lambda_bound: f64,
    pub holds: bool,
}

/// Measures the shift toward `A` as a quasi-homothety with coefficient `R`.
pub fn tree_boundary_selfsimilarity(
    model: &VisualBoundaryModel,
    a: &[usize],
    r: f64,
) -> Result<SelfSimilarityReport> {
    if a.is_empty() {
        return Err(Error::EmptyOperand);
    }
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("coefficient R = {r} must be at least 1")));
    }
    if let Some(&bad) = a.iter().find(|&&x| x >= model.leaf_count()) {
        return Err(Error::InvalidParameter(format!("leaf {bad} is not in the boundary")));
    }
    let diam = a
        .iter()
        .flat_map(|&x| a.iter().map(move |&y| (x, y)))
        .map(|(x, y)| model.distance(x, y))
        .fold(0.0, f64::max);
    let l0 = model.lambda0();
    if diam > l0 / r * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "diam A = {diam} exceeds Lambda0/R = {}",
            l0 / r
        )));
    }
    let shift = ((r.ln() / model.a.ln()) + 1e-9).floor().max(0.0) as usize;
    let mut pairs = Vec::new();
    for (i, &x) in a.iter().enumerate() {
        for &y in &a[i + 1..] {
            pairs.push((model.distance(x, y), model.distance(model.shift(shift, x), model.shift(shift, y))));
        }
    }
    let report = quasi_homothety_coefficient(&pairs, r)?;
    let lambda_bound = model.lambda();
    Ok(SelfSimilarityReport {
        holds: report.lambda_measured <= lambda_bound * (1.0 + 1e-12),
        report,
        shift,
        lambda_bound,
    })
}
