//! Finite metric spaces, set-level distances, covering statistics and the
//! Gromov-product vocabulary.
//!
//! Every constructive object in the crate is ultimately evaluated on a
//! [`FiniteMetricSpace`]: a finite set of opaque point ids together with a
//! distance function. Three realizations are supported: an explicit distance
//! matrix, a coordinate sample (Euclidean or sup norm), and an arbitrary
//! oracle closure (used e.g. for graph-approximated intrinsic metrics, which
//! carry a nonzero `tol_metric`).

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type PointId = usize;

/// Oracle metrics with at most this many points are materialized into a
/// distance matrix on construction.
pub const DEFAULT_CACHE_CAP: usize = 5000;

/// Largest space accepted by the exhaustive quadruple scan.
pub const DEFAULT_DELTA_CAP: usize = 160;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    Euclidean,
    Sup,
}

pub type DistanceOracle = Arc<dyn Fn(PointId, PointId) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Realization {
    Matrix(Vec<f64>),
    Coords {
        dim: usize,
        data: Vec<f64>,
        norm: Norm,
    },
    Oracle(DistanceOracle),
}

impl std::fmt::Debug for Realization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Realization::Matrix(_) => f.write_str("Matrix"),
            Realization::Coords { dim, norm, .. } => write!(f, "Coords({dim}, {norm:?})"),
            Realization::Oracle(_) => f.write_str("Oracle"),
        }
    }
}

/// A finite point set `0..n` with a symmetric distance function.
#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    n: usize,
    realization: Realization,
    tol_metric: f64,
}

impl FiniteMetricSpace {
    /// Builds a space from a row-major `n × n` matrix and checks the metric axioms.
    pub fn from_matrix(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "matrix has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        let space = FiniteMetricSpace {
            n,
            realization: Realization::Matrix(data),
            tol_metric: 0.0,
        };
        space.check_axioms(false)?;
        Ok(space)
    }

    /// Coordinate sample; `data` holds `n * dim` values, point-major.
    pub fn from_coords(dim: usize, data: Vec<f64>, norm: Norm) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not split into rows of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        Ok(FiniteMetricSpace {
            n: data.len() / dim,
            realization: Realization::Coords { dim, data, norm },
            tol_metric: 0.0,
        })
    }

    /// One-dimensional coordinate sample.
    pub fn from_line(xs: Vec<f64>) -> Result<Self> {
        Self::from_coords(1, xs, Norm::Euclidean)
    }

    /// An approximate oracle metric. Small spaces are cached as a matrix.
    pub fn from_oracle(n: usize, oracle: DistanceOracle, tol_metric: f64) -> Self {
        Self::from_oracle_with_cap(n, oracle, tol_metric, DEFAULT_CACHE_CAP)
    }

    pub fn from_oracle_with_cap(
        n: usize,
        oracle: DistanceOracle,
        tol_metric: f64,
        cache_cap: usize,
    ) -> Self {
        let realization = if n <= cache_cap {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = oracle(i, j);
                    m[i * n + j] = d;
                    m[j * n + i] = d;
                }
            }
            Realization::Matrix(m)
        } else {
            Realization::Oracle(oracle)
        };
        FiniteMetricSpace {
            n,
            realization,
            tol_metric,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn tol_metric(&self) -> f64 {
        self.tol_metric
    }

    pub fn realization(&self) -> &Realization {
        &self.realization
    }

    /// Coordinates of a point when the space is a coordinate sample.
    pub fn coords(&self, i: PointId) -> Option<&[f64]> {
        match &self.realization {
            Realization::Coords { dim, data, .. } => Some(&data[i * dim..(i + 1) * dim]),
            _ => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.realization {
            Realization::Coords { dim, .. } => Some(*dim),
            _ => None,
        }
    }

    #[inline]
    pub fn dist(&self, i: PointId, j: PointId) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.realization {
            Realization::Matrix(m) => m[i * self.n + j],
            Realization::Coords { dim, data, norm } => {
                let a = &data[i * dim..(i + 1) * dim];
                let b = &data[j * dim..(j + 1) * dim];
                match norm {
                    Norm::Euclidean => a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt(),
                    Norm::Sup => a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max),
                }
            }
            Realization::Oracle(f) => f(i, j),
        }
    }

    /// Verifies symmetry, zero diagonal, positivity, and (optionally) the
    /// triangle inequality up to `tol_metric`.
    pub fn check_axioms(&self, triangle: bool) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                if !(d.is_finite() && d > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "distance between {i} and {j} is {d}; distinct points need a positive distance"
                    )));
                }
                let e = self.dist(j, i);
                if (d - e).abs() > self.tol_metric.max(1e-12) * d.max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric distance between {i} and {j}"
                    )));
                }
            }
        }
        if triangle {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let lhs = self.dist(i, j);
                        let rhs = self.dist(i, k) + self.dist(k, j);
                        if lhs > rhs * (1.0 + self.tol_metric) + 1e-12 {
                            return Err(Error::InvalidParameter(format!(
                                "triangle inequality fails on ({i}, {j}, {k})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn all_points(&self) -> Vec<PointId> {
        (0..self.n).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.diam(&self.all_points())
    }

    /// Diameter of a subset; `0` for empty sets and singletons.
    pub fn diam(&self, set: &[PointId]) -> f64 {
        let mut best = 0.0f64;
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// `inf` of distances from `z` to `set`; `+∞` for an empty set.
    pub fn dist_to_set(&self, z: PointId, set: &[PointId]) -> f64 {
        set.iter()
            .map(|&u| self.dist(z, u))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn set_distance(&self, u: &[PointId], v: &[PointId]) -> Result<f64> {
        if u.is_empty() || v.is_empty() {
            return Err(Error::EmptyOperand);
        }
        let mut best = f64::INFINITY;
        for &a in u {
            for &b in v {
                best = best.min(self.dist(a, b));
            }
        }
        Ok(best)
    }

    /// Complement `X ∖ set`, in ambient order.
    pub fn complement(&self, set: &[PointId]) -> Vec<PointId> {
        let mask = self.mask(set);
        (0..self.n).filter(|&i| !mask[i]).collect()
    }

    pub fn mask(&self, set: &[PointId]) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in set {
            m[i] = true;
        }
        m
    }

    /// Signed neighborhood `B_r(U)`: the open `r`-neighborhood for `r > 0`,
    /// `U` itself for `r = 0`, and `X ∖ B̄_{|r|}(X ∖ U)` for `r < 0`.
    pub fn neighborhood(&self, set: &[PointId], r: f64) -> Vec<PointId> {
        if r == 0.0 {
            return normalized(set);
        }
        if r > 0.0 {
            (0..self.n)
                .filter(|&z| set.iter().any(|&u| self.dist(z, u) < r))
                .collect()
        } else {
            let rest = self.complement(set);
            let s = -r;
            normalized(set)
                .into_iter()
                .filter(|&z| self.dist_to_set(z, &rest) > s)
                .collect()
        }
    }

    /// Mesh, multiplicity and Lebesgue number of a covering of its carrier.
    pub fn covering_stats(&self, cover: &Covering) -> Result<CoveringStats> {
        if cover.members.is_empty() {
            return Err(Error::EmptyOperand);
        }
        let n = self.n;
        let mut count = vec![0usize; n];
        // Best dist(z, X ∖ U) over members U containing z.
        let mut best = vec![f64::NEG_INFINITY; n];
        let mut mesh = 0.0f64;
        let mut full_member = None;
        for (idx, member) in cover.members.iter().enumerate() {
            mesh = mesh.max(self.diam(&member.ids));
            let mask = self.mask(&member.ids);
            let rest: Vec<PointId> = (0..n).filter(|&i| !mask[i]).collect();
            if rest.is_empty() && full_member.is_none() {
                full_member = Some(idx);
            }
            for (z, &inside) in mask.iter().enumerate() {
                if inside {
                    count[z] += 1;
                    let d = self.dist_to_set(z, &rest);
                    if d > best[z] {
                        best[z] = d;
                    }
                }
            }
        }
        let mut lebesgue = f64::INFINITY;
        for &z in &cover.carrier {
            if count[z] == 0 {
                return Err(Error::NotACovering { point: z });
            }
            lebesgue = lebesgue.min(best[z]);
        }
        let full_member_flag = full_member.is_some() && cover.carrier.len() < n;
        Ok(CoveringStats {
            mesh,
            multiplicity: count.into_iter().max().unwrap_or(0),
            lebesgue,
            full_member: if full_member_flag { full_member } else { None },
        })
    }

    /// `(x|y)_o = (|xo| + |yo| − |xy|) / 2`.
    pub fn gromov_product(&self, o: PointId, x: PointId, y: PointId) -> f64 {
        0.5 * (self.dist(x, o) + self.dist(y, o) - self.dist(x, y))
    }

    pub fn delta_hyperbolicity(&self) -> Result<HyperbolicityReport> {
        self.delta_hyperbolicity_with_cap(DEFAULT_DELTA_CAP)
    }

    /// Least `δ ≥ 0` with `(x|y)_o ≥ min{(x|z)_o, (z|y)_o} − δ` for every
    /// ordered quadruple, by exhaustive scan.
    pub fn delta_hyperbolicity_with_cap(&self, cap: usize) -> Result<HyperbolicityReport> {
        let n = self.n;
        if n == 0 {
            return Err(Error::EmptyOperand);
        }
        if n > cap {
            return Err(Error::CapExceeded {
                what: "exhaustive hyperbolicity scan".into(),
                size: n,
                cap,
            });
        }
        let mut delta = 0.0f64;
        let mut witness = [0usize; 4];
        let mut g = vec![0.0f64; n * n];
        for o in 0..n {
            for x in 0..n {
                for y in 0..n {
                    g[x * n + y] = self.gromov_product(o, x, y);
                }
            }
            for x in 0..n {
                for y in 0..n {
                    let gxy = g[x * n + y];
                    for z in 0..n {
                        let v = g[x * n + z].min(g[z * n + y]) - gxy;
                        if v > delta {
                            delta = v;
                            witness = [o, x, y, z];
                        }
                    }
                }
            }
        }
        Ok(HyperbolicityReport {
            delta,
            witness: (witness[0], witness[1], witness[2], witness[3]),
        })
    }

    /// Metric subspace on the given ids (materialized as a matrix).
    pub fn subspace(&self, ids: &[PointId]) -> FiniteMetricSpace {
        let k = ids.len();
        let mut m = vec![0.0; k * k];
        for (a, &i) in ids.iter().enumerate() {
            for (b, &j) in ids.iter().enumerate() {
                m[a * k + b] = self.dist(i, j);
            }
        }
        FiniteMetricSpace {
            n: k,
            realization: Realization::Matrix(m),
            tol_metric: self.tol_metric,
        }
    }

    /// Serializes to the text exchange format. Coordinate samples keep their
    /// coordinates only when Euclidean; everything else is written as a matrix.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        match &self.realization {
            Realization::Coords {
                dim,
                data,
                norm: Norm::Euclidean,
            } => {
                let _ = writeln!(out, "coords {dim}");
                for row in data.chunks(*dim) {
                    let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                    let _ = writeln!(out, "{}", line.join(" "));
                }
            }
            _ => {
                let _ = writeln!(out, "matrix");
                for i in 0..self.n {
                    let line: Vec<String> =
                        (0..self.n).map(|j| format!("{:?}", self.dist(i, j))).collect();
                    let _ = writeln!(out, "{}", line.join(" "));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing point count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line: ln,
            message: format!("expected a point count, found {header:?}"),
        })?;
        let (ln, kind) = lines.next().ok_or(Error::Parse {
            line: ln + 1,
            message: "missing `matrix` or `coords d` line".into(),
        })?;
        let mut words = kind.split_whitespace();
        let (width, is_matrix) = match (words.next(), words.next()) {
            (Some("matrix"), None) => (n, true),
            (Some("coords"), Some(d)) => (
                d.parse::<usize>().map_err(|_| Error::Parse {
                    line: ln,
                    message: format!("bad dimension {d:?}"),
                })?,
                false,
            ),
            _ => {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("expected `matrix` or `coords d`, found {kind:?}"),
                })
            }
        };
        let mut data = Vec::with_capacity(n * width);
        for row in 0..n {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: ln + row + 1,
                message: format!("expected {n} rows, found {row}"),
            })?;
            let vals: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| Error::Parse {
                line: ln,
                message: e.to_string(),
            })?;
            if vals.len() != width {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("expected {width} values, found {}", vals.len()),
                });
            }
            data.extend(vals);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln,
                message: "trailing data".into(),
            });
        }
        if is_matrix {
            Self::from_matrix(n, data)
        } else {
            Self::from_coords(width, data, Norm::Euclidean)
        }
    }
}

fn normalized(set: &[PointId]) -> Vec<PointId> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub color: Option<usize>,
    pub ids: Vec<PointId>,
}

impl Member {
    pub fn new(ids: Vec<PointId>) -> Self {
        Member {
            color: None,
            ids: normalized(&ids),
        }
    }

    pub fn colored(ids: Vec<PointId>, color: usize) -> Self {
        Member {
            color: Some(color),
            ids: normalized(&ids),
        }
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn meets(&self, other: &Member) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// An indexed family of subsets meant to cover `carrier`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covering {
    pub carrier: Vec<PointId>,
    pub members: Vec<Member>,
}

impl Covering {
    pub fn new(carrier: Vec<PointId>, members: Vec<Member>) -> Self {
        Covering {
            carrier: normalized(&carrier),
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of distinct colors; uncolored members count as one class each.
    pub fn color_count(&self) -> usize {
        let mut colors: Vec<usize> = self.members.iter().filter_map(|m| m.color).collect();
        colors.sort_unstable();
        colors.dedup();
        colors.len() + self.members.iter().filter(|m| m.color.is_none()).count()
    }

    /// First carrier point lying in no member.
    pub fn uncovered(&self, n: usize) -> Vec<PointId> {
        let mut hit = vec![false; n];
        for m in &self.members {
            for &i in &m.ids {
                hit[i] = true;
            }
        }
        self.carrier.iter().copied().filter(|&z| !hit[z]).collect()
    }

    /// Pairs of same-colored members that intersect.
    pub fn color_conflicts(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, ma) in self.members.iter().enumerate() {
            for (b, mb) in self.members.iter().enumerate().skip(a + 1) {
                if ma.color.is_some() && ma.color == mb.color && ma.meets(mb) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("covering serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringStats {
    pub mesh: f64,
    pub multiplicity: usize,
    /// `+∞` when a member is the whole space; serialized as `null`.
    #[serde(with = "crate::serde_inf")]
    pub lebesgue: f64,
    /// Set when a member equals `X` while the carrier is a proper subset.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub full_member: Option<usize>,
}

impl CoveringStats {
    /// JSON object `{mesh, multiplicity, lebesgue}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "mesh": self.mesh,
            "multiplicity": self.multiplicity,
            "lebesgue": if self.lebesgue.is_finite() { serde_json::json!(self.lebesgue) } else { serde_json::Value::Null },
        })
        .to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub delta: f64,
    /// `(o, x, y, z)` attaining `delta`.
    pub witness: (PointId, PointId, PointId, PointId),
}
