//! Example spaces: ternary Cantor set, the sets `K_a`, sup-metric powers of
//! `{0} ∪ {1/m}`, grids, circles and rooted trees.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Covering, FiniteMetricSpace, Member, Norm, PointId};

pub const MAX_CANTOR_DEPTH: usize = 12;
pub const DEFAULT_SPACE_CAP: usize = 20_000;

/// Lengths at one level of an interval construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Length of each interval at this level.
    pub l: f64,
    /// Length of the removed middle segment.
    pub s: f64,
}

/// Endpoints of the `2^depth` intervals of an iterated middle-removal
/// construction. Interval `i` owns points `2i` and `2i + 1`.
#[derive(Clone, Debug)]
pub struct IntervalSample {
    pub space: FiniteMetricSpace,
    pub intervals: Vec<(f64, f64)>,
    /// `levels[k - 1]` describes step `k`; the last entry has `s = 0`.
    pub levels: Vec<Level>,
}

impl IntervalSample {
    pub fn depth(&self) -> usize {
        self.intervals.len().trailing_zeros() as usize
    }

    /// Points as coordinates, ascending.
    pub fn points(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    /// One-color covering by the level-`j` cylinders (`2^j` members).
    pub fn cylinder_cover(&self, j: usize) -> Result<Covering> {
        let d = self.depth();
        if j > d {
            return Err(Error::InvalidParameter(format!(
                "cylinder depth {j} exceeds sample depth {d}"
            )));
        }
        let per = 1usize << (d - j);
        let members = (0..(1usize << j))
            .map(|c| Member::colored((2 * c * per..2 * (c + 1) * per).collect(), 0))
            .collect();
        Ok(Covering::new(self.space.all_points(), members))
    }

    /// Points of the level-`j` cylinder `c`.
    pub fn cylinder(&self, j: usize, c: usize) -> Vec<PointId> {
        let per = 1usize << (self.depth() - j);
        (2 * c * per..2 * (c + 1) * per).collect()
    }

    /// Point ids of the image of `member` under the chart that stretches its
    /// level-`j` cylinder onto the whole sample, interval by interval. On the
    /// ternary Cantor sample this is the `3^j`-homothety of the set.
    pub fn cylinder_chart(&self, j: usize, member: &[PointId]) -> Result<Vec<PointId>> {
        let d = self.depth();
        if j > d {
            return Err(Error::InvalidParameter(format!("cylinder depth {j} exceeds sample depth {d}")));
        }
        let Some(&first) = member.first() else {
            return Ok(Vec::new());
        };
        let w = 2usize << (d - j);
        let base = first - first % w;
        if let Some(&p) = member.iter().find(|&&p| p < base || p >= base + w) {
            return Err(Error::Precondition(format!("point {p} is outside the level-{j} cylinder of point {first}")));
        }
        let stride = 1usize << j;
        Ok(member
            .iter()
            .map(|&p| {
                let (interval, end) = ((p - base) / 2, (p - base) % 2);
                (interval * stride + end * (stride - 1)) * 2 + end
            })
            .collect())
    }

    /// Smallest gap between consecutive intervals.
    pub fn min_gap(&self) -> f64 {
        self.intervals
            .windows(2)
            .map(|w| w[1].0 - w[0].1)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Ternary Cantor sample at `depth`, endpoints computed as exact ratios `k / 3^depth`.
pub fn cantor_ternary(depth: usize) -> Result<IntervalSample> {
    if depth == 0 || depth > MAX_CANTOR_DEPTH {
        return Err(Error::CapExceeded {
            what: "ternary Cantor depth".into(),
            size: depth,
            cap: MAX_CANTOR_DEPTH,
        });
    }
    let scale = 3u64.pow(depth as u32) as f64;
    let intervals: Vec<(f64, f64)> = (0..(1u64 << depth))
        .map(|w| {
            let mut num = 0u64;
            for j in 0..depth {
                num = num * 3 + 2 * ((w >> (depth - 1 - j)) & 1);
            }
            (num as f64 / scale, (num + 1) as f64 / scale)
        })
        .collect();
    let mut levels: Vec<Level> = (0..depth)
        .map(|k| {
            let l = 3f64.powi(-(k as i32));
            Level { l, s: l / 3.0 }
        })
        .collect();
    levels.push(Level {
        l: 3f64.powi(-(depth as i32)),
        s: 0.0,
    });
    finish(intervals, levels)
}

fn finish(intervals: Vec<(f64, f64)>, levels: Vec<Level>) -> Result<IntervalSample> {
    let pts: Vec<f64> = intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
    Ok(IntervalSample {
        space: FiniteMetricSpace::from_line(pts)?,
        intervals,
        levels,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KaParams {
    /// `ε_1, ε_2, …`; only the first `depth` are used.
    pub epsilon: Vec<f64>,
    pub depth: usize,
}

impl KaParams {
    /// The sequence `ε_k = 1/(k + 2)`.
    pub fn harmonic(depth: usize) -> Self {
        KaParams {
            epsilon: (1..=depth).map(|k| 1.0 / (k as f64 + 2.0)).collect(),
            depth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.depth > MAX_CANTOR_DEPTH {
            return Err(Error::CapExceeded {
                what: "K_a depth".into(),
                size: self.depth,
                cap: MAX_CANTOR_DEPTH,
            });
        }
        if self.epsilon.len() < self.depth {
            return Err(Error::InvalidParameter(format!(
                "{} epsilon values for depth {}",
                self.epsilon.len(),
                self.depth
            )));
        }
        let eps = &self.epsilon[..self.depth];
        if (eps[0] - 1.0 / 3.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "epsilon_1 must be 1/3, got {}",
                eps[0]
            )));
        }
        if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::InvalidParameter("epsilon values must lie in (0,1)".into()));
        }
        if eps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "epsilon sequence must be nonincreasing".into(),
            ));
        }
        Ok(())
    }
}

/// `K_a` sample: at step `k` each interval of length `l_k` loses its middle
/// segment of length `s_k = ε_k l_k`, leaving two of length `l_{k+1}`.
pub fn cantor_ka(params: &KaParams) -> Result<IntervalSample> {
    params.validate()?;
    let mut levels = Vec::with_capacity(params.depth + 1);
    let mut intervals = vec![(0.0f64, 1.0f64)];
    let mut l = 1.0f64;
    for &eps in &params.epsilon[..params.depth] {
        let s = eps * l;
        let next = (l - s) / 2.0;
        levels.push(Level { l, s });
        intervals = intervals
            .iter()
            .flat_map(|&(a, b)| [(a, a + next), (b - next, b)])
            .collect();
        l = next;
    }
    levels.push(Level { l, s: 0.0 });
    finish(intervals, levels)
}

/// Sorted sample `{0} ∪ {1/m : 1 ≤ m ≤ M}`.
pub fn harmonic_points(big_m: usize) -> Vec<f64> {
    let mut v: Vec<f64> = vec![0.0];
    v.extend((1..=big_m).rev().map(|m| 1.0 / m as f64));
    v
}

/// `n`-fold sup-metric product of `{0} ∪ {1/m : m ≤ M}`.
pub fn zn_space(n: usize, big_m: usize, cap: usize) -> Result<FiniteMetricSpace> {
    if n == 0 || big_m < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 1 and M >= 2, got n = {n}, M = {big_m}")));
    }
    let base = harmonic_points(big_m);
    let size = (base.len() as f64).powi(n as i32);
    if size > cap as f64 {
        return Err(Error::CapExceeded {
            what: "Z^n sample".into(),
            size: size.min(usize::MAX as f64) as usize,
            cap,
        });
    }
    let size = size as usize;
    let mut data = Vec::with_capacity(size * n);
    for idx in 0..size {
        let mut rest = idx;
        let mut row = vec![0.0; n];
        for c in (0..n).rev() {
            row[c] = base[rest % base.len()];
            rest /= base.len();
        }
        data.extend(row);
    }
    FiniteMetricSpace::from_coords(n, data, Norm::Sup)
}

/// `{i / k : 0 ≤ i ≤ k}`.
pub fn unit_grid(k: usize) -> FiniteMetricSpace {
    FiniteMetricSpace::from_line((0..=k).map(|i| i as f64 / k as f64).collect())
        .expect("grid coordinates are finite")
}

/// `(k+1)²` points of `[0,1]²` with the Euclidean metric.
pub fn unit_grid_2d(k: usize) -> FiniteMetricSpace {
    let mut data = Vec::with_capacity(2 * (k + 1) * (k + 1));
    for y in 0..=k {
        for x in 0..=k {
            data.push(x as f64 / k as f64);
            data.push(y as f64 / k as f64);
        }
    }
    FiniteMetricSpace::from_coords(2, data, Norm::Euclidean).expect("finite")
}

/// `n` equally spaced points on the unit circle, chordal metric.
pub fn circle_chordal(n: usize) -> FiniteMetricSpace {
    let data = (0..n)
        .flat_map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    FiniteMetricSpace::from_coords(2, data, Norm::Euclidean).expect("finite")
}

/// Complete rooted `b`-ary tree of the given depth with unit edges. Nodes are
/// numbered breadth first: the children of `v` are `b v + 1, …, b v + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    pub branching: usize,
    pub depth: usize,
}

impl RootedTree {
    pub fn new(branching: usize, depth: usize) -> Result<Self> {
        if branching < 2 {
            return Err(Error::InvalidParameter("branching must be at least 2".into()));
        }
        let t = RootedTree { branching, depth };
        if t.node_count() > DEFAULT_SPACE_CAP {
            return Err(Error::CapExceeded {
                what: "tree".into(),
                size: t.node_count(),
                cap: DEFAULT_SPACE_CAP,
            });
        }
        Ok(t)
    }

    pub fn node_count(&self) -> usize {
        let b = self.branching;
        (0..=self.depth).map(|d| b.pow(d as u32)).sum()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v > 0).then(|| (v - 1) / self.branching)
    }

    pub fn node_depth(&self, mut v: usize) -> usize {
        let mut d = 0;
        while v > 0 {
            v = (v - 1) / self.branching;
            d += 1;
        }
        d
    }

    /// Depth of the deepest common ancestor.
    pub fn lca_depth(&self, mut u: usize, mut v: usize) -> usize {
        let (mut du, mut dv) = (self.node_depth(u), self.node_depth(v));
        while du > dv {
            u = (u - 1) / self.branching;
            du -= 1;
        }
        while dv > du {
            v = (v - 1) / self.branching;
            dv -= 1;
        }
        while u != v {
            u = (u - 1) / self.branching;
            v = (v - 1) / self.branching;
            du -= 1;
        }
        du
    }

    pub fn dist(&self, u: usize, v: usize) -> usize {
        self.node_depth(u) + self.node_depth(v) - 2 * self.lca_depth(u, v)
    }

    /// First node at `depth`.
    pub fn level_start(&self, depth: usize) -> usize {
        (0..depth).map(|d| self.branching.pow(d as u32)).sum()
    }

    pub fn space(&self) -> FiniteMetricSpace {
        let t = *self;
        FiniteMetricSpace::from_oracle(
            self.node_count(),
            Arc::new(move |u, v| t.dist(u, v) as f64),
            0.0,
        )
    }
}
