//! Constructive covering algorithms: separated nets, colored doubling covers,
//! shrinking, the covering merge, colored amalgamation, refinement through
//! self-similarity, and pushforward along an ε-dense homothety.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Covering, CoveringStats, FiniteMetricSpace, Member, PointId};

/// Relative slack for comparisons between lengths that are equal in exact
/// arithmetic (e.g. cylinder diameters against their own gaps).
pub const REL_SLACK: f64 = 1e-9;

#[inline]
pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b + REL_SLACK * b.abs().max(f64::MIN_POSITIVE) || a <= b
}

/// Greedy maximal `r`-separated subset, scanning `order` (ambient order when `None`).
pub fn maximal_separated_net(
    x: &FiniteMetricSpace,
    r: f64,
    order: Option<&[PointId]>,
) -> Vec<PointId> {
    let default: Vec<PointId>;
    let order = match order {
        Some(o) => o,
        None => {
            default = x.all_points();
            &default
        }
    };
    let mut net: Vec<PointId> = Vec::new();
    for &p in order {
        if net.iter().all(|&q| x.dist(p, q) > r) {
            net.push(p);
        }
    }
    net
}

/// Balls `B_{2r}` around a maximal `r`-net, colored first-fit on the graph
/// joining centers closer than `4r`.
pub fn doubling_colored_cover(x: &FiniteMetricSpace, r: f64) -> Covering {
    let net = maximal_separated_net(x, r, None);
    let mut colors: Vec<usize> = Vec::with_capacity(net.len());
    for (i, &c) in net.iter().enumerate() {
        let mut used: Vec<usize> = (0..i)
            .filter(|&j| x.dist(c, net[j]) < 4.0 * r)
            .map(|j| colors[j])
            .collect();
        used.sort_unstable();
        used.dedup();
        let mut color = 0;
        for u in used {
            if u == color {
                color += 1;
            } else if u > color {
                break;
            }
        }
        colors.push(color);
    }
    let members = net
        .iter()
        .zip(&colors)
        .map(|(&c, &col)| Member::colored(x.neighborhood(&[c], 2.0 * r), col))
        .collect();
    Covering::new(x.all_points(), members)
}

/// Replaces every member by `B_{-s}` of itself.
pub fn shrink_cover(x: &FiniteMetricSpace, c: &Covering, s: f64) -> Result<Covering> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("shrink amount {s} is negative")));
    }
    let members: Vec<Member> = c
        .members
        .iter()
        .map(|m| Member {
            color: m.color,
            ids: x.neighborhood(&m.ids, -s),
        })
        .collect();
    let out = Covering::new(c.carrier.clone(), members);
    let uncovered = out.uncovered(x.len());
    if let Some(&witness) = uncovered.first() {
        return Err(Error::ShrinkBrokeCoverage {
            witness,
            amount: s,
            uncovered,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeReport {
    pub result: Covering,
    /// `[v_idx, u_idx]`: member `v_idx` of `V` was absorbed into the shrunken `U`-member `u_idx`.
    pub absorbed: Vec<[usize; 2]>,
}

impl MergeReport {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "carrier": self.result.carrier,
            "members": self.result.members,
            "absorbed": self.absorbed,
        })
        .to_string()
    }
}

/// Merges a covering `U` of `A` with a covering `V` of `B` into a covering
/// of `A ∪ B` with `L ≥ min{L(U)/2, L(V)}` and no larger mesh or multiplicity.
pub fn merge_coverings(x: &FiniteMetricSpace, u: &Covering, v: &Covering) -> Result<MergeReport> {
    let su = x.covering_stats(u)?;
    if su.lebesgue.is_infinite() {
        return Ok(MergeReport {
            result: u.clone(),
            absorbed: Vec::new(),
        });
    }
    let sv = x.covering_stats(v)?;
    merge_with_stats(x, u, &su, v, &sv)
}

fn merge_with_stats(
    x: &FiniteMetricSpace,
    u: &Covering,
    su: &CoveringStats,
    v: &Covering,
    sv: &CoveringStats,
) -> Result<MergeReport> {
    if su.lebesgue.is_infinite() {
        return Ok(MergeReport {
            result: u.clone(),
            absorbed: Vec::new(),
        });
    }
    if !le(sv.mesh, su.lebesgue / 2.0) {
        return Err(Error::MergeHypothesis {
            mesh_v: sv.mesh,
            lebesgue_u: su.lebesgue,
        });
    }
    let r = su.lebesgue / 2.0;
    let shrunk: Vec<Member> = u
        .members
        .iter()
        .map(|m| Member::new(x.neighborhood(&m.ids, -r)))
        .collect();
    let mut grown: Vec<Vec<PointId>> = shrunk.iter().map(|m| m.ids.clone()).collect();
    let mut kept = Vec::new();
    let mut absorbed = Vec::new();
    for (vi, vm) in v.members.iter().enumerate() {
        match shrunk.iter().position(|s| s.meets(vm)) {
            Some(ui) => {
                grown[ui].extend_from_slice(&vm.ids);
                absorbed.push([vi, ui]);
            }
            None => kept.push(Member::new(vm.ids.clone())),
        }
    }
    let mut members: Vec<Member> = grown.into_iter().map(Member::new).collect();
    members.extend(kept);
    let mut carrier = u.carrier.clone();
    carrier.extend_from_slice(&v.carrier);
    Ok(MergeReport {
        result: Covering::new(carrier, members),
        absorbed,
    })
}

/// Iterated merge of per-color families `(Z_a, U_a)` in color order.
pub fn amalgamate_colored(
    x: &FiniteMetricSpace,
    families: &[(Vec<PointId>, Covering)],
) -> Result<Covering> {
    let mut live: Vec<(usize, Covering, CoveringStats)> = Vec::new();
    for (a, (carrier, cover)) in families.iter().enumerate() {
        if carrier.is_empty() || cover.is_empty() {
            log::info!("skipping empty color class {a}");
            continue;
        }
        let mut c = cover.clone();
        c.carrier = carrier.clone();
        c.carrier.sort_unstable();
        c.carrier.dedup();
        let s = x.covering_stats(&c)?;
        live.push((a, c, s));
    }
    if live.is_empty() {
        return Err(Error::EmptyOperand);
    }
    for w in live.windows(2) {
        let (a, _, sa) = &w[0];
        let (_, _, sb) = &w[1];
        let bound = 0.5 * sa.lebesgue.min(sa.mesh);
        if !le(sb.mesh, bound) {
            return Err(Error::AmalgamationPrecondition {
                step: *a,
                mesh_next: sb.mesh,
                bound,
            });
        }
    }
    let mut iter = live.into_iter();
    let (_, mut acc, mut acc_stats) = iter.next().expect("nonempty");
    for (_, c, s) in iter {
        acc = merge_with_stats(x, &acc, &acc_stats, &c, &s)?.result;
        acc_stats = x.covering_stats(&acc)?;
    }
    Ok(acc)
}

/// Scale regime of the refinement: local (`τ → 0`) or asymptotic (`R → ∞`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScaleParams {
    Local { tau: f64, delta: f64 },
    Asymptotic { r: f64, delta: f64 },
}

impl ScaleParams {
    pub fn validate(&self) -> Result<()> {
        let (scale, delta, ok) = match *self {
            ScaleParams::Local { tau, delta } => (tau, delta, tau > 0.0),
            ScaleParams::Asymptotic { r, delta } => (r, delta, r > 1.0),
        };
        if !ok || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale {scale} out of range")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} not in (0,1)")));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        match *self {
            ScaleParams::Local { tau, .. } => tau,
            ScaleParams::Asymptotic { r, .. } => r,
        }
    }

    pub fn delta(&self) -> f64 {
        match *self {
            ScaleParams::Local { delta, .. } | ScaleParams::Asymptotic { delta, .. } => delta,
        }
    }

    /// Inverse of the map coefficient used for the model maps `V → Y`.
    fn stretch(&self, lambda0: f64) -> f64 {
        match *self {
            ScaleParams::Local { tau, .. } => tau,
            ScaleParams::Asymptotic { r, .. } => lambda0 * r,
        }
    }
}

/// Supplies the quasi-homothetic charts `V → Y` used by the refinement.
pub trait QuasiHomothetyProvider {
    fn lambda(&self) -> f64;

    fn lambda0(&self) -> f64 {
        1.0
    }

    /// Image in `Y` of every point of `member`, in order, for a map with the
    /// given coefficient.
    fn map_member(
        &self,
        member_index: usize,
        member: &[PointId],
        coefficient: f64,
    ) -> std::result::Result<Vec<PointId>, String>;
}

/// Provider backed by a closure.
pub struct FnProvider<F> {
    pub lambda: f64,
    pub lambda0: f64,
    pub map: F,
}

impl<F> QuasiHomothetyProvider for FnProvider<F>
where
    F: Fn(usize, &[PointId], f64) -> std::result::Result<Vec<PointId>, String>,
{
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn lambda0(&self) -> f64 {
        self.lambda0
    }

    fn map_member(
        &self,
        member_index: usize,
        member: &[PointId],
        coefficient: f64,
    ) -> std::result::Result<Vec<PointId>, String> {
        (self.map)(member_index, member, coefficient)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub covering: Covering,
    /// `min{L(Ũ_N), ½L(Ũ_{N−1}), …, 2^{−N}L(Ũ_0)}`.
    pub l: f64,
    pub mesh_bound: f64,
    pub lebesgue_bound: f64,
    /// Largest distortion observed over all provider maps.
    pub lambda_measured: f64,
}

/// Largest `λ'` with `c·d/λ' ≤ d' ≤ λ'·c·d` violated nowhere on the pairs of `ids`.
fn measured_distortion(
    z: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    ids: &[PointId],
    image: &[PointId],
    c: f64,
) -> f64 {
    let mut worst = 1.0f64;
    for a in 0..ids.len() {
        for b in (a + 1)..ids.len() {
            let d = z.dist(ids[a], ids[b]);
            let dp = y.dist(image[a], image[b]);
            if d == 0.0 {
                continue;
            }
            if dp == 0.0 {
                return f64::INFINITY;
            }
            worst = worst.max(dp / (c * d)).max(c * d / dp);
        }
    }
    worst
}

/// Refines the colored covering `V` of `Z` by pulling back model covers of
/// `Y` through quasi-homothetic charts and amalgamating the color classes.
pub fn refine_via_selfsimilarity(
    z: &FiniteMetricSpace,
    v: &Covering,
    y: &FiniteMetricSpace,
    model_covers: &[Covering],
    provider: &dyn QuasiHomothetyProvider,
    params: ScaleParams,
) -> Result<RefineReport> {
    params.validate()?;
    let lambda = provider.lambda();
    let lambda0 = provider.lambda0();
    if !(lambda >= 1.0) || !(lambda0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "provider constants lambda = {lambda}, Lambda0 = {lambda0}"
        )));
    }
    let scale = params.scale();
    let delta = params.delta();
    let stretch = params.stretch(lambda0);

    let colors = v
        .members
        .iter()
        .map(|m| {
            m.color
                .ok_or_else(|| Error::Precondition("covering V must be colored".into()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let n_colors = colors.iter().max().map_or(0, |c| c + 1);
    if model_covers.len() < n_colors {
        return Err(Error::Precondition(format!(
            "{} model covers supplied for {n_colors} colors",
            model_covers.len()
        )));
    }
    if !v.color_conflicts().is_empty() {
        return Err(Error::Precondition("same-colored members of V intersect".into()));
    }
    let sv = z.covering_stats(v)?;
    if !le(sv.mesh, scale) || !le(delta * scale, sv.lebesgue) {
        return Err(Error::Precondition(format!(
            "V has mesh {} and Lebesgue number {}; need mesh <= {scale} and L >= {}",
            sv.mesh,
            sv.lebesgue,
            delta * scale
        )));
    }

    let model = &model_covers[..n_colors];
    let mstats = model
        .iter()
        .map(|c| y.covering_stats(c))
        .collect::<Result<Vec<_>>>()?;
    let cond_i = delta * scale / (2.0 * lambda * stretch);
    if !le(mstats[0].mesh, cond_i) {
        return Err(Error::Precondition(format!(
            "condition (i): mesh of model cover 0 is {}, bound {cond_i}",
            mstats[0].mesh
        )));
    }
    for a in 0..n_colors.saturating_sub(1) {
        let bound = mstats[a].lebesgue.min(mstats[a].mesh) / (2.0 * lambda * lambda);
        if !le(mstats[a + 1].mesh, bound) {
            return Err(Error::Precondition(format!(
                "condition (ii) at color {a}: mesh {} exceeds {bound}",
                mstats[a + 1].mesh
            )));
        }
    }
    let n = n_colors - 1;
    let l = (0..n_colors)
        .map(|a| mstats[a].lebesgue / 2f64.powi((n - a) as i32))
        .fold(f64::INFINITY, f64::min);

    let shrink = delta * scale / 2.0;
    let coefficient = 1.0 / stretch;
    let mut carriers: Vec<Vec<PointId>> = vec![Vec::new(); n_colors];
    let mut families: Vec<Vec<Member>> = vec![Vec::new(); n_colors];
    let mut lambda_measured = 1.0f64;
    for (vi, vm) in v.members.iter().enumerate() {
        let a = colors[vi];
        let shrunk = z.neighborhood(&vm.ids, -shrink);
        carriers[a].extend_from_slice(&shrunk);
        if shrunk.is_empty() {
            continue;
        }
        let image = provider
            .map_member(vi, &vm.ids, coefficient)
            .map_err(|reason| Error::ProviderFailed { member: vi, reason })?;
        if image.len() != vm.ids.len() || image.iter().any(|&p| p >= y.len()) {
            return Err(Error::ProviderFailed {
                member: vi,
                reason: "map image has the wrong shape".into(),
            });
        }
        let dist = measured_distortion(z, y, &vm.ids, &image, coefficient);
        let allowed = lambda * (1.0 + z.tol_metric() + y.tol_metric());
        if !le(dist, allowed) {
            return Err(Error::ProviderFailed {
                member: vi,
                reason: format!("measured distortion {dist} exceeds lambda = {lambda}"),
            });
        }
        lambda_measured = lambda_measured.max(dist);
        let tilde_v: Vec<PointId> = shrunk
            .iter()
            .map(|p| image[vm.ids.binary_search(p).expect("shrunk member lies in V")])
            .collect();
        let tilde_v = Member::new(tilde_v);
        for um in &model[a].members {
            if !um.meets(&tilde_v) {
                continue;
            }
            let pulled: Vec<PointId> = vm
                .ids
                .iter()
                .zip(&image)
                .filter(|(_, &q)| um.contains(q))
                .map(|(&p, _)| p)
                .collect();
            families[a].push(Member::colored(pulled, a));
        }
    }
    let fams: Vec<(Vec<PointId>, Covering)> = carriers
        .into_iter()
        .zip(families)
        .map(|(c, m)| (c.clone(), Covering::new(c, m)))
        .collect();
    let mut covering = amalgamate_colored(z, &fams)?;
    covering.carrier = z.all_points();
    Ok(RefineReport {
        covering,
        l,
        mesh_bound: delta * scale / 2.0,
        lebesgue_bound: l * stretch / lambda,
        lambda_measured,
    })
}

/// Builds model covers `Ũ_0, …, Ũ_N` of `Y` satisfying conditions (i) and
/// (ii) from doubling covers, halving the radius at most `max_halvings`
/// times per color.
pub fn model_covers_from_doubling(
    y: &FiniteMetricSpace,
    colors: usize,
    lambda: f64,
    mesh0: f64,
    max_halvings: usize,
) -> Result<Vec<Covering>> {
    let mut out: Vec<Covering> = Vec::new();
    let mut bound = mesh0;
    let mut r = mesh0 / 4.0;
    for a in 0..colors {
        let mut found = None;
        for _ in 0..=max_halvings {
            let c = doubling_colored_cover(y, r);
            let s = y.covering_stats(&c)?;
            if le(s.mesh, bound) {
                found = Some((c, s));
                break;
            }
            r /= 2.0;
        }
        let (c, s) = found.ok_or_else(|| {
            Error::Precondition(format!(
                "no doubling cover of mesh <= {bound} within {max_halvings} halvings for color {a}"
            ))
        })?;
        bound = s.lebesgue.min(s.mesh) / (2.0 * lambda * lambda);
        r = bound / 4.0;
        out.push(c);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub covering: Covering,
    /// Index of the input member generating each output member.
    pub source: Vec<usize>,
    pub image_stats: CoveringStats,
}

/// Pushes a covering of `A ⊆ X` forward along `h: A → Y`, shrinks by `2ε`
/// inside `h(A)` and thickens by `ε` in `Y`. `h` is indexed like `u.carrier`.
pub fn pushforward_cover(
    x: &FiniteMetricSpace,
    u: &Covering,
    y: &FiniteMetricSpace,
    h: &[PointId],
    eps: f64,
) -> Result<PushforwardReport> {
    if h.len() != u.carrier.len() {
        return Err(Error::InvalidParameter(format!(
            "map has {} images for a carrier of {} points",
            h.len(),
            u.carrier.len()
        )));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps {eps} is negative")));
    }
    x.covering_stats(u)?;
    let mut image: Vec<PointId> = h.to_vec();
    image.sort_unstable();
    image.dedup();
    for q in 0..y.len() {
        let d = y.dist_to_set(q, &image);
        if !(d < eps || d == 0.0) {
            return Err(Error::Precondition(format!(
                "image is not {eps}-dense: point {q} is at distance {d}"
            )));
        }
    }
    // Work inside h(A) so complements are taken there.
    let sub = y.subspace(&image);
    let local = |q: PointId| image.binary_search(&q).expect("image point");
    let img_members: Vec<Member> = u
        .members
        .iter()
        .map(|m| {
            let ids = m
                .ids
                .iter()
                .filter_map(|p| u.carrier.binary_search(p).ok())
                .map(|i| local(h[i]))
                .collect();
            Member::new(ids)
        })
        .collect();
    let img_cover = Covering::new(sub.all_points(), img_members);
    let image_stats = sub.covering_stats(&img_cover)?;
    if !le(4.0 * eps, image_stats.lebesgue) {
        return Err(Error::Precondition(format!(
            "L(h(U)) = {} is below 4 eps = {}",
            image_stats.lebesgue,
            4.0 * eps
        )));
    }
    let mut members = Vec::new();
    let mut source = Vec::new();
    for (i, m) in img_cover.members.iter().enumerate() {
        let shrunk = sub.neighborhood(&m.ids, -2.0 * eps);
        if shrunk.is_empty() {
            continue;
        }
        let global: Vec<PointId> = shrunk.iter().map(|&k| image[k]).collect();
        let grown = if eps == 0.0 {
            global
        } else {
            y.neighborhood(&global, eps)
        };
        members.push(Member {
            color: u.members[i].color,
            ids: grown,
        });
        source.push(i);
    }
    let covering = Covering::new(y.all_points(), members);
    if let Some(&p) = covering.uncovered(y.len()).first() {
        return Err(Error::NotACovering { point: p });
    }
    Ok(PushforwardReport {
        covering,
        source,
        image_stats,
    })
}
