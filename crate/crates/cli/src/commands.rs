use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cdimlab::complexes::{
    audit_template, build_template_with_cap, limit_distance, osc_audit, selfsimilarity_map, ComplexPoint,
    MetricGraph, SquareComplex, TemplateParams, DEFAULT_FACE_CAP,
};
use cdimlab::coverings::{
    amalgamate_colored, doubling_colored_cover, maximal_separated_net, merge_coverings, refine_via_selfsimilarity,
    FnProvider, ScaleParams,
};
use cdimlab::estimators::{box_count_from_counts, box_counting, capacity_profile, quasi_homothety_coefficient};
use cdimlab::hyperbolic::{annulus_contract, ConeSpace};
use cdimlab::metric::DEFAULT_DELTA_CAP;
use cdimlab::spaces::{
    cantor_ka, cantor_ternary, circle_chordal, unit_grid, unit_grid_2d, zn_space, KaParams, RootedTree,
    DEFAULT_SPACE_CAP,
};
use cdimlab::{Covering, CoveringStats, FiniteMetricSpace, PointId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{emit, num, Report, Table};
use crate::{Cli, Command, ComplexArgs, CoverCommand, SpaceArgs, SpaceKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cdimlab::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed covering in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("cannot write output: {0}")]
    Write(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use cdimlab::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::CapExceeded { .. }) => 3,
            CliError::Core(E::Parse { .. } | E::InvalidParameter(_)) | CliError::Read { .. } | CliError::Json { .. } => 4,
            CliError::Core(
                E::MergeHypothesis { .. }
                | E::AmalgamationPrecondition { .. }
                | E::Precondition(_)
                | E::ShrinkBrokeCoverage { .. }
                | E::NotACovering { .. },
            ) => 5,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

enum Output {
    Report(Report),
    /// Artifact in its own format, written verbatim.
    Raw(String),
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let config = serde_json::to_value(cli).expect("configuration serializes");
    let mut code = ExitCode::SUCCESS;
    let out = match &cli.command {
        Command::Space(a) => Output::Raw(load_space(a, cli.cap)?.to_text()),
        Command::Cover(c) => Output::Report(cover(c, cli.cap)?),
        Command::Profile { space, tau_grid, colors } => {
            let x = load_space(space, cli.cap)?;
            let p = capacity_profile(&x, tau_grid, *colors)?;
            let mut t = Table::new(&["tau", "colors", "best_delta", "method"]);
            for r in &p.rows {
                t.push(vec![num(r.tau), r.colors.to_string(), num(r.best_delta), r.method.clone()]);
            }
            report("profile", json!(p), t)
        }
        Command::Boxcount { space, complex, m, k, g, r_grid } => {
            let rep = if *complex {
                let c = build_complex(ComplexArgs { m: *m, k: *k, depth: space.depth, g: *g }, cli.cap)?;
                let graph = MetricGraph::build(&c, *g);
                box_count_from_counts(r_grid, &|e| graph.greedy_ball_count(e))?
            } else {
                box_counting(&load_space(space, cli.cap)?, r_grid)?
            };
            let mut t = Table::new(&["epsilon", "count"]);
            for r in &rep.rows {
                t.push(vec![num(r.epsilon), r.count.to_string()]);
            }
            report("boxcount", json!(rep), t)
        }
        Command::Complex { params, audit, diameter, lambda, limit, pairs, sample, export } => {
            let c = build_complex(*params, cli.cap)?;
            if *export {
                Output::Raw(format!("{}\n", serde_json::to_string_pretty(&c.to_json()).expect("valid JSON")))
            } else if let Some(n) = sample {
                Output::Raw(complex_sample(&c, params.g, *n, cli.seed)?.to_text())
            } else {
                Output::Report(complex_report(&c, *params, *audit, *diameter, *lambda, *limit, *pairs, cli)?)
            }
        }
        Command::Cone { n, k, step, t_max, r, export } => cone(*n, k, *step, *t_max, *r, *export, cli.cap)?,
        Command::Hyperbolicity { space } => {
            let x = load_space(space, cli.cap)?;
            let rep = x.delta_hyperbolicity_with_cap(cli.cap.unwrap_or(DEFAULT_DELTA_CAP))?;
            report_flat("hyperbolicity", json!({ "points": x.len(), "delta": rep.delta, "witness": rep.witness }))
        }
        Command::Check => {
            let rows = crate::check::run_suite();
            let mut t = Table::new(&["check", "status", "detail"]);
            for r in &rows {
                t.push(vec![r.name.to_string(), status(r.passed).into(), r.detail.clone()]);
            }
            if rows.iter().any(|r| !r.passed) {
                code = ExitCode::from(1);
            }
            let result: Vec<Value> = rows
                .iter()
                .map(|r| json!({ "check": r.name, "passed": r.passed, "detail": r.detail }))
                .collect();
            report("check", json!(result), t)
        }
    };
    let text = match out {
        Output::Report(r) => r.render(cli.format, &config),
        Output::Raw(s) => s,
    };
    emit(cli.out.as_deref(), &text).map_err(CliError::Write)?;
    Ok(code)
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn report(command: &str, result: Value, table: Table) -> Output {
    Output::Report(Report { command: command.into(), result, table: Some(table) })
}

fn report_flat(command: &str, result: Value) -> Output {
    Output::Report(Report { command: command.into(), result, table: None })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

fn read_covering(path: &Path) -> Result<Covering> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json { path: path.into(), source })
}

fn check_cap(what: &str, size: u128, cap: usize) -> Result<()> {
    if size > cap as u128 {
        return Err(cdimlab::Error::CapExceeded {
            what: what.into(),
            size: size.min(usize::MAX as u128) as usize,
            cap,
        }
        .into());
    }
    Ok(())
}

/// Reads `--input` or runs the `--space` generator, enforcing the size cap
/// before anything is allocated.
pub fn load_space(a: &SpaceArgs, cap: Option<usize>) -> Result<FiniteMetricSpace> {
    let limit = cap.unwrap_or(DEFAULT_SPACE_CAP);
    if let Some(p) = &a.input {
        let x = FiniteMetricSpace::from_text(&read(p)?)?;
        check_cap("input space", x.len() as u128, limit)?;
        return Ok(x);
    }
    let kind = a.space.ok_or_else(|| CliError::Usage("either --input or --space is required".into()))?;
    let pow = |b: u128, e: usize| b.checked_pow(e as u32).unwrap_or(u128::MAX);
    let size = match kind {
        SpaceKind::Cantor | SpaceKind::Ka => pow(2, a.depth + 1),
        SpaceKind::Grid => a.n as u128 + 1,
        SpaceKind::Grid2d => pow(a.n as u128 + 1, 2),
        SpaceKind::Circle => a.n as u128,
        SpaceKind::Tree => (0..=a.depth).map(|d| pow(a.branching as u128, d)).fold(0u128, u128::saturating_add),
        SpaceKind::Zn => pow(a.n as u128 + 1, a.dim),
    };
    check_cap("generated space", size, limit)?;
    if a.n == 0 && matches!(kind, SpaceKind::Grid | SpaceKind::Grid2d | SpaceKind::Circle) {
        return Err(cdimlab::Error::InvalidParameter("--n must be positive".into()).into());
    }
    Ok(match kind {
        SpaceKind::Cantor => cantor_ternary(a.depth)?.space,
        SpaceKind::Ka => cantor_ka(&KaParams::harmonic(a.depth))?.space,
        SpaceKind::Grid => unit_grid(a.n),
        SpaceKind::Grid2d => unit_grid_2d(a.n),
        SpaceKind::Circle => circle_chordal(a.n),
        SpaceKind::Tree => RootedTree::new(a.branching, a.depth)?.space(),
        SpaceKind::Zn => zn_space(a.dim, a.n, limit)?,
    })
}

fn stats_json(s: &CoveringStats) -> Value {
    serde_json::to_value(s).expect("stats serialize")
}

fn member_table(x: &FiniteMetricSpace, c: &Covering) -> Table {
    let mut t = Table::new(&["member", "color", "size", "diameter"]);
    for (i, m) in c.members.iter().enumerate() {
        t.push(vec![i.to_string(), m.color.map_or(String::new(), |c| c.to_string()), m.ids.len().to_string(), num(x.diam(&m.ids))]);
    }
    t
}

fn union(carriers: impl Iterator<Item = Vec<PointId>>) -> Vec<PointId> {
    let mut all: Vec<PointId> = carriers.flatten().collect();
    all.sort_unstable();
    all.dedup();
    all
}

fn cover(c: &CoverCommand, cap: Option<usize>) -> Result<Report> {
    let rep = |command: &str, result: Value, table: Table| Report {
        command: format!("cover {command}"),
        result,
        table: Some(table),
    };
    Ok(match c {
        CoverCommand::Net { space, r } => {
            let x = load_space(space, cap)?;
            let net = maximal_separated_net(&x, *r, None);
            let mut t = Table::new(&["index", "point"]);
            for (i, p) in net.iter().enumerate() {
                t.push(vec![i.to_string(), p.to_string()]);
            }
            rep("net", json!({ "r": r, "net": net }), t)
        }
        CoverCommand::Colored { space, r } => {
            let x = load_space(space, cap)?;
            let cov = doubling_colored_cover(&x, *r);
            let s = x.covering_stats(&cov)?;
            let t = member_table(&x, &cov);
            rep("colored", json!({ "covering": cov, "colors": cov.color_count(), "stats": stats_json(&s) }), t)
        }
        CoverCommand::Merge { space, u, v } => {
            let x = load_space(space, cap)?;
            let (u, v) = (read_covering(u)?, read_covering(v)?);
            let m = merge_coverings(&x, &u, &v)?;
            let mut w = m.result.clone();
            w.carrier = union([u.carrier.clone(), v.carrier.clone()].into_iter());
            let s = x.covering_stats(&w)?;
            let t = member_table(&x, &m.result);
            rep("merge", json!({ "result": m.result, "absorbed": m.absorbed, "stats": stats_json(&s) }), t)
        }
        CoverCommand::Amalgamate { space, covers } => {
            let x = load_space(space, cap)?;
            let families: Vec<(Vec<PointId>, Covering)> = covers
                .iter()
                .map(|p| read_covering(p).map(|c| (c.carrier.clone(), c)))
                .collect::<Result<_>>()?;
            let out = amalgamate_colored(&x, &families)?;
            let mut w = out.clone();
            w.carrier = union(families.iter().map(|(c, _)| c.clone()));
            let s = x.covering_stats(&w)?;
            let t = member_table(&x, &out);
            rep("amalgamate", json!({ "result": out, "stats": stats_json(&s) }), t)
        }
        CoverCommand::Refine { depth, tau_grid, delta } => refine(*depth, tau_grid, *delta)?,
    })
}

/// The Cantor sample refined against itself: `V` is the cylinder cover
/// matching each `τ = 3^{-j}`, the model cover is the level-1 cylinder cover.
fn refine(depth: usize, taus: &[f64], delta: f64) -> Result<Report> {
    let k = cantor_ternary(depth)?;
    let x = &k.space;
    let model = vec![k.cylinder_cover(1)?];
    let provider = FnProvider {
        lambda: 1.0,
        lambda0: 1.0,
        map: |_: usize, member: &[PointId], coef: f64| {
            let j = (coef.ln() / 3f64.ln()).round() as usize;
            k.cylinder_chart(j, member).map_err(|e| e.to_string())
        },
    };
    let mut t = Table::new(&[
        "tau", "members", "multiplicity", "mesh", "mesh_bound", "lebesgue", "lebesgue_bound", "lambda_measured",
    ]);
    let mut rows = Vec::new();
    for &tau in taus {
        let j = (-tau.ln() / 3f64.ln()).round();
        if !(j >= 1.0) || (tau * 3f64.powf(j) - 1.0).abs() > 1e-9 || j as usize >= depth {
            return Err(cdimlab::Error::InvalidParameter(format!(
                "scale {tau} is not 3^-j with 1 <= j < depth = {depth}"
            ))
            .into());
        }
        let v = k.cylinder_cover(j as usize)?;
        let r = refine_via_selfsimilarity(x, &v, x, &model, &provider, ScaleParams::Local { tau, delta })?;
        let s = x.covering_stats(&r.covering)?;
        t.push(vec![
            num(tau),
            r.covering.len().to_string(),
            s.multiplicity.to_string(),
            num(s.mesh),
            num(r.mesh_bound),
            num(s.lebesgue),
            num(r.lebesgue_bound),
            num(r.lambda_measured),
        ]);
        rows.push(json!({
            "tau": tau,
            "stats": stats_json(&s),
            "mesh_bound": r.mesh_bound,
            "lebesgue_bound": r.lebesgue_bound,
            "lambda_measured": r.lambda_measured,
        }));
    }
    Ok(Report { command: "cover refine".into(), result: json!(rows), table: Some(t) })
}

fn build_complex(a: ComplexArgs, cap: Option<usize>) -> Result<SquareComplex> {
    let params = TemplateParams::new(a.m, a.k)?;
    if a.g == 0 {
        return Err(cdimlab::Error::InvalidParameter("--g must be positive".into()).into());
    }
    Ok(build_template_with_cap(params, a.depth, cap.unwrap_or(DEFAULT_FACE_CAP))?)
}

fn random_points(rng: &mut ChaCha8Rng, faces: usize, n: usize) -> Vec<ComplexPoint> {
    (0..n).map(|_| ComplexPoint::new(rng.gen_range(0..faces), rng.gen(), rng.gen())).collect()
}

fn pairwise(g: &MetricGraph, pts: &[ComplexPoint]) -> Result<Vec<Vec<f64>>> {
    let att = pts.iter().map(|&p| g.attach(p)).collect::<cdimlab::Result<Vec<_>>>()?;
    Ok(att.iter().map(|a| g.distances(a, &att)).collect::<cdimlab::Result<_>>()?)
}

fn complex_sample(c: &SquareComplex, g: usize, n: usize, seed: u64) -> Result<FiniteMetricSpace> {
    let graph = MetricGraph::build(c, g);
    let pts = random_points(&mut ChaCha8Rng::seed_from_u64(seed), c.faces, n);
    let d = pairwise(&graph, &pts)?;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            data[i * n + j] = d[i][j];
            data[j * n + i] = d[i][j];
        }
    }
    Ok(FiniteMetricSpace::from_matrix(n, data)?)
}

#[allow(clippy::too_many_arguments)]
fn complex_report(
    c: &SquareComplex,
    a: ComplexArgs,
    audit: bool,
    diameter: bool,
    lambda: bool,
    limit: Option<usize>,
    pairs: usize,
    cli: &Cli,
) -> Result<Report> {
    let params = TemplateParams::new(a.m, a.k)?;
    let mut result = serde_json::Map::new();
    result.insert(
        "template".into(),
        json!({
            "m": a.m, "k": a.k, "depth": a.depth, "faces": c.faces, "letters": params.s(),
            "diam_bound": params.diam_bound(), "hausdorff_dim": params.hausdorff_dim(),
        }),
    );
    let mut table = None;
    if audit {
        result.insert("audit".into(), json!(audit_template(c)?));
        if a.depth >= 1 {
            result.insert("osc".into(), json!(osc_audit(c, a.g)?));
        }
    }
    let needs_graph = diameter || limit.is_some();
    let graph = needs_graph.then(|| MetricGraph::build(c, a.g));
    if let (true, Some(g)) = (diameter, &graph) {
        let delta = g.boundary_distances().into_iter().fold(0.0, f64::max);
        let perimeter: f64 = c.boundary_cycles().iter().map(|&(_, len)| len).sum();
        let corner = g.eccentricity(&g.attach_node(g.corner_node(0, 0) as u32))?;
        result.insert(
            "diameter".into(),
            json!({
                "graph_nodes": g.node_count(),
                "max_boundary_distance": delta,
                "certified_upper_bound": 2.0 * delta + perimeter / 2.0,
                "corner_eccentricity": corner,
                "formula_bound": params.diam_bound(),
            }),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    if lambda {
        if a.depth == 0 {
            return Err(cdimlab::Error::InvalidParameter("--lambda needs --depth >= 1".into()).into());
        }
        let prev = build_complex(ComplexArgs { depth: a.depth - 1, ..a }, cli.cap)?;
        let (g0, g1) = (MetricGraph::build(&prev, a.g), MetricGraph::build(c, a.g));
        let np = ((1.0 + (1.0 + 8.0 * pairs as f64).sqrt()) / 2.0).ceil() as usize;
        let mut t = Table::new(&["letter", "lambda"]);
        let mut rows = Vec::new();
        for letter in 0..params.s() {
            let pts = random_points(&mut rng, prev.faces, np.max(2));
            let imgs = pts
                .iter()
                .map(|&p| selfsimilarity_map(&params, letter, a.depth - 1, p))
                .collect::<cdimlab::Result<Vec<_>>>()?;
            let (d, dp) = (pairwise(&g0, &pts)?, pairwise(&g1, &imgs)?);
            let sample: Vec<(f64, f64)> = (0..pts.len())
                .flat_map(|i| ((i + 1)..pts.len()).map(move |j| (i, j)))
                .take(pairs)
                .map(|(i, j)| (d[i][j], dp[i][j]))
                .collect();
            let q = quasi_homothety_coefficient(&sample, 1.0 / params.mk() as f64)?;
            t.push(vec![letter.to_string(), num(q.lambda_measured)]);
            rows.push(json!({ "letter": letter, "lambda": q.lambda_measured }));
        }
        result.insert("lambda".into(), json!(rows));
        table = Some(t);
    }
    if let Some(n) = limit {
        let graphs: Vec<MetricGraph> = (0..a.depth)
            .map(|d| build_complex(ComplexArgs { depth: d, ..a }, cli.cap).map(|x| MetricGraph::build(&x, a.g)))
            .collect::<Result<_>>()?;
        let mut refs: Vec<&MetricGraph> = graphs.iter().collect();
        refs.push(graph.as_ref().expect("graph built for --limit"));
        let mut t = Table::new(&["pair", "level", "distance"]);
        let mut rows = Vec::new();
        for pair in 0..n {
            let pts = random_points(&mut rng, c.faces, 2);
            let seq = limit_distance(&params, &refs, pts[0], pts[1])?;
            for (level, d) in seq.iter().enumerate() {
                t.push(vec![pair.to_string(), level.to_string(), num(*d)]);
            }
            rows.push(json!({ "x": pts[0], "y": pts[1], "sequence": seq }));
        }
        result.insert("limit".into(), json!(rows));
        table = Some(t);
    }
    Ok(Report { command: "complex".into(), result: Value::Object(result), table })
}

fn cone(n: usize, ks: &[usize], step: f64, t_max: f64, r: f64, export: bool, cap: Option<usize>) -> Result<Output> {
    if n == 0 || !(step > 0.0) || !(t_max >= step) {
        return Err(cdimlab::Error::InvalidParameter("need --n >= 1 and 0 < --step <= --t-max".into()).into());
    }
    let steps = (t_max / step + 1e-9).floor() as usize;
    check_cap("cone sample", 1 + (n as u128 + 1) * steps as u128, cap.unwrap_or(DEFAULT_SPACE_CAP))?;
    let base = ConeSpace::new(unit_grid(n))?;
    let ts: Vec<f64> = (1..=steps).map(|i| i as f64 * step).collect();
    let sample = base.sample(&ts)?;
    if export {
        return Ok(Output::Raw(sample.space.to_text()));
    }
    let u = doubling_colored_cover(&sample.space, r);
    let mut t = Table::new(&["k", "members", "multiplicity", "mesh", "lebesgue"]);
    let mut rows = Vec::new();
    for &k in ks {
        let a = annulus_contract(&sample, &u, k)?;
        t.push(vec![
            k.to_string(),
            a.covering.len().to_string(),
            a.stats.multiplicity.to_string(),
            num(a.stats.mesh),
            num(a.stats.lebesgue),
        ]);
        rows.push(json!({ "k": k, "annulus_points": a.annulus.len(), "stats": stats_json(&a.stats) }));
    }
    Ok(report("cone", json!({ "points": sample.points.len(), "mu": base.mu(), "annulus": rows }), t))
}
