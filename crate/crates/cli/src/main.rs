//! `cdimlab`: batch front end for the covering and dimension toolkit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod check;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "cdimlab", version, about = "Capacity-dimension laboratory: coverings, estimators, square complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random sample.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Size cap overriding the built-in limits of the command.
    #[arg(long, global = true, env = "CDIMLAB_CAP")]
    pub cap: Option<usize>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    /// Ternary Cantor set endpoints at `--depth`.
    Cantor,
    /// `K_a` with `ε_k = 1/(k+2)` at `--depth`.
    Ka,
    /// `{0, 1/n, …, 1}`.
    Grid,
    /// `(n+1)²` grid in the unit square, Euclidean.
    Grid2d,
    /// `n` points on the unit circle, chordal metric.
    Circle,
    /// All vertices of the rooted `--branching`-ary tree of `--depth`.
    Tree,
    /// `--dim`-fold sup-metric power of `{0} ∪ {1/j : j ≤ n}`.
    Zn,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpaceArgs {
    /// Metric space in the text exchange format.
    #[arg(long, conflicts_with = "space")]
    pub input: Option<PathBuf>,

    /// Built-in generator, used when `--input` is absent.
    #[arg(long, value_enum)]
    pub space: Option<SpaceKind>,

    #[arg(long, default_value_t = 4)]
    pub depth: usize,

    #[arg(long, default_value_t = 20)]
    pub n: usize,

    #[arg(long, default_value_t = 1)]
    pub dim: usize,

    #[arg(long, default_value_t = 2)]
    pub branching: usize,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct ComplexArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,

    #[arg(long, default_value_t = 3)]
    pub k: usize,

    #[arg(long, default_value_t = 1)]
    pub depth: usize,

    /// Grid resolution per face of the metric graph.
    #[arg(long, default_value_t = 4)]
    pub g: usize,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Emit a generated metric space in the text exchange format.
    Space(SpaceArgs),

    /// Covering constructions with a stats report.
    #[command(subcommand)]
    Cover(CoverCommand),

    /// Capacity profile: best `L/τ` per scale and color budget.
    Profile {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_scale)]
        tau_grid: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        colors: usize,
    },

    /// Box-counting dimension estimate over `--r-grid`.
    Boxcount {
        #[command(flatten)]
        space: SpaceArgs,
        /// Count balls on the template `P^depth` instead of a metric space.
        #[arg(long)]
        complex: bool,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        g: usize,
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_scale)]
        r_grid: Vec<f64>,
    },

    /// Build a template complex and report on it.
    Complex {
        #[command(flatten)]
        params: ComplexArgs,
        /// Face counts, block structure and open set condition.
        #[arg(long)]
        audit: bool,
        /// Boundary distances and the certified diameter bound.
        #[arg(long)]
        diameter: bool,
        /// Quasi-homothety coefficient of every `f_a : P^{depth-1} → P^depth`.
        #[arg(long)]
        lambda: bool,
        /// Limit-distance sequences for this many random pairs.
        #[arg(long)]
        limit: Option<usize>,
        /// Pairs sampled per letter for `--lambda`.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Export this many random points as a metric space instead of a report.
        #[arg(long)]
        sample: Option<usize>,
        /// Export faces and gluings as JSON instead of a report.
        #[arg(long)]
        export: bool,
    },

    /// Hyperbolic cone over a grid: annulus contractions or a sample export.
    Cone {
        /// Base is the grid `{0, 1/n, …, 1}`.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        k: Vec<usize>,
        /// Radial grid step and extent.
        #[arg(long, default_value_t = 0.125)]
        step: f64,
        #[arg(long, default_value_t = 16.0)]
        t_max: f64,
        /// Radius of the doubling cover that gets contracted.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Export the cone sample as a metric space instead of a report.
        #[arg(long)]
        export: bool,
    },

    /// Exhaustive four-point hyperbolicity constant.
    Hyperbolicity {
        #[command(flatten)]
        space: SpaceArgs,
    },

    /// Quick pass over the invariant suite.
    Check,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum CoverCommand {
    /// Greedy maximal `r`-separated net.
    Net {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        r: f64,
    },
    /// Colored doubling cover by `2r`-balls around an `r`-net.
    Colored {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        r: f64,
    },
    /// Merge two coverings given as JSON files.
    Merge {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
    },
    /// Colored amalgamation of coverings given as JSON files, one per color.
    Amalgamate {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        covers: Vec<PathBuf>,
    },
    /// Self-similar refinement of cylinder covers on the ternary Cantor sample.
    Refine {
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, value_delimiter = ',', default_value = "3^-1,3^-2,3^-3", value_parser = parse_scale)]
        tau_grid: Vec<f64>,
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
    },
}

/// A decimal or a power written `b^e`, such as `3^-4`.
fn parse_scale(s: &str) -> Result<f64, String> {
    let value = match s.split_once('^') {
        Some((b, e)) => {
            let b: f64 = b.trim().parse().map_err(|_| format!("bad base in {s:?}"))?;
            let e: i32 = e.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            b.powi(e)
        }
        None => s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?,
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(format!("scale {s:?} must be positive and finite"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
