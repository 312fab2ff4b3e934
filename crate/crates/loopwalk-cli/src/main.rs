//! Command line front end: reproducible sampling and exponent estimation
//! for random looptrees.
//!
//! Every run prints one JSON summary object (with the configuration echoed
//! under "config") and, for subcommands that produce point data, writes the
//! points as CSV or JSON to --out. Identical invocations produce
//! byte-identical output. Usage errors exit 2, resource and convergence
//! errors exit 1.

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use loopwalk::estimate::{self, Window};
use loopwalk::offspring::{self, OffspringDistribution};
use loopwalk::spine::{LoopspineBall, VertexKind};
use loopwalk::{ensemble, gf, looptree, resistance, spine, tree, walk};
use serde_json::json;
use std::path::PathBuf;

mod verify;

#[derive(Parser)]
#[command(name = "loopwalk", version, about = "Random looptree sampling and exponent estimation", max_term_width = 100)]
struct Cli {
    /// Cap worker threads (LOOPTREE_THREADS works too; this flag wins)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DistArgs {
    /// Offspring distribution family
    #[arg(long, value_enum, default_value_t = DistName::Slack)]
    dist: DistName,
    /// Tail exponent for --dist slack, in (1, 2)
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Tail constant for --dist slack, in (0, 1]
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Weight table file for --dist table: one weight per line, # comments
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistName {
    /// Stable tail P(xi >= k) ~ c k^(-alpha) with unit mean
    Slack,
    /// Geometric with mean 1: P(k) = 2^(-k-1)
    Geometric,
    /// Deterministic single child (the half-line control)
    Chain,
    /// Custom law read from --table, normalized, must have mean 1
    Table,
}

impl DistArgs {
    fn build(&self) -> anyhow::Result<OffspringDistribution> {
        match self.dist {
            DistName::Slack => OffspringDistribution::slack(self.alpha, self.c)
                .context("invalid slack parameters"),
            DistName::Geometric => Ok(OffspringDistribution::geometric_half()),
            DistName::Chain => Ok(OffspringDistribution::tabulated(&[0.0, 1.0])
                .expect("chain law is valid")),
            DistName::Table => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| usage("--dist table requires --table FILE"))?;
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                offspring::parse_table(&text).context("invalid offspring table")
            }
        }
    }

    /// Configuration echo for the summary object.
    fn echo(&self) -> serde_json::Value {
        match self.dist {
            DistName::Slack => json!({"dist": "slack", "alpha": self.alpha, "c": self.c}),
            DistName::Geometric => json!({"dist": "geometric"}),
            DistName::Chain => json!({"dist": "chain"}),
            DistName::Table => {
                json!({"dist": "table", "table": self.table.as_ref().map(|p| p.display().to_string())})
            }
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Write point data here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Point data representation
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindowName {
    /// Fit over every available point
    All,
    /// Fit over the upper dyadic half (n >= sqrt(first * last))
    Upper,
}

impl WindowName {
    fn to_window(self) -> Window {
        match self {
            WindowName::All => Window::All,
            WindowName::Upper => Window::UpperHalf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a Galton-Watson tree conditioned on its vertex count
    SampleTree {
        #[command(flatten)]
        dist: DistArgs,
        /// Number of vertices
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Rejection attempts before giving up
        #[arg(long, default_value_t = 10_000_000)]
        attempts: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Loop transform of a conditioned tree, as an edge list
    Loop {
        #[command(flatten)]
        dist: DistArgs,
        /// Vertex count of the underlying tree
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10_000_000)]
        attempts: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ball of the infinite looptree, as an edge list with a vertex table
    Ball {
        #[command(flatten)]
        dist: DistArgs,
        /// Ball radius (vertices at distance < radius are materialized)
        #[arg(long)]
        radius: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Abort if the ball exceeds this many vertices
        #[arg(long, default_value_t = 1 << 24)]
        cap: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact return probabilities p_2n of the walk on one realization
    Walk {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Largest n; the ball radius is 2n+1
        #[arg(long)]
        nmax: u64,
        #[arg(long, default_value_t = 1 << 24)]
        cap: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact and Monte Carlo escape time from a ball on one realization
    Escape {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Escape radius R; the ball radius is R+1
        #[arg(long)]
        radius: u64,
        /// Monte Carlo walks for the tau_R mean
        #[arg(long, default_value_t = 1000)]
        walks: u64,
        #[arg(long, default_value_t = 1 << 24)]
        cap: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Effective resistance and separator lower bound on one realization
    Resistance {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Comma-separated shell distances n
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<u64>,
        #[arg(long, default_value_t = 1 << 24)]
        cap: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Mean ball volume over an ensemble of realizations
    Volume {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Comma-separated radii n
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        realizations: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Expected outgrowth ball volume E(X^(n)) by dynamic program
    Gf {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long)]
        nmax: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit the spectral dimension from exact return probabilities
    EstimateDs {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, value_enum, default_value_t = Mode::Quenched)]
        mode: Mode,
        /// Largest n in the p_2n series; the ball radius is 2n+1
        #[arg(long)]
        nmax: u64,
        /// Ensemble size for --mode annealed
        #[arg(long, default_value_t = 50)]
        realizations: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Fit window over n
        #[arg(long, value_enum, default_value_t = WindowName::Upper)]
        window: WindowName,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the self-check suite; exits nonzero on any failure
    Verify {
        /// Small-case oracles only (a few seconds)
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Quenched,
    Annealed,
}

fn usage(msg: &str) -> anyhow::Error {
    // surfaced with exit code 2, matching clap's own usage errors
    anyhow::Error::new(UsageError(msg.to_string()))
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        ensemble::set_thread_cap(n);
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.is::<UsageError>() { 2 } else { 1 };
            std::process::exit(code);
        }
    }
}

/// Point rows plus the summary fields that describe them.
struct Report {
    config: serde_json::Value,
    summary: serde_json::Value,
    header: &'static str,
    rows: Vec<String>,
}

impl Report {
    /// CSV: rows to --out (summary object to stdout) or rows to stdout.
    /// JSON: one object carrying config, summary, and points.
    fn emit(self, out: &OutArgs) -> anyhow::Result<()> {
        let text = match out.format {
            Format::Csv => {
                let mut t = String::with_capacity(16 * self.rows.len());
                t.push_str(self.header);
                t.push('\n');
                for r in &self.rows {
                    t.push_str(r);
                    t.push('\n');
                }
                t
            }
            Format::Json => {
                let columns: Vec<&str> = self.header.split(',').map(str::trim).collect();
                let obj = json!({
                    "config": self.config,
                    "summary": self.summary,
                    "columns": columns,
                    "points": self.rows,
                });
                let mut t = serde_json::to_string_pretty(&obj).expect("serializable");
                t.push('\n');
                t
            }
        };
        match &out.out {
            Some(path) => {
                std::fs::write(path, &text)
                    .with_context(|| format!("writing {}", path.display()))?;
                if out.format == Format::Csv {
                    let obj = json!({"config": self.config, "summary": self.summary,
                        "out": path.display().to_string()});
                    println!("{}", serde_json::to_string_pretty(&obj).expect("serializable"));
                }
            }
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn sample_ball_arg(
    dist: &OffspringDistribution,
    radius: u64,
    cap: u64,
    seed: u64,
) -> anyhow::Result<LoopspineBall> {
    let mut rng = ensemble::substream(seed, 0);
    spine::sample_ball(dist, radius, cap, &mut rng)
        .with_context(|| format!("sampling the radius-{radius} ball"))
}

/// Edge list with multiplicities: each unordered pair once, smaller id first.
fn edge_rows(g: &looptree::Looptree) -> Vec<String> {
    let mut rows = Vec::new();
    for v in 0..g.len() as u32 {
        let mut prev = None;
        let mut mult = 0u32;
        let mut sorted: Vec<u32> = g.neighbors(v).iter().copied().filter(|&w| w >= v).collect();
        sorted.sort_unstable();
        for w in sorted.into_iter().chain(std::iter::once(u32::MAX)) {
            if Some(w) == prev {
                mult += 1;
                continue;
            }
            if let Some(p) = prev {
                rows.push(format!("{v} {p} {mult}"));
            }
            (prev, mult) = ((w != u32::MAX).then_some(w), 1);
        }
    }
    rows
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::SampleTree { dist, size, seed, attempts, out } => {
            let d = dist.build()?;
            if size == 0 {
                return Err(usage("--size must be at least 1"));
            }
            let mut rng = ensemble::substream(seed, 0);
            let t = tree::sample_gw_conditioned(&d, size, attempts, &mut rng)
                .context("conditioned sampling failed")?;
            let line = t
                .out()
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",");
            Report {
                config: json!({"cmd": "sample-tree", "distribution": dist.echo(),
                    "size": size, "seed": seed}),
                summary: json!({"vertices": t.len(), "height": t.height()}),
                header: "outdegrees",
                rows: vec![line],
            }
            .emit(&out)
        }
        Command::Loop { dist, size, seed, attempts, out } => {
            let d = dist.build()?;
            if size == 0 {
                return Err(usage("--size must be at least 1"));
            }
            let mut rng = ensemble::substream(seed, 0);
            let t = tree::sample_gw_conditioned(&d, size, attempts, &mut rng)
                .context("conditioned sampling failed")?;
            let g = looptree::loop_transform(&t);
            let dists = g.distances();
            let mut rows = vec![format!("# looptree loop N={size} seed={seed}")];
            rows.extend(edge_rows(&g));
            rows.push("# vertices: id distance".into());
            for (v, dd) in dists.iter().enumerate() {
                rows.push(format!("{v} {dd}"));
            }
            Report {
                config: json!({"cmd": "loop", "distribution": dist.echo(),
                    "size": size, "seed": seed}),
                summary: json!({"vertices": g.len(), "edges": g.edge_count(),
                    "height": g.height()}),
                header: "edge list",
                rows,
            }
            .emit(&out)
        }
        Command::Ball { dist, radius, seed, cap, out } => {
            let d = dist.build()?;
            let ball = sample_ball_arg(&d, radius, cap, seed)?;
            let g = &ball.graph;
            let mut rows = vec![format!("# looptree ball R={radius} seed={seed}")];
            rows.extend(edge_rows(g));
            rows.push("# vertices: id distance open|closed|outgrowth".into());
            for v in 0..g.len() {
                let kind = match ball.kind[v] {
                    VertexKind::Special => "closed",
                    VertexKind::Open { .. } => "open",
                    VertexKind::OutgrowthPart { .. } => "outgrowth",
                };
                rows.push(format!("{v} {} {kind}", ball.dist[v]));
            }
            Report {
                config: json!({"cmd": "ball", "distribution": dist.echo(),
                    "radius": radius, "seed": seed, "cap": cap}),
                summary: json!({"vertices": g.len(), "edges": g.edge_count(),
                    "cycles": ball.cycles.len(), "outgrowths": ball.outgrowths.len()}),
                header: "edge list",
                rows,
            }
            .emit(&out)
        }
        Command::Walk { dist, seed, nmax, cap, out } => {
            let d = dist.build()?;
            if nmax == 0 {
                return Err(usage("--nmax must be at least 1"));
            }
            let ball = sample_ball_arg(&d, 2 * nmax + 1, cap, seed)?;
            let p = walk::ball_return_probabilities(&ball, nmax)?;
            let rows = (1..=nmax)
                .map(|n| format!("{n},{}", p[(2 * n) as usize]))
                .collect();
            Report {
                config: json!({"cmd": "walk", "distribution": dist.echo(),
                    "seed": seed, "nmax": nmax, "cap": cap}),
                summary: json!({"vertices": ball.graph.len(), "radius": ball.radius}),
                header: "n,p2n",
                rows,
            }
            .emit(&out)
        }
        Command::Escape { dist, seed, radius, walks, cap, out } => {
            let d = dist.build()?;
            if radius == 0 {
                return Err(usage("--radius must be at least 1"));
            }
            if walks < 2 {
                return Err(usage("--walks must be at least 2"));
            }
            let ball = sample_ball_arg(&d, radius + 1, cap, seed)?;
            let exact = walk::ball_escape_time(&ball, radius)?;
            let mut rng = ensemble::substream(seed, 1);
            let (mc_mean, mc_stderr) = walk::ball_escape_samples(&ball, radius, walks, &mut rng)?;
            let rows = vec![format!("{radius},{exact},{mc_mean},{mc_stderr}")];
            Report {
                config: json!({"cmd": "escape", "distribution": dist.echo(),
                    "seed": seed, "radius": radius, "walks": walks, "cap": cap}),
                summary: json!({"T_R": exact, "mc_mean": mc_mean, "mc_stderr": mc_stderr,
                    "vertices": ball.graph.len()}),
                header: "R,T_R,mc_mean,mc_stderr",
                rows,
            }
            .emit(&out)
        }
        Command::Resistance { dist, seed, levels, cap, out } => {
            let d = dist.build()?;
            let levels = sorted_levels(levels)?;
            let top = *levels.last().expect("nonempty by clap");
            let ball = sample_ball_arg(&d, top + 1, cap, seed)?;
            let mut rows = Vec::with_capacity(levels.len());
            for &n in &levels {
                let reff = resistance::ball_effective_resistance(&ball, n)?;
                let sep = resistance::find_separator(&ball, n)?;
                let case = match sep.case {
                    resistance::SeparatorCase::RootNeighbors => "root-neighbors",
                    resistance::SeparatorCase::SpecialVertex => "special-vertex",
                    resistance::SeparatorCase::CyclePair => "cycle-pair",
                    resistance::SeparatorCase::LevelCut => "level-cut",
                };
                rows.push(format!("{n},{reff},{},{},{case}", sep.distance,
                    sep.distance as f64 / 2.0));
            }
            Report {
                config: json!({"cmd": "resistance", "distribution": dist.echo(),
                    "seed": seed, "levels": levels, "cap": cap}),
                summary: json!({"vertices": ball.graph.len(), "radius": ball.radius}),
                header: "n,Reff,Dn,lower,case",
                rows,
            }
            .emit(&out)
        }
        Command::Volume { dist, seed, levels, realizations, out } => {
            let d = dist.build()?;
            let levels = sorted_levels(levels)?;
            if realizations == 0 {
                return Err(usage("--realizations must be at least 1"));
            }
            let points = estimate::mean_volume_points(&d, realizations, &levels, seed)?;
            let scale = d.scaling();
            let rows = points
                .iter()
                .map(|&(n, m)| format!("{n},{m},{}", scale.a(n)))
                .collect();
            Report {
                config: json!({"cmd": "volume", "distribution": dist.echo(),
                    "seed": seed, "levels": levels, "realizations": realizations}),
                summary: json!({"alpha": d.alpha()}),
                header: "n,mean_vn,a_n",
                rows,
            }
            .emit(&out)
        }
        Command::Gf { dist, nmax, out } => {
            let d = dist.build()?;
            let exn = gf::expected_outgrowth_volume(&d, nmax);
            let m = gf::m_constant(&d);
            let scale = d.scaling();
            let rows = (1..=nmax)
                .map(|n| {
                    let v = exn.value(n);
                    let ratio = v * n as f64 / scale.a(n as f64);
                    format!("{n},{v},{ratio},{m}")
                })
                .collect();
            Report {
                config: json!({"cmd": "gf", "distribution": dist.echo(), "nmax": nmax}),
                summary: json!({"M": m, "alpha": d.alpha()}),
                header: "n,EXn,EXn_n_over_an,M",
                rows,
            }
            .emit(&out)
        }
        Command::EstimateDs { dist, mode, nmax, realizations, seed, window, out } => {
            let d = dist.build()?;
            if nmax < 4 {
                return Err(usage("--nmax must be at least 4 to fit"));
            }
            let win = window.to_window();
            let (est, mode_name, points_header) = match mode {
                Mode::Quenched => (
                    estimate::estimate_ds_quenched(&d, seed, nmax, win)?,
                    "quenched",
                    "n,p2n",
                ),
                Mode::Annealed => {
                    if realizations == 0 {
                        return Err(usage("--realizations must be at least 1"));
                    }
                    (
                        estimate::estimate_ds_annealed(&d, realizations, nmax, win, seed)?,
                        "annealed",
                        "n,mean_p2n",
                    )
                }
            };
            let alpha = d.alpha();
            let ds_theory = 2.0 * alpha / (alpha + 1.0);
            let rows = est
                .series
                .iter()
                .map(|&(n, p)| format!("{n},{p}"))
                .collect();
            Report {
                config: json!({"cmd": "estimate-ds", "distribution": dist.echo(),
                    "mode": mode_name, "nmax": nmax, "seed": seed,
                    "realizations": if mode_name == "annealed" { Some(realizations) } else { None },
                    "window": match window { WindowName::All => "all", WindowName::Upper => "upper" }}),
                summary: json!({"alpha": alpha, "ds_fit": est.ds, "ds_theory": ds_theory,
                    "stderr": est.stderr(), "window": [est.fit.window.0, est.fit.window.1]}),
                header: points_header,
                rows,
            }
            .emit(&out)
        }
        Command::Verify { quick } => verify::run(quick),
    }
}

fn sorted_levels(mut levels: Vec<u64>) -> anyhow::Result<Vec<u64>> {
    levels.sort_unstable();
    levels.dedup();
    if levels.first() == Some(&0) {
        return Err(usage("--levels entries must be at least 1"));
    }
    Ok(levels)
}
