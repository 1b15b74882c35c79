use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use graphblow_cli::config::{ExperimentConfig, SolverConfig, DEFAULT_SEED};
use graphblow_cli::output::{num, render_csv, Envelope, OutDir};
use graphblow_cli::{emit_plotdata, run_scenario, UnknownPreset, PRESETS};
use graphblow_core::bounds::{asymptotic_sweep, compute_bounds, BoundsRequest, Direction, SweepOptions};
use graphblow_core::evolution::{estimate_lifespan, integrate, Boundary};
use graphblow_core::graph::{volume_growth_fit, GraphError};
use graphblow_core::heat_kernel::{heat_kernel, kernel_audit, KernelMethod};
use graphblow_core::initial_data::PsiSpec;
use graphblow_core::operators::{cde_check, CdeMode, CdeVariant};
use graphblow_core::spectral::{dirichlet_ground_state, ec_witness_search, ghost_vertex_ground_state};
use graphblow_core::{graph_constants, DomainSubset, GraphSpec, VertexFunction, WeightedGraph};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "graphblow", version, about = "Blow-up lifespans of u_t = Δu + u^p on weighted graphs")]
struct Cli {
    /// Experiment config (JSON); flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized procedures.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = "graphblow-out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Graph queries.
    Graph {
        #[command(subcommand)]
        query: GraphQuery,
    },
    /// Principal Dirichlet eigenpair, ghost-vertex problem, or witness search.
    Spectrum(SpectrumArgs),
    /// Heat kernel matrix or identity audit.
    Kernel(KernelArgs),
    /// Curvature-dimension check at a vertex.
    Cde(CdeArgs),
    /// Integrate one trajectory.
    Simulate(SimulateArgs),
    /// Lifespan estimate, via truncations for infinite generators.
    Lifespan(LifespanArgs),
    /// Analytic lifespan bounds.
    Bounds(BoundsArgs),
    /// λ-sweep of λ^{p−1}T_λ with bounds.
    Sweep(SweepArgs),
    /// Run a preset with embedded assertions.
    Scenario {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// CSV plot series from a JSON artifact.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GraphQuery {
    Info {
        #[arg(long)]
        graph: String,
    },
    Ball {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        center: String,
        #[arg(long)]
        radius: usize,
    },
    Vgfit {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        center: String,
        #[arg(long)]
        r_max: usize,
    },
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    graph: String,
    /// JSON list of interior vertex ids.
    #[arg(long, group = "mode")]
    omega_file: Option<PathBuf>,
    /// Comma-separated interior vertex ids.
    #[arg(long, group = "mode")]
    interior: Option<String>,
    /// Ghost-vertex problem anchored at this id.
    #[arg(long, group = "mode")]
    ghost: Option<String>,
    /// Search for a far-away domain with small principal eigenvalue.
    #[arg(long, group = "mode")]
    ec_search: bool,
    #[arg(long, default_value = "0")]
    anchor: String,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 5.0)]
    delta: f64,
    #[arg(long, default_value_t = 20)]
    size_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Expm,
    Series,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    graph: String,
    /// Time, or comma-separated times with --audit.
    #[arg(long, default_value = "1")]
    t: String,
    #[arg(long, value_enum, default_value = "expm")]
    method: MethodArg,
    #[arg(long)]
    audit: bool,
    /// Also write the kernel matrix as CSV (x, y, value).
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cde,
    CdePrime,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Verify,
    Falsify,
}

#[derive(Args)]
struct CdeArgs {
    #[arg(long)]
    graph: String,
    #[arg(long)]
    vertex: String,
    #[arg(long)]
    n: f64,
    #[arg(long = "K", alias = "k", allow_hyphen_values = true, default_value_t = 0.0)]
    k: f64,
    #[arg(long, value_enum, default_value = "cde-prime")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "falsify")]
    mode: ModeArg,
    /// Verify mode: JSON map from vertex id to a positive value.
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Graph descriptor, e.g. `cycle:8`, `lattice:1:30`, `file:g.json`.
    #[arg(long)]
    graph: Option<String>,
    /// ψ descriptor, e.g. `const:1`, `indicator:0;1:2`, `halfline:1`, `file:psi.json`.
    #[arg(long)]
    psi: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of equally spaced output samples.
    #[arg(long, default_value_t = 20)]
    samples: usize,
}

#[derive(Args)]
struct LifespanArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    tol: Option<f64>,
    /// `initial:count`, radii doubling from `initial`.
    #[arg(long)]
    radius_schedule: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Every bound applicable to the graph.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    kaplan: bool,
    #[arg(long, default_value_t = 3)]
    kaplan_radius: usize,
    /// Heat-kernel bound probed at this vertex id.
    #[arg(long)]
    hk: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    hk_t_max: f64,
    #[arg(long)]
    density: bool,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Comma-separated radii for the density profile.
    #[arg(long)]
    r_grid: Option<String>,
    #[arg(long)]
    sandwich: bool,
    #[arg(long)]
    tail: bool,
    #[arg(long)]
    psi_inf: Option<f64>,
    /// Finite-graph threshold with the ghost vertex at this id.
    #[arg(long)]
    ghost: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Large,
    Small,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Comma-separated λ values, in sweep order.
    #[arg(long)]
    lambdas: Option<String>,
}

/// Bad input rather than a failed computation; exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() || cause.is::<UnknownPreset>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<graphblow_core::Error>() {
            match e {
                graphblow_core::Error::InvalidArgument(_) => return 2,
                graphblow_core::Error::Graph(g) => return graph_error_code(g),
                _ => return 1,
            }
        }
        if let Some(g) = cause.downcast_ref::<GraphError>() {
            return graph_error_code(g);
        }
    }
    1
}

fn graph_error_code(e: &GraphError) -> u8 {
    match e {
        GraphError::Truncation { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn parse_graph(s: &str) -> Result<WeightedGraph> {
    Ok(GraphSpec::parse(s)?.build()?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| Usage(format!("bad {what} `{v}`")).into()))
        .collect()
}

fn emit<C: Serialize, R: Serialize>(cli: &Cli, kind: &str, config: C, result: R) -> Result<()> {
    let env = Envelope::new(kind, config, result);
    let text = env.to_json();
    OutDir::new(&cli.out_dir)?.write(&format!("{kind}.json"), &text)?;
    println!("{text}");
    Ok(())
}

/// Merge the config file (if any) with command-line overrides.
fn resolve(cli: &Cli, args: &ProblemArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(|e| Usage(format!("{e:#}")))?,
        None => {
            let (Some(graph), Some(psi), Some(p)) = (&args.graph, &args.psi, args.p) else {
                return usage("need --graph, --psi and --p (or --config)");
            };
            ExperimentConfig {
                graph: GraphSpec::parse(graph)?,
                psi: PsiSpec::parse(psi)?,
                p,
                lambda: None,
                lambda_grid: None,
                direction: None,
                solver: SolverConfig::default(),
                bounds: BoundsRequest::default(),
                out_dir: None,
            }
        }
    };
    if let Some(g) = &args.graph {
        cfg.graph = GraphSpec::parse(g)?;
    }
    if let Some(s) = &args.psi {
        cfg.psi = PsiSpec::parse(s)?;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(l) = args.lambda {
        cfg.lambda = Some(l);
        cfg.lambda_grid = None;
    }
    if let Some(t) = args.t_max {
        cfg.solver.t_max = t;
    }
    Ok(cfg)
}

fn validated(cfg: ExperimentConfig) -> Result<ExperimentConfig> {
    cfg.validate().map_err(|e| Usage(format!("{e:#}")))?;
    Ok(cfg)
}

fn lambda_of(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.lambda.map_or_else(|| usage("need --lambda"), Ok)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Graph { query } => graph_cmd(cli, query),
        Command::Spectrum(a) => spectrum_cmd(cli, a),
        Command::Kernel(a) => kernel_cmd(cli, a),
        Command::Cde(a) => cde_cmd(cli, a),
        Command::Simulate(a) => simulate_cmd(cli, a),
        Command::Lifespan(a) => lifespan_cmd(cli, a),
        Command::Bounds(a) => bounds_cmd(cli, a),
        Command::Sweep(a) => sweep_cmd(cli, a),
        Command::Scenario { name, list } => scenario_cmd(cli, name.as_deref(), *list),
        Command::Plotdata { input, output } => plotdata_cmd(input, output.as_deref()),
    }
}

fn graph_cmd(cli: &Cli, q: &GraphQuery) -> Result<u8> {
    match q {
        GraphQuery::Info { graph } => {
            let g = parse_graph(graph)?;
            let result = json!({
                "vertices": g.len(),
                "edges": g.edge_count(),
                "constants": graph_constants(&g),
                "truncation": g.truncation().map(|t| json!({"center": g.id(t.center), "radius": t.radius})),
            });
            emit(cli, "graph-info", json!({"graph": graph}), result)?;
        }
        GraphQuery::Ball { graph, center, radius } => {
            let g = parse_graph(graph)?;
            let ball = g.ball(g.index_of(center)?, *radius)?;
            let ids: Vec<&str> = ball.iter().map(|&x| g.id(x)).collect();
            let result = json!({"center": center, "radius": radius, "ids": ids, "volume": g.volume(&ball)?});
            emit(cli, "graph-ball", json!({"graph": graph}), result)?;
        }
        GraphQuery::Vgfit { graph, center, r_max } => {
            let g = parse_graph(graph)?;
            let fit = volume_growth_fit(&g, g.index_of(center)?, *r_max)?;
            emit(cli, "vgfit", json!({"graph": graph, "r_max": r_max}), fit)?;
        }
    }
    Ok(0)
}

fn spectrum_cmd(cli: &Cli, a: &SpectrumArgs) -> Result<u8> {
    let g = parse_graph(&a.graph)?;
    let config = json!({"graph": a.graph});
    if a.ec_search {
        let x = g.index_of(&a.anchor)?;
        let w = ec_witness_search(&g, x, a.eps, a.delta, a.size_cap)?;
        let cfg = json!({"graph": a.graph, "anchor": a.anchor, "eps": a.eps, "delta": a.delta, "size_cap": a.size_cap});
        let found = w.is_some();
        emit(cli, "witness", cfg, w)?;
        return Ok(if found { 0 } else { 1 });
    }
    if let Some(id) = &a.ghost {
        let gs = ghost_vertex_ground_state(&g, g.index_of(id)?)?;
        emit(cli, "ground-state", config, gs)?;
        return Ok(0);
    }
    let ids: Vec<String> = match (&a.omega_file, &a.interior) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("interior file: {e}")))?
        }
        (None, Some(list)) => list.split(',').map(|s| s.trim().to_string()).collect(),
        (None, None) => return usage("give --omega-file, --interior, --ghost or --ec-search"),
    };
    let interior = ids.iter().map(|id| g.index_of(id)).collect::<Result<Vec<_>, _>>()?;
    let om = DomainSubset::from_interior(&g, &interior)?;
    let gs = dirichlet_ground_state(&g, &om)?;
    emit(cli, "ground-state", json!({"graph": a.graph, "interior": ids}), gs)?;
    Ok(0)
}

fn kernel_cmd(cli: &Cli, a: &KernelArgs) -> Result<u8> {
    let g = parse_graph(&a.graph)?;
    let times: Vec<f64> = parse_list(&a.t, "time")?;
    if a.audit {
        let audit = kernel_audit(&g, &times)?;
        let pass = audit.max_identity_violation() <= 1e-10 && audit.expm_vs_series <= 1e-9;
        emit(cli, "kernel-audit", json!({"graph": a.graph, "t": times}), audit)?;
        return Ok(if pass { 0 } else { 1 });
    }
    let &[t] = times.as_slice() else {
        return usage("kernel without --audit takes a single --t");
    };
    let method = match a.method {
        MethodArg::Expm => KernelMethod::Expm,
        MethodArg::Series => KernelMethod::Series,
    };
    let k = heat_kernel(&g, t, method)?;
    let config = json!({"graph": a.graph, "t": t, "method": method});
    if a.csv {
        let mut rows = Vec::with_capacity(g.len() * g.len());
        for x in 0..g.len() {
            for y in 0..g.len() {
                rows.push(vec![g.id(x).to_string(), g.id(y).to_string(), num(k.get(x, y))]);
            }
        }
        let text = render_csv(&graphblow_cli::config_hash(&config), &["x", "y", "value"], &rows)?;
        OutDir::new(&cli.out_dir)?.write("kernel.csv", &text)?;
    }
    let matrix: BTreeMap<&str, BTreeMap<&str, f64>> = (0..g.len())
        .map(|x| (g.id(x), (0..g.len()).map(|y| (g.id(y), k.get(x, y))).collect()))
        .collect();
    emit(cli, "kernel", config, json!({"t": t, "method": method, "kernel": matrix}))?;
    Ok(0)
}

fn cde_cmd(cli: &Cli, a: &CdeArgs) -> Result<u8> {
    let g = parse_graph(&a.graph)?;
    let x = g.index_of(&a.vertex)?;
    let variant = match a.variant {
        VariantArg::Cde => CdeVariant::Cde,
        VariantArg::CdePrime => CdeVariant::CdePrime,
    };
    let mode = match a.mode {
        ModeArg::Falsify => CdeMode::Falsify {
            budget: a.budget,
            seed: cli.seed,
        },
        ModeArg::Verify => {
            let Some(path) = &a.f else {
                return usage("verify mode needs --f");
            };
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let values: BTreeMap<String, f64> =
                serde_json::from_str(&text).map_err(|e| Usage(format!("f file: {e}")))?;
            let mut f = VertexFunction::on(g.len(), &[], |_| 0.0);
            for (id, v) in values {
                f.set(g.index_of(&id)?, v);
            }
            CdeMode::Verify(f)
        }
    };
    let r = cde_check(&g, x, a.n, a.k, variant, &mode)?;
    let config = json!({"graph": a.graph, "vertex": a.vertex, "n": a.n, "K": a.k, "variant": variant, "seed": cli.seed});
    emit(cli, "cde", config, r)?;
    Ok(0)
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> Result<u8> {
    let cfg = validated(resolve(cli, &a.problem)?)?;
    let lambda = lambda_of(&cfg)?;
    let g = cfg.graph.build()?;
    let data: Vec<f64> = cfg.psi.evaluate(&g)?.into_iter().map(|v| lambda * v).collect();
    let mut opts = cfg.solver.integrate_options();
    opts.boundary = Boundary::natural(&g);
    let n = a.samples.max(1);
    opts.output_times = (1..=n).map(|k| cfg.solver.t_max * k as f64 / n as f64).collect();
    let r = integrate(&g, &data, cfg.p, &opts)?;
    let mut rows = Vec::new();
    for s in &r.samples {
        for (x, u) in s.u.iter().enumerate() {
            rows.push(vec![num(s.t), g.id(x).to_string(), num(*u)]);
        }
    }
    let out = OutDir::new(&cli.out_dir)?;
    out.write("trajectory.csv", &render_csv(&cfg.hash(), &["t", "vertex_id", "u"], &rows)?)?;
    let summary = json!({"status": r.status, "stats": r.stats, "samples": r.samples.len()});
    emit(cli, "simulate", &cfg, summary)?;
    Ok(0)
}

fn lifespan_cmd(cli: &Cli, a: &LifespanArgs) -> Result<u8> {
    let mut cfg = resolve(cli, &a.problem)?;
    if let Some(t) = a.tol {
        cfg.solver.tol = t;
    }
    if let Some(s) = &a.radius_schedule {
        let parts: Vec<usize> = s
            .split(':')
            .map(|v| v.parse().map_err(|_| Usage(format!("bad radius schedule `{s}`"))))
            .collect::<Result<_, _>>()?;
        let &[initial, count] = parts.as_slice() else {
            return usage("radius schedule is `initial:count`");
        };
        cfg.solver.initial_radius = initial;
        cfg.solver.max_radii = count;
    }
    let cfg = validated(cfg)?;
    let lambda = lambda_of(&cfg)?;
    let est = estimate_lifespan(&cfg.target()?, &cfg.psi, lambda, cfg.p, &cfg.solver.lifespan_options())?;
    emit(cli, "lifespan", &cfg, est)?;
    Ok(0)
}

fn bounds_cmd(cli: &Cli, a: &BoundsArgs) -> Result<u8> {
    let mut cfg = validated(resolve(cli, &a.problem)?)?;
    let lambda = lambda_of(&cfg)?;
    let g = cfg.graph.build()?;
    let finite = g.truncation().is_none();
    let req = &mut cfg.bounds;
    if a.all || a.kaplan {
        req.kaplan_r_cap = Some(a.kaplan_radius);
    }
    if let Some(id) = &a.hk {
        req.heat_kernel = Some((id.clone(), a.hk_t_max));
    }
    if a.density || (a.all && g.coords().is_some()) {
        let grid = match &a.r_grid {
            Some(s) => parse_list(s, "radius")?,
            None => {
                let r = g.truncation().map_or(0, |t| t.radius / 2);
                (1..=r.max(1)).collect()
            }
        };
        req.density = Some((a.beta, grid));
    }
    if a.sandwich || (a.all && finite) {
        req.sandwich = true;
    }
    if a.tail || (a.all && !finite) {
        req.tail = true;
    }
    if a.psi_inf.is_some() {
        req.psi_inf = a.psi_inf;
    }
    if let Some(id) = &a.ghost {
        req.finite_threshold = Some(id.clone());
    }
    let report = compute_bounds(&g, &cfg.psi, lambda, cfg.p, &cfg.bounds)?;
    let rows: Vec<Vec<String>> = std::iter::once(vec!["lower_basic".to_string(), num(report.lower_basic)])
        .chain(report.upper_bounds().into_iter().map(|(n, v)| vec![n.to_string(), num(v)]))
        .collect();
    OutDir::new(&cli.out_dir)?.write("bounds.csv", &render_csv(&cfg.hash(), &["bound", "value"], &rows)?)?;
    emit(cli, "bounds", &cfg, report)?;
    Ok(0)
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> Result<u8> {
    let mut cfg = resolve(cli, &a.problem)?;
    if let Some(s) = &a.lambdas {
        cfg.lambda_grid = Some(parse_list(s, "λ")?);
        cfg.lambda = None;
    }
    if let Some(d) = a.direction {
        cfg.direction = Some(match d {
            DirectionArg::Large => Direction::Large,
            DirectionArg::Small => Direction::Small,
        });
    }
    let cfg = validated(cfg)?;
    let Some(grid) = cfg.lambda_grid.clone() else {
        return usage("need --lambdas or lambda_grid");
    };
    let direction = cfg.direction.unwrap_or(Direction::Large);
    let opts = SweepOptions {
        lifespan: cfg.solver.lifespan_options(),
        step_budget: cfg.solver.step_budget,
        kaplan_r_cap: Some(3),
    };
    let table = asymptotic_sweep(&cfg.target()?, &cfg.psi, cfg.p, &grid, direction, &opts)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let upper = r.upper_scaled.iter().map(|u| u.1).reduce(f64::min);
            vec![
                num(r.lambda),
                r.scaled.map(num).unwrap_or_default(),
                num(r.lower_scaled),
                upper.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    OutDir::new(&cli.out_dir)?.write(
        "sweep.csv",
        &render_csv(&cfg.hash(), &graphblow_cli::presets::SWEEP_HEADER, &rows)?,
    )?;
    emit(cli, "sweep", &cfg, table)?;
    Ok(0)
}

fn scenario_cmd(cli: &Cli, name: Option<&str>, list: bool) -> Result<u8> {
    if list {
        for (n, d) in PRESETS {
            println!("{n:26} {d}");
        }
        return Ok(0);
    }
    let Some(name) = name else {
        return usage("give a preset name or --list");
    };
    let out = OutDir::new(&cli.out_dir)?;
    let report = run_scenario(name, cli.seed, &out)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!(
        "{} {} ({:.2} s)",
        report.name,
        if report.passed { "passed" } else { "FAILED" },
        report.seconds
    );
    Ok(if report.passed { 0 } else { 1 })
}

fn plotdata_cmd(input: &Path, output: Option<&Path>) -> Result<u8> {
    let text = emit_plotdata(input).map_err(|e| anyhow!(Usage(format!("{e:#}"))))?;
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}
