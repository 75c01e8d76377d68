//! `tspts` — instances, exact solves, closed-form approximations and
//! experiment sweeps for tours under slot-partitioned time windows.
//!
//! Exit codes: 0 success; 1 the input instance is infeasible where a tour
//! was required; 2 usage or input-format error; 3 the run was dominated by
//! timeouts (or a single solve timed out).

// `!(x > 0.0)` guards reject NaN; the positive comparison is the invariant
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tspts_cli::experiment::{self, Manifest};
use tspts_cli::json::{self, TemporalStructure};
use tspts_cli::metrics;
use tspts_core::approx::{
    self, bhh_length, feasible_distributional, feasible_sampled, induced_time_slots, mits_length,
    mts_bounds, mts_length, sampling_length, tsptw_upper_bound,
};
use tspts_core::genbench::{self, GenConfig};
use tspts_core::maxent::{wc_mits_length, wc_satisfiability, MaxEntConfig, SpatialMoments};
use tspts_core::solver::{build_dag, solve_with_stop, SolveOptions, SolveStatus};

#[derive(Parser)]
#[command(name = "tspts", version, about = "Tours under slot-partitioned time windows")]
struct Cli {
    /// Directory for generated files (default: current directory)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Base seed for anything random
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest slot solved by the exact Hamiltonian DP
    #[arg(long, global = true)]
    exact_threshold: Option<usize>,
    /// Per-solve wall-clock budget in seconds
    #[arg(long, global = true)]
    time_budget: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances as JSON files
    Generate(GenerateArgs),
    /// Solve an instance file to optimality
    Solve(SolveArgs),
    /// Print every closed-form approximation for an instance
    Approximate(ApproximateArgs),
    /// Evaluate both feasibility predictors for an instance
    Feasibility { instance: PathBuf },
    /// Run a manifest-driven sweep, emitting CSV tables and SVG charts
    Experiment { manifest: PathBuf },
    /// Reduce a time-windowed benchmark file to induced slots and bound it
    Induce(InduceArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Total point count, depot included
    #[arg(long)]
    n: usize,
    /// Side of the square area
    #[arg(long, default_value_t = 50.0)]
    side: f64,
    /// Planning horizon (default: 15 times the square's diameter)
    #[arg(long)]
    horizon: Option<f64>,
    /// Slot count
    #[arg(long)]
    m: usize,
    /// Slot scheme: identical | repulsion:<p>
    #[arg(long, default_value = "identical")]
    ts: String,
    /// Temporal mode: uniform | one_mode | two_mode
    #[arg(long, default_value = "uniform")]
    mode: String,
    /// How many instances to emit
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// First instance index within the seed's stream
    #[arg(long, default_value_t = 0)]
    start_index: u64,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Write the solution JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fall back to the heuristic Hamiltonian oracle on oversized slots
    #[arg(long)]
    heuristic_fallback: bool,
    /// Debug: route every slot through the heuristic oracle
    #[arg(long)]
    force_heuristic: bool,
    /// Debug: disable label dominance
    #[arg(long)]
    disable_dominance: bool,
    /// Debug: disable lower-bound pruning
    #[arg(long)]
    disable_binf: bool,
}

#[derive(Args)]
struct ApproximateArgs {
    instance: PathBuf,
    /// Worst-case temporal constraint: mean slot index (integer in 1..=m)
    #[arg(long)]
    mu_g: Option<f64>,
    /// Worst-case spatial constraint: mean as "x,y"
    #[arg(long)]
    spatial_mu: Option<String>,
    /// Worst-case spatial constraint: covariance as "s11,s12,s22"
    #[arg(long)]
    spatial_sigma: Option<String>,
}

#[derive(Args)]
struct InduceArgs {
    /// Benchmark file in the whitespace-column format
    file: PathBuf,
    /// Nominal side of the square area (default: largest coordinate)
    #[arg(long)]
    side: Option<f64>,
    /// Drop induced slots shorter than this fraction of the horizon
    #[arg(long, default_value_t = 0.0)]
    min_slot_frac: f64,
    /// Best-known tour cost, to report the bound's gap
    #[arg(long)]
    best_known: Option<f64>,
    /// Point count plugged into the formula: all points or clients only
    #[arg(long, default_value = "all", value_parser = ["all", "clients"])]
    count_convention: String,
    /// Redraw every window at this fixed width before inducing slots
    #[arg(long)]
    relax_width: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    match &cli.command {
        Command::Generate(args) => generate(&cli, args, &out_dir),
        Command::Solve(args) => solve_cmd(&cli, args),
        Command::Approximate(args) => approximate(args),
        Command::Feasibility { instance } => feasibility(instance),
        Command::Experiment { manifest } => experiment_cmd(&cli, manifest, &out_dir),
        Command::Induce(args) => induce(args, cli.seed.unwrap_or(0)),
    }
}

fn load_instance(path: &Path) -> Result<json::LoadedInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let parsed: json::InstanceJson =
        serde_json::from_str(&text).context("instance JSON does not match the schema")?;
    json::decode_instance(&parsed)
}

fn generate(cli: &Cli, args: &GenerateArgs, out_dir: &Path) -> Result<ExitCode> {
    let scheme = experiment::parse_ts_scheme(&args.ts)?;
    let mode = experiment::parse_temporal_mode(&args.mode)?;
    let seed = cli.seed.unwrap_or(0);
    let cfg = GenConfig {
        n: args.n,
        side_a: args.side,
        horizon_h: args.horizon.unwrap_or_else(|| GenConfig::default_horizon(args.side)),
        m: args.m,
        ts_scheme: scheme,
        temporal_mode: mode,
        seed,
    };
    std::fs::create_dir_all(out_dir)?;
    for k in 0..args.count {
        let idx = args.start_index + k;
        let gen = genbench::generate_instance(&cfg, idx)?;
        let encoded = json::encode_instance(
            &gen.instance,
            Some(&gen.partition),
            Some(&gen.assignment),
            None,
        );
        let name = format!(
            "instance-n{}-m{}-{}-{}-s{}-i{}.json",
            args.n,
            args.m,
            experiment::scheme_name(scheme).replace(':', ""),
            experiment::mode_name(mode),
            seed,
            idx
        );
        let path = out_dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(&encoded)?)?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn solve_options(cli: &Cli, args: &SolveArgs) -> SolveOptions {
    SolveOptions {
        exact_threshold: cli.exact_threshold.unwrap_or(18),
        heuristic_fallback: args.heuristic_fallback,
        force_heuristic: args.force_heuristic,
        disable_dominance: args.disable_dominance,
        disable_binf: args.disable_binf,
    }
}

fn solve_cmd(cli: &Cli, args: &SolveArgs) -> Result<ExitCode> {
    let loaded = load_instance(&args.instance)?;
    let (partition, assignment) = loaded.slotted()?;
    let opts = solve_options(cli, args);
    let dag = build_dag(&loaded.instance, &partition, &assignment, &opts)?;
    let started = Instant::now();
    let deadline = cli.time_budget.map(|s| started + Duration::from_secs_f64(s));
    let mut result = solve_with_stop(&dag, &loaded.instance, &opts, || {
        deadline.is_some_and(|d| Instant::now() > d)
    });
    result.stats.wall_time = started.elapsed();

    let encoded = serde_json::to_string_pretty(&json::encode_solution(&result))?;
    match &args.out {
        Some(path) => std::fs::write(path, encoded)?,
        None => println!("{encoded}"),
    }
    Ok(match result.status {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(1),
        SolveStatus::TimedOut => ExitCode::from(3),
    })
}

fn parse_pair(raw: &str) -> Result<[f64; 2]> {
    let parts: Vec<f64> =
        raw.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>()?;
    if parts.len() != 2 {
        bail!("expected two comma-separated numbers, got '{raw}'");
    }
    Ok([parts[0], parts[1]])
}

fn parse_triple(raw: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> =
        raw.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        bail!("expected three comma-separated numbers, got '{raw}'");
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn approximate(args: &ApproximateArgs) -> Result<ExitCode> {
    let path = &args.instance;
    let loaded = load_instance(path)?;
    let n = loaded.instance.point_count();
    let area = loaded.instance.area();
    let spatial = match (&args.spatial_mu, &args.spatial_sigma) {
        (Some(mu), Some(sigma)) => {
            let mu = parse_pair(mu)?;
            let [s11, s12, s22] = parse_triple(sigma)?;
            Some(
                SpatialMoments::new(mu, [[s11, s12], [s12, s22]])
                    .map_err(|e| anyhow!("invalid spatial moments: {e}"))?,
            )
        }
        (None, None) => None,
        _ => bail!("--spatial-mu and --spatial-sigma must be given together"),
    };
    let out = match &loaded.kind {
        TemporalStructure::Windowed { windows } => {
            let induced = induced_time_slots(windows)?;
            json!({
                "n": n,
                "area": area,
                "horizon": loaded.instance.horizon(),
                "bhh": bhh_length(n, area)?,
                "induced": {
                    "m_star": induced.m_star,
                    "m1": induced.m1,
                    "m2": induced.m2,
                    "upper_bound": tsptw_upper_bound(windows, n, area, 0.0)?,
                },
            })
        }
        _ => {
            let (partition, assignment) = loaded.slotted()?;
            let m = partition.slot_count();
            let (lower, upper) = mts_bounds(n, m, area)?;
            let mut out = json!({
                "n": n,
                "m": m,
                "area": area,
                "horizon": loaded.instance.horizon(),
                "beta": approx::beta_lookup(n)?,
                "bhh": bhh_length(n, area)?,
                "mits": mits_length(n, m, area)?,
                "mts": mts_length(n, &partition, area)?,
                "sampling": sampling_length(&assignment, area, n)?,
                "bounds": { "lower": lower, "upper": upper },
            });
            if args.mu_g.is_some() || spatial.is_some() {
                let cfg = MaxEntConfig::default();
                let sat = wc_satisfiability(
                    n,
                    m,
                    area,
                    loaded.instance.horizon(),
                    spatial.as_ref(),
                    args.mu_g,
                    &cfg,
                )
                .map_err(|e| anyhow!("worst-case evaluation failed: {e}"))?;
                out["worst_case"] = json!({
                    "mits": wc_mits_length(n, m, area, spatial.as_ref(), args.mu_g, &cfg)
                        .map_err(|e| anyhow!("worst-case evaluation failed: {e}"))?,
                    "satisfiable": sat.feasible,
                    "load": sat.load,
                    "threshold": sat.threshold,
                });
            }
            out
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}

fn feasibility(path: &Path) -> Result<ExitCode> {
    let loaded = load_instance(path)?;
    let (partition, assignment) = loaded.slotted()?;
    let n = loaded.instance.point_count();
    let area = loaded.instance.area();
    let dist = feasible_distributional(n, &partition, area)?;
    let sampled = feasible_sampled(&assignment, &partition, area)?;
    let out = json!({
        "distributional": {
            "feasible": dist.feasible,
            "n_max": dist.n_max,
            "l_min_required": dist.l_min_required,
        },
        "sampled": { "feasible": sampled },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}

fn experiment_cmd(cli: &Cli, manifest_path: &Path, out_dir: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let mut manifest: Manifest =
        serde_json::from_str(&text).context("manifest JSON does not match the schema")?;
    if let Some(seed) = cli.seed {
        manifest.seed = seed;
    }
    if let Some(t) = cli.exact_threshold {
        manifest.exact_threshold = t;
    }
    if let Some(b) = cli.time_budget {
        manifest.time_budget_secs = b;
    }
    let outcome = experiment::run_experiment(&manifest, out_dir)?;
    println!(
        "{} instances ({} timed out); tables and charts in {}",
        outcome.gaps.len(),
        outcome.gaps.iter().filter(|g| g.status == "timed_out").count(),
        out_dir.display()
    );
    for row in &outcome.summary {
        println!(
            "n={} m={} ts={} mode={}: mean|G| distr {} sampled {}; FN distr {} sampled {}",
            row.n,
            row.m,
            row.ts_scheme,
            row.temporal_mode,
            row.mean_abs_gap_distributional.map(|v| format!("{v:.2}%")).unwrap_or_else(|| "-".into()),
            row.mean_abs_gap_sampled.map(|v| format!("{v:.2}%")).unwrap_or_else(|| "-".into()),
            row.fn_rate_distributional.map(|v| format!("{v:.2}%")).unwrap_or_else(|| "-".into()),
            row.fn_rate_sampled.map(|v| format!("{v:.2}%")).unwrap_or_else(|| "-".into()),
        );
    }
    Ok(if outcome.timeout_fraction > 0.5 { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn induce(args: &InduceArgs, seed: u64) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let mut bench = genbench::parse_tsptw_instance(&text)?;
    if let Some(width) = args.relax_width {
        let mut rng = genbench::stream_rng(seed, 0, genbench::Stream::Relax);
        bench.time_windows = genbench::relax_time_windows(&bench, width, &mut rng)?;
    }
    let side = args.side.unwrap_or_else(|| bench.instance.side());
    if !(side > 0.0) {
        bail!("side must be positive");
    }
    let area = side * side;
    let n = match args.count_convention.as_str() {
        "all" => bench.instance.point_count(),
        "clients" => bench.instance.client_count(),
        other => return Err(anyhow!("unknown count convention '{other}'")),
    };
    let induced = induced_time_slots(&bench.time_windows)?;
    let bound = tsptw_upper_bound(&bench.time_windows, n, area, args.min_slot_frac)?;
    let gap = args
        .best_known
        .map(|best| metrics::gap_percent(bound, best))
        .transpose()?;
    let out = json!({
        "file": args.file.display().to_string(),
        "clients": bench.instance.client_count(),
        "n_used": n,
        "count_convention": args.count_convention,
        "side": side,
        "area": area,
        "horizon": bench.time_windows.horizon(),
        "beta": approx::beta_lookup(n)?,
        "m_star": induced.m_star,
        "m1": induced.m1,
        "m2": induced.m2,
        "min_slot_frac": args.min_slot_frac,
        "relax_width": args.relax_width,
        "upper_bound": bound,
        "best_known": args.best_known,
        "gap_percent": gap,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}
