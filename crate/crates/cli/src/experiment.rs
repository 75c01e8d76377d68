//! Factorial experiment sweeps: generate, approximate, predict, solve,
//! record. Cells run in parallel but records are reduced in manifest
//! order, so output bytes do not depend on scheduling.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use tspts_core::approx::{feasible_distributional, feasible_sampled, mts_length, sampling_length};
use tspts_core::genbench::{generate_instance, GenConfig, GeneratedInstance, TemporalMode, TsScheme};
use tspts_core::solver::{brute_force_solve, build_dag, solve_with_stop, SolveOptions, SolveStatus};

use crate::metrics::{self, FeasibilityRecord, GapRecord, SummaryRow};
use crate::report;

/// Experiment description, read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub side_a: f64,
    /// Defaults to fifteen diameters of the square.
    #[serde(default)]
    pub horizon_h: Option<f64>,
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    /// `"identical"` or `"repulsion:<p>"`.
    pub ts_schemes: Vec<String>,
    /// `"uniform"`, `"one_mode"`, `"two_mode"`.
    pub temporal_modes: Vec<String>,
    pub replicates: usize,
    #[serde(default = "default_threshold")]
    pub exact_threshold: usize,
    /// Solve oversized slots heuristically instead of regenerating.
    #[serde(default)]
    pub heuristic_fallback: bool,
    /// Redraw an instance whose largest slot exceeds the exact threshold.
    #[serde(default = "default_true")]
    pub regenerate_oversized: bool,
    #[serde(default = "default_max_regen")]
    pub max_regenerations: usize,
    #[serde(default = "default_budget")]
    pub time_budget_secs: f64,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Cross-check every exact cost against the brute-force oracle
    /// (instances with more than ten clients fail the run).
    #[serde(default)]
    pub oracle_check: bool,
}

fn default_threshold() -> usize {
    18
}
fn default_true() -> bool {
    true
}
fn default_max_regen() -> usize {
    200
}
fn default_budget() -> f64 {
    60.0
}

pub fn parse_ts_scheme(s: &str) -> Result<TsScheme> {
    if s == "identical" {
        return Ok(TsScheme::Identical);
    }
    if let Some(p) = s.strip_prefix("repulsion:") {
        let p: u32 = p.parse().context("repulsion parameter must be an integer")?;
        if p < 1 {
            bail!("repulsion parameter must be at least 1");
        }
        return Ok(TsScheme::Repulsion { p });
    }
    bail!("unknown slot scheme '{s}' (expected 'identical' or 'repulsion:<p>')")
}

pub fn scheme_name(s: TsScheme) -> String {
    match s {
        TsScheme::Identical => "identical".to_string(),
        TsScheme::Repulsion { p } => format!("repulsion:{p}"),
    }
}

pub fn parse_temporal_mode(s: &str) -> Result<TemporalMode> {
    match s {
        "uniform" => Ok(TemporalMode::Uniform),
        "one_mode" => Ok(TemporalMode::OneMode),
        "two_mode" => Ok(TemporalMode::TwoMode),
        other => bail!("unknown temporal mode '{other}'"),
    }
}

pub fn mode_name(m: TemporalMode) -> &'static str {
    match m {
        TemporalMode::Uniform => "uniform",
        TemporalMode::OneMode => "one_mode",
        TemporalMode::TwoMode => "two_mode",
    }
}

#[derive(Debug, Clone)]
struct Cell {
    ordinal: usize,
    n: usize,
    m: usize,
    scheme: TsScheme,
    mode: TemporalMode,
    replicate: usize,
}

impl Cell {
    fn id(&self) -> String {
        format!(
            "n{}-m{}-{}-{}-r{}",
            self.n,
            self.m,
            scheme_name(self.scheme),
            mode_name(self.mode),
            self.replicate
        )
    }
}

fn expand_cells(manifest: &Manifest) -> Result<Vec<Cell>> {
    if manifest.n_values.is_empty()
        || manifest.m_values.is_empty()
        || manifest.ts_schemes.is_empty()
        || manifest.temporal_modes.is_empty()
        || manifest.replicates == 0
    {
        bail!("manifest sweep lists and replicates must be non-empty");
    }
    let schemes: Vec<TsScheme> =
        manifest.ts_schemes.iter().map(|s| parse_ts_scheme(s)).collect::<Result<_>>()?;
    let modes: Vec<TemporalMode> =
        manifest.temporal_modes.iter().map(|s| parse_temporal_mode(s)).collect::<Result<_>>()?;
    let mut cells = Vec::new();
    let mut ordinal = 0;
    for &n in &manifest.n_values {
        for &m in &manifest.m_values {
            for &scheme in &schemes {
                for &mode in &modes {
                    for replicate in 0..manifest.replicates {
                        cells.push(Cell { ordinal, n, m, scheme, mode, replicate });
                        ordinal += 1;
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// Draws the cell's instance, regenerating while any slot exceeds the
/// exact threshold (when enabled). The redraw index is deterministic.
fn draw_instance(manifest: &Manifest, cell: &Cell) -> Result<(GeneratedInstance, usize)> {
    let horizon =
        manifest.horizon_h.unwrap_or_else(|| GenConfig::default_horizon(manifest.side_a));
    let cfg = GenConfig {
        n: cell.n,
        side_a: manifest.side_a,
        horizon_h: horizon,
        m: cell.m,
        ts_scheme: cell.scheme,
        temporal_mode: cell.mode,
        seed: manifest.seed,
    };
    let mut attempt = 0usize;
    loop {
        let index = (cell.ordinal as u64) * 1024 + attempt as u64;
        let gen = generate_instance(&cfg, index).context("instance generation failed")?;
        let oversized =
            gen.assignment.counts().iter().any(|&c| c > manifest.exact_threshold);
        if oversized && manifest.regenerate_oversized && !manifest.heuristic_fallback {
            attempt += 1;
            if attempt > manifest.max_regenerations {
                bail!(
                    "cell {} still oversized after {} redraws; raise exact_threshold or enable heuristic_fallback",
                    cell.id(),
                    manifest.max_regenerations
                );
            }
            continue;
        }
        return Ok((gen, attempt));
    }
}

fn run_cell(manifest: &Manifest, cell: &Cell) -> Result<(GapRecord, FeasibilityRecord)> {
    let (gen, _attempt) = draw_instance(manifest, cell)?;
    let area = gen.instance.area();
    let n = gen.instance.point_count();

    let approx_distributional = mts_length(n, &gen.partition, area)?;
    let approx_sampled = sampling_length(&gen.assignment, area, n)?;
    let predicted_distributional = feasible_distributional(n, &gen.partition, area)?.feasible;
    let predicted_sampled = feasible_sampled(&gen.assignment, &gen.partition, area)?;

    let opts = SolveOptions {
        exact_threshold: manifest.exact_threshold,
        heuristic_fallback: manifest.heuristic_fallback,
        ..SolveOptions::default()
    };
    let dag = build_dag(&gen.instance, &gen.partition, &gen.assignment, &opts)?;
    let started = Instant::now();
    let deadline = started + Duration::from_secs_f64(manifest.time_budget_secs);
    let mut result = solve_with_stop(&dag, &gen.instance, &opts, || Instant::now() > deadline);
    result.stats.wall_time = started.elapsed();

    if manifest.oracle_check {
        let oracle = brute_force_solve(&gen.instance, &gen.partition, &gen.assignment)
            .context("oracle check needs at most ten clients")?;
        if oracle.status != result.status {
            bail!("oracle check failed on {}: status mismatch", cell.id());
        }
        if let (Some(a), Some(b)) = (result.cost, oracle.cost) {
            if (a - b).abs() > 1e-9 * a.max(1.0) {
                bail!("oracle check failed on {}: cost {a} vs {b}", cell.id());
            }
        }
    }

    let (gap_distributional, gap_sampled) = match result.cost {
        Some(cost) => (
            Some(metrics::gap_percent(approx_distributional, cost)?),
            Some(metrics::gap_percent(approx_sampled, cost)?),
        ),
        None => (None, None),
    };
    let gap = GapRecord {
        id: cell.id(),
        n: cell.n,
        m: cell.m,
        ts_scheme: scheme_name(cell.scheme),
        temporal_mode: mode_name(cell.mode).to_string(),
        status: crate::json::status_str(result.status).to_string(),
        approx_distributional,
        approx_sampled,
        exact_cost: result.cost,
        gap_distributional,
        gap_sampled,
        hamiltonian_exact: result.stats.hamiltonian_exact,
    };
    let mut feas = FeasibilityRecord {
        id: cell.id(),
        n: cell.n,
        m: cell.m,
        ts_scheme: scheme_name(cell.scheme),
        temporal_mode: mode_name(cell.mode).to_string(),
        predicted_distributional,
        predicted_sampled,
        actual: match result.status {
            SolveStatus::Optimal => Some(true),
            SolveStatus::Infeasible => Some(false),
            SolveStatus::TimedOut => None,
        },
        class_distributional: None,
        class_sampled: None,
    };
    feas.classify();
    Ok((gap, feas))
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub gaps: Vec<GapRecord>,
    pub feasibility: Vec<FeasibilityRecord>,
    pub summary: Vec<SummaryRow>,
    pub timeout_fraction: f64,
}

/// Runs every cell of the manifest and writes `gaps.csv`,
/// `feasibility.csv`, `summary.csv` and the two SVG charts into `out_dir`.
pub fn run_experiment(manifest: &Manifest, out_dir: &Path) -> Result<ExperimentOutcome> {
    let cells = expand_cells(manifest)?;
    let worker_count = manifest
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
        .clamp(1, cells.len().max(1));

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<(GapRecord, FeasibilityRecord)>)>();
    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            let tx = tx.clone();
            let next = &next;
            let cells = &cells;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let out = run_cell(manifest, &cells[i]);
                if tx.send((i, out)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
    });

    let mut slots: Vec<Option<(GapRecord, FeasibilityRecord)>> =
        (0..cells.len()).map(|_| None).collect();
    for (i, out) in rx {
        slots[i] = Some(out?);
    }
    let mut gaps = Vec::with_capacity(cells.len());
    let mut feasibility = Vec::with_capacity(cells.len());
    for slot in slots {
        let (g, f) = slot.expect("every cell reports exactly once");
        gaps.push(g);
        feasibility.push(f);
    }

    let timeouts = gaps.iter().filter(|g| g.status == "timed_out").count();
    let timeout_fraction = timeouts as f64 / cells.len() as f64;
    let summary = metrics::summarize(&gaps, &feasibility)?;

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    std::fs::write(out_dir.join("gaps.csv"), report::gaps_csv(&gaps))?;
    std::fs::write(out_dir.join("feasibility.csv"), report::feasibility_csv(&feasibility))?;
    std::fs::write(out_dir.join("summary.csv"), report::summary_csv(&summary))?;
    std::fs::write(out_dir.join("gaps_by_m.svg"), gaps_by_m_chart(&summary))?;
    std::fs::write(out_dir.join("error_rates.svg"), error_rates_chart(&summary))?;

    Ok(ExperimentOutcome { gaps, feasibility, summary, timeout_fraction })
}

fn gaps_by_m_chart(summary: &[SummaryRow]) -> String {
    let mut ms: Vec<usize> = summary.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    let groups: Vec<(String, Vec<Option<f64>>)> = ms
        .iter()
        .map(|&m| {
            let rows: Vec<&SummaryRow> = summary.iter().filter(|r| r.m == m).collect();
            let avg = |pick: &dyn Fn(&SummaryRow) -> Option<f64>| {
                let vals: Vec<f64> = rows.iter().filter_map(|r| pick(r)).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            };
            (
                format!("m={m}"),
                vec![
                    avg(&|r| r.mean_abs_gap_distributional),
                    avg(&|r| r.mean_abs_gap_sampled),
                ],
            )
        })
        .collect();
    report::bar_chart_svg(
        "Mean absolute gap (%) by slot count",
        &["distributional", "sampled"],
        &groups,
    )
}

fn error_rates_chart(summary: &[SummaryRow]) -> String {
    let mut ns: Vec<usize> = summary.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let groups: Vec<(String, Vec<Option<f64>>)> = ns
        .iter()
        .map(|&n| {
            let rows: Vec<&SummaryRow> = summary.iter().filter(|r| r.n == n).collect();
            let avg = |pick: &dyn Fn(&SummaryRow) -> Option<f64>| {
                let vals: Vec<f64> = rows.iter().filter_map(|r| pick(r)).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            };
            (
                format!("n={n}"),
                vec![
                    avg(&|r| r.fp_rate_distributional),
                    avg(&|r| r.fn_rate_distributional),
                    avg(&|r| r.fp_rate_sampled),
                    avg(&|r| r.fn_rate_sampled),
                ],
            )
        })
        .collect();
    report::bar_chart_svg(
        "Feasibility error rates (%) by point count",
        &["FP distributional", "FN distributional", "FP sampled", "FN sampled"],
        &groups,
    )
}
