//! `hermfair` command-line front end.
//!
//! Exit statuses: 0 success, 1 input or usage error, 2 infeasible problem,
//! 3 numerical solver failure.

mod error;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hermfair::model::{economic_utility, hi_cost};
use hermfair::population::{
    read_population_csv, replication_seed, sample_population, write_population_csv, ClickConfig,
    PopulationSpec, DEFAULT_GROUP_SIZE, RNG_STREAM_ID,
};
use hermfair::scenario::{
    aggregate, builtin_scenario, grid, run_sweep_with_jobs, write_aggregates_csv,
    write_records_csv, ScenarioId, ScenarioSpec, UptakeVariant,
};
use hermfair::solver::{solve, DEFAULT_BINARY_TOLERANCE, DEFAULT_ENUMERATION_CAP};
use hermfair::stats::{
    chi2_independence, conditional_proportions, read_table_csv, wilson_interval, Axis,
};
use hermfair::{ConstraintSet, GapKind, ModelParams, SolveMode, SolveRequest, SolveStatus};

use error::{CliError, CliResult, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "hermfair", version, about = "Fairness-constrained ad allocation with hermeneutical costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one allocation problem for a population file.
    Allocate(AllocateArgs),
    /// Run a replicated parameter sweep and write records, aggregates and metadata.
    Sweep(SweepArgs),
    /// Association tests and intervals on count data.
    Stats(StatsArgs),
    /// Sample a synthetic population and write it as CSV.
    ExportPopulation(ExportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Fractional,
    BinaryExact,
}

/// Model parameters; unset flags fall back to `--params` or the built-in defaults.
#[derive(Debug, Args)]
struct ParamArgs {
    /// JSON file holding a full parameter set.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta_a: Option<f64>,
    #[arg(long)]
    beta_b: Option<f64>,
    #[arg(long)]
    theta_a: Option<f64>,
    #[arg(long)]
    theta_b: Option<f64>,
    #[arg(long)]
    omega_a: Option<f64>,
    #[arg(long)]
    omega_b: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> CliResult<ModelParams> {
        let mut p = match &self.params {
            Some(path) => read_json(path)?,
            None => ModelParams::default(),
        };
        let overrides = [
            (self.alpha, &mut p.alpha),
            (self.beta_a, &mut p.beta_a),
            (self.beta_b, &mut p.beta_b),
            (self.theta_a, &mut p.theta_a),
            (self.theta_b, &mut p.theta_b),
            (self.omega_a, &mut p.omega_a),
            (self.omega_b, &mut p.omega_b),
            (self.xi, &mut p.xi),
            (self.gamma, &mut p.gamma),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
struct AllocateArgs {
    /// Population CSV with header `group,p,rho`.
    #[arg(long, value_name = "FILE")]
    population: PathBuf,
    #[arg(long, value_enum, default_value = "fractional")]
    mode: ModeArg,
    /// Enforce statistical parity of exposure.
    #[arg(long)]
    parity: bool,
    /// Enforce equality of opportunity.
    #[arg(long)]
    eo: bool,
    /// Enforce equality of hermeneutical opportunity.
    #[arg(long)]
    eho: bool,
    /// Enforce all three constraints.
    #[arg(long)]
    all: bool,
    /// Largest admissible |gap| (default 1e-6 fractional, 0.02 binary-exact).
    #[arg(long)]
    tol: Option<f64>,
    /// Largest population binary-exact will enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    #[command(flatten)]
    model: ParamArgs,
    /// Directory for `allocation.csv` and `summary.json`; summary and decisions go to stdout otherwise.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["scenario", "config"])))]
struct SweepArgs {
    /// Built-in scenario: A, B, C, D, gamma or baseline.
    #[arg(long)]
    scenario: Option<ScenarioId>,
    /// JSON scenario spec; flags below override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Uptake variant: main, a-adv, neutral-high or neutral-low.
    #[arg(long)]
    uptake: Option<UptakeVariant>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Replications per grid value.
    #[arg(long)]
    reps: Option<usize>,
    /// Grid for the varying parameter: `start:end:step` or a comma list.
    #[arg(long)]
    grid: Option<String>,
    /// Group A size.
    #[arg(long)]
    na: Option<usize>,
    /// Group B size.
    #[arg(long)]
    nb: Option<usize>,
    /// Constraint tolerance for the LP.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads (0 = all cores). Output never depends on this.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(subcommand)]
    test: StatsTest,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Debug, Subcommand)]
enum StatsTest {
    /// Pearson χ² test of independence with Cramér's V.
    Chi2 {
        /// Table CSV: header `label,col1,col2,...`, then `row,count,count,...`.
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
    },
    /// Wilson score interval for a binomial proportion.
    Wilson {
        #[arg(long)]
        successes: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Conditional proportions of every cell with Wilson intervals.
    Proportions {
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
        #[arg(long, value_enum, default_value = "rows")]
        axis: AxisArg,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Rows,
    Cols,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long, default_value = "main")]
    uptake: UptakeVariant,
    #[arg(long, default_value_t = DEFAULT_GROUP_SIZE)]
    na: usize,
    #[arg(long, default_value_t = DEFAULT_GROUP_SIZE)]
    nb: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Derive the seed of this sweep replication from `--seed`.
    #[arg(long)]
    replication: Option<u64>,
    /// Output file; stdout otherwise.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { EXIT_OK as u8 });
        }
    };
    let outcome = match cli.command {
        Command::Allocate(args) => cmd_allocate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Stats(args) => cmd_stats(&args),
        Command::ExportPopulation(args) => cmd_export(&args),
    };
    match outcome {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    writeln!(w).and_then(|()| w.flush()).map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn print_json(value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: PathBuf::from("<stdout>"),
        source,
    })?;
    println!("{text}");
    Ok(())
}

fn cmd_allocate(args: &AllocateArgs) -> CliResult<()> {
    let params = args.model.resolve()?;
    let file = File::open(&args.population).map_err(|e| CliError::io(&args.population, e))?;
    let population = read_population_csv(file).map_err(|e| {
        CliError::Usage(format!("{}: {e}", args.population.display()))
    })?;

    let mode = match args.mode {
        ModeArg::Fractional => SolveMode::Fractional,
        ModeArg::BinaryExact => SolveMode::BinaryExact,
    };
    let tolerance = args.tol.unwrap_or(match mode {
        SolveMode::Fractional => ConstraintSet::DEFAULT_TOLERANCE,
        SolveMode::BinaryExact => DEFAULT_BINARY_TOLERANCE,
    });
    let mut constraints = if args.all { ConstraintSet::all() } else { ConstraintSet::none() };
    for (flag, kind) in [
        (args.parity, GapKind::Parity),
        (args.eo, GapKind::Opportunity),
        (args.eho, GapKind::HermOpportunity),
    ] {
        if flag {
            constraints.set(kind, true);
        }
    }
    let constraints = constraints.with_tolerance(tolerance);
    let request = SolveRequest::new(&population, params)
        .with_constraints(constraints)
        .with_mode(mode)
        .with_enumeration_cap(args.cap);

    let active: Vec<String> = constraints.active().map(|k| k.to_string()).collect();
    let result = match solve(&request) {
        Ok(r) => r,
        Err(e) => {
            let err = CliError::from(e);
            if err.exit_code() == EXIT_INFEASIBLE {
                if let Some(dir) = &args.out {
                    ensure_dir(dir)?;
                    let summary = json!({
                        "status": "infeasible",
                        "error": err.to_string(),
                        "constraints": active,
                        "tolerance": tolerance,
                        "params": params,
                    });
                    write_json(&dir.join("summary.json"), &summary)?;
                }
            }
            return Err(err);
        }
    };

    let alloc = &result.allocation;
    let decisions = alloc.decisions();
    let summary = json!({
        "status": result.status.as_str(),
        "mode": match mode { SolveMode::Fractional => "fractional", SolveMode::BinaryExact => "binary-exact" },
        "objective": result.objective,
        "economic_utility": economic_utility(&population, alloc, &params)?,
        "hi_cost": hi_cost(&population, alloc, &params)?,
        "gaps": { "parity": result.gaps.parity, "eo": result.gaps.eo, "eho": result.gaps.eho },
        "constraints": active,
        "tolerance": tolerance,
        "params": params,
        "n_a": population.n_a(),
        "n_b": population.n_b(),
        "shown": decisions.iter().sum::<f64>(),
        "fractional_users": alloc.fractional_count(),
    });
    if result.status == SolveStatus::ToleranceRelaxed {
        eprintln!("warning: constraint residual exceeds the tolerance by less than the solver limit");
    }

    match &args.out {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = dir.join("allocation.csv");
            let mut w = create(&path)?;
            let io_err = |e| CliError::io(&path, e);
            writeln!(w, "group,p,rho,d").map_err(io_err)?;
            for (u, d) in population.users().iter().zip(decisions) {
                writeln!(w, "{},{},{},{}", u.group, u.p, u.rho, d).map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
            write_json(&dir.join("summary.json"), &summary)?;
            print_json(&summary)
        }
        None => {
            let mut full = summary;
            full["decisions"] = json!(decisions);
            print_json(&full)
        }
    }
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = |what: &str| CliError::Usage(format!("--grid '{text}': {what}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, end, step] = parts[..] else {
            return Err(bad("expected start:end:step"));
        };
        let (start, end, step) = (number(start)?, number(end)?, number(step)?);
        if !(step > 0.0 && end >= start) {
            return Err(bad("need step > 0 and end >= start"));
        }
        grid(start, end, step)
    } else {
        text.split(',').map(number).collect::<CliResult<Vec<_>>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("grid must hold finite values"));
    }
    Ok(values)
}

fn sweep_spec(args: &SweepArgs) -> CliResult<ScenarioSpec> {
    let mut spec = match (&args.config, args.scenario) {
        (Some(path), _) => read_json::<ScenarioSpec>(path)?,
        (None, Some(id)) => builtin_scenario(id, args.uptake.unwrap_or(UptakeVariant::Main)),
        (None, None) => unreachable!("clap requires --scenario or --config"),
    };
    if let Some(uptake) = args.uptake {
        spec.uptake = uptake;
        spec.population.uptake = uptake.config();
    }
    if let Some(reps) = args.reps {
        spec.replications = reps;
    }
    if let Some(g) = &args.grid {
        spec.grid = parse_grid(g)?;
    }
    if let Some(na) = args.na {
        spec.population.n_a = na;
    }
    if let Some(nb) = args.nb {
        spec.population.n_b = nb;
    }
    if let Some(tol) = args.tol {
        spec.lp_tolerance = tol;
    }
    spec.validate()?;
    Ok(spec)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let spec = sweep_spec(args)?;
    ensure_dir(&args.out)?;
    let started = Instant::now();
    let sweep = run_sweep_with_jobs(&spec, args.seed, args.jobs)?;
    let wall = started.elapsed().as_secs_f64();
    let rows = aggregate(&sweep);

    let path = args.out.join("records.csv");
    write_records_csv(create(&path)?, &sweep)?;
    let path = args.out.join("aggregates.csv");
    write_aggregates_csv(create(&path)?, &rows)?;
    write_json(&args.out.join("aggregates.json"), &rows)?;
    write_json(&args.out.join("spec.json"), &spec)?;

    let failures: Vec<_> = sweep
        .records
        .iter()
        .filter(|r| r.error.is_some())
        .map(|r| {
            json!({
                "rule": r.rule.name(),
                "param_value": r.param_value,
                "replication": r.replication,
                "error": r.error,
            })
        })
        .collect();
    let metadata = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "rng_stream": RNG_STREAM_ID,
        "seed": args.seed,
        "scenario": spec.id.name(),
        "uptake": spec.uptake.name(),
        "param": spec.param.name(),
        "grid": spec.grid,
        "replications": spec.replications,
        "n_a": spec.population.n_a,
        "n_b": spec.population.n_b,
        "lp_tolerance": spec.lp_tolerance,
        "records": sweep.records.len(),
        "failed": sweep.failed(),
        "failure_rate": sweep.failure_rate(),
        "failures": failures,
        "jobs": args.jobs,
        "wall_time_s": wall,
        "rerun": format!(
            "hermfair sweep --config spec.json --seed {} --out <dir>",
            args.seed
        ),
    });
    write_json(&args.out.join("metadata.json"), &metadata)?;
    eprintln!(
        "{} records ({} failed) in {wall:.1}s -> {}",
        sweep.records.len(),
        sweep.failed(),
        args.out.display()
    );
    Ok(())
}

fn read_table(path: &Path) -> CliResult<hermfair::stats::ContingencyTable> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_table_csv(file).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn cmd_stats(args: &StatsArgs) -> CliResult<()> {
    match &args.test {
        StatsTest::Chi2 { table } => {
            let table = read_table(table)?;
            let r = chi2_independence(&table);
            if args.pretty {
                println!(
                    "chi2 = {:.3}  dof = {}  p = {:.4e}  log10(p) = {:.3}  V = {:.3}  n = {}{}",
                    r.statistic,
                    r.dof,
                    r.p_value,
                    r.log10_p,
                    r.cramers_v,
                    r.n,
                    if r.yates_corrected { "  (Yates)" } else { "" }
                );
                Ok(())
            } else {
                print_json(&json!({ "test": "chi2", "table": table, "result": r }))
            }
        }
        StatsTest::Wilson {
            successes,
            n,
            confidence,
        } => {
            let w = wilson_interval(*successes, *n, *confidence)?;
            if args.pretty {
                println!(
                    "{successes}/{n} = {:.3}  {:.0}% CI [{:.3}, {:.3}]",
                    w.point,
                    100.0 * w.confidence,
                    w.lo,
                    w.hi
                );
                Ok(())
            } else {
                print_json(&json!({ "test": "wilson", "successes": successes, "n": n, "result": w }))
            }
        }
        StatsTest::Proportions {
            table,
            axis,
            confidence,
        } => {
            let table = read_table(table)?;
            let axis = match axis {
                AxisArg::Rows => Axis::Rows,
                AxisArg::Cols => Axis::Cols,
            };
            let cells = conditional_proportions(&table, axis, *confidence)?;
            if args.pretty {
                for (label, row) in table.row_labels().iter().zip(&cells) {
                    let parts: Vec<String> = table
                        .col_labels()
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| {
                            format!(
                                "{c}: {}/{} = {:.3} [{:.3}, {:.3}]",
                                cell.count, cell.n, cell.proportion, cell.interval.lo, cell.interval.hi
                            )
                        })
                        .collect();
                    println!("{label}  {}", parts.join("  "));
                }
                Ok(())
            } else {
                print_json(&json!({ "test": "proportions", "axis": axis, "table": table, "cells": cells }))
            }
        }
    }
}

fn cmd_export(args: &ExportArgs) -> CliResult<()> {
    let seed = match args.replication {
        Some(i) => replication_seed(args.seed, i),
        None => args.seed,
    };
    let spec = PopulationSpec {
        n_a: args.na,
        n_b: args.nb,
        uptake: args.uptake.config(),
        click: ClickConfig::default(),
        seed,
    };
    let population = sample_population(&spec)?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_population_csv(&mut w, &population)?;
            w.flush().map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            write_population_csv(stdout.lock(), &population)?;
            Ok(())
        }
    }
}
