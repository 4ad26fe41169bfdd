//! `combgame`: batch experiments, complexity and single-run traces.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use combgame::complexity::{compute_complexity, lower_bound, DEFAULT_MAX_ITER, DEFAULT_TOL};
use combgame::experiments::{
    default_workers, emit_csv, emit_run_trace, run_batch, run_rng, write_csv, write_run_trace, BatchSummary, Scenario,
    WORKERS_ENV,
};
use combgame::game::{run_combgame, GameConfig};
use combgame::learners::LearnerKind;

use config::{FileConfig, GameArgs, ScenarioArgs, DEFAULT_RUNS};

#[derive(Debug, Parser)]
#[command(name = "combgame", version, about = "Pure exploration in combinatorial semi-bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte-Carlo batches, one CSV row per learner.
    Run(RunArgs),
    /// Complexity of a scenario and the lower bound it implies.
    Complexity(ComplexityArgs),
    /// Per-round records of one run.
    Trace(TraceArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    game: GameArgs,
    /// hedge, adahedge, ofw, lloo or uniform; repeat or separate with commas.
    #[arg(long = "learner", value_delimiter = ',')]
    learners: Vec<LearnerKind>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to $COMBGAME_WORKERS, else the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Summary CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ComplexityArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Confidence for the lower bound.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Debug, clap::Args)]
struct TraceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = LearnerKind::Lloo)]
    learner: LearnerKind,
    /// The run uses stream 0 of this seed, like the first run of a batch.
    #[arg(long)]
    seed: Option<u64>,
    /// Trace CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(path: Option<&PathBuf>) -> Result<FileConfig> {
    path.map_or_else(|| Ok(FileConfig::default()), |p| FileConfig::load(p))
}

fn scenario(args: &ScenarioArgs, file: &FileConfig) -> Result<Scenario> {
    let spec = args.apply(file.scenario.clone());
    spec.build().with_context(|| format!("building scenario {}", spec.kind))
}

fn run(args: RunArgs) -> Result<()> {
    let file = load(args.config.as_ref())?;
    let scenario = scenario(&args.scenario, &file)?;
    let learners = match (args.learners.is_empty(), file.learners.is_empty()) {
        (false, _) => args.learners.clone(),
        (true, false) => file.learners.clone(),
        (true, true) => vec![GameConfig::default().learner],
    };
    let runs = args.runs.or(file.runs).unwrap_or(DEFAULT_RUNS);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let workers = args.workers.or(file.workers).unwrap_or_else(default_workers);
    if workers == 0 {
        bail!("workers must be at least 1 (flag, config or {WORKERS_ENV})");
    }
    let mut summaries: Vec<BatchSummary> = Vec::with_capacity(learners.len());
    for learner in learners {
        let config = GameConfig {
            seed,
            ..args.game.config(&file, learner)
        };
        let s = run_batch(&scenario, &config, runs, seed, workers)?;
        eprintln!(
            "{} d={} {learner}: mean tau {:.1} [{:.0}, {:.0}], errors {}/{}, {:.0} ns/round, {:.2}s",
            s.scenario,
            s.d,
            s.stats.mean_tau,
            s.stats.q1_tau,
            s.stats.q3_tau,
            s.stats.error_count,
            s.stats.runs,
            s.timing.mean_round_nanos,
            s.timing.total_seconds
        );
        summaries.push(s);
    }
    match args.out.or(file.out) {
        Some(path) => emit_csv(&summaries, &path)?,
        None => write_csv(&summaries, std::io::stdout().lock())?,
    }
    Ok(())
}

fn complexity(args: ComplexityArgs) -> Result<()> {
    let file = load(args.config.as_ref())?;
    let s = scenario(&args.scenario, &file)?;
    let delta = args.delta.or(file.delta).unwrap_or(GameConfig::default().delta);
    let c = compute_complexity(&s.instance, &s.actions, &s.answers, args.tol, args.max_iter)?;
    let lb = lower_bound(delta, c.value)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "scenario {} (d = {}, best {})", s.name, s.dim(), s.expected_best)?;
    writeln!(out, "complexity {:.9}", c.value)?;
    writeln!(out, "dual bound {:.9}", c.dual)?;
    writeln!(out, "residual {:.3e} after {} iterations", c.residual, c.iterations)?;
    writeln!(out, "lower bound on E[tau] at delta = {delta}: {:.1}{}", lb.value, if lb.vacuous { " (vacuous)" } else { "" })?;
    let alloc: Vec<String> = c.allocation.iter().map(|w| format!("{w:.6}")).collect();
    writeln!(out, "allocation {}", alloc.join(" "))?;
    Ok(())
}

fn trace(args: TraceArgs) -> Result<()> {
    let file = load(args.config.as_ref())?;
    let s = scenario(&args.scenario, &file)?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let config = GameConfig {
        seed,
        record_rounds: true,
        ..args.game.config(&file, args.learner)
    };
    let r = run_combgame(&config, &s.instance, &s.actions, &s.answers, &mut run_rng(seed, 0))?;
    eprintln!(
        "{} {}: stopped at t = {}, recommended {} ({}){}",
        s.name,
        args.learner,
        r.stopping_time,
        r.recommended,
        if r.correct { "correct" } else { "wrong" },
        if r.budget_exceeded { ", budget exceeded" } else { "" }
    );
    match args.out {
        Some(path) => emit_run_trace(&r, &path)?,
        None => write_run_trace(&r, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Complexity(a) => complexity(a),
        Command::Trace(a) => trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
