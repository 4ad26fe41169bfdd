//! Monte-Carlo batches of independent runs on a bounded worker pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenarios::Scenario;
use crate::error::{Error, Result};
use crate::game::{Game, GameConfig, RunResult};

pub const WORKERS_ENV: &str = "COMBGAME_WORKERS";

/// Worker count from `COMBGAME_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Stream `index` of the batch seeded by `seed`.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Statistics that depend only on the sampled trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub runs: u64,
    pub mean_tau: f64,
    pub q1_tau: f64,
    pub q3_tau: f64,
    /// Runs that recommended a wrong answer or ran out of budget.
    pub error_count: u64,
    pub budget_exceeded: u64,
    pub mean_support_size: f64,
    pub tracking_violations: u64,
}

/// Wall-clock measurements; they vary between executions.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct BatchTiming {
    /// Per-round time pooled over all rounds of all runs.
    pub mean_round_nanos: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchSummary {
    pub scenario: String,
    pub d: usize,
    pub config: GameConfig,
    pub stats: BatchStats,
    pub timing: BatchTiming,
}

/// Equality ignores [`timing`](BatchSummary::timing).
impl PartialEq for BatchSummary {
    fn eq(&self, other: &Self) -> bool {
        self.scenario == other.scenario
            && self.d == other.d
            && self.config == other.config
            && self.stats == other.stats
    }
}

/// Type-7 sample quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Aggregate of per-run results, in run order.
pub fn summarize(results: &[RunResult]) -> BatchStats {
    let n = results.len() as f64;
    let mut taus: Vec<f64> = results.iter().map(|r| r.stopping_time as f64).collect();
    let mean_tau = taus.iter().sum::<f64>() / n;
    taus.sort_by(f64::total_cmp);
    BatchStats {
        runs: results.len() as u64,
        mean_tau,
        q1_tau: quantile(&taus, 0.25),
        q3_tau: quantile(&taus, 0.75),
        error_count: results
            .iter()
            .filter(|r| !r.correct || r.budget_exceeded)
            .count() as u64,
        budget_exceeded: results.iter().filter(|r| r.budget_exceeded).count() as u64,
        mean_support_size: results.iter().map(|r| r.mean_support_size).sum::<f64>() / n,
        tracking_violations: results.iter().map(|r| r.tracking_violations).sum(),
    }
}

fn pooled_round_nanos(results: &[RunResult]) -> f64 {
    let rounds: u64 = results.iter().map(|r| r.round_nanos.rounds).sum();
    if rounds == 0 {
        return 0.0;
    }
    results
        .iter()
        .map(|r| r.round_nanos.mean * r.round_nanos.rounds as f64)
        .sum::<f64>()
        / rounds as f64
}

/// Runs `runs` games, run `i` drawing from [`run_rng`]`(seed, i)`.
/// Results come back in run order whatever the worker count.
pub fn run_batch_results(
    scenario: &Scenario,
    config: &GameConfig,
    runs: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<RunResult>> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let game = Game::new(
        config.clone(),
        scenario.instance.clone(),
        scenario.actions.clone(),
        scenario.answers.clone(),
    )?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|i| game.run(&mut run_rng(seed, i as u64)))
            .collect()
    })
}

pub fn run_batch(
    scenario: &Scenario,
    config: &GameConfig,
    runs: usize,
    seed: u64,
    workers: usize,
) -> Result<BatchSummary> {
    let start = std::time::Instant::now();
    let results = run_batch_results(scenario, config, runs, seed, workers)?;
    Ok(BatchSummary {
        scenario: scenario.name.clone(),
        d: scenario.dim(),
        config: config.clone(),
        stats: summarize(&results),
        timing: BatchTiming {
            mean_round_nanos: pooled_round_nanos(&results),
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerKind;

    #[test]
    fn quantiles_interpolate() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&x, 0.25), 1.75);
        assert_eq!(quantile(&x, 0.75), 3.25);
        assert_eq!(quantile(&x, 0.5), 2.5);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }

    #[test]
    fn worker_count_does_not_change_summary() {
        let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
        let config = GameConfig {
            learner: LearnerKind::AdaHedge,
            ..GameConfig::default()
        };
        let one = run_batch(&s, &config, 12, 9, 1).unwrap();
        let many = run_batch(&s, &config, 12, 9, 8).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.stats.mean_tau.to_bits(), many.stats.mean_tau.to_bits());
        assert!(one.stats.q1_tau <= one.stats.q3_tau);
        assert!(one.stats.error_count <= one.stats.runs);
        let other = run_batch(&s, &config, 12, 10, 4).unwrap();
        assert_ne!(one.stats, other.stats);
    }

    #[test]
    fn streams_differ_per_run() {
        use rand::RngCore;
        assert_ne!(run_rng(1, 0).next_u64(), run_rng(1, 1).next_u64());
        assert_eq!(run_rng(1, 3).next_u64(), run_rng(1, 3).next_u64());
    }

    #[test]
    fn zero_runs_rejected() {
        let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
        assert!(run_batch(&s, &GameConfig::default(), 0, 0, 1).is_err());
    }

    #[test]
    fn budget_exceeded_counts_as_error() {
        let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
        let config = GameConfig {
            max_rounds: 15,
            ..GameConfig::default()
        };
        let b = run_batch(&s, &config, 3, 0, 2).unwrap();
        assert_eq!(b.stats.budget_exceeded, 3);
        assert_eq!(b.stats.error_count, 3);
    }
}
