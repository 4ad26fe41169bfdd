//! Run settings from a TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use combgame::experiments::{ScenarioKind, ScenarioSpec};
use combgame::game::{GameConfig, Tracking};
use combgame::learners::LearnerKind;
use combgame::thresholds::ThresholdMode;
use serde::Deserialize;

pub const DEFAULT_RUNS: usize = 50;

/// Mirror of the `run` flags. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<ScenarioSpec>,
    #[serde(default)]
    pub learners: Vec<LearnerKind>,
    pub tracking: Option<Tracking>,
    pub threshold: Option<ThresholdMode>,
    pub delta: Option<f64>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub max_rounds: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Scenario flags shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ScenarioArgs {
    /// uniform-matroid, grid-network, line-network, almost-all-sets or custom-dag.
    #[arg(long)]
    pub scenario: Option<ScenarioKind>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Stages of the grid network.
    #[arg(long)]
    pub n_s: Option<usize>,
    /// Nodes per layer of the line network.
    #[arg(long)]
    pub n_n: Option<usize>,
    /// Layers of the line network.
    #[arg(long)]
    pub n_l: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Seed of the sampled network means.
    #[arg(long)]
    pub mean_seed: Option<u64>,
}

impl ScenarioArgs {
    /// Flags layered over `base`; a different `--scenario` starts afresh.
    pub fn apply(&self, base: Option<ScenarioSpec>) -> ScenarioSpec {
        let mut spec = match (base, self.scenario) {
            (Some(b), Some(kind)) if b.kind != kind => ScenarioSpec::new(kind),
            (Some(b), _) => b,
            (None, kind) => ScenarioSpec::new(kind.unwrap_or(ScenarioKind::UniformMatroid)),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if self.$f.is_some() { spec.$f = self.$f; })*};
        }
        set!(d, k, n_s, n_n, n_l, sigma);
        if let Some(s) = self.mean_seed {
            spec.mean_seed = s;
        }
        spec
    }
}

/// Game flags shared by `run` and `trace`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct GameArgs {
    /// c-track, d-track or direct-sample.
    #[arg(long)]
    pub tracking: Option<Tracking>,
    /// stylized, theoretical-gaussian or theoretical-subgaussian.
    #[arg(long)]
    pub threshold: Option<ThresholdMode>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_rounds: Option<u64>,
}

impl GameArgs {
    pub fn config(&self, file: &FileConfig, learner: LearnerKind) -> GameConfig {
        let base = GameConfig::default();
        GameConfig {
            learner,
            tracking: self.tracking.or(file.tracking).unwrap_or(base.tracking),
            threshold: self.threshold.or(file.threshold).unwrap_or(base.threshold),
            delta: self.delta.or(file.delta).unwrap_or(base.delta),
            max_rounds: self.max_rounds.or(file.max_rounds).unwrap_or(base.max_rounds),
            ..base
        }
    }
}
