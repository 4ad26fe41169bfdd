//! Benchmark families: uniform matroids, grid and line networks, and
//! almost all sets. Every family asks for the best single arm.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bandit::BanditInstance;
use crate::combinatorial::{Action, ActionSpace, AnswerSpace, DagGraph, Edge};
use crate::error::{Error, Result};

pub const UNIFORM_MATROID_DIMS: [usize; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

/// Arms 4 to 50 of the uniform-matroid means; `d >= 10` keeps the first
/// `d - 3`. The blocks listed for d = 30 and d = 45 have 6 and 4 entries,
/// so the d = 30, 35, 40 prefixes drop the last value of their block.
const MATROID_TAIL: [f64; 47] = [
    0.232, 0.224, 0.207, 0.200, 0.192, 0.182, 0.176, // d = 10
    0.214, 0.199, 0.195, 0.190, 0.164, // 15
    0.185, 0.19, 0.195, 0.199, 0.214, // 20
    0.158, 0.172, 0.211, 0.228, 0.244, // 25
    0.174, 0.18, 0.194, 0.202, 0.23, 0.242, // 30
    0.17, 0.178, 0.219, 0.222, 0.226, // 35
    0.197, 0.198, 0.201, 0.203, 0.205, // 40
    0.193, 0.206, 0.208, 0.21, // 45
    0.188, 0.189, 0.191, 0.212, 0.213, // 50
];
const MATROID_D5_TAIL: [f64; 2] = [0.23, 0.2];

const ALMOST_ALL_D7: [f64; 7] = [0.3, 0.24, 0.23, 0.22, 0.21, 0.2, 0.19];
const ALMOST_ALL_EXTRA: [f64; 7] = [0.18, 0.17, 0.16, 0.215, 0.195, 0.205, 0.185];

/// Means of the uniform-matroid instance in dimension `d`.
pub fn uniform_matroid_means(d: usize) -> Result<Vec<f64>> {
    let mut mu = vec![0.3, 0.29, 0.28];
    match d {
        5 => mu.extend(MATROID_D5_TAIL),
        _ if UNIFORM_MATROID_DIMS.contains(&d) => mu.extend_from_slice(&MATROID_TAIL[..d - 3]),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "uniform matroid needs d in {UNIFORM_MATROID_DIMS:?}, got {d}"
            )))
        }
    }
    debug_assert_eq!(mu.len(), d);
    Ok(mu)
}

/// Means of the almost-all-sets instance, `d` in 7..=14.
pub fn almost_all_means(d: usize) -> Result<Vec<f64>> {
    if !(7..=14).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "almost all sets needs d in 7..=14, got {d}"
        )));
    }
    let mut mu = ALMOST_ALL_D7.to_vec();
    mu.extend_from_slice(&ALMOST_ALL_EXTRA[..d - 7]);
    Ok(mu)
}

/// `N(0.2, 0.025^2)` draws sorted in decreasing order, with the first
/// raised by 0.025.
pub fn network_means(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.2, 0.025).expect("valid normal");
    let mut mu: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    mu[0] += 0.025;
    mu
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    UniformMatroid,
    GridNetwork,
    LineNetwork,
    AlmostAllSets,
    /// Paths of a user-supplied DAG.
    CustomDag,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        Self::UniformMatroid,
        Self::GridNetwork,
        Self::LineNetwork,
        Self::AlmostAllSets,
        Self::CustomDag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::UniformMatroid => "uniform-matroid",
            Self::GridNetwork => "grid-network",
            Self::LineNetwork => "line-network",
            Self::AlmostAllSets => "almost-all-sets",
            Self::CustomDag => "custom-dag",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('_', "-").to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario {s:?}")))
    }
}

/// Parameters of a scenario; unset fields take the family defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Arms, for the uniform matroid and almost all sets.
    pub d: Option<usize>,
    /// Action size of the uniform matroid.
    pub k: Option<usize>,
    /// Stages of the grid network.
    pub n_s: Option<usize>,
    /// Nodes per layer of the line network.
    pub n_n: Option<usize>,
    /// Layers of the line network.
    pub n_l: Option<usize>,
    pub sigma: Option<f64>,
    /// Seed of the sampled network means.
    #[serde(default)]
    pub mean_seed: u64,
    /// Edges `[u, v, arm]` of a custom DAG.
    #[serde(default)]
    pub edges: Vec<[usize; 3]>,
    pub source: Option<usize>,
    pub sink: Option<usize>,
    /// Explicit means; sampled like the networks when absent.
    pub means: Option<Vec<f64>>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            d: None,
            k: None,
            n_s: None,
            n_n: None,
            n_l: None,
            sigma: None,
            mean_seed: 0,
            edges: Vec::new(),
            source: None,
            sink: None,
            means: None,
        }
    }

    pub fn uniform_matroid(d: usize, k: usize) -> Self {
        Self {
            d: Some(d),
            k: Some(k),
            ..Self::new(ScenarioKind::UniformMatroid)
        }
    }

    pub fn build(&self) -> Result<Scenario> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("{} needs {name}", self.kind)))
        };
        match self.kind {
            ScenarioKind::UniformMatroid => {
                let k = self.k.unwrap_or(3);
                let sigma = self.sigma.unwrap_or(if k == 2 { 0.035 } else { 0.1 });
                Scenario::uniform_matroid(self.d.unwrap_or(5), k, sigma)
            }
            ScenarioKind::GridNetwork => Scenario::grid_network(
                need(self.n_s, "n_s")?,
                self.sigma.unwrap_or(0.075),
                self.mean_seed,
            ),
            ScenarioKind::LineNetwork => Scenario::line_network(
                need(self.n_n, "n_n")?,
                need(self.n_l, "n_l")?,
                self.sigma.unwrap_or(0.2),
                self.mean_seed,
            ),
            ScenarioKind::AlmostAllSets => {
                Scenario::almost_all_sets(self.d.unwrap_or(7), self.sigma.unwrap_or(0.25))
            }
            ScenarioKind::CustomDag => {
                let nodes = self
                    .edges
                    .iter()
                    .map(|e| e[0].max(e[1]) + 1)
                    .max()
                    .unwrap_or(0);
                let edges = self
                    .edges
                    .iter()
                    .map(|&[from, to, arm]| Edge { from, to, arm })
                    .collect();
                let graph = DagGraph::new(
                    nodes,
                    edges,
                    need(self.source, "source")?,
                    need(self.sink, "sink")?,
                )?;
                let means = match &self.means {
                    Some(m) => m.clone(),
                    None => network_means(graph.num_arms(), self.mean_seed),
                };
                let instance = BanditInstance::homoscedastic(means, self.sigma.unwrap_or(0.2))?;
                Scenario::assemble(
                    "custom-dag".into(),
                    instance,
                    ActionSpace::dag_paths(graph)?,
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub instance: BanditInstance,
    pub actions: ActionSpace,
    pub answers: AnswerSpace,
    pub expected_best: Action,
}

impl Scenario {
    fn assemble(name: String, instance: BanditInstance, actions: ActionSpace) -> Result<Self> {
        if actions.dim() != instance.dim() {
            return Err(Error::Inconsistent(format!(
                "{name}: actions and means differ in dimension"
            )));
        }
        let answers = AnswerSpace::best_arm(instance.dim())?;
        let mu = instance.means();
        let expected_best = answers.argmax(mu)?;
        let top = expected_best.value(mu);
        if answers
            .answers()
            .iter()
            .filter(|a| a.value(mu) >= top)
            .count()
            > 1
        {
            return Err(Error::DegenerateInstance(format!(
                "{name}: several best answers"
            )));
        }
        Ok(Self {
            name,
            instance,
            actions,
            answers,
            expected_best,
        })
    }

    pub fn uniform_matroid(d: usize, k: usize, sigma: f64) -> Result<Self> {
        if !(k == 2 || k == 3) {
            return Err(Error::InvalidParameter(format!(
                "uniform matroid needs k in {{2, 3}}, got {k}"
            )));
        }
        let instance = BanditInstance::homoscedastic(uniform_matroid_means(d)?, sigma)?;
        Self::assemble(
            format!("uniform-matroid-d{d}-k{k}"),
            instance,
            ActionSpace::top_k(d, k)?,
        )
    }

    pub fn grid_network(n_s: usize, sigma: f64, seed: u64) -> Result<Self> {
        let graph = DagGraph::grid(n_s)?;
        let instance = BanditInstance::homoscedastic(network_means(graph.num_arms(), seed), sigma)?;
        Self::assemble(
            format!("grid-network-s{n_s}"),
            instance,
            ActionSpace::dag_paths(graph)?,
        )
    }

    pub fn line_network(n_n: usize, n_l: usize, sigma: f64, seed: u64) -> Result<Self> {
        let graph = DagGraph::line(n_n, n_l)?;
        let instance = BanditInstance::homoscedastic(network_means(graph.num_arms(), seed), sigma)?;
        Self::assemble(
            format!("line-network-n{n_n}-l{n_l}"),
            instance,
            ActionSpace::dag_paths(graph)?,
        )
    }

    pub fn almost_all_sets(d: usize, sigma: f64) -> Result<Self> {
        let instance = BanditInstance::homoscedastic(almost_all_means(d)?, sigma)?;
        let actions = ActionSpace::almost_all_sets(d, Action::singleton(0))?;
        Self::assemble(format!("almost-all-sets-d{d}"), instance, actions)
    }

    pub fn dim(&self) -> usize {
        self.instance.dim()
    }
}
