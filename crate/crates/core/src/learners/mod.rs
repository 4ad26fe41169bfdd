//! No-regret learners for the action player.
//!
//! Every learner exposes a sparse distribution `w_t` over actions and its
//! image `w~_t = sum_A w_{t,A} 1_A` in the transformed simplex, and is fed
//! the arm-level optimistic reward `r_t` once per round.

mod exp_weights;
mod transformed;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use exp_weights::{exp_weights, AdaHedge, Hedge, UniformLearner};
pub use transformed::{
    doubling_schedule, epoch_horizon, lloo_params, reduce, Lloo, LlooParams, Ofw,
};

use crate::combinatorial::{incidence, Action, ActionId, ActionSpace, ActionTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Hedge,
    AdaHedge,
    Ofw,
    Lloo,
    Uniform,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] = [
        Self::Hedge,
        Self::AdaHedge,
        Self::Ofw,
        Self::Lloo,
        Self::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hedge => "hedge",
            Self::AdaHedge => "adahedge",
            Self::Ofw => "ofw",
            Self::Lloo => "lloo",
            Self::Uniform => "uniform",
        }
    }

    /// Learners on the action simplex need every action played once.
    pub fn full_initialization(self) -> bool {
        matches!(self, Self::Hedge | Self::AdaHedge)
    }

    /// Actions played before the learner takes over.
    pub fn initialization(self, space: &ActionSpace) -> Result<Vec<Action>> {
        if self.full_initialization() {
            space.enumerate().map(<[Action]>::to_vec).ok_or_else(|| {
                Error::InvalidParameter(format!("{} needs an enumerable action space", self.name()))
            })
        } else {
            space.covering()
        }
    }

    pub fn build(
        self,
        space: &ActionSpace,
        table: &mut ActionTable,
        init: &[Action],
    ) -> Result<Box<dyn Learner>> {
        Ok(match self {
            Self::Hedge => Box::new(Hedge::new(space, table)?),
            Self::AdaHedge => Box::new(AdaHedge::new(space, table)?),
            Self::Ofw => Box::new(Ofw::new(space, table, init)?),
            Self::Lloo => Box::new(Lloo::new(space, table, init)?),
            Self::Uniform => Box::new(UniformLearner::new(space, table)?),
        })
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown learner {s:?}")))
    }
}

/// What a learner may touch while updating.
pub struct LearnerCtx<'a> {
    pub space: &'a ActionSpace,
    pub table: &'a mut ActionTable,
}

pub trait Learner: Send {
    fn kind(&self) -> LearnerKind;

    /// Current distribution; entries have positive weight.
    fn weights(&self) -> &[(ActionId, f64)];

    /// `sum_A w_A 1_A`.
    fn point(&self) -> &[f64];

    fn feed(&mut self, reward: &[f64], ctx: &mut LearnerCtx<'_>) -> Result<()>;

    /// Number of updates received.
    fn steps(&self) -> u64;

    fn support_size(&self) -> usize {
        self.weights().len()
    }
}

pub(crate) fn check_reward(reward: &[f64], d: usize) -> Result<()> {
    if reward.len() != d {
        return Err(Error::InvalidParameter(format!(
            "reward has length {}, expected {d}",
            reward.len()
        )));
    }
    if reward.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("reward"));
    }
    Ok(())
}

/// `sum_A w_A 1_A` recomputed from scratch.
pub fn stack_weights(weights: &[(ActionId, f64)], table: &ActionTable, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for &(id, w) in weights {
        for (o, x) in out.iter_mut().zip(incidence(table.get(id), d)) {
            *o += w * x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorial::ActionSpace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Average regret at every 500th step on a deterministic stream that
    /// alternates between `m + e` and `m - e`.
    fn average_regret(
        kind: LearnerKind,
        space: &ActionSpace,
        steps: usize,
        wiggle: f64,
    ) -> Vec<f64> {
        let mut table = ActionTable::new();
        let init = kind.initialization(space).unwrap();
        let mut learner = kind.build(space, &mut table, &init).unwrap();
        let d = space.dim();
        let mut cum = vec![0.0; d];
        let mut earned = 0.0;
        let mut ratios = Vec::new();
        for t in 1..=steps {
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            let r: Vec<f64> = (0..d)
                .map(|a| 0.5 - 0.04 * a as f64 + sign * wiggle * (a % 3) as f64)
                .collect();
            earned += learner
                .point()
                .iter()
                .zip(&r)
                .map(|(p, x)| p * x)
                .sum::<f64>();
            for (c, x) in cum.iter_mut().zip(&r) {
                *c += x;
            }
            learner
                .feed(
                    &r,
                    &mut LearnerCtx {
                        space,
                        table: &mut table,
                    },
                )
                .unwrap();
            if t % 500 == 0 {
                let best = space.argmax(&cum).unwrap().value(&cum);
                ratios.push((best - earned) / t as f64);
            }
        }
        ratios
    }

    #[test]
    fn average_regret_decreases() {
        let space = ActionSpace::top_k(6, 2).unwrap();
        for kind in [LearnerKind::Hedge, LearnerKind::AdaHedge, LearnerKind::Lloo] {
            for wiggle in [0.0, 0.1] {
                let ratios = average_regret(kind, &space, 10_000, wiggle);
                let half = &ratios[ratios.len() / 2 - 1..];
                for w in half.windows(2) {
                    assert!(w[1] < w[0], "{kind} wiggle {wiggle}: {ratios:?}");
                }
            }
        }
    }

    #[test]
    fn weights_and_point_stay_consistent() {
        let space = ActionSpace::top_k(7, 3).unwrap();
        let d = space.dim();
        for kind in LearnerKind::ALL {
            let mut table = ActionTable::new();
            let init = kind.initialization(&space).unwrap();
            let mut learner = kind.build(&space, &mut table, &init).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut support: Vec<ActionId> = learner.weights().iter().map(|x| x.0).collect();
            for t in 0..1000 {
                let r: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
                learner
                    .feed(
                        &r,
                        &mut LearnerCtx {
                            space: &space,
                            table: &mut table,
                        },
                    )
                    .unwrap();
                let w = learner.weights();
                let total: f64 = w.iter().map(|x| x.1).sum();
                assert!((total - 1.0).abs() < 1e-12, "{kind} mass {total}");
                assert!(w.iter().all(|x| x.1 > 0.0));
                if !kind.full_initialization() && kind != LearnerKind::Uniform {
                    let new: Vec<ActionId> = w
                        .iter()
                        .map(|x| x.0)
                        .filter(|id| !support.contains(id))
                        .collect();
                    assert!(new.len() <= 1, "{kind} grew by {}", new.len());
                    support = w.iter().map(|x| x.0).collect();
                }
                if t % 100 == 0 {
                    let stacked = stack_weights(w, &table, d);
                    for (a, b) in stacked.iter().zip(learner.point()) {
                        assert!((a - b).abs() < 1e-8, "{kind} drift");
                    }
                }
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in LearnerKind::ALL {
            assert_eq!(k.name().parse::<LearnerKind>().unwrap(), k);
        }
        assert!("sftpl".parse::<LearnerKind>().is_err());
    }
}
