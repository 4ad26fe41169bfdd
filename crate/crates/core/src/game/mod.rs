//! The game loop: recommend, check the stopping rule, let the learner
//! propose weights, track them, answer with the λ-player and feed the
//! learner an optimistic reward.

pub(crate) mod best_response;
mod tracking;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use best_response::{
    best_response_gaussian, glr_statistic, lambda_player, lambda_player_into, optimistic_reward,
    optimistic_reward_generic, optimistic_reward_into, weighted_kl, Branch, LambdaResponse,
};
pub use tracking::{c_track, d_track, direct_sample, Tracking, TrackingState};

use crate::bandit::{confidence_box, project_to_box, BanditInstance, EstimatorState};
use crate::combinatorial::{Action, ActionId, ActionSpace, ActionTable, AnswerSpace};
use crate::error::{Error, Result};
use crate::learners::{stack_weights, Learner, LearnerCtx, LearnerKind};
use crate::thresholds::{
    exploration_bonus, BonusMode, StoppingRule, ThresholdContext, ThresholdMode,
};

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    pub learner: LearnerKind,
    pub tracking: Tracking,
    pub threshold: ThresholdMode,
    pub bonus: BonusMode,
    /// One learner per candidate answer instead of a shared one.
    pub per_answer_learners: bool,
    pub delta: f64,
    pub seed: u64,
    pub max_rounds: u64,
    /// Stride of the regret and support traces; 0 turns them off.
    pub trace_every: u64,
    /// Keep one record per round.
    pub record_rounds: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            learner: LearnerKind::Lloo,
            tracking: Tracking::DTrack,
            threshold: ThresholdMode::Stylized,
            bonus: BonusMode::Stylized,
            per_answer_learners: false,
            delta: 0.1,
            seed: 0,
            max_rounds: DEFAULT_MAX_ROUNDS,
            trace_every: 0,
            record_rounds: false,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if let BonusMode::Theoretical { c, b } = self.bonus {
            if !(c > 0.0 && b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "bonus constants must be positive, got c = {c}, b = {b}"
                )));
            }
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidParameter(
                "max_rounds must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NanosSummary {
    pub rounds: u64,
    pub mean: f64,
    pub min: u64,
    pub max: u64,
}

impl NanosSummary {
    fn push(&mut self, nanos: u64) {
        self.min = if self.rounds == 0 {
            nanos
        } else {
            self.min.min(nanos)
        };
        self.max = self.max.max(nanos);
        self.rounds += 1;
        self.mean += (nanos as f64 - self.mean) / self.rounds as f64;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    /// `None` in the round where the stopping rule fires.
    pub action: Option<Action>,
    pub statistic: f64,
    pub beta: f64,
    pub candidate: Action,
    pub support_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Round at which the stopping rule fired; `stopping_time - 1` samples
    /// were collected.
    pub stopping_time: u64,
    pub init_rounds: u64,
    pub recommended: Action,
    pub correct: bool,
    pub budget_exceeded: bool,
    pub final_statistic: f64,
    pub final_threshold: f64,
    pub round_nanos: NanosSummary,
    /// `(t, |supp w_t|)` every `trace_every` rounds.
    pub support_trace: Vec<(u64, usize)>,
    /// `(t, R_t / t)` every `trace_every` rounds.
    pub regret_trace: Vec<(u64, f64)>,
    pub wrong_candidate_rounds: u64,
    /// C-tracking rounds where some `N_A - S_A` left `[1 - |A|, 1]`.
    pub tracking_violations: u64,
    /// Largest `|w~_t - sum_A w_A 1_A|` seen at trace points.
    pub propagation_error: f64,
    pub mean_support_size: f64,
    pub rounds: Vec<RoundRecord>,
}

/// `argmax_I <1_I, mu~>`; ties go to the lowest index.
pub fn recommend(projected_mle: &[f64], answers: &AnswerSpace) -> Result<Action> {
    answers.argmax(projected_mle)
}

/// Everything a run needs that does not depend on the random stream.
#[derive(Debug, Clone)]
pub struct Game {
    config: GameConfig,
    instance: BanditInstance,
    actions: ActionSpace,
    answers: AnswerSpace,
    rule: StoppingRule,
    init: Vec<Action>,
    best: Action,
    action_count: f64,
}

impl Game {
    pub fn new(
        config: GameConfig,
        instance: BanditInstance,
        actions: ActionSpace,
        answers: AnswerSpace,
    ) -> Result<Self> {
        config.validate()?;
        let d = instance.dim();
        if actions.dim() != d || answers.dim() != d {
            return Err(Error::Inconsistent(format!(
                "instance has {d} arms, actions {}, answers {}",
                actions.dim(),
                answers.dim()
            )));
        }
        let ctx = ThresholdContext::new(
            answers.max_symmetric_difference(),
            actions.max_action_size(),
            answers.len(),
            config.threshold,
        )?;
        let rule = StoppingRule::new(ctx, config.delta)?;
        let init = config.learner.initialization(&actions)?;
        if init.is_empty() {
            return Err(Error::EmptySupport);
        }
        let best = answers.argmax(instance.means())?;
        let action_count = actions.size().map_or(f64::INFINITY, |n| n as f64);
        Ok(Self {
            config,
            instance,
            actions,
            answers,
            rule,
            init,
            best,
            action_count,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn instance(&self) -> &BanditInstance {
        &self.instance
    }

    pub fn actions(&self) -> &ActionSpace {
        &self.actions
    }

    pub fn answers(&self) -> &AnswerSpace {
        &self.answers
    }

    pub fn best_answer(&self) -> &Action {
        &self.best
    }

    pub fn initialization(&self) -> &[Action] {
        &self.init
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RunResult> {
        Run::new(self)?.play(rng)
    }
}

pub fn run_combgame<R: Rng + ?Sized>(
    config: &GameConfig,
    instance: &BanditInstance,
    actions: &ActionSpace,
    answers: &AnswerSpace,
    rng: &mut R,
) -> Result<RunResult> {
    Game::new(
        config.clone(),
        instance.clone(),
        actions.clone(),
        answers.clone(),
    )?
    .run(rng)
}

/// Mutable state of one run.
struct Run<'g> {
    game: &'g Game,
    table: ActionTable,
    learners: Vec<Option<Box<dyn Learner>>>,
    tracking: TrackingState,
    estimator: EstimatorState,
    counts: Vec<f64>,
    draws: Vec<f64>,
    reward: Vec<f64>,
    lambda: Vec<f64>,
    cum_reward: Vec<f64>,
    earned: f64,
}

impl<'g> Run<'g> {
    fn new(game: &'g Game) -> Result<Self> {
        let d = game.instance.dim();
        let slots = if game.config.per_answer_learners {
            game.answers.len()
        } else {
            1
        };
        Ok(Self {
            game,
            table: ActionTable::new(),
            learners: (0..slots).map(|_| None).collect(),
            tracking: TrackingState::default(),
            estimator: EstimatorState::new(d),
            counts: vec![0.0; d],
            draws: Vec::with_capacity(d),
            reward: Vec::with_capacity(d),
            lambda: Vec::with_capacity(d),
            cum_reward: vec![0.0; d],
            earned: 0.0,
        })
    }

    fn observe<R: Rng + ?Sized>(&mut self, id: ActionId, rng: &mut R) -> Result<()> {
        let action = self.table.get(id);
        self.game
            .instance
            .sample_into(action, rng, &mut self.draws)?;
        self.estimator.update_aligned(action, &self.draws)?;
        for &a in action.arms() {
            self.counts[a] += 1.0;
        }
        Ok(())
    }

    fn bonus(&self, t: u64) -> f64 {
        exploration_bonus(t as f64, self.game.config.bonus)
    }

    fn estimate(&self, f_value: f64, out: &mut Vec<f64>) -> Result<()> {
        let st = &self.estimator;
        match self.game.instance.parameter_box() {
            None => out.clone_from(&st.mle),
            Some(b) => {
                *out = project_to_box(
                    &st.mle,
                    Some(b),
                    &confidence_box(st, self.game.instance.stddevs(), f_value)?,
                )
            }
        }
        Ok(())
    }

    fn learner(&mut self, candidate: usize) -> Result<&mut Box<dyn Learner>> {
        let slot = if self.game.config.per_answer_learners {
            candidate
        } else {
            0
        };
        if self.learners[slot].is_none() {
            let l = self.game.config.learner.build(
                &self.game.actions,
                &mut self.table,
                &self.game.init,
            )?;
            self.learners[slot] = Some(l);
        }
        Ok(self.learners[slot].as_mut().expect("just built"))
    }

    fn play<R: Rng + ?Sized>(mut self, rng: &mut R) -> Result<RunResult> {
        let game = self.game;
        let cfg = &game.config;
        let sigmas = game.instance.stddevs();
        for a in &game.init {
            let id = self.table.intern(a.clone());
            self.tracking.init_pull(id);
            self.observe(id, rng)?;
        }
        let n0 = game.init.len() as u64;
        if !self.estimator.all_arms_observed() {
            return Err(Error::InvalidParameter(
                "initialization leaves some arm unobserved".into(),
            ));
        }
        let mut nanos = NanosSummary::default();
        let mut support_trace = Vec::new();
        let mut regret_trace = Vec::new();
        let mut records = Vec::new();
        let mut wrong = 0;
        let mut violations = 0;
        let mut propagation: f64 = 0.0;
        let mut support_sum = 0.0;
        let mut mu_tilde = Vec::new();
        self.estimate(self.bonus(n0), &mut mu_tilde)?;
        let lower = 1.0 - game.action_count;
        let mut t = n0 + 1;
        loop {
            let start = Instant::now();
            let cidx = game.answers.argmax_index(&mu_tilde)?;
            let candidate = &game.answers.answers()[cidx];
            let statistic = glr_statistic(
                &self.estimator.mle,
                &self.counts,
                &game.answers,
                cidx,
                sigmas,
            )?;
            let beta = game.rule.at((t - 1) as f64);
            let stop = statistic > beta;
            if stop || t > cfg.max_rounds {
                if cfg.record_rounds {
                    records.push(RoundRecord {
                        t,
                        action: None,
                        statistic,
                        beta,
                        support_size: self
                            .learners
                            .iter()
                            .flatten()
                            .next()
                            .map_or(0, |l| l.support_size()),
                        candidate: candidate.clone(),
                    });
                }
                let correct = stop && *candidate == game.best;
                return Ok(RunResult {
                    stopping_time: t,
                    init_rounds: n0,
                    correct,
                    budget_exceeded: !stop,
                    recommended: candidate.clone(),
                    final_statistic: statistic,
                    final_threshold: beta,
                    round_nanos: nanos,
                    support_trace,
                    regret_trace,
                    wrong_candidate_rounds: wrong,
                    tracking_violations: violations,
                    propagation_error: propagation,
                    mean_support_size: if nanos.rounds == 0 {
                        0.0
                    } else {
                        support_sum / nanos.rounds as f64
                    },
                    rounds: records,
                });
            }

            let f_prev = self.bonus(t - 1);
            let uniform = cfg.learner == LearnerKind::Uniform;
            let trace_now = cfg.trace_every > 0 && (t - n0) % cfg.trace_every == 0;
            // Split borrows: the learner lives in `self.learners`, the
            // table in `self.table`.
            self.learner(cidx)?;
            let slot = if cfg.per_answer_learners { cidx } else { 0 };
            let learner = self.learners[slot].as_mut().expect("built above");
            let chosen = match cfg.tracking {
                Tracking::CTrack => {
                    self.tracking.add_weights(learner.weights());
                    c_track(
                        &self.tracking.support,
                        &self.tracking.counts,
                        &self.tracking.cumulative,
                        &self.table,
                    )?
                }
                Tracking::DTrack => d_track(learner.weights(), &self.tracking.counts, &self.table)?,
                Tracking::DirectSample => direct_sample(learner.weights(), rng)?,
            };
            let support = learner.support_size();
            if !uniform {
                let point = learner.point();
                lambda_player_into(
                    &self.estimator.mle,
                    &game.answers,
                    cidx,
                    point,
                    sigmas,
                    &mut self.lambda,
                )?;
                optimistic_reward_into(
                    &self.estimator.mle,
                    &self.lambda,
                    f_prev,
                    &self.counts,
                    sigmas,
                    &mut self.reward,
                )?;
                if cfg.trace_every > 0 {
                    self.earned += point
                        .iter()
                        .zip(&self.reward)
                        .map(|(p, r)| p * r)
                        .sum::<f64>();
                }
                learner.feed(
                    &self.reward,
                    &mut LearnerCtx {
                        space: &game.actions,
                        table: &mut self.table,
                    },
                )?;
            }
            self.tracking.pull(chosen);
            self.observe(chosen, rng)?;
            self.estimate(self.bonus(t), &mut mu_tilde)?;
            nanos.push(start.elapsed().as_nanos() as u64);

            support_sum += support as f64;
            if *candidate != game.best {
                wrong += 1;
            }
            if cfg.tracking == Tracking::CTrack && self.tracking.deviation_violations(lower) > 0 {
                violations += 1;
            }
            if !uniform && cfg.trace_every > 0 {
                for (c, r) in self.cum_reward.iter_mut().zip(&self.reward) {
                    *c += r;
                }
            }
            if trace_now {
                support_trace.push((t, support));
                let learner = self.learners[slot].as_ref().expect("built above");
                let stacked = stack_weights(learner.weights(), &self.table, game.instance.dim());
                for (a, b) in stacked.iter().zip(learner.point()) {
                    propagation = propagation.max((a - b).abs());
                }
                if !uniform {
                    let best = game
                        .actions
                        .argmax(&self.cum_reward)?
                        .value(&self.cum_reward);
                    regret_trace.push((t, (best - self.earned) / (t - n0) as f64));
                }
            }
            if cfg.record_rounds {
                records.push(RoundRecord {
                    t,
                    action: Some(self.table.get(chosen).clone()),
                    statistic,
                    beta,
                    candidate: candidate.clone(),
                    support_size: support,
                });
            }
            t += 1;
        }
    }
}
