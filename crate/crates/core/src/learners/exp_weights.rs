//! Exponential weights on the action simplex.

use super::{check_reward, epoch_horizon, Learner, LearnerCtx, LearnerKind};
use crate::combinatorial::{ActionId, ActionSpace, ActionTable};
use crate::error::{Error, Result};

/// Enumerated actions with their arms stored contiguously.
#[derive(Debug, Clone)]
struct ActionList {
    ids: Vec<ActionId>,
    arms: Vec<u32>,
    starts: Vec<u32>,
    dim: usize,
}

impl ActionList {
    fn new(space: &ActionSpace, table: &mut ActionTable) -> Result<Self> {
        let all = space.enumerate().ok_or_else(|| {
            Error::InvalidParameter("action space is too large to enumerate".into())
        })?;
        let mut ids = Vec::with_capacity(all.len());
        let mut arms = Vec::new();
        let mut starts = vec![0u32];
        for a in all {
            ids.push(table.intern(a.clone()));
            arms.extend(a.arms().iter().map(|&x| x as u32));
            starts.push(arms.len() as u32);
        }
        Ok(Self {
            ids,
            arms,
            starts,
            dim: space.dim(),
        })
    }

    fn len(&self) -> usize {
        self.ids.len()
    }

    fn arms_of(&self, i: usize) -> &[u32] {
        &self.arms[self.starts[i] as usize..self.starts[i + 1] as usize]
    }

    fn values(&self, r: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            (0..self.len()).map(|i| self.arms_of(i).iter().map(|&a| r[a as usize]).sum::<f64>()),
        );
    }

    /// Writes `w` into `weights` (dropping zeros) and its image into `point`.
    fn publish(&self, w: &[f64], weights: &mut Vec<(ActionId, f64)>, point: &mut [f64]) {
        weights.clear();
        point.iter_mut().for_each(|p| *p = 0.0);
        for (i, &wi) in w.iter().enumerate() {
            if wi > 0.0 {
                weights.push((self.ids[i], wi));
                for &a in self.arms_of(i) {
                    point[a as usize] += wi;
                }
            }
        }
    }

    fn uniform(&self) -> Vec<f64> {
        vec![1.0 / self.len() as f64; self.len()]
    }
}

/// `w_A ∝ exp(-eta (L_A - min L))`, normalized.
pub fn exp_weights(cum_loss: &[f64], eta: f64, out: &mut Vec<f64>) {
    let min = cum_loss.iter().copied().fold(f64::INFINITY, f64::min);
    out.clear();
    out.extend(cum_loss.iter().map(|l| (-eta * (l - min)).exp()));
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|w| *w /= total);
}

/// Hedge with a constant rate per doubling epoch,
/// `eta = sqrt(8 ln|A| / T) / scale`, where `scale` is the largest
/// per-round loss range seen so far.
#[derive(Debug, Clone)]
pub struct Hedge {
    list: ActionList,
    cum_loss: Vec<f64>,
    scale: f64,
    eta: f64,
    steps: u64,
    dense: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<(ActionId, f64)>,
    point: Vec<f64>,
}

impl Hedge {
    pub fn new(space: &ActionSpace, table: &mut ActionTable) -> Result<Self> {
        let list = ActionList::new(space, table)?;
        let n = list.len();
        let dense = list.uniform();
        let mut weights = Vec::with_capacity(n);
        let mut point = vec![0.0; list.dim];
        list.publish(&dense, &mut weights, &mut point);
        Ok(Self {
            list,
            cum_loss: vec![0.0; n],
            scale: 0.0,
            eta: 0.0,
            steps: 0,
            dense,
            values: Vec::with_capacity(n),
            weights,
            point,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl Learner for Hedge {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Hedge
    }

    fn weights(&self) -> &[(ActionId, f64)] {
        &self.weights
    }

    fn point(&self) -> &[f64] {
        &self.point
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn feed(&mut self, reward: &[f64], _ctx: &mut LearnerCtx<'_>) -> Result<()> {
        check_reward(reward, self.list.dim)?;
        self.list.values(reward, &mut self.values);
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| {
                (lo.min(u), hi.max(u))
            });
        self.scale = self.scale.max(hi - lo);
        for (l, u) in self.cum_loss.iter_mut().zip(&self.values) {
            *l -= u;
        }
        self.steps += 1;
        let n = self.list.len() as f64;
        if self.scale > 0.0 && n > 1.0 {
            let horizon = epoch_horizon(self.steps + 1) as f64;
            self.eta = (8.0 * n.ln() / horizon).sqrt() / self.scale;
            exp_weights(&self.cum_loss, self.eta, &mut self.dense);
        } else {
            self.dense = self.list.uniform();
        }
        self.list
            .publish(&self.dense, &mut self.weights, &mut self.point);
        Ok(())
    }
}

/// AdaHedge: `eta_t = ln|A| / Delta_{t-1}` from the cumulative mixability
/// gap; `eta = inf` plays follow-the-leader.
#[derive(Debug, Clone)]
pub struct AdaHedge {
    list: ActionList,
    cum_loss: Vec<f64>,
    gap: f64,
    steps: u64,
    dense: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<(ActionId, f64)>,
    point: Vec<f64>,
}

impl AdaHedge {
    pub fn new(space: &ActionSpace, table: &mut ActionTable) -> Result<Self> {
        let list = ActionList::new(space, table)?;
        let n = list.len();
        let mut me = Self {
            cum_loss: vec![0.0; n],
            gap: 0.0,
            steps: 0,
            dense: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
            point: vec![0.0; list.dim],
            list,
        };
        me.refresh();
        Ok(me)
    }

    pub fn eta(&self) -> f64 {
        let n = self.list.len() as f64;
        if self.gap > 0.0 {
            n.ln() / self.gap
        } else {
            f64::INFINITY
        }
    }

    pub fn cumulative_gap(&self) -> f64 {
        self.gap
    }

    fn refresh(&mut self) {
        let eta = self.eta();
        if eta.is_infinite() {
            let min = self.cum_loss.iter().copied().fold(f64::INFINITY, f64::min);
            let leaders = self.cum_loss.iter().filter(|&&l| l == min).count() as f64;
            self.dense.clear();
            self.dense.extend(
                self.cum_loss
                    .iter()
                    .map(|&l| if l == min { 1.0 / leaders } else { 0.0 }),
            );
        } else {
            exp_weights(&self.cum_loss, eta, &mut self.dense);
        }
        self.list
            .publish(&self.dense, &mut self.weights, &mut self.point);
    }

    /// Mixability gap of loss `loss` under the current weights and rate.
    fn mixability_gap(&self, loss: &[f64]) -> f64 {
        let eta = self.eta();
        let hedge: f64 = self.dense.iter().zip(loss).map(|(w, l)| w * l).sum();
        let mix = if eta.is_infinite() {
            self.dense
                .iter()
                .zip(loss)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, &l)| l)
                .fold(f64::INFINITY, f64::min)
        } else {
            let min = loss.iter().copied().fold(f64::INFINITY, f64::min);
            let s: f64 = self
                .dense
                .iter()
                .zip(loss)
                .map(|(w, l)| w * (-eta * (l - min)).exp())
                .sum();
            min - s.ln() / eta
        };
        (hedge - mix).max(0.0)
    }
}

impl Learner for AdaHedge {
    fn kind(&self) -> LearnerKind {
        LearnerKind::AdaHedge
    }

    fn weights(&self) -> &[(ActionId, f64)] {
        &self.weights
    }

    fn point(&self) -> &[f64] {
        &self.point
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn feed(&mut self, reward: &[f64], _ctx: &mut LearnerCtx<'_>) -> Result<()> {
        check_reward(reward, self.list.dim)?;
        self.list.values(reward, &mut self.values);
        self.values.iter_mut().for_each(|u| *u = -*u);
        self.gap += self.mixability_gap(&self.values);
        for (l, x) in self.cum_loss.iter_mut().zip(&self.values) {
            *l += x;
        }
        self.steps += 1;
        self.refresh();
        Ok(())
    }
}

/// Uniform sampling baseline: ignores its rewards.
#[derive(Debug, Clone)]
pub struct UniformLearner {
    weights: Vec<(ActionId, f64)>,
    point: Vec<f64>,
    steps: u64,
}

impl UniformLearner {
    pub fn new(space: &ActionSpace, table: &mut ActionTable) -> Result<Self> {
        let list = ActionList::new(space, table)?;
        let mut weights = Vec::new();
        let mut point = vec![0.0; list.dim];
        list.publish(&list.uniform(), &mut weights, &mut point);
        Ok(Self {
            weights,
            point,
            steps: 0,
        })
    }
}

impl Learner for UniformLearner {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Uniform
    }

    fn weights(&self) -> &[(ActionId, f64)] {
        &self.weights
    }

    fn point(&self) -> &[f64] {
        &self.point
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn feed(&mut self, _reward: &[f64], _ctx: &mut LearnerCtx<'_>) -> Result<()> {
        self.steps += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softmax_values() {
        let mut w = Vec::new();
        exp_weights(&[3.0, 3.0, 3.0], 2.0, &mut w);
        assert!(w.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        exp_weights(&[0.0, 1.0], 1.0, &mut w);
        let e = (-1.0f64).exp();
        assert!((w[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((w[0] - 0.7311).abs() < 1e-4 && (w[1] - 0.2689).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn softmax_normalized_and_shift_invariant(
            loss in proptest::collection::vec(-50.0f64..50.0, 1..30),
            eta in 0.0f64..5.0,
            shift in -100.0f64..100.0,
        ) {
            let mut w = Vec::new();
            exp_weights(&loss, eta, &mut w);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|x| *x >= 0.0));
            let shifted: Vec<f64> = loss.iter().map(|l| l + shift).collect();
            let mut v = Vec::new();
            exp_weights(&shifted, eta, &mut v);
            for (a, b) in w.iter().zip(&v) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    fn ctx_parts(d: usize) -> (ActionSpace, ActionTable) {
        (ActionSpace::singletons(d), ActionTable::new())
    }

    #[test]
    fn hedge_reward_shift_invariance() {
        let (space, mut t1) = ctx_parts(4);
        let mut t2 = ActionTable::new();
        let mut a = Hedge::new(&space, &mut t1).unwrap();
        let mut b = Hedge::new(&space, &mut t2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let r: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: Vec<f64> = r.iter().map(|x| x + 0.7).collect();
            a.feed(
                &r,
                &mut LearnerCtx {
                    space: &space,
                    table: &mut t1,
                },
            )
            .unwrap();
            b.feed(
                &s,
                &mut LearnerCtx {
                    space: &space,
                    table: &mut t2,
                },
            )
            .unwrap();
            for (x, y) in a.weights().iter().zip(b.weights()) {
                assert!((x.1 - y.1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adahedge_identical_losses_keep_uniform() {
        let (space, mut table) = ctx_parts(5);
        let mut h = AdaHedge::new(&space, &mut table).unwrap();
        for _ in 0..20 {
            h.feed(
                &[0.4; 5],
                &mut LearnerCtx {
                    space: &space,
                    table: &mut table,
                },
            )
            .unwrap();
            assert_eq!(h.cumulative_gap(), 0.0);
            assert!(h.weights().iter().all(|x| (x.1 - 0.2).abs() < 1e-15));
        }
    }

    #[test]
    fn adahedge_infinite_rate_follows_the_leader() {
        let (space, mut table) = ctx_parts(3);
        let mut h = AdaHedge::new(&space, &mut table).unwrap();
        assert!(h.eta().is_infinite());
        h.cum_loss = vec![-0.1, -0.9, -0.5];
        h.refresh();
        let leader = table
            .id_of(&crate::combinatorial::Action::singleton(1))
            .unwrap();
        assert_eq!(h.weights(), &[(leader, 1.0)]);
        assert_eq!(h.point(), &[0.0, 1.0, 0.0]);
        // Uniform play against distinct losses opens a positive gap.
        let (space, mut table) = ctx_parts(3);
        let mut h = AdaHedge::new(&space, &mut table).unwrap();
        h.feed(
            &[0.1, 0.9, 0.5],
            &mut LearnerCtx {
                space: &space,
                table: &mut table,
            },
        )
        .unwrap();
        assert!((h.cumulative_gap() - 0.4).abs() < 1e-15);
        assert!(h.eta().is_finite());
    }

    #[test]
    fn adahedge_rate_is_nonincreasing() {
        let (space, mut table) = ctx_parts(6);
        let mut h = AdaHedge::new(&space, &mut table).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut prev = h.eta();
        for _ in 0..2000 {
            let r: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..3.0)).collect();
            h.feed(
                &r,
                &mut LearnerCtx {
                    space: &space,
                    table: &mut table,
                },
            )
            .unwrap();
            assert!(h.eta() <= prev);
            prev = h.eta();
        }
    }

    #[test]
    fn non_finite_reward_is_rejected() {
        let (space, mut table) = ctx_parts(2);
        let mut h = Hedge::new(&space, &mut table).unwrap();
        let err = h.feed(
            &[f64::NAN, 0.0],
            &mut LearnerCtx {
                space: &space,
                table: &mut table,
            },
        );
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }
}
