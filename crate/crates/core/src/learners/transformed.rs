//! Frank-Wolfe style learners on the transformed simplex `conv{1_A}`.

use super::{check_reward, Learner, LearnerCtx, LearnerKind};
use crate::combinatorial::{Action, ActionId, ActionSpace, ActionTable, PolytopeParams};
use crate::error::{Error, Result};

const SCHEDULE_T0: f64 = 200.0;

/// `floor(200 b^i)` with `b = (3 + sqrt 5) / 2`.
pub fn doubling_schedule(i: u32) -> u64 {
    let b = (3.0 + 5f64.sqrt()) / 2.0;
    (SCHEDULE_T0 * b.powi(i as i32)).floor() as u64
}

fn epoch_of(step: u64) -> u32 {
    (0..)
        .find(|&i| step <= doubling_schedule(i))
        .expect("schedule is unbounded")
}

/// Horizon of the doubling epoch containing `step`.
pub fn epoch_horizon(step: u64) -> u64 {
    doubling_schedule(epoch_of(step))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlooParams {
    pub eta: f64,
    pub gamma: f64,
    pub mass: f64,
    pub horizon: u64,
}

pub fn lloo_params(
    horizon: u64,
    polytope: &PolytopeParams,
    max_reward_norm: f64,
    d: usize,
) -> LlooParams {
    let t = horizon as f64;
    let d = d as f64;
    let mu2 = polytope.mu_poly * polytope.mu_poly;
    LlooParams {
        eta: polytope.diameter / (18.0 * polytope.mu_poly * (d * t).sqrt() * max_reward_norm),
        gamma: 1.0 / (3.0 * d * mu2),
        mass: (mu2 * d / t.sqrt() * (1.0 + 1.0 / (18.0 * d * mu2))).min(1.0),
        horizon,
    }
}

fn dot_action(arms: &[usize], c: &[f64]) -> f64 {
    arms.iter().map(|&a| c[a]).sum()
}

/// Takes mass `mass` from the actions with the largest `<1_A, cost>`.
/// Returns the removed arm-level vector and the removed distribution.
/// When `mass` covers the whole support, everything is removed in support
/// order.
pub fn reduce(
    weights: &[(ActionId, f64)],
    table: &ActionTable,
    mass: f64,
    cost: &[f64],
) -> Result<(Vec<f64>, Vec<(ActionId, f64)>)> {
    let mut arm_part = vec![0.0; cost.len()];
    let mut taken = Vec::new();
    reduce_into(
        weights,
        table,
        mass,
        cost,
        &mut Vec::new(),
        &mut arm_part,
        &mut taken,
    )?;
    Ok((
        arm_part,
        taken.into_iter().map(|(i, m)| (weights[i].0, m)).collect(),
    ))
}

/// As [`reduce`], with `taken` holding positions in `weights`.
fn reduce_into(
    weights: &[(ActionId, f64)],
    table: &ActionTable,
    mass: f64,
    cost: &[f64],
    order: &mut Vec<(f64, usize)>,
    arm_part: &mut [f64],
    taken: &mut Vec<(usize, f64)>,
) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::EmptySupport);
    }
    let available: f64 = weights.iter().map(|w| w.1).sum();
    if mass > available + 1e-12 {
        return Err(Error::InvalidMass {
            requested: mass,
            available,
        });
    }
    arm_part.iter_mut().for_each(|x| *x = 0.0);
    taken.clear();
    let mut take = |i: usize, left: &mut f64| {
        let (id, w) = weights[i];
        let m = w.min(*left);
        *left -= m;
        taken.push((i, m));
        for &a in table.get(id).arms() {
            arm_part[a] += m;
        }
    };
    let mut left = mass;
    if mass >= available {
        for i in 0..weights.len() {
            take(i, &mut left);
        }
        return Ok(());
    }
    order.clear();
    order.extend(
        weights
            .iter()
            .enumerate()
            .map(|(i, &(id, _))| (dot_action(table.get(id).arms(), cost), i)),
    );
    // Largest cost first, ties to the lower action.
    let before = |a: &(f64, usize), b: &(f64, usize)| {
        b.0.total_cmp(&a.0)
            .then_with(|| table.get(weights[a.1].0).cmp(table.get(weights[b.1].0)))
            == std::cmp::Ordering::Less
    };
    // Weighted quickselect: only the boundary of the removed mass is
    // located, the removed prefix itself stays unordered.
    let mut rest: &mut [(f64, usize)] = order;
    while left > 0.0 && !rest.is_empty() {
        let mid = rest.len() / 2;
        rest.swap(mid, rest.len() - 1);
        let pivot = rest[rest.len() - 1];
        let mut split = 0;
        for i in 0..rest.len() - 1 {
            if before(&rest[i], &pivot) {
                rest.swap(i, split);
                split += 1;
            }
        }
        let last = rest.len() - 1;
        rest.swap(split, last);
        let head: f64 = rest[..split].iter().map(|x| weights[x.1].1).sum();
        if head >= left {
            rest = &mut rest[..split];
            continue;
        }
        for &(_, i) in &rest[..=split] {
            if left <= 0.0 {
                break;
            }
            take(i, &mut left);
        }
        rest = &mut rest[split + 1..];
    }
    Ok(())
}

/// Shared state: the point, its sparse decomposition, and the anchor
/// `w~_{n0}` from initialization.
#[derive(Debug, Clone)]
struct TransformedState {
    point: Vec<f64>,
    weights: Vec<(ActionId, f64)>,
    cum_reward: Vec<f64>,
    anchor: Vec<f64>,
    steps: u64,
    grad: Vec<f64>,
    neg: Vec<f64>,
}

impl TransformedState {
    fn new(space: &ActionSpace, table: &mut ActionTable, init: &[Action]) -> Result<Self> {
        let d = space.dim();
        if init.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut ids: Vec<ActionId> = init.iter().map(|a| table.intern(a.clone())).collect();
        ids.sort();
        ids.dedup();
        let w = 1.0 / ids.len() as f64;
        let weights: Vec<(ActionId, f64)> = ids.into_iter().map(|id| (id, w)).collect();
        let mut point = vec![0.0; d];
        for &(id, w) in &weights {
            for &a in table.get(id).arms() {
                point[a] += w;
            }
        }
        Ok(Self {
            anchor: point.clone(),
            point,
            weights,
            cum_reward: vec![0.0; d],
            steps: 0,
            grad: vec![0.0; d],
            neg: Vec::with_capacity(d),
        })
    }

    /// `argmin_A <1_A, grad>` through the maximization oracle.
    fn best_vertex(&mut self, ctx: &mut LearnerCtx<'_>) -> Result<ActionId> {
        self.neg.clear();
        self.neg.extend(self.grad.iter().map(|g| -g));
        Ok(ctx.table.intern(ctx.space.argmax(&self.neg)?))
    }

    fn add_weight(&mut self, id: ActionId, amount: f64) {
        match self.weights.iter_mut().find(|w| w.0 == id) {
            Some(w) => w.1 += amount,
            None => self.weights.push((id, amount)),
        }
    }

    fn prune(&mut self) {
        self.weights.retain(|w| w.1 > 0.0);
    }
}

/// Online Frank-Wolfe with step `t^{-1/4}`.
#[derive(Debug, Clone)]
pub struct Ofw {
    state: TransformedState,
    diameter: f64,
    reg_sum: f64,
}

impl Ofw {
    pub fn new(space: &ActionSpace, table: &mut ActionTable, init: &[Action]) -> Result<Self> {
        let state = TransformedState::new(space, table, init)?;
        let diameter = match space.geometry() {
            Ok(g) => g.diameter,
            Err(_) if space.size() == Some(1) => 1.0,
            Err(e) => return Err(e),
        };
        Ok(Self {
            state,
            diameter,
            reg_sum: 0.0,
        })
    }
}

impl Learner for Ofw {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Ofw
    }

    fn weights(&self) -> &[(ActionId, f64)] {
        &self.state.weights
    }

    fn point(&self) -> &[f64] {
        &self.state.point
    }

    fn steps(&self) -> u64 {
        self.state.steps
    }

    fn feed(&mut self, reward: &[f64], ctx: &mut LearnerCtx<'_>) -> Result<()> {
        let st = &mut self.state;
        check_reward(reward, st.point.len())?;
        st.steps += 1;
        let t = st.steps as f64;
        let step = t.powf(-0.25);
        self.reg_sum += step;
        for (c, r) in st.cum_reward.iter_mut().zip(reward) {
            *c += r;
        }
        let k = 2.0 * self.reg_sum / self.diameter;
        for a in 0..st.grad.len() {
            st.grad[a] = (k * (st.point[a] - st.anchor[a]) - st.cum_reward[a]) / t;
        }
        let id = st.best_vertex(ctx)?;
        for p in st.point.iter_mut() {
            *p *= 1.0 - step;
        }
        for &a in ctx.table.get(id).arms() {
            st.point[a] += step;
        }
        for w in st.weights.iter_mut() {
            w.1 *= 1.0 - step;
        }
        st.add_weight(id, step);
        st.prune();
        Ok(())
    }
}

/// Local linear optimization oracle learner: pairwise steps that move
/// mass `M` away from the worst corners of the support.
#[derive(Debug, Clone)]
pub struct Lloo {
    state: TransformedState,
    geometry: PolytopeParams,
    epoch: u32,
    norm_prev: Option<f64>,
    norm_this: f64,
    params: Option<LlooParams>,
    order: Vec<(f64, usize)>,
    arm_part: Vec<f64>,
    taken: Vec<(usize, f64)>,
}

impl Lloo {
    pub fn new(space: &ActionSpace, table: &mut ActionTable, init: &[Action]) -> Result<Self> {
        let state = TransformedState::new(space, table, init)?;
        let geometry = match space.geometry() {
            Ok(g) => g,
            // A single vertex never moves; any constants will do.
            Err(_) if space.size() == Some(1) => PolytopeParams::new(1.0, 1.0, 1.0)?,
            Err(e) => return Err(e),
        };
        let d = space.dim();
        Ok(Self {
            state,
            geometry,
            epoch: 0,
            norm_prev: None,
            norm_this: 0.0,
            params: None,
            order: Vec::new(),
            arm_part: vec![0.0; d],
            taken: Vec::new(),
        })
    }

    pub fn params(&self) -> Option<LlooParams> {
        self.params
    }

    pub fn geometry(&self) -> &PolytopeParams {
        &self.geometry
    }

    /// One update with explicit parameters.
    pub fn step_with(
        &mut self,
        reward: &[f64],
        ctx: &mut LearnerCtx<'_>,
        params: LlooParams,
    ) -> Result<()> {
        let st = &mut self.state;
        check_reward(reward, st.point.len())?;
        st.steps += 1;
        for (c, r) in st.cum_reward.iter_mut().zip(reward) {
            *c += r;
        }
        for a in 0..st.grad.len() {
            st.grad[a] = 2.0 * (st.point[a] - st.anchor[a]) - params.eta * st.cum_reward[a];
        }
        let id = st.best_vertex(ctx)?;
        reduce_into(
            &st.weights,
            ctx.table,
            params.mass,
            &st.grad,
            &mut self.order,
            &mut self.arm_part,
            &mut self.taken,
        )?;
        let g = params.gamma;
        for (p, m) in st.point.iter_mut().zip(&self.arm_part) {
            *p -= g * m;
        }
        for &a in ctx.table.get(id).arms() {
            st.point[a] += g * params.mass;
        }
        for &(i, m) in &self.taken {
            st.weights[i].1 -= g * m;
        }
        st.add_weight(id, g * params.mass);
        st.prune();
        self.params = Some(params);
        Ok(())
    }
}

impl Learner for Lloo {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Lloo
    }

    fn weights(&self) -> &[(ActionId, f64)] {
        &self.state.weights
    }

    fn point(&self) -> &[f64] {
        &self.state.point
    }

    fn steps(&self) -> u64 {
        self.state.steps
    }

    fn feed(&mut self, reward: &[f64], ctx: &mut LearnerCtx<'_>) -> Result<()> {
        let step = self.state.steps + 1;
        let epoch = epoch_of(step);
        if epoch != self.epoch {
            self.norm_prev = Some(self.norm_this);
            self.norm_this = 0.0;
            self.epoch = epoch;
        }
        let norm = reward.iter().map(|r| r * r).sum::<f64>().sqrt();
        self.norm_this = self.norm_this.max(norm);
        let estimate = self
            .norm_prev
            .unwrap_or(self.norm_this)
            .max(f64::MIN_POSITIVE);
        let params = lloo_params(
            doubling_schedule(epoch),
            &self.geometry,
            estimate,
            self.state.point.len(),
        );
        self.step_with(reward, ctx, params)
    }
}
