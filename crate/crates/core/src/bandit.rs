//! Gaussian environment, semi-bandit sampling and the MLE estimator.

use rustc_hash::FxHashMap as HashMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::combinatorial::Action;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardFamily {
    #[default]
    Gaussian,
}

/// Closed interval `[lo, hi]` per arm.
pub type ParameterBox = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    means: Vec<f64>,
    stddevs: Vec<f64>,
    /// Standard deviation actually used when sampling. Equals `stddevs`
    /// unless overridden, e.g. for noiseless replay.
    noise: Vec<f64>,
    family: RewardFamily,
    parameter_box: Option<ParameterBox>,
}

impl BanditInstance {
    pub fn new(means: Vec<f64>, stddevs: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 arms, got {}",
                means.len()
            )));
        }
        if stddevs.len() != means.len() {
            return Err(Error::InvalidParameter(format!(
                "{} means but {} standard deviations",
                means.len(),
                stddevs.len()
            )));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("means"));
        }
        if let Some(s) = stddevs.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "standard deviations must be positive and finite, got {s}"
            )));
        }
        Ok(Self {
            noise: stddevs.clone(),
            means,
            stddevs,
            family: RewardFamily::Gaussian,
            parameter_box: None,
        })
    }

    /// Same `sigma` on every arm.
    pub fn homoscedastic(means: Vec<f64>, sigma: f64) -> Result<Self> {
        let d = means.len();
        Self::new(means, vec![sigma; d])
    }

    pub fn with_parameter_box(mut self, bounds: ParameterBox) -> Result<Self> {
        if bounds.len() != self.dim() {
            return Err(Error::InvalidParameter(
                "parameter box dimension mismatch".into(),
            ));
        }
        for (a, (&m, &(lo, hi))) in self.means.iter().zip(&bounds).enumerate() {
            if !(lo <= hi) || m < lo || m > hi {
                return Err(Error::InvalidParameter(format!(
                    "arm {a}: mean {m} outside [{lo}, {hi}]"
                )));
            }
        }
        self.parameter_box = Some(bounds);
        Ok(self)
    }

    /// Samples with the given per-arm noise while the model keeps `stddevs`.
    pub fn with_environment_noise(mut self, noise: Vec<f64>) -> Result<Self> {
        if noise.len() != self.dim() || noise.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(
                "environment noise must be d nonnegative values".into(),
            ));
        }
        self.noise = noise;
        Ok(self)
    }

    /// Every observation equals the mean.
    pub fn noiseless(self) -> Self {
        let d = self.dim();
        Self {
            noise: vec![0.0; d],
            ..self
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stddevs(&self) -> &[f64] {
        &self.stddevs
    }

    pub fn environment_noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn parameter_box(&self) -> Option<&[(f64, f64)]> {
        self.parameter_box.as_deref()
    }

    fn check_action(&self, action: &Action) -> Result<()> {
        if action.is_empty() {
            return Err(Error::InvalidAction("empty action".into()));
        }
        if let Some(&a) = action.arms().iter().find(|&&a| a >= self.dim()) {
            return Err(Error::InvalidAction(format!(
                "arm {a} out of range for d = {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Draws for the arms of `action`, in arm order.
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        action: &Action,
        rng: &mut R,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_action(action)?;
        out.clear();
        for &a in action.arms() {
            let z: f64 = rng.sample(StandardNormal);
            out.push(self.means[a] + self.noise[a] * z);
        }
        Ok(())
    }
}

/// Semi-bandit feedback: `Some` on the arms of `action`, `None` elsewhere.
pub fn sample_feedback<R: Rng + ?Sized>(
    instance: &BanditInstance,
    action: &Action,
    rng: &mut R,
) -> Result<Vec<Option<f64>>> {
    let mut draws = Vec::with_capacity(action.len());
    instance.sample_into(action, rng, &mut draws)?;
    let mut obs = vec![None; instance.dim()];
    for (&a, y) in action.arms().iter().zip(draws) {
        obs[a] = Some(y);
    }
    Ok(obs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub arm_counts: Vec<u64>,
    pub action_counts: HashMap<Action, u64>,
    pub reward_sums: Vec<f64>,
    pub mle: Vec<f64>,
    pub projected_mle: Vec<f64>,
    pub round: u64,
}

impl EstimatorState {
    pub fn new(d: usize) -> Self {
        Self {
            arm_counts: vec![0; d],
            action_counts: HashMap::default(),
            reward_sums: vec![0.0; d],
            mle: vec![0.0; d],
            projected_mle: vec![0.0; d],
            round: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.arm_counts.len()
    }

    /// Incorporates masked feedback for `action`.
    pub fn update(&mut self, action: &Action, observation: &[Option<f64>]) -> Result<()> {
        if observation.len() != self.dim() {
            return Err(Error::Inconsistent(format!(
                "observation has length {}, expected {}",
                observation.len(),
                self.dim()
            )));
        }
        let mut values = Vec::with_capacity(action.len());
        for (a, y) in observation.iter().enumerate() {
            match (action.contains(a), y) {
                (true, Some(v)) => values.push(*v),
                (false, None) => {}
                _ => {
                    return Err(Error::Inconsistent(format!(
                        "observation mask disagrees with action {action} at arm {a}"
                    )))
                }
            }
        }
        self.update_aligned(action, &values)
    }

    /// Like [`update`](Self::update) with `values[i]` observed on `action.arms()[i]`.
    pub fn update_aligned(&mut self, action: &Action, values: &[f64]) -> Result<()> {
        if values.len() != action.len() {
            return Err(Error::Inconsistent(format!(
                "{} values for an action of size {}",
                values.len(),
                action.len()
            )));
        }
        if let Some(&a) = action.arms().iter().find(|&&a| a >= self.dim()) {
            return Err(Error::InvalidAction(format!("arm {a} out of range")));
        }
        for (&a, &y) in action.arms().iter().zip(values) {
            self.arm_counts[a] += 1;
            self.reward_sums[a] += y;
            self.mle[a] = self.reward_sums[a] / self.arm_counts[a] as f64;
        }
        match self.action_counts.get_mut(action) {
            Some(n) => *n += 1,
            None => {
                self.action_counts.insert(action.clone(), 1);
            }
        }
        self.round += 1;
        Ok(())
    }

    pub fn all_arms_observed(&self) -> bool {
        self.arm_counts.iter().all(|&n| n > 0)
    }
}

pub fn kl_gaussian(x: f64, y: f64, sigma: f64) -> f64 {
    let z = (x - y) / sigma;
    0.5 * z * z
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn confidence_box(
    state: &EstimatorState,
    sigmas: &[f64],
    f_value: f64,
) -> Result<ConfidenceBox> {
    let d = state.dim();
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    for a in 0..d {
        let n = state.arm_counts[a];
        if n == 0 {
            return Err(Error::UninitializedArm(a));
        }
        let half = (2.0 * f_value * sigmas[a] * sigmas[a] / n as f64).sqrt();
        lower.push(state.mle[a] - half);
        upper.push(state.mle[a] + half);
    }
    Ok(ConfidenceBox { lower, upper })
}

/// Coordinate-wise projection of `mle` onto `parameter_box ∩ confidence`.
/// Where the two intervals miss each other, the parameter-box endpoint
/// closest to the confidence interval is returned.
pub fn project_to_box(
    mle: &[f64],
    parameter_box: Option<&[(f64, f64)]>,
    confidence: &ConfidenceBox,
) -> Vec<f64> {
    let Some(bounds) = parameter_box else {
        return mle.to_vec();
    };
    mle.iter()
        .zip(bounds)
        .zip(confidence.lower.iter().zip(&confidence.upper))
        .map(|((&m, &(plo, phi)), (&clo, &chi))| {
            let lo = plo.max(clo);
            let hi = phi.min(chi);
            if lo <= hi {
                m.clamp(lo, hi)
            } else if clo > phi {
                phi
            } else {
                plo
            }
        })
        .collect()
}
