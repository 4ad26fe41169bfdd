//! Stopping thresholds `beta(t, delta)` and exploration bonuses `f(t)`.

mod special;

pub use special::{cgg, g_gaussian, lambert_wbar, tee, zeta};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    TheoreticalSubgaussian,
    TheoreticalGaussian,
    Stylized,
}

impl ThresholdMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::TheoreticalSubgaussian => "theoretical-subgaussian",
            Self::TheoreticalGaussian => "theoretical-gaussian",
            Self::Stylized => "stylized",
        }
    }
}

impl std::str::FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theoretical-subgaussian" | "subgaussian" => Ok(Self::TheoreticalSubgaussian),
            "theoretical-gaussian" | "gaussian" | "theoretical" => Ok(Self::TheoreticalGaussian),
            "stylized" => Ok(Self::Stylized),
            other => Err(Error::InvalidParameter(format!(
                "unknown threshold mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BonusMode {
    /// `f(t) = W((1+c)(1+b) ln t)`.
    Theoretical { c: f64, b: f64 },
    /// `f(t) = ln t`.
    Stylized,
}

pub fn exploration_bonus(t: f64, mode: BonusMode) -> f64 {
    match mode {
        BonusMode::Stylized => t.ln().max(0.0),
        BonusMode::Theoretical { c, b } => {
            let arg = (1.0 + c) * (1.0 + b) * t.ln();
            if arg < 1.0 {
                1.0
            } else {
                lambert_wbar(arg).expect("argument >= 1")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdContext {
    /// Largest symmetric difference between two answers.
    pub d0: usize,
    /// Largest action size.
    pub k_max: usize,
    pub answer_count: usize,
    pub mode: ThresholdMode,
}

impl ThresholdContext {
    pub fn new(d0: usize, k_max: usize, answer_count: usize, mode: ThresholdMode) -> Result<Self> {
        if d0 == 0 || k_max == 0 || answer_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "threshold context needs d0 >= 1, K >= 1, |I| >= 2 (got {d0}, {k_max}, {answer_count})"
            )));
        }
        Ok(Self {
            d0,
            k_max,
            answer_count,
            mode,
        })
    }
}

/// `beta(t, delta)` with the `delta`-only part precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    ctx: ThresholdContext,
    delta: f64,
    constant: f64,
}

impl StoppingRule {
    pub fn new(ctx: ThresholdContext, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        let d0 = ctx.d0 as f64;
        let x = ((ctx.answer_count as f64 - 1.0) / delta).ln() / d0;
        let constant = match ctx.mode {
            ThresholdMode::TheoreticalSubgaussian => d0 * tee(x)?,
            ThresholdMode::TheoreticalGaussian => d0 * cgg(x)?,
            ThresholdMode::Stylized => -delta.ln(),
        };
        Ok(Self {
            ctx,
            delta,
            constant,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn context(&self) -> &ThresholdContext {
        &self.ctx
    }

    pub fn at(&self, t: f64) -> f64 {
        let d0 = self.ctx.d0 as f64;
        // For tK < d0 the log would be negative; it is clamped at 0.
        let inner = || (t * self.ctx.k_max as f64 / d0).max(1.0).ln();
        match self.ctx.mode {
            ThresholdMode::TheoreticalSubgaussian => {
                3.0 * d0 * (1.0 + inner()).ln() + self.constant
            }
            ThresholdMode::TheoreticalGaussian => 2.0 * d0 * (4.0 + inner()).ln() + self.constant,
            ThresholdMode::Stylized => (1.0 + t.max(1.0).ln()).ln() + self.constant,
        }
    }
}

pub fn stopping_threshold(t: f64, delta: f64, ctx: &ThresholdContext) -> Result<f64> {
    Ok(StoppingRule::new(*ctx, delta)?.at(t))
}
