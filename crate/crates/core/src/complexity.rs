//! The complexity `D = max_{w in S_A} inf_{lambda in alt} <w, d_KL(mu, lambda)>`
//! by Frank-Wolfe, and the matching lower bound on the stopping time.

use crate::bandit::BanditInstance;
use crate::combinatorial::{ActionSpace, AnswerSpace};
use crate::error::{Error, Result};
use crate::game::best_response::{response_gradient, response_value};
use crate::game::lambda_player;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityResult {
    /// `g` at [`allocation`](Self::allocation).
    pub value: f64,
    pub allocation: Vec<f64>,
    pub iterations: usize,
    /// Upper bound on `D - value`.
    pub residual: f64,
    /// Smallest `max_A E_q <1_A, d_KL(mu, lambda_J)>` over the iterations,
    /// with `q` a mixture of best responses: an upper bound on `D`.
    pub dual: f64,
}

/// `g(w) = min_J inf_{lambda in alt_J} <w, d_KL(mu, lambda)>`.
pub fn allocation_value(
    instance: &BanditInstance,
    answers: &AnswerSpace,
    best: usize,
    w: &[f64],
) -> Result<f64> {
    Ok(lambda_player(instance.means(), answers, best, w, instance.stddevs())?.value)
}

fn unique_best(instance: &BanditInstance, answers: &AnswerSpace) -> Result<usize> {
    let mu = instance.means();
    let best = answers.argmax(mu)?;
    let top = best.value(mu);
    let ties = answers
        .answers()
        .iter()
        .filter(|a| a.value(mu) >= top)
        .count();
    if ties > 1 {
        return Err(Error::DegenerateInstance(format!(
            "{ties} answers share the best value {top}"
        )));
    }
    answers
        .index_of(&best)
        .ok_or_else(|| Error::InvalidAnswer(format!("{best} is not an answer")))
}

/// Frank-Wolfe with step `2/(k+2)` on the soft-min
/// `-eta ln sum_J exp(-f_J(w)/eta)` with `eta_k = g(w_k)/sqrt(k+1)`.
/// The plain minimum has kinks where several neighbors are active, and
/// the iterates stall there; the soft-min weights also give the mixture
/// of best responses used as dual certificate.
pub fn compute_complexity(
    instance: &BanditInstance,
    actions: &ActionSpace,
    answers: &AnswerSpace,
    tol: f64,
    max_iter: usize,
) -> Result<ComplexityResult> {
    let d = instance.dim();
    if actions.dim() != d || answers.dim() != d {
        return Err(Error::Inconsistent(
            "spaces and instance differ in dimension".into(),
        ));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter(
            "tol and max_iter must be positive".into(),
        ));
    }
    let best = unique_best(instance, answers)?;
    let mu = instance.means();
    let sig = instance.stddevs();

    let cover = actions.covering()?;
    let mut w = vec![0.0; d];
    for a in &cover {
        for &i in a.arms() {
            w[i] += 1.0 / cover.len() as f64;
        }
    }
    let mut values = Vec::with_capacity(answers.len());
    let mut grad = vec![0.0; d];
    let mut best_w = w.clone();
    let mut best_value = f64::NEG_INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..max_iter {
        iterations = k + 1;
        values.clear();
        answers.for_each_neighbor_diff(best, |j, only_i, only_j| {
            values.push((j, response_value(mu, only_i, only_j, &w, sig).0));
        });
        let g = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        if g > best_value {
            best_value = g;
            best_w.clone_from(&w);
        }
        let eta = g / ((k + 1) as f64).sqrt();
        let mut total = 0.0;
        for v in values.iter_mut() {
            v.1 = if eta > 0.0 {
                (-(v.1 - g) / eta).exp()
            } else if v.1 == g {
                1.0
            } else {
                0.0
            };
            total += v.1;
        }
        grad.iter_mut().for_each(|x| *x = 0.0);
        let mut next = 0;
        answers.for_each_neighbor_diff(best, |j, only_i, only_j| {
            let (jj, q) = values[next];
            debug_assert_eq!(j, jj);
            next += 1;
            if q > 0.0 {
                response_gradient(mu, only_i, only_j, &w, sig, |a, x| grad[a] += q / total * x);
            }
        });
        let vertex = actions.argmax(&grad)?;
        dual = dual.min(vertex.value(&grad));
        if dual - best_value <= tol {
            break;
        }
        let step = 2.0 / (k as f64 + 2.0);
        for a in 0..d {
            w[a] *= 1.0 - step;
        }
        for &a in vertex.arms() {
            w[a] += step;
        }
    }
    Ok(ComplexityResult {
        value: best_value,
        allocation: best_w,
        iterations,
        residual: (dual - best_value).max(0.0),
        dual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    /// `ln(1/(2.4 delta)) / D`, or 0 when vacuous.
    pub value: f64,
    pub vacuous: bool,
}

/// Lower bound on `E[tau]` for any δ-PAC strategy.
pub fn lower_bound(delta: f64, complexity: f64) -> Result<LowerBound> {
    if !(complexity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "complexity must be positive, got {complexity}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let log = (1.0 / (2.4 * delta)).ln();
    Ok(if log <= 0.0 {
        LowerBound {
            value: 0.0,
            vacuous: true,
        }
    } else {
        LowerBound {
            value: log / complexity,
            vacuous: false,
        }
    })
}
