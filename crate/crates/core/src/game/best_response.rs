//! Closed-form Gaussian best response of the λ-player, the GLR statistic
//! and optimistic rewards.

use crate::bandit::{kl_gaussian, ConfidenceBox};
use crate::combinatorial::{Action, AnswerSpace};
use crate::error::{Error, Result};

/// Which case of the closed form produced a best response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `phi` already lies in the closed half-space of `J`.
    Inside,
    /// An unweighted arm of `I △ J` absorbs the whole move.
    FreeArm(usize),
    /// Weighted projection onto the hyperplane.
    Projection,
}

/// Value `<w, d_KL(phi, lambda)>` of the best response against `J`,
/// given the arms only in `I` and only in `J`.
pub(crate) fn response_value(
    phi: &[f64],
    only_i: &[usize],
    only_j: &[usize],
    weights: &[f64],
    sigmas: &[f64],
) -> (f64, Branch) {
    let gap: f64 =
        only_j.iter().map(|&a| phi[a]).sum::<f64>() - only_i.iter().map(|&a| phi[a]).sum::<f64>();
    if gap >= 0.0 {
        return (0.0, Branch::Inside);
    }
    let mut free = None;
    let mut v = 0.0;
    for &a in only_i.iter().chain(only_j) {
        if weights[a] <= 0.0 {
            free = Some(free.map_or(a, |f: usize| f.min(a)));
        } else {
            v += sigmas[a] * sigmas[a] / weights[a];
        }
    }
    if let Some(a0) = free {
        return (0.0, Branch::FreeArm(a0));
    }
    (gap * gap / (2.0 * v), Branch::Projection)
}

/// Calls `f(a, d_KL(phi_a, lambda_a))` on the arms the best response moves.
/// This is the gradient in `w` of the value, which is 1-homogeneous.
pub(crate) fn response_gradient(
    phi: &[f64],
    only_i: &[usize],
    only_j: &[usize],
    weights: &[f64],
    sigmas: &[f64],
    mut f: impl FnMut(usize, f64),
) {
    let gap: f64 =
        only_j.iter().map(|&a| phi[a]).sum::<f64>() - only_i.iter().map(|&a| phi[a]).sum::<f64>();
    match response_value(phi, only_i, only_j, weights, sigmas).1 {
        Branch::Inside => {}
        Branch::FreeArm(a0) => f(a0, gap * gap / (2.0 * sigmas[a0] * sigmas[a0])),
        Branch::Projection => {
            let v: f64 = only_i
                .iter()
                .chain(only_j)
                .map(|&a| sigmas[a] * sigmas[a] / weights[a])
                .sum();
            for &a in only_i.iter().chain(only_j) {
                let step = gap / v * sigmas[a] / weights[a];
                f(a, 0.5 * step * step);
            }
        }
    }
}

/// Writes the best response for `(only_i, only_j)` into `out`.
pub(crate) fn response_point(
    phi: &[f64],
    only_i: &[usize],
    only_j: &[usize],
    weights: &[f64],
    sigmas: &[f64],
    out: &mut Vec<f64>,
) -> Branch {
    out.clear();
    out.extend_from_slice(phi);
    let gap: f64 =
        only_j.iter().map(|&a| phi[a]).sum::<f64>() - only_i.iter().map(|&a| phi[a]).sum::<f64>();
    let (_, branch) = response_value(phi, only_i, only_j, weights, sigmas);
    match branch {
        Branch::Inside => {}
        Branch::FreeArm(a0) => {
            // Solve <1_J - 1_I, lambda> = 0 for coordinate a0 alone.
            let sign = if only_j.contains(&a0) { 1.0 } else { -1.0 };
            out[a0] = phi[a0] - gap / sign;
        }
        Branch::Projection => {
            let v: f64 = only_i
                .iter()
                .chain(only_j)
                .map(|&a| sigmas[a] * sigmas[a] / weights[a])
                .sum();
            let scale = gap / v;
            for &a in only_j {
                out[a] -= scale * sigmas[a] * sigmas[a] / weights[a];
            }
            for &a in only_i {
                out[a] += scale * sigmas[a] * sigmas[a] / weights[a];
            }
        }
    }
    branch
}

fn split(i: &Action, j: &Action) -> (Vec<usize>, Vec<usize>) {
    let only_i = i
        .arms()
        .iter()
        .copied()
        .filter(|&a| !j.contains(a))
        .collect();
    let only_j = j
        .arms()
        .iter()
        .copied()
        .filter(|&a| !i.contains(a))
        .collect();
    (only_i, only_j)
}

fn check_lengths(phi: &[f64], weights: &[f64], sigmas: &[f64]) -> Result<()> {
    if weights.len() != phi.len() || sigmas.len() != phi.len() {
        return Err(Error::Inconsistent(
            "phi, weights and sigmas differ in length".into(),
        ));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidParameter(
            "weights must be nonnegative".into(),
        ));
    }
    Ok(())
}

/// `argmin_{lambda : <1_J - 1_I, lambda> >= 0} <w, d_KL(phi, lambda)>` for
/// Gaussian arms.
pub fn best_response_gaussian(
    phi: &[f64],
    i: &Action,
    j: &Action,
    weights: &[f64],
    sigmas: &[f64],
) -> Result<Vec<f64>> {
    if i == j {
        return Err(Error::InvalidPair);
    }
    check_lengths(phi, weights, sigmas)?;
    let (only_i, only_j) = split(i, j);
    let mut out = Vec::with_capacity(phi.len());
    response_point(phi, &only_i, &only_j, weights, sigmas, &mut out);
    Ok(out)
}

/// `<w, d_KL(phi, lambda)>` with zero-weight arms contributing nothing.
pub fn weighted_kl(phi: &[f64], lambda: &[f64], weights: &[f64], sigmas: &[f64]) -> f64 {
    phi.iter()
        .zip(lambda)
        .zip(weights.iter().zip(sigmas))
        .filter(|(_, (&w, _))| w > 0.0)
        .map(|((&x, &y), (&w, &s))| w * kl_gaussian(x, y, s))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaResponse {
    /// Index of the minimizing answer in the answer space.
    pub answer: usize,
    pub lambda: Vec<f64>,
    pub value: f64,
}

/// Smallest best-response value over the neighbors of `answers[candidate]`;
/// ties go to the lowest answer index.
fn min_over_neighbors(
    phi: &[f64],
    answers: &AnswerSpace,
    candidate: usize,
    weights: &[f64],
    sigmas: &[f64],
) -> Result<(usize, f64)> {
    if answers.space().top_k_size() == Some(1) {
        return min_over_singletons(phi, candidate, weights, sigmas);
    }
    min_over_diffs(phi, answers, candidate, weights, sigmas)
}

fn min_over_diffs(
    phi: &[f64],
    answers: &AnswerSpace,
    candidate: usize,
    weights: &[f64],
    sigmas: &[f64],
) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    answers.for_each_neighbor_diff(candidate, |j, only_i, only_j| {
        let (v, _) = response_value(phi, only_i, only_j, weights, sigmas);
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((j, v));
        }
    });
    best.ok_or_else(|| Error::InvalidAnswer("candidate has no neighbors".into()))
}

/// [`min_over_neighbors`] for best-arm answers, where answer `j` is arm `j`.
fn min_over_singletons(phi: &[f64], i: usize, weights: &[f64], sigmas: &[f64]) -> Result<(usize, f64)> {
    let vi = (weights[i] > 0.0).then(|| sigmas[i] * sigmas[i] / weights[i]);
    let mut best: Option<(usize, f64)> = None;
    for j in (0..phi.len()).filter(|&j| j != i) {
        let gap = phi[j] - phi[i];
        let v = match vi {
            Some(vi) if gap < 0.0 && weights[j] > 0.0 => gap * gap / (2.0 * (vi + sigmas[j] * sigmas[j] / weights[j])),
            _ => 0.0,
        };
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((j, v));
        }
    }
    best.ok_or_else(|| Error::InvalidAnswer("candidate has no neighbors".into()))
}

/// Best response to the allocation `weights` among all neighbors of the
/// candidate.
pub fn lambda_player(
    mle: &[f64],
    answers: &AnswerSpace,
    candidate: usize,
    weights: &[f64],
    sigmas: &[f64],
) -> Result<LambdaResponse> {
    let mut lambda = Vec::with_capacity(mle.len());
    let (answer, value) =
        lambda_player_into(mle, answers, candidate, weights, sigmas, &mut lambda)?;
    Ok(LambdaResponse {
        answer,
        lambda,
        value,
    })
}

/// [`lambda_player`] writing the response point into `out`; returns the
/// minimizing answer index and the value.
pub fn lambda_player_into(
    mle: &[f64],
    answers: &AnswerSpace,
    candidate: usize,
    weights: &[f64],
    sigmas: &[f64],
    out: &mut Vec<f64>,
) -> Result<(usize, f64)> {
    check_lengths(mle, weights, sigmas)?;
    let (j, value) = min_over_neighbors(mle, answers, candidate, weights, sigmas)?;
    let (ai, aj) = (&answers.answers()[candidate], &answers.answers()[j]);
    if let ([x], [y]) = (ai.arms(), aj.arms()) {
        response_point(mle, &[*x], &[*y], weights, sigmas, out);
    } else {
        let (only_i, only_j) = split(ai, aj);
        response_point(mle, &only_i, &only_j, weights, sigmas, out);
    }
    Ok((j, value))
}

/// `min_J inf_lambda <N, d_KL(mle, lambda)>` over the neighbors of the
/// candidate.
pub fn glr_statistic(
    mle: &[f64],
    counts: &[f64],
    answers: &AnswerSpace,
    candidate: usize,
    sigmas: &[f64],
) -> Result<f64> {
    check_lengths(mle, counts, sigmas)?;
    Ok(min_over_neighbors(mle, answers, candidate, counts, sigmas)?.1)
}

fn check_counts(counts: &[f64]) -> Result<()> {
    match counts.iter().position(|&n| !(n > 0.0)) {
        Some(a) => Err(Error::UninitializedArm(a)),
        None => Ok(()),
    }
}

/// Gaussian optimistic reward in closed form, written into `out`.
pub fn optimistic_reward_into(
    mle: &[f64],
    lambda: &[f64],
    f_value: f64,
    counts: &[f64],
    sigmas: &[f64],
    out: &mut Vec<f64>,
) -> Result<()> {
    check_counts(counts)?;
    out.clear();
    out.extend((0..mle.len()).map(|a| {
        let gap = (mle[a] - lambda[a]).abs();
        let s2 = sigmas[a] * sigmas[a];
        gap * gap / (2.0 * s2)
            + f_value / counts[a]
            + (2.0 * f_value / (s2 * counts[a])).sqrt() * gap
    }));
    Ok(())
}

pub fn optimistic_reward(
    mle: &[f64],
    lambda: &[f64],
    f_value: f64,
    counts: &[f64],
    sigmas: &[f64],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(mle.len());
    optimistic_reward_into(mle, lambda, f_value, counts, sigmas, &mut out)?;
    Ok(out)
}

/// `max{f/N, d_KL(alpha, lambda), d_KL(beta, lambda)}` over the box corners.
pub fn optimistic_reward_generic(
    confidence: &ConfidenceBox,
    lambda: &[f64],
    f_value: f64,
    counts: &[f64],
    sigmas: &[f64],
) -> Result<Vec<f64>> {
    check_counts(counts)?;
    Ok((0..lambda.len())
        .map(|a| {
            let lo = kl_gaussian(confidence.lower[a], lambda[a], sigmas[a]);
            let hi = kl_gaussian(confidence.upper[a], lambda[a], sigmas[a]);
            (f_value / counts[a]).max(lo).max(hi)
        })
        .collect())
}
