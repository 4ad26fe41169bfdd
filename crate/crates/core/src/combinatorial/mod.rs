//! Action and answer families, each exposed through a linear-maximization
//! oracle `argmax_A <1_A, c>`.

mod action;
mod almost_all;
mod dag;
mod polytope;
mod topk;

use rustc_hash::FxHashMap as HashMap;
use std::sync::{Arc, OnceLock};

pub use action::{incidence, Action, ActionId, ActionTable};
pub use almost_all::{enumerate_almost_all_sets, linmax_almost_all_sets};
pub use dag::{linmax_dag_path, DagGraph, Edge};
pub use polytope::{polytope_params, polytope_params_from, InequalitySystem, PolytopeParams};
pub use topk::{binomial, enumerate_k_subsets, linmax_topk};

use crate::error::{Error, Result};

/// Families larger than this are never listed explicitly.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    TopK,
    DagPaths,
    ExplicitList,
    AlmostAllSets,
}

#[derive(Debug, Clone)]
enum Family {
    TopK { k: usize },
    DagPaths(Arc<DagGraph>),
    ExplicitList(Arc<Vec<Action>>),
    AlmostAllSets { star: Action },
}

#[derive(Debug, Clone)]
pub struct ActionSpace {
    dim: usize,
    family: Family,
    max_action_size: usize,
    enumeration: Arc<OnceLock<Option<Vec<Action>>>>,
    geometry: Arc<OnceLock<std::result::Result<PolytopeParams, String>>>,
}

impl ActionSpace {
    pub fn top_k(dim: usize, k: usize) -> Result<Self> {
        if k == 0 || k > dim {
            return Err(Error::InvalidParameter(format!(
                "k = {k} must lie in 1..={dim}"
            )));
        }
        Ok(Self::with_family(dim, Family::TopK { k }, k))
    }

    /// One arm per action.
    pub fn singletons(dim: usize) -> Self {
        Self::with_family(dim, Family::TopK { k: 1 }, 1)
    }

    pub fn dag_paths(graph: DagGraph) -> Result<Self> {
        let dim = graph.num_arms();
        let k = graph.max_path_len().ok_or(Error::NoPath)?;
        Ok(Self::with_family(dim, Family::DagPaths(Arc::new(graph)), k))
    }

    pub fn explicit(dim: usize, actions: Vec<Action>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::InvalidParameter(
                "explicit action list is empty".into(),
            ));
        }
        if let Some(bad) = actions.iter().find(|a| a.arms().iter().any(|&x| x >= dim)) {
            return Err(Error::InvalidAction(format!(
                "{bad:?} exceeds dimension {dim}"
            )));
        }
        let mut actions = actions;
        actions.sort();
        actions.dedup();
        let k = actions.iter().map(Action::len).max().unwrap_or(0);
        Ok(Self::with_family(
            dim,
            Family::ExplicitList(Arc::new(actions)),
            k,
        ))
    }

    pub fn almost_all_sets(dim: usize, star: Action) -> Result<Self> {
        if star.arms().iter().any(|&a| a >= dim) {
            return Err(Error::InvalidAction(format!(
                "{star:?} exceeds dimension {dim}"
            )));
        }
        Ok(Self::with_family(
            dim,
            Family::AlmostAllSets { star },
            dim.saturating_sub(1).max(1),
        ))
    }

    fn with_family(dim: usize, family: Family, max_action_size: usize) -> Self {
        Self {
            dim,
            family,
            max_action_size,
            enumeration: Arc::new(OnceLock::new()),
            geometry: Arc::new(OnceLock::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `K`, the size of the largest action.
    pub fn max_action_size(&self) -> usize {
        self.max_action_size
    }

    pub fn kind(&self) -> SpaceKind {
        match self.family {
            Family::TopK { .. } => SpaceKind::TopK,
            Family::DagPaths(_) => SpaceKind::DagPaths,
            Family::ExplicitList(_) => SpaceKind::ExplicitList,
            Family::AlmostAllSets { .. } => SpaceKind::AlmostAllSets,
        }
    }

    pub fn top_k_size(&self) -> Option<usize> {
        match self.family {
            Family::TopK { k } => Some(k),
            _ => None,
        }
    }

    pub fn graph(&self) -> Option<&DagGraph> {
        match &self.family {
            Family::DagPaths(g) => Some(g),
            _ => None,
        }
    }

    pub fn star(&self) -> Option<&Action> {
        match &self.family {
            Family::AlmostAllSets { star } => Some(star),
            _ => None,
        }
    }

    /// An action maximizing `<1_A, cost>`.
    pub fn argmax(&self, cost: &[f64]) -> Result<Action> {
        if cost.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "cost has length {}, expected {}",
                cost.len(),
                self.dim
            )));
        }
        if cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("oracle cost"));
        }
        match &self.family {
            Family::TopK { k } => linmax_topk(cost, *k),
            Family::DagPaths(g) => linmax_dag_path(g, cost),
            Family::ExplicitList(list) => Ok(argmax_in(list, cost).clone()),
            Family::AlmostAllSets { star } => Ok(linmax_almost_all_sets(cost, star)),
        }
    }

    /// Exact family size when it is known without listing (saturating).
    pub fn size(&self) -> Option<u128> {
        match &self.family {
            Family::TopK { k } => Some(binomial(self.dim, *k)),
            Family::ExplicitList(list) => Some(list.len() as u128),
            Family::AlmostAllSets { star } => {
                // Non-empty sets avoiding `star`, plus `star` itself.
                let total = 1u128.checked_shl(self.dim as u32)?;
                Some(total - (1u128 << (self.dim - star.len())))
            }
            Family::DagPaths(_) => self.enumerate().map(|e| e.len() as u128),
        }
    }

    /// Every action in lexicographic order, or `None` when the family is too
    /// large to list.
    pub fn enumerate(&self) -> Option<&[Action]> {
        self.enumeration
            .get_or_init(|| self.build_enumeration())
            .as_deref()
    }

    fn build_enumeration(&self) -> Option<Vec<Action>> {
        match &self.family {
            Family::TopK { k } => (binomial(self.dim, *k) <= ENUMERATION_LIMIT as u128)
                .then(|| enumerate_k_subsets(self.dim, *k)),
            Family::DagPaths(g) => {
                let paths = g.enumerate_paths();
                (paths.len() <= ENUMERATION_LIMIT).then_some(paths)
            }
            Family::ExplicitList(list) => Some(list.as_ref().clone()),
            Family::AlmostAllSets { star } => {
                (self.dim <= 20).then(|| enumerate_almost_all_sets(self.dim, star))
            }
        }
    }

    /// Polytope constants, computed once and shared by clones.
    pub fn geometry(&self) -> Result<PolytopeParams> {
        self.geometry
            .get_or_init(|| polytope_params(self).map_err(|e| e.to_string()))
            .clone()
            .map_err(Error::UnsupportedGeometry)
    }

    /// Greedy set cover: repeatedly play the action revealing the most
    /// unobserved arms, ties to the lowest action.
    pub fn covering(&self) -> Result<Vec<Action>> {
        let mut covered = vec![false; self.dim];
        let mut chosen: Vec<Action> = Vec::new();
        while covered.iter().any(|c| !c) {
            let gain = |a: &Action| a.arms().iter().filter(|&&x| !covered[x]).count();
            let next = match self.enumerate() {
                Some(all) => {
                    let mut best: Option<&Action> = None;
                    for a in all {
                        if best.is_none_or(|b| gain(a) > gain(b)) {
                            best = Some(a);
                        }
                    }
                    best.cloned()
                }
                None => {
                    let cost: Vec<f64> =
                        covered.iter().map(|&c| if c { 0.0 } else { 1.0 }).collect();
                    Some(self.argmax(&cost)?)
                }
            };
            let next = next.ok_or_else(|| Error::InvalidParameter("empty action family".into()))?;
            if gain(&next) == 0 {
                return Err(Error::InvalidParameter(
                    "some arms belong to no action".into(),
                ));
            }
            for &a in next.arms() {
                covered[a] = true;
            }
            chosen.push(next);
        }
        Ok(chosen)
    }
}

fn argmax_in<'a>(list: &'a [Action], cost: &[f64]) -> &'a Action {
    let mut best = &list[0];
    let mut best_value = best.value(cost);
    for a in &list[1..] {
        let v = a.value(cost);
        if v > best_value {
            best = a;
            best_value = v;
        }
    }
    best
}

/// The answer family: an enumerated action family plus neighbor queries.
#[derive(Debug, Clone)]
pub struct AnswerSpace {
    space: ActionSpace,
    answers: Vec<Action>,
    index: HashMap<Action, usize>,
}

impl AnswerSpace {
    pub fn new(space: ActionSpace) -> Result<Self> {
        let answers = space
            .enumerate()
            .ok_or_else(|| Error::InvalidParameter("answer family must be enumerable".into()))?
            .to_vec();
        if answers.len() < 2 {
            return Err(Error::InvalidParameter("need at least two answers".into()));
        }
        let index = answers
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        Ok(Self {
            space,
            answers,
            index,
        })
    }

    /// Best-arm identification: answers are the singletons.
    pub fn best_arm(dim: usize) -> Result<Self> {
        Self::new(ActionSpace::singletons(dim))
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn answers(&self) -> &[Action] {
        &self.answers
    }

    pub fn contains(&self, answer: &Action) -> bool {
        self.index.contains_key(answer)
    }

    pub fn argmax(&self, cost: &[f64]) -> Result<Action> {
        self.space.argmax(cost)
    }

    /// Index of [`argmax`](Self::argmax) in [`answers`](Self::answers).
    pub fn argmax_index(&self, cost: &[f64]) -> Result<usize> {
        if self.space.top_k_size() == Some(1) && cost.len() == self.answers.len() {
            if cost.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("oracle cost"));
            }
            // Singletons are listed in arm order.
            let mut best = 0;
            for (a, &c) in cost.iter().enumerate().skip(1) {
                if c > cost[best] {
                    best = a;
                }
            }
            return Ok(best);
        }
        let answer = self.space.argmax(cost)?;
        self.index_of(&answer)
            .ok_or_else(|| Error::InvalidAnswer(format!("{answer} is not an answer")))
    }

    pub fn index_of(&self, answer: &Action) -> Option<usize> {
        self.index.get(answer).copied()
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    /// Calls `f(j, only_in_answer, only_in_j)` for every neighbor `j` (an
    /// index into [`answers`](Self::answers)) of the answer at `idx`.
    pub fn for_each_neighbor_diff(&self, idx: usize, mut f: impl FnMut(usize, &[usize], &[usize])) {
        let base = self.answers[idx].arms();
        if let [i] = *base {
            if self.space.top_k_size() == Some(1) {
                for j in (0..self.answers.len()).filter(|&j| j != idx) {
                    f(j, &[i], self.answers[j].arms());
                }
                return;
            }
        }
        let mut only_base = Vec::with_capacity(base.len());
        let mut only_other = Vec::new();
        for (j, other) in self.answers.iter().enumerate() {
            if j == idx {
                continue;
            }
            only_base.clear();
            only_other.clear();
            let other = other.arms();
            let (mut p, mut q) = (0, 0);
            while p < base.len() || q < other.len() {
                match (base.get(p), other.get(q)) {
                    (Some(&x), Some(&y)) if x == y => {
                        p += 1;
                        q += 1;
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        only_base.push(x);
                        p += 1;
                    }
                    (Some(&x), None) => {
                        only_base.push(x);
                        p += 1;
                    }
                    (_, Some(&y)) => {
                        only_other.push(y);
                        q += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            f(j, &only_base, &only_other);
        }
    }

    /// Every other answer: a superset of the answers whose cells share a
    /// boundary with the cell of `answer`.
    pub fn neighbors<'a>(
        &'a self,
        answer: &'a Action,
    ) -> Result<impl Iterator<Item = &'a Action> + 'a> {
        if !self.contains(answer) {
            return Err(Error::InvalidAnswer(format!("{answer:?} is not an answer")));
        }
        Ok(self.answers.iter().filter(move |a| *a != answer))
    }

    /// `d0`: the largest symmetric difference between two distinct answers.
    pub fn max_symmetric_difference(&self) -> usize {
        if self.answers.len() <= 3000 {
            let mut best = 0;
            for (i, a) in self.answers.iter().enumerate() {
                for b in &self.answers[i + 1..] {
                    best = best.max(a.symmetric_difference_len(b));
                }
            }
            best
        } else if let Some(k) = self.space.top_k_size() {
            2 * k.min(self.dim() - k)
        } else {
            2 * self.space.max_action_size().min(self.dim())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bai_neighbors_are_the_other_singletons() {
        let ans = AnswerSpace::best_arm(3).unwrap();
        let n: Vec<_> = ans
            .neighbors(&Action::singleton(0))
            .unwrap()
            .cloned()
            .collect();
        assert_eq!(n, vec![Action::singleton(1), Action::singleton(2)]);
        assert!(ans.neighbors(&Action::new(vec![0, 1], 3).unwrap()).is_err());
    }

    #[test]
    fn explicit_neighbors_exclude_query() {
        let list = vec![
            Action::new(vec![0, 1], 4).unwrap(),
            Action::new(vec![2], 4).unwrap(),
            Action::new(vec![1, 3], 4).unwrap(),
        ];
        let ans = AnswerSpace::new(ActionSpace::explicit(4, list.clone()).unwrap()).unwrap();
        for q in &list {
            let n: Vec<_> = ans.neighbors(q).unwrap().collect();
            assert_eq!(n.len(), list.len() - 1);
            assert!(!n.contains(&q));
        }
    }

    #[test]
    fn d0_of_best_arm_is_two() {
        assert_eq!(
            AnswerSpace::best_arm(7).unwrap().max_symmetric_difference(),
            2
        );
    }

    #[test]
    fn covering_sizes() {
        for (d, k) in [(5, 2), (5, 3), (10, 3), (7, 7)] {
            let s = ActionSpace::top_k(d, k).unwrap();
            assert_eq!(s.covering().unwrap().len(), d.div_ceil(k));
        }
        let s = ActionSpace::almost_all_sets(9, Action::singleton(0)).unwrap();
        assert_eq!(s.covering().unwrap().len(), 2);
    }

    #[test]
    fn network_covering_sizes() {
        for n_s in [2, 4, 6, 8] {
            let s = ActionSpace::dag_paths(DagGraph::grid(n_s).unwrap()).unwrap();
            assert_eq!(s.covering().unwrap().len(), n_s, "grid {n_s}");
        }
        for (n_n, n_l) in [(2, 4), (2, 6), (3, 4)] {
            let s = ActionSpace::dag_paths(DagGraph::line(n_n, n_l).unwrap()).unwrap();
            assert_eq!(s.covering().unwrap().len(), n_n * n_n, "line {n_n} {n_l}");
        }
    }

    #[test]
    fn neighbor_diffs_match_signed_difference() {
        let list = vec![
            Action::new(vec![0, 1], 5).unwrap(),
            Action::new(vec![2], 5).unwrap(),
            Action::new(vec![1, 3, 4], 5).unwrap(),
            Action::new(vec![0, 4], 5).unwrap(),
        ];
        let ans = AnswerSpace::new(ActionSpace::explicit(5, list).unwrap()).unwrap();
        for idx in 0..ans.len() {
            let mut seen = 0;
            ans.for_each_neighbor_diff(idx, |j, out, inn| {
                seen += 1;
                let diff = ans.answers()[idx].signed_difference(&ans.answers()[j]);
                let want_out: Vec<usize> = diff.iter().filter(|x| x.1 < 0.0).map(|x| x.0).collect();
                let want_in: Vec<usize> = diff.iter().filter(|x| x.1 > 0.0).map(|x| x.0).collect();
                assert_eq!(out, &want_out[..]);
                assert_eq!(inn, &want_in[..]);
            });
            assert_eq!(seen, ans.len() - 1);
        }
        let bai = AnswerSpace::best_arm(4).unwrap();
        let mut pairs = Vec::new();
        bai.for_each_neighbor_diff(2, |j, out, inn| pairs.push((j, out.to_vec(), inn.to_vec())));
        assert_eq!(
            pairs,
            vec![
                (0, vec![2], vec![0]),
                (1, vec![2], vec![1]),
                (3, vec![2], vec![3])
            ]
        );
    }

    #[test]
    fn almost_all_size_formula() {
        let s = ActionSpace::almost_all_sets(8, Action::singleton(0)).unwrap();
        assert_eq!(s.size(), Some(128));
        assert_eq!(s.enumerate().unwrap().len(), 128);
    }
}
