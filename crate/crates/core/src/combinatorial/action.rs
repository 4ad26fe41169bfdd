use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A set of arms, stored sorted and without duplicates.
///
/// The derived ordering is lexicographic on the sorted arm list; it is the
/// canonical "lowest index first" order used for every tie-break.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(Vec<usize>);

impl Action {
    /// Builds an action from arbitrary arm indices; rejects empty sets,
    /// duplicates and arms outside `0..dim`.
    pub fn new(mut arms: Vec<usize>, dim: usize) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidAction("empty arm set".into()));
        }
        arms.sort_unstable();
        if arms.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAction(format!("duplicate arm in {arms:?}")));
        }
        if let Some(&last) = arms.last() {
            if last >= dim {
                return Err(Error::InvalidAction(format!(
                    "arm {last} out of range for dimension {dim}"
                )));
            }
        }
        Ok(Self(arms))
    }

    /// Caller guarantees `arms` is sorted, duplicate free and non-empty.
    pub(crate) fn from_sorted(arms: Vec<usize>) -> Self {
        debug_assert!(!arms.is_empty());
        debug_assert!(arms.windows(2).all(|w| w[0] < w[1]));
        Self(arms)
    }

    pub fn singleton(arm: usize) -> Self {
        Self(vec![arm])
    }

    pub fn arms(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }

    pub fn is_subset_of(&self, other: &Action) -> bool {
        self.0.iter().all(|&a| other.contains(a))
    }

    /// `<1_A, c>`, summed in increasing arm order.
    #[inline]
    pub fn value(&self, cost: &[f64]) -> f64 {
        self.0.iter().map(|&a| cost[a]).sum()
    }

    /// Arms in exactly one of the two sets, each tagged with `+1.0` when
    /// the arm belongs to `other` only and `-1.0` when it belongs to `self`
    /// only. This is the support of `1_other - 1_self`.
    pub fn signed_difference(&self, other: &Action) -> Vec<(usize, f64)> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    out.push((x, -1.0));
                    i += 1;
                }
                (Some(_), Some(&y)) => {
                    out.push((y, 1.0));
                    j += 1;
                }
                (Some(&x), None) => {
                    out.push((x, -1.0));
                    i += 1;
                }
                (None, Some(&y)) => {
                    out.push((y, 1.0));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        out
    }

    pub fn symmetric_difference_len(&self, other: &Action) -> usize {
        let common = self.0.iter().filter(|&&a| other.contains(a)).count();
        self.len() + other.len() - 2 * common
    }
}

impl fmt::Display for Action {
    /// Arms joined by `;`, e.g. `0;2;3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// 0–1 incidence vector of `action` in dimension `dim`.
pub fn incidence(action: &Action, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for &a in action.arms() {
        v[a] = 1.0;
    }
    v
}

/// Dense handle of an action interned in an [`ActionTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interns actions met during a run so per-action bookkeeping can live in
/// flat vectors.
#[derive(Debug, Clone, Default)]
pub struct ActionTable {
    actions: Vec<Action>,
    index: HashMap<Action, ActionId>,
}

impl ActionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_actions(actions: impl IntoIterator<Item = Action>) -> Self {
        let mut table = Self::new();
        for a in actions {
            table.intern(a);
        }
        table
    }

    pub fn intern(&mut self, action: Action) -> ActionId {
        if let Some(&id) = self.index.get(&action) {
            return id;
        }
        let id = ActionId(self.actions.len() as u32);
        self.index.insert(action.clone(), id);
        self.actions.push(action);
        id
    }

    pub fn id_of(&self, action: &Action) -> Option<ActionId> {
        self.index.get(action).copied()
    }

    #[inline]
    pub fn get(&self, id: ActionId) -> &Action {
        &self.actions[id.index()]
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ActionId, &Action)> {
        self.actions
            .iter()
            .enumerate()
            .map(|(i, a)| (ActionId(i as u32), a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_marks_exactly_the_arms() {
        let a = Action::new(vec![0, 2], 4).unwrap();
        assert_eq!(incidence(&a, 4), vec![1.0, 0.0, 1.0, 0.0]);
        let s = Action::singleton(1);
        assert_eq!(incidence(&s, 3), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_arm_sets() {
        assert!(Action::new(vec![], 3).is_err());
        assert!(Action::new(vec![3], 3).is_err());
        assert!(Action::new(vec![1, 1], 3).is_err());
    }

    #[test]
    fn signed_difference_matches_incidence_difference() {
        let i = Action::new(vec![0, 1, 4], 6).unwrap();
        let j = Action::new(vec![1, 2, 5], 6).unwrap();
        let diff = i.signed_difference(&j);
        let mut dense = vec![0.0; 6];
        for (a, s) in diff {
            dense[a] = s;
        }
        let expected: Vec<f64> = incidence(&j, 6)
            .iter()
            .zip(incidence(&i, 6))
            .map(|(x, y)| x - y)
            .collect();
        assert_eq!(dense, expected);
        assert_eq!(i.symmetric_difference_len(&j), 4);
    }

    #[test]
    fn table_interns_once() {
        let mut t = ActionTable::new();
        let a = t.intern(Action::singleton(2));
        let b = t.intern(Action::singleton(0));
        assert_eq!(t.intern(Action::singleton(2)), a);
        assert_ne!(a, b);
        assert_eq!(t.len(), 2);
    }

    proptest::proptest! {
        #[test]
        fn size_equals_incidence_sum(arms in proptest::collection::btree_set(0usize..12, 1..12)) {
            let a = Action::new(arms.into_iter().collect(), 12).unwrap();
            let s: f64 = incidence(&a, 12).iter().sum();
            proptest::prop_assert_eq!(s as usize, a.len());
        }
    }
}
