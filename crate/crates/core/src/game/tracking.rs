//! Conversion of action weights into pulls.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorial::{ActionId, ActionTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tracking {
    /// Tracks the cumulative weights over their support.
    CTrack,
    /// Tracks the current weights.
    DTrack,
    /// Draws `A_t ~ w_t`.
    DirectSample,
}

impl Tracking {
    pub const ALL: [Tracking; 3] = [Self::CTrack, Self::DTrack, Self::DirectSample];

    pub fn name(self) -> &'static str {
        match self {
            Self::CTrack => "c-track",
            Self::DTrack => "d-track",
            Self::DirectSample => "direct-sample",
        }
    }
}

impl fmt::Display for Tracking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tracking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('_', "-").to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s || t.name().replace('-', "") == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown tracking rule {s:?}")))
    }
}

/// Keeps the smallest ratio seen; equal ratios go to the smaller action.
fn argmin_ratio(
    items: impl Iterator<Item = (ActionId, f64)>,
    table: &ActionTable,
) -> Result<ActionId> {
    let mut best: Option<(ActionId, f64)> = None;
    for (id, r) in items {
        best = match best {
            None => Some((id, r)),
            Some((b, br)) if r < br || (r == br && table.get(id) < table.get(b)) => Some((id, r)),
            keep => keep,
        };
    }
    best.map(|b| b.0).ok_or(Error::EmptySupport)
}

/// `argmin_{A in support} N_A / S_A` where `S` holds cumulative weights;
/// `counts` and `cumulative` are indexed by action id.
pub fn c_track(
    support: &[ActionId],
    counts: &[u64],
    cumulative: &[f64],
    table: &ActionTable,
) -> Result<ActionId> {
    argmin_ratio(
        support
            .iter()
            .filter(|id| cumulative[id.index()] > 0.0)
            .map(|&id| (id, counts[id.index()] as f64 / cumulative[id.index()])),
        table,
    )
}

/// `argmin_{A in supp(w)} N_A / w_A`.
pub fn d_track(
    weights: &[(ActionId, f64)],
    counts: &[u64],
    table: &ActionTable,
) -> Result<ActionId> {
    argmin_ratio(
        weights
            .iter()
            .filter(|w| w.1 > 0.0)
            .map(|&(id, w)| (id, counts.get(id.index()).copied().unwrap_or(0) as f64 / w)),
        table,
    )
}

/// One draw from `w`.
pub fn direct_sample<R: Rng + ?Sized>(
    weights: &[(ActionId, f64)],
    rng: &mut R,
) -> Result<ActionId> {
    let total: f64 = weights.iter().map(|w| w.1).sum();
    if weights.is_empty() || !(total > 0.0) {
        return Err(Error::EmptySupport);
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for &(id, w) in weights {
        acc += w;
        if u < acc {
            return Ok(id);
        }
    }
    Ok(weights
        .iter()
        .rev()
        .find(|w| w.1 > 0.0)
        .expect("positive total")
        .0)
}

/// Pull counts `N_A` and cumulative weights `S_A` per action id, with the
/// incremental support `B_t = supp(S)`.
#[derive(Debug, Clone, Default)]
pub struct TrackingState {
    pub counts: Vec<u64>,
    pub cumulative: Vec<f64>,
    pub support: Vec<ActionId>,
}

impl TrackingState {
    fn grow(&mut self, id: ActionId) {
        let n = id.index() + 1;
        if self.counts.len() < n {
            self.counts.resize(n, 0);
            self.cumulative.resize(n, 0.0);
        }
    }

    /// An initialization pull: counts once and enters the support with
    /// cumulative weight 1.
    pub fn init_pull(&mut self, id: ActionId) {
        self.grow(id);
        if self.cumulative[id.index()] == 0.0 {
            self.support.push(id);
        }
        self.counts[id.index()] += 1;
        self.cumulative[id.index()] += 1.0;
    }

    pub fn add_weights(&mut self, weights: &[(ActionId, f64)]) {
        for &(id, w) in weights {
            self.grow(id);
            if w > 0.0 && self.cumulative[id.index()] == 0.0 {
                self.support.push(id);
            }
            self.cumulative[id.index()] += w;
        }
    }

    pub fn pull(&mut self, id: ActionId) {
        self.grow(id);
        self.counts[id.index()] += 1;
    }

    pub fn count(&self, id: ActionId) -> u64 {
        self.counts.get(id.index()).copied().unwrap_or(0)
    }

    /// Actions in the support whose `N - S` leaves `[lower, 1]`.
    pub fn deviation_violations(&self, lower: f64) -> usize {
        const SLACK: f64 = 1e-9;
        self.support
            .iter()
            .filter(|id| {
                let dev = self.counts[id.index()] as f64 - self.cumulative[id.index()];
                dev > 1.0 + SLACK || dev < lower - SLACK
            })
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorial::Action;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(n: usize) -> (ActionTable, Vec<ActionId>) {
        let mut t = ActionTable::new();
        let ids = (0..n).map(|a| t.intern(Action::singleton(a))).collect();
        (t, ids)
    }

    #[test]
    fn c_track_prefers_lagging_action() {
        let (t, ids) = table(2);
        assert_eq!(c_track(&ids, &[9, 11], &[10.0, 10.0], &t).unwrap(), ids[0]);
    }

    #[test]
    fn ties_go_to_lowest_action() {
        let mut t = ActionTable::new();
        let b = t.intern(Action::singleton(1));
        let a = t.intern(Action::singleton(0));
        assert_eq!(c_track(&[b, a], &[2, 2], &[4.0, 4.0], &t).unwrap(), a);
        assert_eq!(d_track(&[(b, 0.5), (a, 0.5)], &[1, 1], &t).unwrap(), a);
    }

    #[test]
    fn d_track_follows_weights() {
        let (t, ids) = table(3);
        let w = [(ids[0], 0.0), (ids[1], 0.9), (ids[2], 0.1)];
        assert_eq!(d_track(&w, &[0, 5, 0], &t).unwrap(), ids[2]);
        assert_eq!(d_track(&w, &[0, 8, 1], &t).unwrap(), ids[1]);
        assert!(matches!(d_track(&[], &[], &t), Err(Error::EmptySupport)));
    }

    #[test]
    fn direct_sample_respects_support() {
        let (_, ids) = table(3);
        let w = [(ids[0], 0.25), (ids[2], 0.75)];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = [0; 3];
        for _ in 0..4000 {
            hits[direct_sample(&w, &mut rng).unwrap().index()] += 1;
        }
        assert_eq!(hits[1], 0);
        assert!((hits[2] as f64 / 4000.0 - 0.75).abs() < 0.03);
    }

    #[test]
    fn c_tracking_deviation_stays_bounded() {
        let (t, ids) = table(6);
        let mut st = TrackingState::default();
        st.init_pull(ids[0]);
        st.init_pull(ids[3]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let raw: Vec<f64> = (0..6).map(|_| rng.random::<f64>().powi(3)).collect();
            let total: f64 = raw.iter().sum();
            let w: Vec<(ActionId, f64)> = ids
                .iter()
                .zip(&raw)
                .map(|(&i, &x)| (i, x / total))
                .collect();
            st.add_weights(&w);
            let a = c_track(&st.support, &st.counts, &st.cumulative, &t).unwrap();
            st.pull(a);
            assert_eq!(st.deviation_violations(1.0 - 6.0), 0);
        }
    }

    #[test]
    fn tracking_names_parse() {
        for t in Tracking::ALL {
            assert_eq!(t.name().parse::<Tracking>().unwrap(), t);
        }
        assert_eq!("c_track".parse::<Tracking>().unwrap(), Tracking::CTrack);
    }
}
