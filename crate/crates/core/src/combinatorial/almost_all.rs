//! "Almost all sets": the distinguished set `star` plus every non-empty arm
//! set that does not contain all of `star`.

use super::action::Action;

pub fn linmax_almost_all_sets(cost: &[f64], star: &Action) -> Action {
    let d = cost.len();
    let mut positive: Vec<usize> = (0..d).filter(|&a| cost[a] > 0.0).collect();

    if !positive.is_empty() && star.arms().iter().all(|&a| positive.contains(&a)) {
        // Drop the cheapest arm of `star`; among equal costs drop the highest index.
        let drop = star
            .arms()
            .iter()
            .copied()
            .min_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)))
            .expect("star is non-empty");
        positive.retain(|&a| a != drop);
    }

    let avoiding = if positive.is_empty() {
        best_singleton_avoiding(cost, star)
    } else {
        Some(Action::from_sorted(positive))
    };

    match avoiding {
        None => star.clone(),
        Some(candidate) => {
            let (vs, vc) = (star.value(cost), candidate.value(cost));
            if vs > vc || (vs == vc && *star < candidate) {
                star.clone()
            } else {
                candidate
            }
        }
    }
}

fn best_singleton_avoiding(cost: &[f64], star: &Action) -> Option<Action> {
    (0..cost.len())
        .filter(|&a| !(star.len() == 1 && star.arms()[0] == a))
        .min_by(|&a, &b| cost[b].total_cmp(&cost[a]).then(a.cmp(&b)))
        .map(Action::singleton)
}

/// All members of the family in lexicographic order. `d` must be small
/// enough for `2^d` subsets to be listed.
pub fn enumerate_almost_all_sets(d: usize, star: &Action) -> Vec<Action> {
    assert!(
        d < usize::BITS as usize - 1,
        "dimension too large to enumerate"
    );
    let mut out: Vec<Action> = (1usize..(1 << d))
        .map(|mask| Action::from_sorted((0..d).filter(|&a| mask >> a & 1 == 1).collect()))
        .filter(|a| !star.is_subset_of(a))
        .collect();
    out.push(star.clone());
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn family_size_is_half_the_power_set() {
        for d in 2..12 {
            let fam = enumerate_almost_all_sets(d, &Action::singleton(0));
            assert_eq!(fam.len(), 1 << (d - 1));
            let informative = fam.iter().filter(|a| a.contains(0)).count();
            assert_eq!(informative, 1);
        }
    }

    #[test]
    fn oracle_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..9 {
            let mut stars = vec![Action::singleton(0)];
            if d >= 3 {
                stars.push(Action::new(vec![1, d - 1], d).unwrap());
            }
            for star in stars {
                let fam = enumerate_almost_all_sets(d, &star);
                for _ in 0..200 {
                    let cost: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let got = linmax_almost_all_sets(&cost, &star);
                    assert!(fam.contains(&got), "{got:?} not in family");
                    let best = fam.iter().map(|a| a.value(&cost)).fold(f64::MIN, f64::max);
                    assert_eq!(got.value(&cost), best);
                }
            }
        }
    }
}
