//! Uniform matroid: all arm sets of size `k`.

use std::cmp::Ordering;

use super::action::Action;
use crate::error::{Error, Result};

/// Greedy maximizer of `<1_A, cost>` over sets of size `k`: the `k` largest
/// entries, ties broken towards the lowest arm index.
pub fn linmax_topk(cost: &[f64], k: usize) -> Result<Action> {
    let d = cost.len();
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={d}"
        )));
    }
    if k <= SMALL_K {
        return Ok(Action::from_sorted(small_topk(cost, k)));
    }
    Ok(Action::from_sorted(select_topk(cost, k)))
}

fn select_topk(cost: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..cost.len()).collect();
    let by_rank =
        |&a: &usize, &b: &usize| -> Ordering { cost[b].total_cmp(&cost[a]).then(a.cmp(&b)) };
    if k < cost.len() {
        idx.select_nth_unstable_by(k - 1, by_rank);
    }
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

const SMALL_K: usize = 8;

/// Insertion into a ranked buffer of length `k`; a later index only enters
/// on a strictly larger cost, so ties keep the lower arm.
fn small_topk(cost: &[f64], k: usize) -> Vec<usize> {
    let mut top: Vec<usize> = Vec::with_capacity(k + 1);
    for (a, &c) in cost.iter().enumerate() {
        if top.len() == k && c.total_cmp(&cost[top[k - 1]]).is_le() {
            continue;
        }
        let pos = top
            .iter()
            .position(|&b| c.total_cmp(&cost[b]).is_gt())
            .unwrap_or(top.len());
        top.insert(pos, a);
        top.truncate(k);
    }
    top.sort_unstable();
    top
}

/// All `k`-subsets of `0..d` in lexicographic order.
pub fn enumerate_k_subsets(d: usize, k: usize) -> Vec<Action> {
    let mut out = Vec::new();
    if k == 0 || k > d {
        return out;
    }
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        out.push(Action::from_sorted(comb.clone()));
        let Some(i) = (0..k).rev().find(|&i| comb[i] < d - k + i) else {
            return out;
        };
        comb[i] += 1;
        for j in i + 1..k {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_largest_entries() {
        let a = linmax_topk(&[3.0, 1.0, 2.0], 2).unwrap();
        assert_eq!(a.arms(), &[0, 2]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let a = linmax_topk(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(a.arms(), &[0, 1]);
        let b = linmax_topk(&[0.0, 2.0, 1.0, 2.0, 1.0], 3).unwrap();
        assert_eq!(b.arms(), &[1, 2, 3]);
    }

    #[test]
    fn k_out_of_range() {
        assert!(linmax_topk(&[1.0, 2.0], 0).is_err());
        assert!(linmax_topk(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn enumeration_counts() {
        for d in 1..9 {
            for k in 1..=d {
                let all = enumerate_k_subsets(d, k);
                assert_eq!(all.len() as u128, binomial(d, k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn small_path_matches_select(
            cost in proptest::collection::vec(-3i8..3, 1..20),
            k in 1usize..9,
        ) {
            let cost: Vec<f64> = cost.into_iter().map(f64::from).collect();
            let k = k.min(cost.len());
            proptest::prop_assert_eq!(small_topk(&cost, k), select_topk(&cost, k));
        }
    }
}
