//! Ranking comparison and ranking quality metrics.
//!
//! The bias metric is the uniform-weight rank-biased overlap evaluated at full
//! depth over two conjoint rankings:
//!
//! ```text
//! RBO(S, T) = 1/k * sum_{d=1..k} |S[..d] ∩ T[..d]| / d
//! ```
//!
//! The classic persistence-weighted variant is available as
//! [`rbo_exponential`]; it is never substituted for [`rbo_uniform`].
//!
//! Prefix intersections are maintained incrementally, so a full-depth
//! evaluation costs `O(k log k)` for the id mapping plus `O(k)` for the sum.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sum::{mean, CompensatedSum};

/// Default persistence for [`rbo_exponential`].
pub const DEFAULT_PERSISTENCE: f64 = 0.98;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("ranking contains a duplicate id")]
    DuplicateId,
    #[error("depth {depth} outside 1..={max}")]
    DepthOutOfRange { depth: usize, max: usize },
    #[error("rankings have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("rankings are not over the same id set")]
    NotConjoint,
    #[error("rankings are empty")]
    EmptyRanking,
    #[error("persistence {0} outside the open interval (0, 1)")]
    InvalidPersistence(f64),
    #[error("relevant set is empty")]
    EmptyRelevant,
    #[error("{missing} relevant ids do not appear in the ranking")]
    RelevantNotRanked { missing: usize },
    #[error("cannot average an empty list of scores")]
    EmptyScores,
}

/// A total order over distinct ids, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking<T> {
    items: Vec<T>,
}

impl<T: Ord> Ranking<T> {
    pub fn new(items: Vec<T>) -> Result<Self, MetricError> {
        let mut refs: Vec<&T> = items.iter().collect();
        refs.sort_unstable();
        if refs.windows(2).any(|w| w[0] == w[1]) {
            return Err(MetricError::DuplicateId);
        }
        Ok(Self { items })
    }
}

impl<T> Ranking<T> {
    /// Caller guarantees the items are distinct.
    pub(crate) fn from_distinct(items: Vec<T>) -> Self {
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.items
    }

    pub fn iter(&self) -> core::slice::Iter<'_, T> {
        self.items.iter()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.items
    }

    /// Id at 1-based rank `rank`.
    pub fn at_rank(&self, rank: usize) -> Option<&T> {
        rank.checked_sub(1).and_then(|i| self.items.get(i))
    }
}

impl<'a, T> IntoIterator for &'a Ranking<T> {
    type Item = &'a T;
    type IntoIter = core::slice::Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    RboUniform,
    RboExponential,
    MeanRboUniform,
    AveragePrecision,
    MeanAveragePrecision,
}

/// A metric value in `[0, 1]` together with what produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub value: f64,
    pub metric: MetricKind,
    /// Evaluation depth, where the metric has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

impl MetricScore {
    pub fn new(metric: MetricKind, value: f64, depth: Option<usize>) -> Self {
        Self {
            value,
            metric,
            depth,
        }
    }
}

/// `|s[..depth] ∩ t[..depth]|`.
pub fn overlap_at_depth<T: Ord>(
    s: &Ranking<T>,
    t: &Ranking<T>,
    depth: usize,
) -> Result<usize, MetricError> {
    let max = s.len().min(t.len());
    if depth == 0 || depth > max {
        return Err(MetricError::DepthOutOfRange { depth, max });
    }
    let prefix: BTreeSet<&T> = s.items[..depth].iter().collect();
    Ok(t.items[..depth]
        .iter()
        .filter(|item| prefix.contains(item))
        .count())
}

/// Positions in `s` of every item of `t`, in `t` order.
fn positions_in<T: Ord>(s: &[T], t: &[T]) -> Result<Vec<usize>, MetricError> {
    if s.len() != t.len() {
        return Err(MetricError::LengthMismatch {
            left: s.len(),
            right: t.len(),
        });
    }
    if s.is_empty() {
        return Err(MetricError::EmptyRanking);
    }
    let mut by_item: Vec<usize> = (0..s.len()).collect();
    by_item.sort_unstable_by(|&a, &b| s[a].cmp(&s[b]));
    t.iter()
        .map(|item| {
            by_item
                .binary_search_by(|&i| s[i].cmp(item))
                .map(|found| by_item[found])
                .map_err(|_| MetricError::NotConjoint)
        })
        .collect()
}

/// Calls `visit(depth, overlap)` for every depth `1..=k`.
///
/// Because the lists are conjoint and duplicate-free, the prefix of `s` at
/// depth `d` is exactly the positions `0..d`, so a single "seen in `t`" table
/// is enough to maintain the running intersection.
fn for_each_prefix_overlap<T: Ord>(
    s: &Ranking<T>,
    t: &Ranking<T>,
    mut visit: impl FnMut(usize, usize),
) -> Result<(), MetricError> {
    let t_pos = positions_in(&s.items, &t.items)?;
    let mut seen_in_t = vec![false; t_pos.len()];
    let mut overlap = 0usize;
    for (d, &p) in t_pos.iter().enumerate() {
        // s[d] already appeared earlier in t
        if seen_in_t[d] {
            overlap += 1;
        }
        seen_in_t[p] = true;
        // t[d] lies inside the depth-(d+1) prefix of s
        if p <= d {
            overlap += 1;
        }
        visit(d + 1, overlap);
    }
    Ok(())
}

/// Uniform-weight rank-biased overlap at full depth `k = |s|`.
///
/// Both rankings must have the same length and hold the same ids. The result
/// is exactly `1.0` for identical rankings.
pub fn rbo_uniform<T: Ord>(s: &Ranking<T>, t: &Ranking<T>) -> Result<MetricScore, MetricError> {
    let mut acc = CompensatedSum::default();
    for_each_prefix_overlap(s, t, |d, overlap| acc.add(overlap as f64 / d as f64))?;
    let k = s.len();
    Ok(MetricScore::new(
        MetricKind::RboUniform,
        acc.total() / k as f64,
        Some(k),
    ))
}

/// Persistence-weighted rank-biased overlap truncated at the shared depth:
/// `(1 - p) * sum_{d=1..k} p^(d-1) * |S[..d] ∩ T[..d]| / d`.
pub fn rbo_exponential<T: Ord>(
    s: &Ranking<T>,
    t: &Ranking<T>,
    p: f64,
) -> Result<MetricScore, MetricError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MetricError::InvalidPersistence(p));
    }
    let mut acc = CompensatedSum::default();
    let mut weight = 1.0;
    for_each_prefix_overlap(s, t, |d, overlap| {
        acc.add(weight * overlap as f64 / d as f64);
        weight *= p;
    })?;
    Ok(MetricScore::new(
        MetricKind::RboExponential,
        (1.0 - p) * acc.total(),
        Some(s.len()),
    ))
}

/// Binary-relevance average precision over the full ranking.
pub fn average_precision<T: Ord>(
    ranking: &Ranking<T>,
    relevant: &BTreeSet<T>,
) -> Result<MetricScore, MetricError> {
    if relevant.is_empty() {
        return Err(MetricError::EmptyRelevant);
    }
    let mut hits = 0usize;
    let mut acc = CompensatedSum::default();
    for (i, item) in ranking.iter().enumerate() {
        if relevant.contains(item) {
            hits += 1;
            acc.add(hits as f64 / (i + 1) as f64);
            if hits == relevant.len() {
                break;
            }
        }
    }
    if hits != relevant.len() {
        return Err(MetricError::RelevantNotRanked {
            missing: relevant.len() - hits,
        });
    }
    Ok(MetricScore::new(
        MetricKind::AveragePrecision,
        acc.total() / relevant.len() as f64,
        Some(ranking.len()),
    ))
}

/// Arithmetic mean of per-query average precisions.
pub fn mean_average_precision(aps: &[MetricScore]) -> Result<MetricScore, MetricError> {
    mean(aps.iter().map(|s| s.value))
        .map(|v| MetricScore::new(MetricKind::MeanAveragePrecision, v, None))
        .ok_or(MetricError::EmptyScores)
}

/// Closed form of [`rbo_uniform`] for a list against its reverse:
/// `1/k * sum_{d=1..k} max(0, 2d - k) / d`.
pub fn reverse_list_rbo(k: usize) -> f64 {
    let mut acc = CompensatedSum::default();
    for d in 1..=k {
        let overlap = (2 * d).saturating_sub(k);
        acc.add(overlap as f64 / d as f64);
    }
    acc.total() / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use proptest::prelude::*;

    fn r(items: &[&'static str]) -> Ranking<&'static str> {
        Ranking::new(items.to_vec()).unwrap()
    }

    // Independent oracle: rebuild each prefix pair with linear scans.
    fn naive_rbo(s: &[u32], t: &[u32]) -> f64 {
        let k = s.len();
        let mut total = 0.0;
        for d in 1..=k {
            let overlap = t[..d].iter().filter(|x| s[..d].contains(x)).count();
            total += overlap as f64 / d as f64;
        }
        total / k as f64
    }

    fn naive_ap(ranking: &[u32], relevant: &[u32]) -> f64 {
        let mut total = 0.0;
        for (i, item) in ranking.iter().enumerate() {
            if relevant.contains(item) {
                let rel_in_top = ranking[..=i].iter().filter(|x| relevant.contains(x)).count();
                total += rel_in_top as f64 / (i + 1) as f64;
            }
        }
        total / relevant.len() as f64
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_at_depth(&r(&["a", "b", "c"]), &r(&["c", "b", "a"]), 2), Ok(1));
        let s = r(&["a", "b", "c", "d"]);
        for d in 1..=4 {
            assert_eq!(overlap_at_depth(&s, &s, d), Ok(d));
        }
        assert_eq!(overlap_at_depth(&r(&["a", "b"]), &r(&["b", "a"]), 1), Ok(0));
    }

    #[test]
    fn overlap_depth_out_of_range() {
        let s = r(&["a", "b"]);
        assert_eq!(
            overlap_at_depth(&s, &s, 3),
            Err(MetricError::DepthOutOfRange { depth: 3, max: 2 })
        );
        assert!(overlap_at_depth(&s, &s, 0).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert_eq!(Ranking::new(vec![1, 2, 1]), Err(MetricError::DuplicateId));
    }

    #[test]
    fn rbo_uniform_hand_evaluations() {
        assert_eq!(rbo_uniform(&r(&["a", "b", "c"]), &r(&["a", "b", "c"])).unwrap().value, 1.0);
        assert_eq!(rbo_uniform(&r(&["a", "b"]), &r(&["b", "a"])).unwrap().value, 0.5);
        let v = rbo_uniform(&r(&["a", "b", "c", "d"]), &r(&["d", "c", "b", "a"])).unwrap();
        assert!((v.value - 5.0 / 12.0).abs() < 1e-12);
        assert_eq!(v.depth, Some(4));
        let v = rbo_uniform(&r(&["a", "b", "c"]), &r(&["a", "c", "b"])).unwrap();
        assert!((v.value - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn rbo_uniform_preconditions() {
        assert_eq!(
            rbo_uniform(&r(&["a", "b"]), &r(&["a"])),
            Err(MetricError::LengthMismatch { left: 2, right: 1 })
        );
        assert_eq!(
            rbo_uniform(&r(&["a", "b"]), &r(&["a", "c"])),
            Err(MetricError::NotConjoint)
        );
        assert_eq!(rbo_uniform(&r(&[]), &r(&[])), Err(MetricError::EmptyRanking));
    }

    #[test]
    fn rbo_exponential_examples() {
        let s = r(&["a", "b", "c"]);
        let v = rbo_exponential(&s, &s, 0.9).unwrap().value;
        assert!((v - 0.271).abs() < 1e-12);
        let v = rbo_exponential(&r(&["a", "b"]), &r(&["b", "a"]), 0.5).unwrap().value;
        assert!((v - 0.25).abs() < 1e-12);
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                rbo_exponential(&s, &s, p),
                Err(MetricError::InvalidPersistence(_))
            ));
        }
    }

    #[test]
    fn reverse_list_closed_form() {
        assert_eq!(reverse_list_rbo(2), 0.5);
        assert!((reverse_list_rbo(3) - 0.5).abs() < 1e-15);
        assert!((reverse_list_rbo(4) - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn average_precision_examples() {
        let relevant: BTreeSet<&str> = ["r1", "r2"].into_iter().collect();
        let v = average_precision(&r(&["r1", "n", "r2"]), &relevant).unwrap().value;
        assert!((v - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(average_precision(&r(&["r1", "r2", "n"]), &relevant).unwrap().value, 1.0);

        let single: BTreeSet<&str> = ["x"].into_iter().collect();
        let v = average_precision(&r(&["a", "b", "c", "x", "d"]), &single).unwrap().value;
        assert_eq!(v, 0.25);
    }

    #[test]
    fn average_precision_errors() {
        let empty = BTreeSet::new();
        assert_eq!(
            average_precision(&r(&["a"]), &empty),
            Err(MetricError::EmptyRelevant)
        );
        let missing: BTreeSet<&str> = ["a", "z"].into_iter().collect();
        assert_eq!(
            average_precision(&r(&["a", "b"]), &missing),
            Err(MetricError::RelevantNotRanked { missing: 1 })
        );
    }

    #[test]
    fn map_examples() {
        let ap = |v| MetricScore::new(MetricKind::AveragePrecision, v, None);
        assert_eq!(mean_average_precision(&[ap(1.0), ap(0.5)]).unwrap().value, 0.75);
        assert_eq!(mean_average_precision(&[ap(0.3)]).unwrap().value, 0.3);
        assert_eq!(mean_average_precision(&[]), Err(MetricError::EmptyScores));
    }

    #[test]
    fn map_matches_plain_mean_over_81_queries() {
        // 81 synthetic APs: i / 97 for i in 1..=81
        let aps: Vec<MetricScore> = (1..=81)
            .map(|i| MetricScore::new(MetricKind::AveragePrecision, i as f64 / 97.0, None))
            .collect();
        let mut total = 0.0;
        for s in &aps {
            total += s.value;
        }
        let oracle = total / 81.0;
        // sum_{i=1..81} i = 3321
        assert!((oracle - 3321.0 / 97.0 / 81.0).abs() < 1e-12);
        assert!((mean_average_precision(&aps).unwrap().value - oracle).abs() < 1e-12);
    }

    #[test]
    fn string_ids_work() {
        let s = Ranking::new(vec![String::from("x"), String::from("y")]).unwrap();
        let t = Ranking::new(vec![String::from("y"), String::from("x")]).unwrap();
        assert_eq!(rbo_uniform(&s, &t).unwrap().value, 0.5);
    }

    fn permutation(max_len: usize) -> impl Strategy<Value = Vec<u32>> {
        (1..=max_len).prop_flat_map(|n| Just((0..n as u32).collect::<Vec<_>>()).prop_shuffle())
    }

    fn conjoint_pair(max_len: usize) -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
        permutation(max_len).prop_flat_map(|s| {
            let t = Just(s.clone()).prop_shuffle();
            (Just(s), t)
        })
    }

    proptest! {
        #[test]
        fn rbo_self_is_one(s in permutation(500)) {
            let s = Ranking::new(s).unwrap();
            prop_assert_eq!(rbo_uniform(&s, &s).unwrap().value, 1.0);
        }

        #[test]
        fn rbo_symmetric((s, t) in conjoint_pair(200)) {
            let s = Ranking::new(s).unwrap();
            let t = Ranking::new(t).unwrap();
            let st = rbo_uniform(&s, &t).unwrap().value;
            let ts = rbo_uniform(&t, &s).unwrap().value;
            prop_assert!((st - ts).abs() < 1e-12);
        }

        #[test]
        fn rbo_matches_naive((s, t) in conjoint_pair(200)) {
            let oracle = naive_rbo(&s, &t);
            let got = rbo_uniform(&Ranking::new(s).unwrap(), &Ranking::new(t).unwrap()).unwrap().value;
            prop_assert!((got - oracle).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&got));
        }

        #[test]
        fn rbo_one_only_for_identical((s, t) in conjoint_pair(30)) {
            let same = s == t;
            let v = rbo_uniform(&Ranking::new(s).unwrap(), &Ranking::new(t).unwrap()).unwrap().value;
            prop_assert_eq!(v == 1.0, same);
        }

        #[test]
        fn overlap_matches_naive((s, t) in conjoint_pair(60), frac in 0.0f64..1.0) {
            let d = 1 + ((s.len() - 1) as f64 * frac) as usize;
            let oracle = t[..d].iter().filter(|x| s[..d].contains(x)).count();
            let got = overlap_at_depth(&Ranking::new(s).unwrap(), &Ranking::new(t).unwrap(), d).unwrap();
            prop_assert_eq!(got, oracle);
            prop_assert!(got <= d);
        }

        #[test]
        fn rbo_exponential_in_range((s, t) in conjoint_pair(100), p in 0.01f64..0.99) {
            let v = rbo_exponential(&Ranking::new(s).unwrap(), &Ranking::new(t).unwrap(), p).unwrap().value;
            prop_assert!((0.0..1.0).contains(&v));
        }

        #[test]
        fn ap_matches_naive(ranking in permutation(100), picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..10)) {
            let mut relevant: Vec<u32> = picks.iter().map(|ix| ranking[ix.index(ranking.len())]).collect();
            relevant.sort_unstable();
            relevant.dedup();
            let oracle = naive_ap(&ranking, &relevant);
            let set: BTreeSet<u32> = relevant.iter().copied().collect();
            let got = average_precision(&Ranking::new(ranking).unwrap(), &set).unwrap().value;
            prop_assert!((got - oracle).abs() < 1e-12);
            prop_assert!(got > 0.0 && got <= 1.0);
        }

        #[test]
        fn ap_ignores_order_below_last_relevant(ranking in permutation(60), cut in any::<prop::sample::Index>(), seed in any::<u64>()) {
            let last = cut.index(ranking.len());
            let relevant: BTreeSet<u32> = ranking[..=last].iter().copied().filter(|x| x % 3 == 0).collect();
            prop_assume!(!relevant.is_empty());
            let mut shuffled = ranking.clone();
            let tail = &mut shuffled[last + 1..];
            // deterministic rotation of the tail
            if !tail.is_empty() {
                let by = (seed as usize) % tail.len();
                tail.rotate_left(by);
            }
            let a = average_precision(&Ranking::new(ranking).unwrap(), &relevant).unwrap().value;
            let b = average_precision(&Ranking::new(shuffled).unwrap(), &relevant).unwrap().value;
            prop_assert_eq!(a, b);
        }
    }
}
