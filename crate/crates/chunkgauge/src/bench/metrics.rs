//! Rank-cutoff retrieval metrics over graded relevance judgments.
//!
//! All functions take the ranked candidate ids for one query plus that
//! query's judgments, and score the top `k` positions. The ids within a
//! ranking must be distinct, which index searches guarantee. Grades are
//! non-negative integers; a document is relevant when its grade is at
//! least 1. Ids absent from the judgments have grade 0.

use std::collections::BTreeMap;

use crate::sig::ser_sig;

/// The scores reported for one model on one task, averaged over queries.
/// Fields are named for the default cutoff of 10; when evaluation runs at
/// another `k` they hold the corresponding `@k` values.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IRMetrics {
    /// Always equal to `ndcg_at_10`, the headline number.
    #[serde(serialize_with = "ser_sig")]
    pub main_score: f64,
    #[serde(serialize_with = "ser_sig")]
    pub ndcg_at_10: f64,
    #[serde(serialize_with = "ser_sig")]
    pub map_at_10: f64,
    #[serde(serialize_with = "ser_sig")]
    pub recall_at_10: f64,
    #[serde(serialize_with = "ser_sig")]
    pub precision_at_10: f64,
    #[serde(serialize_with = "ser_sig")]
    pub mrr_at_10: f64,
}

impl IRMetrics {
    /// Metric names paired with values, in reporting order.
    pub fn named_scores(&self) -> [(&'static str, f64); 6] {
        [
            ("main_score", self.main_score),
            ("ndcg_at_10", self.ndcg_at_10),
            ("map_at_10", self.map_at_10),
            ("recall_at_10", self.recall_at_10),
            ("precision_at_10", self.precision_at_10),
            ("mrr_at_10", self.mrr_at_10),
        ]
    }
}

fn grade(qrels: &BTreeMap<String, u32>, id: &str) -> u32 {
    qrels.get(id).copied().unwrap_or(0)
}

fn gain(grade: u32) -> f64 {
    2f64.powi(grade as i32) - 1.0
}

fn discount(position: usize) -> f64 {
    ((position + 2) as f64).log2()
}

/// Normalized discounted cumulative gain at `k`. Gain of a grade-`g`
/// result at position `i` (0-based) is `(2^g - 1) / log2(i + 2)`; the
/// normalizer is the DCG of the judged grades sorted descending. Zero
/// when no judgment is positive.
pub fn ndcg_at_k(ranked: &[&str], qrels: &BTreeMap<String, u32>, k: usize) -> f64 {
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, id)| gain(grade(qrels, id)) / discount(i))
        .sum();
    let mut grades: Vec<u32> = qrels.values().copied().collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| gain(g) / discount(i))
        .sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

fn positive_total(qrels: &BTreeMap<String, u32>) -> usize {
    qrels.values().filter(|&&g| g >= 1).count()
}

/// Mean average precision at `k`: precision at each relevant hit's rank,
/// summed and divided by `min(R, k)` where `R` is the query's number of
/// relevant documents. Zero when `R` is zero.
pub fn map_at_k(ranked: &[&str], qrels: &BTreeMap<String, u32>, k: usize) -> f64 {
    let positives = positive_total(qrels);
    if positives == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, id) in ranked.iter().take(k).enumerate() {
        if grade(qrels, id) >= 1 {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / positives.min(k) as f64
}

/// Reciprocal rank of the first relevant result within the top `k`, zero
/// when none appears.
pub fn mrr_at_k(ranked: &[&str], qrels: &BTreeMap<String, u32>, k: usize) -> f64 {
    ranked
        .iter()
        .take(k)
        .position(|id| grade(qrels, id) >= 1)
        .map(|i| 1.0 / (i + 1) as f64)
        .unwrap_or(0.0)
}

/// Fraction of the `k` slots holding a relevant document. The divisor is
/// `k` itself, so a ranking shorter than `k` pays for the empty slots.
pub fn precision_at_k(ranked: &[&str], qrels: &BTreeMap<String, u32>, k: usize) -> f64 {
    assert!(k > 0, "cutoff must be positive");
    let hits = ranked
        .iter()
        .take(k)
        .filter(|id| grade(qrels, id) >= 1)
        .count();
    hits as f64 / k as f64
}

/// Fraction of the query's relevant documents found in the top `k`. Zero
/// when the query has no relevant documents.
pub fn recall_at_k(ranked: &[&str], qrels: &BTreeMap<String, u32>, k: usize) -> f64 {
    let positives = positive_total(qrels);
    if positives == 0 {
        return 0.0;
    }
    let hits = ranked
        .iter()
        .take(k)
        .filter(|id| grade(qrels, id) >= 1)
        .count();
    hits as f64 / positives as f64
}

/// Score one query's ranking with every metric at the same cutoff.
pub fn query_metrics(ranked: &[&str], qrels: &BTreeMap<String, u32>, k: usize) -> IRMetrics {
    let ndcg = ndcg_at_k(ranked, qrels, k);
    IRMetrics {
        main_score: ndcg,
        ndcg_at_10: ndcg,
        map_at_10: map_at_k(ranked, qrels, k),
        recall_at_10: recall_at_k(ranked, qrels, k),
        precision_at_10: precision_at_k(ranked, qrels, k),
        mrr_at_10: mrr_at_k(ranked, qrels, k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qrels(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
        pairs
            .iter()
            .map(|&(id, g)| (id.to_string(), g))
            .collect()
    }

    #[test]
    fn perfect_ranking_scores_one_everywhere() {
        let judged = qrels(&[("a", 1)]);
        let metrics = query_metrics(&["a"], &judged, 10);
        assert_eq!(metrics.ndcg_at_10, 1.0);
        assert_eq!(metrics.map_at_10, 1.0);
        assert_eq!(metrics.recall_at_10, 1.0);
        assert_eq!(metrics.mrr_at_10, 1.0);
        assert_eq!(metrics.precision_at_10, 0.1);
        assert_eq!(metrics.main_score, metrics.ndcg_at_10);
    }

    #[test]
    fn single_relevant_at_rank_two_pins_the_ndcg_constant() {
        let judged = qrels(&[("hit", 1)]);
        let ndcg = ndcg_at_k(&["miss", "hit"], &judged, 10);
        assert!((ndcg - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((ndcg - 0.6309297535714574).abs() < 1e-12);
    }

    #[test]
    fn graded_judgments_use_exponential_gain() {
        let judged = qrels(&[("a", 2), ("b", 1)]);
        let ndcg = ndcg_at_k(&["b", "a"], &judged, 10);
        let dcg = 1.0 + 3.0 / 3f64.log2();
        let idcg = 3.0 + 1.0 / 3f64.log2();
        assert!((ndcg - dcg / idcg).abs() < 1e-15);
        assert_eq!(ndcg_at_k(&["a", "b"], &judged, 10), 1.0);
    }

    #[test]
    fn no_positive_judgments_score_zero_not_nan() {
        let judged = qrels(&[("a", 0)]);
        let metrics = query_metrics(&["a", "b"], &judged, 10);
        assert_eq!(metrics.ndcg_at_10, 0.0);
        assert_eq!(metrics.map_at_10, 0.0);
        assert_eq!(metrics.recall_at_10, 0.0);
        assert_eq!(metrics.mrr_at_10, 0.0);
    }

    #[test]
    fn map_interpolates_precision_at_relevant_ranks() {
        let judged = qrels(&[("a", 1), ("b", 1)]);
        let map = map_at_k(&["a", "x", "b"], &judged, 10);
        assert!((map - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn map_normalizer_caps_at_the_cutoff() {
        let judged: BTreeMap<String, u32> =
            (0..15).map(|i| (format!("d{i:02}"), 1)).collect();
        let ids: Vec<String> = (0..15).map(|i| format!("d{i:02}")).collect();
        let ranked: Vec<&str> = ids.iter().map(String::as_str).collect();
        assert_eq!(map_at_k(&ranked, &judged, 10), 1.0);
    }

    #[test]
    fn mrr_is_the_reciprocal_of_the_first_hit() {
        let judged = qrels(&[("hit", 1)]);
        assert_eq!(mrr_at_k(&["a", "b", "c", "hit"], &judged, 10), 0.25);
        assert_eq!(mrr_at_k(&["a", "b"], &judged, 10), 0.0);
        assert_eq!(mrr_at_k(&["hit"], &judged, 1), 1.0);
    }

    #[test]
    fn precision_divides_by_the_cutoff_even_for_short_rankings() {
        let judged = qrels(&[("a", 1), ("b", 1), ("c", 1)]);
        assert_eq!(precision_at_k(&["a", "b", "c"], &judged, 10), 0.3);
        assert_eq!(precision_at_k(&["a", "b", "c"], &judged, 3), 1.0);
    }

    #[test]
    fn recall_counts_found_positives() {
        let judged = qrels(&[("a", 1), ("b", 1), ("c", 0)]);
        assert_eq!(recall_at_k(&["a", "x", "y"], &judged, 10), 0.5);
        assert_eq!(recall_at_k(&["a", "b"], &judged, 10), 1.0);
    }

    fn ranking_and_qrels() -> impl Strategy<Value = (Vec<String>, BTreeMap<String, u32>)> {
        let ids = prop::collection::btree_set(0usize..30, 1..20)
            .prop_map(|raw| raw.iter().map(|i| format!("d{i:02}")).collect::<Vec<_>>())
            .prop_shuffle();
        let judged = prop::collection::btree_map("d[0-2][0-9]".prop_map(String::from), 0u32..4, 0..10);
        (ids, judged)
    }

    proptest! {
        #[test]
        fn metrics_stay_in_the_unit_interval((ids, judged) in ranking_and_qrels()) {
            let ranked: Vec<&str> = ids.iter().map(String::as_str).collect();
            let metrics = query_metrics(&ranked, &judged, 10);
            for (name, value) in metrics.named_scores() {
                prop_assert!((0.0..=1.0).contains(&value), "{name} = {value}");
            }
        }

        #[test]
        fn promoting_a_relevant_result_never_hurts_ndcg(
            (ids, judged) in ranking_and_qrels(),
            swap in 1usize..20,
        ) {
            prop_assume!(swap < ids.len());
            let ranked: Vec<&str> = ids.iter().map(String::as_str).collect();
            let before = ndcg_at_k(&ranked, &judged, 10);
            prop_assume!(judged.get(ids[swap].as_str()).copied().unwrap_or(0)
                >= judged.get(ids[swap - 1].as_str()).copied().unwrap_or(0));
            let mut promoted = ranked.clone();
            promoted.swap(swap - 1, swap);
            let after = ndcg_at_k(&promoted, &judged, 10);
            prop_assert!(after >= before - 1e-12, "{after} < {before}");
        }
    }
}
