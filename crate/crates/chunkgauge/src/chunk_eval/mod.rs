//! Span-based evaluation of chunking quality.
//!
//! A question set annotates documents with gold answer excerpts (character
//! spans). For a given chunker configuration the pipeline chunks every
//! document, indexes the chunk embeddings, retrieves the top-k chunks per
//! question, and scores the retrieved token set against the gold token set:
//! precision, recall, IoU, F1, F2, plus the chunking-imposed precision
//! ceiling Ω. Results aggregate per corpus and globally, and [`run_grid`]
//! sweeps a whole configuration grid with per-configuration resume markers.
//!
//! All set arithmetic happens over token indices of the source document's
//! tokenization: character spans are mapped to the tokens they intersect,
//! which keeps the metrics consistent with the token budgets the chunkers
//! enforce.

mod corpus;
mod eval;
mod report;

pub use corpus::{load_questions, CorpusSet};
pub use eval::{
    evaluate_chunking, AggregateSet, ChunkEvalReport, MetricAggregate, PerQuestionRow, Provenance,
};
pub use report::{load_report, report_path, run_grid, write_report, GridOutcome};

use std::collections::BTreeSet;

use crate::error::{Error, Result, Warning};
use crate::sig::ser_sig;
use crate::tokenize::{CharMap, CharSpan, Tokenizer};

/// One annotated question: the document it targets and the gold answer
/// spans inside that document. Spans may overlap each other.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub doc_id: String,
    /// Gold answer spans, character indices into the document. At least one.
    pub excerpts: Vec<CharSpan>,
}

/// Span-overlap scores for one question, each in [0, 1].
///
/// Invariants: `f1 == 2PR/(P+R)` and `f2 == 5PR/(4P+R)` (both 0 when the
/// denominator is 0), and `iou <= min(precision, recall)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpanMetrics {
    #[serde(serialize_with = "ser_sig")]
    pub iou: f64,
    #[serde(serialize_with = "ser_sig")]
    pub precision: f64,
    #[serde(serialize_with = "ser_sig")]
    pub recall: f64,
    #[serde(serialize_with = "ser_sig")]
    pub f1: f64,
    #[serde(serialize_with = "ser_sig")]
    pub f2: f64,
}

/// Token indices of `offsets` that intersect any excerpt, unioned across
/// excerpts. An excerpt that intersects no token (for example one covering
/// only whitespace) contributes nothing and produces a warning; an excerpt
/// reaching past the document is a data error naming the question.
pub fn gold_token_set(
    document: &str,
    tokenizer: &dyn Tokenizer,
    excerpts: &[CharSpan],
    question_id: &str,
) -> Result<(BTreeSet<usize>, Vec<Warning>)> {
    let offsets = tokenizer.encode(document).offsets;
    gold_token_set_from_offsets(&offsets, CharMap::new(document).char_len(), excerpts, question_id)
}

/// [`gold_token_set`] over a precomputed tokenization.
pub(crate) fn gold_token_set_from_offsets(
    offsets: &[CharSpan],
    doc_char_len: usize,
    excerpts: &[CharSpan],
    question_id: &str,
) -> Result<(BTreeSet<usize>, Vec<Warning>)> {
    if excerpts.is_empty() {
        return Err(Error::data(format!("question {question_id}: no excerpts")));
    }
    let mut set = BTreeSet::new();
    let mut warnings = Vec::new();
    for (idx, ex) in excerpts.iter().enumerate() {
        if ex.start > ex.end || ex.end > doc_char_len {
            return Err(Error::data(format!(
                "question {question_id}: excerpt {idx} ({}..{}) is out of bounds for a \
                 {doc_char_len}-char document",
                ex.start, ex.end
            )));
        }
        let mut hits = 0usize;
        if !ex.is_empty() {
            // Offsets are sorted and non-overlapping, so the intersecting
            // tokens form one contiguous run.
            let lo = offsets.partition_point(|t| t.end <= ex.start);
            for (i, token) in offsets.iter().enumerate().skip(lo) {
                if token.start >= ex.end {
                    break;
                }
                debug_assert!(token.intersects(ex));
                set.insert(i);
                hits += 1;
            }
        }
        if hits == 0 {
            warnings.push(Warning::new(
                "empty_gold_excerpt",
                format!(
                    "question {question_id}: excerpt {idx} ({}..{}) intersects no tokens",
                    ex.start, ex.end
                ),
            ));
        }
    }
    Ok((set, warnings))
}

/// Score a retrieved token set against a gold token set. Both sets index
/// the same document's tokens.
pub fn span_metrics(gold: &BTreeSet<usize>, retrieved: &BTreeSet<usize>) -> SpanMetrics {
    let intersection = gold.intersection(retrieved).count();
    let union = gold.len() + retrieved.len() - intersection;
    metrics_from_counts(gold.len(), retrieved.len(), intersection, union)
}

/// The metric formulas over raw counts. Separate from [`span_metrics`] so
/// retrieval can charge tokens from foreign documents into the retrieved
/// and union sizes without materializing them.
pub(crate) fn metrics_from_counts(
    gold: usize,
    retrieved: usize,
    intersection: usize,
    union: usize,
) -> SpanMetrics {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(intersection, retrieved);
    let recall = ratio(intersection, gold);
    let iou = ratio(intersection, union);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let f2_den = 4.0 * precision + recall;
    let f2 = if f2_den == 0.0 {
        0.0
    } else {
        5.0 * precision * recall / f2_den
    };
    SpanMetrics {
        iou,
        precision,
        recall,
        f1,
        f2,
    }
}

/// Precision of the oracle retrieval: the set of every chunk whose token
/// set intersects the gold set. For an overlap-free chunking this is the
/// best precision any retrieval achieving full recall can reach, since
/// each of those chunks owns at least one gold token exclusively.
pub fn precision_omega(gold: &BTreeSet<usize>, chunk_token_sets: &[BTreeSet<usize>]) -> f64 {
    let mut oracle: BTreeSet<usize> = BTreeSet::new();
    for chunk in chunk_token_sets {
        if !chunk.is_disjoint(gold) {
            oracle.extend(chunk.iter().copied());
        }
    }
    if oracle.is_empty() {
        return 0.0;
    }
    gold.intersection(&oracle).count() as f64 / oracle.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::WhitespaceTokenizer;
    use proptest::prelude::*;

    fn set(range: std::ops::Range<usize>) -> BTreeSet<usize> {
        range.collect()
    }

    #[test]
    fn identical_sets_score_one_everywhere() {
        let g = set(2..17);
        let m = span_metrics(&g, &g.clone());
        assert_eq!(
            (m.precision, m.recall, m.f1, m.f2, m.iou),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn disjoint_sets_score_zero_everywhere() {
        let m = span_metrics(&set(0..5), &set(5..10));
        assert_eq!((m.precision, m.recall, m.f1, m.f2, m.iou), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn half_overlapping_decade_case_is_exact() {
        let m = span_metrics(&set(0..10), &set(5..15));
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.f1, 0.5);
        assert_eq!(m.f2, 0.5);
        assert_eq!(m.iou, 5.0 / 15.0);
    }

    #[test]
    fn empty_sides_score_zero() {
        let empty = BTreeSet::new();
        let m = span_metrics(&set(0..4), &empty);
        assert_eq!((m.precision, m.recall, m.iou, m.f1, m.f2), (0.0, 0.0, 0.0, 0.0, 0.0));
        let m = span_metrics(&empty, &set(0..4));
        assert_eq!((m.precision, m.recall, m.iou, m.f1, m.f2), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn f2_rewards_recall_over_precision() {
        let recall_heavy = span_metrics(&set(0..4), &set(0..16));
        let precision_heavy = span_metrics(&set(0..16), &set(0..4));
        assert_eq!(recall_heavy.f1, precision_heavy.f1);
        assert!(recall_heavy.f2 > precision_heavy.f2);
        assert!(recall_heavy.f2 > recall_heavy.f1);
        assert!(precision_heavy.f2 < precision_heavy.f1);
    }

    #[test]
    fn gold_token_set_collects_intersecting_tokens() {
        let tok = WhitespaceTokenizer::new();
        let doc = "zero one two three four five six seven eight nine";
        // Characters 13..38 run from the start of "three" through "seven",
        // touching the boundary characters of "two" and "eight" without
        // overlapping them.
        let (got, warnings) =
            gold_token_set(doc, &tok, &[CharSpan::new(13, 38)], "q1").unwrap();
        assert_eq!(got, set(3..8));
        assert!(warnings.is_empty());
    }

    #[test]
    fn duplicate_excerpts_union_idempotently() {
        let tok = WhitespaceTokenizer::new();
        let doc = "alpha beta gamma delta";
        let ex = CharSpan::new(6, 15);
        let (once, _) = gold_token_set(doc, &tok, &[ex], "q").unwrap();
        let (twice, _) = gold_token_set(doc, &tok, &[ex, ex], "q").unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn whitespace_only_excerpts_warn_and_add_nothing() {
        let tok = WhitespaceTokenizer::new();
        let doc = "alpha  beta";
        let (got, warnings) = gold_token_set(doc, &tok, &[CharSpan::new(5, 7)], "q7").unwrap();
        assert!(got.is_empty());
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].kind, "empty_gold_excerpt");
        assert!(warnings[0].message.contains("q7"));
    }

    #[test]
    fn out_of_bounds_excerpts_name_the_question() {
        let tok = WhitespaceTokenizer::new();
        let err = gold_token_set("short doc", &tok, &[CharSpan::new(0, 99)], "q42").unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("q42")));
        let err = gold_token_set("short doc", &tok, &[], "q43").unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("q43")));
    }

    #[test]
    fn precision_omega_matches_worked_cases() {
        // Gold exactly one chunk.
        let chunks = vec![set(0..25), set(25..50)];
        assert_eq!(precision_omega(&set(0..25), &chunks), 1.0);
        // Gold strictly inside one 25-token chunk.
        assert_eq!(precision_omega(&set(5..15), &chunks), 0.4);
        // Gold straddling two 25-token chunks, five tokens in each.
        assert_eq!(precision_omega(&set(20..30), &chunks), 0.2);
        // Gold intersecting nothing.
        assert_eq!(precision_omega(&set(60..70), &chunks), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn metrics_stay_bounded_and_iou_is_dominated(
            gold in proptest::collection::btree_set(0usize..60, 0..40),
            retrieved in proptest::collection::btree_set(0usize..60, 0..40),
        ) {
            let m = span_metrics(&gold, &retrieved);
            for v in [m.precision, m.recall, m.iou, m.f1, m.f2] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(m.iou <= m.precision + 1e-12);
            prop_assert!(m.iou <= m.recall + 1e-12);
            // F2 sits on the recall side of F1 exactly when recall does.
            if m.recall > m.precision {
                prop_assert!(m.f2 >= m.f1);
            } else if m.recall < m.precision {
                prop_assert!(m.f2 <= m.f1);
            } else {
                prop_assert!((m.f2 - m.f1).abs() < 1e-12);
            }
        }

        #[test]
        fn omega_bounds_every_full_recall_retrieval(
            cuts in proptest::collection::btree_set(1usize..40, 0..11),
            gold in proptest::collection::btree_set(0usize..40, 1..40),
        ) {
            // Overlap-free chunking of tokens 0..40: cut points become
            // chunk boundaries, at most 12 chunks.
            let mut bounds = vec![0usize];
            bounds.extend(cuts.iter().copied());
            bounds.push(40);
            let chunks: Vec<BTreeSet<usize>> = bounds
                .windows(2)
                .map(|w| (w[0]..w[1]).collect())
                .collect();
            let omega = precision_omega(&gold, &chunks);

            // Brute force every chunk subset achieving full recall and
            // compare precisions as exact fractions.
            let omega_num = gold.len();
            let omega_den = chunks
                .iter()
                .filter(|c| !c.is_disjoint(&gold))
                .map(|c| c.len())
                .sum::<usize>();
            prop_assert_eq!(omega, omega_num as f64 / omega_den as f64);
            for mask in 0u32..(1 << chunks.len()) {
                let mut union: BTreeSet<usize> = BTreeSet::new();
                for (i, c) in chunks.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        union.extend(c.iter().copied());
                    }
                }
                if !gold.iter().all(|t| union.contains(t)) {
                    continue;
                }
                let num = gold.intersection(&union).count();
                // num/|union| <= omega_num/omega_den by cross-multiplication.
                prop_assert!(num as u64 * omega_den as u64 <= omega_num as u64 * union.len() as u64);
            }
        }
    }
}
