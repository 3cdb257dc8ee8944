//! End-to-end scoring of an embedding model on a retrieval task.

use rayon::prelude::*;

use crate::bench::metrics::{query_metrics, IRMetrics};
use crate::bench::task::RetrievalTask;
use crate::embed::Embedder;
use crate::error::{Error, Result, Warning};
use crate::vectorstore::VectorIndex;

/// Default rank cutoff for all reported metrics.
pub const DEFAULT_K: usize = 10;

/// Embed the corpus and every query, rank the corpus per query by cosine
/// similarity, and average the per-query metrics. Passages embed as the
/// whitespace concatenation of title and text. Queries without a positive
/// judgment are excluded from the averages, one warning each. Corpus
/// iteration is id-ordered, so file order never changes the result.
pub fn evaluate_model(
    task: &RetrievalTask,
    embedder: &Embedder,
    k: usize,
) -> Result<(IRMetrics, Vec<Warning>)> {
    if k == 0 {
        return Err(Error::config("rank cutoff k must be at least 1"));
    }
    if task.corpus.is_empty() {
        return Err(Error::data("task has an empty corpus"));
    }

    let passages: Vec<String> = task
        .corpus
        .values()
        .map(|entry| {
            if entry.title.is_empty() {
                entry.text.clone()
            } else {
                format!("{} {}", entry.title, entry.text)
            }
        })
        .collect();
    let passage_refs: Vec<&str> = passages.iter().map(String::as_str).collect();
    let vectors = embedder.embed_batch(&passage_refs)?;

    let mut index = VectorIndex::new(embedder.dims())?;
    for (cid, vector) in task.corpus.keys().zip(vectors) {
        index.insert(cid.clone(), vector)?;
    }
    index.freeze();

    let mut warnings = Vec::new();
    let mut scored: Vec<(&String, &String)> = Vec::new();
    for (qid, text) in &task.queries {
        if task.positive_count(qid) == 0 {
            warnings.push(Warning::new(
                "query_without_positives",
                format!("query {qid:?} has no positive judgment; skipped"),
            ));
        } else {
            scored.push((qid, text));
        }
    }
    if scored.is_empty() {
        return Err(Error::data("no query has a positive judgment"));
    }

    let query_texts: Vec<&str> = scored.iter().map(|(_, text)| text.as_str()).collect();
    let query_vectors = embedder.embed_batch(&query_texts)?;

    let empty = std::collections::BTreeMap::new();
    let per_query: Vec<IRMetrics> = scored
        .par_iter()
        .zip(query_vectors.par_iter())
        .map(|((qid, _), vector)| {
            let hits = index.search(vector, k)?;
            let ranked: Vec<&str> = hits.iter().map(|(cid, _)| cid.as_str()).collect();
            let qrels = task.qrels.get(*qid).unwrap_or(&empty);
            Ok(query_metrics(&ranked, qrels, k))
        })
        .collect::<Result<_>>()?;

    let n = per_query.len() as f64;
    let mean = |pick: fn(&IRMetrics) -> f64| per_query.iter().map(pick).sum::<f64>() / n;
    let ndcg = mean(|m| m.ndcg_at_10);
    let metrics = IRMetrics {
        main_score: ndcg,
        ndcg_at_10: ndcg,
        map_at_10: mean(|m| m.map_at_10),
        recall_at_10: mean(|m| m.recall_at_10),
        precision_at_10: mean(|m| m.precision_at_10),
        mrr_at_10: mean(|m| m.mrr_at_10),
    };
    Ok((metrics, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::bench::task::CorpusEntry;
    use crate::embed::DeterministicProvider;

    fn embedder() -> Embedder {
        Embedder::new(Arc::new(DeterministicProvider::new(64)))
    }

    fn task_with(rows: &[(&str, &str, &str)], queries: &[(&str, &str, &str)]) -> RetrievalTask {
        let mut task = RetrievalTask::default();
        for &(cid, title, text) in rows {
            task.corpus.insert(
                cid.to_string(),
                CorpusEntry {
                    title: title.to_string(),
                    text: text.to_string(),
                },
            );
        }
        for &(qid, text, relevant) in queries {
            task.queries.insert(qid.to_string(), text.to_string());
            task.qrels
                .entry(qid.to_string())
                .or_default()
                .insert(relevant.to_string(), 1);
        }
        task
    }

    #[test]
    fn echo_queries_score_perfectly() {
        let task = task_with(
            &[
                ("c1", "", "alpha beta gamma"),
                ("c2", "", "delta epsilon zeta"),
            ],
            &[
                ("q1", "alpha beta gamma", "c1"),
                ("q2", "delta epsilon zeta", "c2"),
            ],
        );
        let (metrics, warnings) = evaluate_model(&task, &embedder(), 10).unwrap();
        assert_eq!(metrics.ndcg_at_10, 1.0);
        assert_eq!(metrics.recall_at_10, 1.0);
        assert_eq!(metrics.mrr_at_10, 1.0);
        assert_eq!(metrics.main_score, metrics.ndcg_at_10);
        assert!(warnings.is_empty());
    }

    #[test]
    fn titles_join_the_embedded_passage_text() {
        let task = task_with(
            &[("c1", "alpha beta gamma", ""), ("c2", "", "other words")],
            &[("q1", "alpha beta gamma", "c1")],
        );
        let (metrics, _) = evaluate_model(&task, &embedder(), 1).unwrap();
        assert_eq!(metrics.recall_at_10, 1.0, "title-only passage must match");
    }

    #[test]
    fn results_do_not_depend_on_corpus_insertion_order() {
        let rows = [
            ("c1", "", "alpha beta gamma"),
            ("c2", "", "delta epsilon zeta"),
            ("c3", "", "eta theta iota"),
        ];
        let queries = [("q1", "delta epsilon zeta", "c2")];
        let forward = task_with(&rows, &queries);
        let mut reversed_rows = rows;
        reversed_rows.reverse();
        let reversed = task_with(&reversed_rows, &queries);
        let (a, _) = evaluate_model(&forward, &embedder(), 10).unwrap();
        let (b, _) = evaluate_model(&reversed, &embedder(), 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unjudged_queries_are_skipped_with_a_warning() {
        let mut task = task_with(
            &[("c1", "", "alpha beta gamma")],
            &[("q1", "alpha beta gamma", "c1")],
        );
        task.queries
            .insert("q2".to_string(), "unjudged".to_string());
        let (metrics, warnings) = evaluate_model(&task, &embedder(), 10).unwrap();
        assert_eq!(metrics.recall_at_10, 1.0, "skipped query must not drag the mean");
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].kind, "query_without_positives");
    }

    #[test]
    fn tasks_without_scorable_queries_are_data_errors() {
        let mut task = task_with(&[("c1", "", "alpha")], &[]);
        task.queries.insert("q1".to_string(), "alpha".to_string());
        let err = evaluate_model(&task, &embedder(), 10).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn zero_k_is_a_config_error() {
        let task = task_with(&[("c1", "", "alpha")], &[("q1", "alpha", "c1")]);
        let err = evaluate_model(&task, &embedder(), 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
