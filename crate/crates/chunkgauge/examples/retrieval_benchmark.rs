//! Score two embedding providers on a small retrieval task and compare
//! their rank-cutoff metrics.
//!
//!     cargo run --example retrieval_benchmark

use std::sync::Arc;

use chunkgauge::bench::{evaluate_model, CorpusEntry, RetrievalTask};
use chunkgauge::embed::{DeterministicProvider, Embedder};

fn main() -> chunkgauge::Result<()> {
    let mut task = RetrievalTask::default();
    let passages = [
        ("c1", "Titration", "adding reagent until the reaction completes"),
        ("c2", "Chromatography", "separating mixtures by differential affinity"),
        ("c3", "Spectroscopy", "measuring absorption across wavelengths"),
        ("c4", "Gravimetry", "weighing a precipitate to infer composition"),
    ];
    for (cid, title, text) in passages {
        task.corpus.insert(
            cid.to_string(),
            CorpusEntry {
                title: title.to_string(),
                text: text.to_string(),
            },
        );
    }
    let queries = [
        ("q1", "Titration adding reagent until the reaction completes", "c1"),
        ("q2", "Spectroscopy measuring absorption across wavelengths", "c3"),
        ("q3", "Gravimetry weighing a precipitate to infer composition", "c4"),
    ];
    for (qid, text, relevant) in queries {
        task.queries.insert(qid.to_string(), text.to_string());
        task.qrels
            .entry(qid.to_string())
            .or_default()
            .insert(relevant.to_string(), 1);
    }

    println!(
        "{:<22} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "model", "ndcg", "map", "recall", "prec", "mrr"
    );
    for dims in [16, 64] {
        let embedder = Embedder::new(Arc::new(DeterministicProvider::new(dims)));
        let (m, warnings) = evaluate_model(&task, &embedder, 10)?;
        assert!(warnings.is_empty());
        println!(
            "{:<22} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
            embedder.identifier(),
            m.ndcg_at_10,
            m.map_at_10,
            m.recall_at_10,
            m.precision_at_10,
            m.mrr_at_10,
        );
    }
    Ok(())
}
