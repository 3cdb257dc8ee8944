//! Evaluate a small configuration grid over an in-memory corpus and print
//! the per-configuration aggregates, the way `chunkgauge grid` does for a
//! corpus directory.
//!
//!     cargo run --example grid_search

use std::sync::Arc;

use chunkgauge::chunk::GridSpec;
use chunkgauge::chunk_eval::{run_grid, CorpusSet, GridOutcome, QuestionRecord};
use chunkgauge::embed::{DeterministicProvider, Embedder};
use chunkgauge::tokenize::{CharSpan, WhitespaceTokenizer};
use chunkgauge::ChunkContext;

fn main() -> chunkgauge::Result<()> {
    let acids = "strong acids dissociate completely in water while weak acids \
                 reach an equilibrium governed by their dissociation constant";
    let bases = "bases accept protons and strong bases dissociate completely \
                 producing hydroxide ions in aqueous solution";
    let mut corpus = CorpusSet::new();
    corpus.add_document("demo", "acids", acids)?;
    corpus.add_document("demo", "bases", bases)?;

    // Gold excerpts are the clauses answering each question.
    let weak = acids.find("weak acids").expect("clause present");
    let producing = bases.find("producing").expect("clause present");
    let questions = vec![
        QuestionRecord {
            id: "q1".into(),
            question: "what governs weak acid equilibrium".into(),
            doc_id: "acids".into(),
            excerpts: vec![CharSpan::new(weak, acids.len())],
        },
        QuestionRecord {
            id: "q2".into(),
            question: "what do bases produce in water".into(),
            doc_id: "bases".into(),
            excerpts: vec![CharSpan::new(producing, bases.len())],
        },
    ];

    let tokenizer = WhitespaceTokenizer::new();
    let embedder = Embedder::new(Arc::new(DeterministicProvider::new(64)));
    let ctx = ChunkContext::new(&tokenizer).with_embedder(&embedder);

    // A trimmed grid keeps the example fast; GridSpec::default() is the
    // full 25-configuration sweep.
    let spec = GridSpec {
        fixed_sweep: vec![(8, 0), (8, 2), (16, 4)],
        recursive_sweep: vec![(8, 0), (16, 4)],
        kamradt_sizes: vec![8],
        include_cluster: true,
        include_llm: false,
    };

    let out_dir = std::env::temp_dir().join("chunkgauge_grid_search_example");
    std::fs::remove_dir_all(&out_dir).ok();
    let outcomes = run_grid(&corpus, &questions, &spec, &ctx, 2, &out_dir)?;

    println!("{:<8} {:>8} {:>10} {:>8}", "config", "iou", "precision", "recall");
    for outcome in &outcomes {
        match outcome {
            GridOutcome::Completed(report) | GridOutcome::Resumed(report) => {
                println!(
                    "{:<8} {:>8.4} {:>10.4} {:>8.4}",
                    report.short_name,
                    report.global.iou.mean,
                    report.global.precision.mean,
                    report.global.recall.mean,
                );
            }
            GridOutcome::Failed { short_name, error } => {
                println!("{short_name:<8} failed: {error}");
            }
        }
    }

    // A second run resumes from the reports already on disk.
    let resumed = run_grid(&corpus, &questions, &spec, &ctx, 2, &out_dir)?;
    let reused = resumed
        .iter()
        .filter(|o| matches!(o, GridOutcome::Resumed(_)))
        .count();
    println!("second run resumed {reused}/{} reports", resumed.len());
    std::fs::remove_dir_all(&out_dir).ok();
    Ok(())
}
