//! Evaluate one chunking configuration against questions with gold
//! excerpts and inspect the per-question rows behind the aggregates.
//!
//!     cargo run --example chunk_eval_report

use std::sync::Arc;

use chunkgauge::chunk_eval::{evaluate_chunking, CorpusSet, QuestionRecord};
use chunkgauge::embed::{DeterministicProvider, Embedder};
use chunkgauge::tokenize::{CharSpan, WhitespaceTokenizer};
use chunkgauge::{ChunkContext, ChunkerConfig};

fn main() -> chunkgauge::Result<()> {
    let mut corpus = CorpusSet::new();
    let doc = "ionic bonds transfer electrons between atoms while covalent \
               bonds share electron pairs and metallic bonds delocalize \
               electrons across a lattice";
    corpus.add_document("bonding", "bonds", doc)?;

    // The excerpt marks the covalent clause as the gold span.
    let covalent = doc.find("covalent").expect("clause present");
    let metallic = doc.find(" and metallic").expect("clause present");
    let questions = vec![QuestionRecord {
        id: "q-covalent".into(),
        question: "which bonds share electron pairs".into(),
        doc_id: "bonds".into(),
        excerpts: vec![CharSpan::new(covalent, metallic)],
    }];

    let tokenizer = WhitespaceTokenizer::new();
    let embedder = Embedder::new(Arc::new(DeterministicProvider::new(64)));
    let ctx = ChunkContext::new(&tokenizer).with_embedder(&embedder);

    let config = ChunkerConfig::parse_short_name("FX8-0")?;
    let report = evaluate_chunking(&corpus, &questions, &config, &ctx, 2)?;

    println!("config {} at k=2 over {} question(s)", report.short_name, report.question_count);
    println!(
        "global: iou {:.4}  precision {:.4}  recall {:.4}  omega {:.4}",
        report.global.iou.mean,
        report.global.precision.mean,
        report.global.recall.mean,
        report.global.precision_omega.mean,
    );
    for row in &report.per_question {
        println!(
            "  {}: iou {:.4}  p {:.4}  r {:.4}  f2 {:.4}",
            row.question_id, row.metrics.iou, row.metrics.precision, row.metrics.recall, row.metrics.f2,
        );
    }

    // Reports serialize with stable key order and 9-significant-digit
    // floats, so the same run always produces the same bytes.
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("report is {} bytes of stable JSON", json.len());
    Ok(())
}
