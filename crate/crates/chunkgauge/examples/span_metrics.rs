//! Span-level retrieval metrics on token sets: IoU, precision, recall,
//! F1, F2, and the oracle precision bound.
//!
//!     cargo run --example span_metrics

use std::collections::BTreeSet;

use chunkgauge::chunk_eval::{gold_token_set, precision_omega, span_metrics};
use chunkgauge::tokenize::{CharSpan, WhitespaceTokenizer};

fn set(range: std::ops::Range<usize>) -> BTreeSet<usize> {
    range.collect()
}

fn main() -> chunkgauge::Result<()> {
    // The classic worked case: ten gold tokens, ten retrieved, five shared.
    let gold = set(0..10);
    let retrieved = set(5..15);
    let m = span_metrics(&gold, &retrieved);
    println!("gold 0..10 vs retrieved 5..15:");
    println!("  precision {:.4}  recall {:.4}", m.precision, m.recall);
    println!("  f1 {:.4}  f2 {:.4}  iou {:.4}", m.f1, m.f2, m.iou);

    let perfect = span_metrics(&gold, &gold);
    println!("identical sets: iou {:.1}", perfect.iou);
    let disjoint = span_metrics(&gold, &set(20..30));
    println!("disjoint sets: iou {:.1}", disjoint.iou);

    // Gold token sets come from character excerpts intersected with the
    // tokenizer's offsets.
    let doc = "zero one two three four five six seven eight nine";
    let tokenizer = WhitespaceTokenizer::new();
    let excerpt = CharSpan::new(13, 38);
    let (tokens, warnings) = gold_token_set(doc, &tokenizer, &[excerpt], "q-demo")?;
    println!("excerpt {:?} covers tokens {:?}", &doc[13..38], tokens);
    assert!(warnings.is_empty());

    // The oracle bound: the best precision any full-recall retrieval over
    // these chunks can reach.
    let chunks: Vec<BTreeSet<usize>> = vec![set(0..10), set(10..25), set(25..50)];
    let omega = precision_omega(&tokens, &chunks);
    println!("precision omega over 3 chunks: {omega:.4}");
    Ok(())
}
