//! Run every chunking strategy over the same document and compare the
//! chunk boundaries they pick.
//!
//!     cargo run --example chunk_strategies

use std::sync::Arc;

use chunkgauge::embed::{DeterministicProvider, Embedder, FixedReplyClient};
use chunkgauge::tokenize::WhitespaceTokenizer;
use chunkgauge::{chunk_document, ChunkContext, ChunkerConfig};

const DOC: &str = "Titration quantifies an analyte by adding a reagent of known \
concentration until the reaction completes. An indicator signals the endpoint \
with a color change. Back titration instead adds excess reagent and measures \
what remains. Gravimetric analysis takes a different route entirely, weighing \
a precipitate to infer composition. Spectroscopy infers concentration from \
light absorption using a calibration curve.";

fn main() -> chunkgauge::Result<()> {
    let tokenizer = WhitespaceTokenizer::new();
    let embedder = Embedder::new(Arc::new(DeterministicProvider::new(64)));
    // The scripted reply keeps the LLM strategy offline and reproducible:
    // it asks for a split after the first span on every prompt.
    let llm = FixedReplyClient::new("split after spans: 1");
    let ctx = ChunkContext::new(&tokenizer)
        .with_embedder(&embedder)
        .with_llm(&llm);

    for short_name in ["FX24-0", "FX24-6", "RT24-6", "K24", "CL", "LLM"] {
        let config = ChunkerConfig::parse_short_name(short_name)?;
        let output = chunk_document("doc", DOC, &config, &ctx)?;
        println!("{short_name}: {} chunks", output.chunks.len());
        for chunk in &output.chunks {
            println!(
                "  {} [{:>3}..{:>3}] {:>2} tokens | {}...",
                chunk.chunk_id,
                chunk.span.start,
                chunk.span.end,
                chunk.token_count,
                chunk.text[..chunk.text.len().min(40)].trim_end(),
            );
        }
        for warning in &output.warnings {
            println!("  warning {}: {}", warning.kind, warning.message);
        }
    }
    Ok(())
}
