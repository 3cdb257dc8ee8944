//! chunkgauge: measure how text chunking strategies affect dense retrieval.
//!
//! The crate covers the full loop of a chunking study:
//!
//! * [`tokenize`]: a byte-level BPE tokenizer loaded from rank files and a
//!   whitespace tokenizer for tests, both reporting character offsets per
//!   token so chunk boundaries can be compared against annotated excerpts.
//! * [`chunk`]: five chunking strategies behind one interface, from plain
//!   fixed-size token windows to embedding- and LLM-guided splitting, plus
//!   the standard 25-configuration evaluation grid.
//! * [`embed`]: an embedding pipeline with batching, retries, an on-disk
//!   cache, and a deterministic offline provider for reproducible runs.
//! * [`vectorstore`]: an exact cosine-similarity index with documented
//!   tie-breaking, small enough to audit and fast enough for benchmarks.
//! * [`chunk_eval`]: span-based chunking quality metrics (precision,
//!   recall, IoU, F-scores) over annotated question sets, and grid runs
//!   that write per-configuration JSON reports.
//! * [`bench`]: MTEB-style retrieval tasks (queries, corpus, qrels),
//!   ranking metrics (nDCG@k, MAP@k, MRR@k, P@k, R@k), task construction,
//!   and score-matrix analysis with PCA and k-means.
//!
//! Runs are reproducible by construction: deterministic providers, seeded
//! randomness, stable tie-breaks, and canonical JSON output.

pub mod bench;
pub mod chunk;
pub mod chunk_eval;
pub mod cli;
pub mod embed;
pub mod error;
pub mod sig;
pub mod stats;
pub mod tokenize;
pub mod vectorstore;

pub use chunk::{
    chunk_document, Chunk, ChunkContext, ChunkOutput, ChunkerConfig, GridSpec, SemanticParams,
    Strategy,
};
pub use error::{Error, Result, Warning};
