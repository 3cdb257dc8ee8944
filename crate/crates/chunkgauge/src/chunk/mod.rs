//! Chunking strategies and the configuration grid.
//!
//! Five strategies share one output shape: Fixed and Recursive are purely
//! token-arithmetic, Kamradt-Modified and Cluster-Semantic consult an
//! embedding provider, LLM-Semantic asks a chat model where to split. Every
//! chunk records its half-open character span in the source document, and
//! chunk boundaries always fall on token boundaries of the source
//! tokenization, so span set arithmetic against gold excerpts is exact.
//!
//! Spans are assigned so that an overlap-free chunking tiles the document:
//! a chunk covering source tokens `[a, b)` starts at token `a`'s offset
//! (position 0 for the first chunk) and ends where token `b` starts (the
//! document end for the last chunk). Concatenating the texts of an
//! overlap-0 Fixed or Recursive run reproduces the document byte for byte.

mod cluster;
mod fixed;
mod grid;
mod kamradt;
mod llm;
mod recursive;
mod sentence;

pub use cluster::{cluster_semantic_chunk, optimal_partition, segment_reward};
pub use fixed::fixed_token_chunk;
pub use grid::{generate_grid, GridSpec};
pub use kamradt::kamradt_modified_chunk;
pub use llm::{llm_semantic_chunk, parse_split_reply, SPLIT_PROMPT_TEMPLATE};
pub use recursive::{recursive_token_chunk, SEPARATORS};

use crate::embed::{Embedder, LlmClient};
use crate::error::{Error, Result, Warning};
use crate::tokenize::{CharMap, CharSpan, Tokenizer};

/// One chunk of a document.
///
/// Invariants: `text == document[span]`, `token_count == count_tokens(text)`
/// under the tokenizer that produced the chunking, and `token_count >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub doc_id: String,
    /// `<doc_id>::<zero-padded ordinal>`; lexicographic order equals
    /// positional order within a document.
    pub chunk_id: String,
    pub span: CharSpan,
    pub text: String,
    pub token_count: usize,
}

pub(crate) fn chunk_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}::{ordinal:05}")
}

/// Chunking strategy. Short names follow the grammar
/// `(RT|FX)<size>-<overlap> | K<size> | CL | LLM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Fixed,
    Recursive,
    KamradtModified,
    ClusterSemantic,
    LlmSemantic,
}

/// A validated chunker configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ChunkerConfig {
    pub strategy: Strategy,
    /// Token budget: chunk size for Fixed/Recursive, max_tokens for
    /// Kamradt-Modified. None for the strategies without a size knob.
    pub chunk_size: Option<usize>,
    /// Token overlap, Fixed/Recursive only.
    pub overlap: Option<usize>,
}

impl ChunkerConfig {
    pub fn fixed(chunk_size: usize, overlap: usize) -> Result<Self> {
        validate_size_overlap(chunk_size, overlap)?;
        Ok(ChunkerConfig {
            strategy: Strategy::Fixed,
            chunk_size: Some(chunk_size),
            overlap: Some(overlap),
        })
    }

    pub fn recursive(chunk_size: usize, overlap: usize) -> Result<Self> {
        validate_size_overlap(chunk_size, overlap)?;
        Ok(ChunkerConfig {
            strategy: Strategy::Recursive,
            chunk_size: Some(chunk_size),
            overlap: Some(overlap),
        })
    }

    pub fn kamradt(max_tokens: usize) -> Result<Self> {
        if max_tokens == 0 {
            return Err(Error::config("kamradt max_tokens must be >= 1"));
        }
        Ok(ChunkerConfig {
            strategy: Strategy::KamradtModified,
            chunk_size: Some(max_tokens),
            overlap: None,
        })
    }

    pub fn cluster() -> Self {
        ChunkerConfig {
            strategy: Strategy::ClusterSemantic,
            chunk_size: None,
            overlap: None,
        }
    }

    pub fn llm() -> Self {
        ChunkerConfig {
            strategy: Strategy::LlmSemantic,
            chunk_size: None,
            overlap: None,
        }
    }

    /// Canonical short name, `format(parse(name)) == name`.
    pub fn short_name(&self) -> String {
        match self.strategy {
            Strategy::Fixed => format!(
                "FX{}-{}",
                self.chunk_size.expect("validated"),
                self.overlap.expect("validated")
            ),
            Strategy::Recursive => format!(
                "RT{}-{}",
                self.chunk_size.expect("validated"),
                self.overlap.expect("validated")
            ),
            Strategy::KamradtModified => format!("K{}", self.chunk_size.expect("validated")),
            Strategy::ClusterSemantic => "CL".to_string(),
            Strategy::LlmSemantic => "LLM".to_string(),
        }
    }

    /// Parse a short name. Only canonical spellings are accepted: sizes and
    /// overlaps without leading zeros, overlaps counted in tokens.
    pub fn parse_short_name(name: &str) -> Result<Self> {
        let fail = || {
            Error::config(format!(
                "bad chunker short name {name:?}: expected (RT|FX)<size>-<overlap>, K<size>, CL or LLM"
            ))
        };
        let config = if name == "CL" {
            ChunkerConfig::cluster()
        } else if name == "LLM" {
            ChunkerConfig::llm()
        } else if let Some(rest) = name.strip_prefix('K') {
            let size: usize = rest.parse().map_err(|_| fail())?;
            ChunkerConfig::kamradt(size)?
        } else {
            let (strategy, rest) = if let Some(rest) = name.strip_prefix("FX") {
                (Strategy::Fixed, rest)
            } else if let Some(rest) = name.strip_prefix("RT") {
                (Strategy::Recursive, rest)
            } else {
                return Err(fail());
            };
            let (size, overlap) = rest.split_once('-').ok_or_else(fail)?;
            let size: usize = size.parse().map_err(|_| fail())?;
            let overlap: usize = overlap.parse().map_err(|_| fail())?;
            match strategy {
                Strategy::Fixed => ChunkerConfig::fixed(size, overlap)?,
                _ => ChunkerConfig::recursive(size, overlap)?,
            }
        };
        if config.short_name() != name {
            return Err(fail());
        }
        Ok(config)
    }
}

fn validate_size_overlap(chunk_size: usize, overlap: usize) -> Result<()> {
    if chunk_size == 0 {
        return Err(Error::config("chunk_size must be >= 1"));
    }
    if overlap >= chunk_size {
        return Err(Error::config(format!(
            "overlap {overlap} must be smaller than chunk_size {chunk_size}"
        )));
    }
    Ok(())
}

/// Knobs for the semantic strategies; token counts all refer to the
/// configured tokenizer.
#[derive(Debug, Clone, Copy)]
pub struct SemanticParams {
    /// Fine-grained piece size for Cluster-Semantic, roughly 50 tokens.
    pub piece_size: usize,
    /// Token cap for Cluster-Semantic chunks.
    pub cluster_max_tokens: usize,
    /// Span size for LLM-Semantic, roughly 50 tokens.
    pub llm_span_size: usize,
}

impl Default for SemanticParams {
    fn default() -> Self {
        SemanticParams {
            piece_size: 50,
            cluster_max_tokens: 400,
            llm_span_size: 50,
        }
    }
}

/// Everything a strategy might need. Fixed/Recursive use only the
/// tokenizer; the semantic strategies also need an embedder or LLM client.
pub struct ChunkContext<'a> {
    pub tokenizer: &'a dyn Tokenizer,
    pub embedder: Option<&'a Embedder>,
    pub llm: Option<&'a dyn LlmClient>,
    pub params: SemanticParams,
}

impl<'a> ChunkContext<'a> {
    pub fn new(tokenizer: &'a dyn Tokenizer) -> Self {
        ChunkContext {
            tokenizer,
            embedder: None,
            llm: None,
            params: SemanticParams::default(),
        }
    }

    pub fn with_embedder(mut self, embedder: &'a Embedder) -> Self {
        self.embedder = Some(embedder);
        self
    }

    pub fn with_llm(mut self, llm: &'a dyn LlmClient) -> Self {
        self.llm = Some(llm);
        self
    }
}

/// Chunks plus any non-fatal conditions hit along the way.
#[derive(Debug, Clone)]
pub struct ChunkOutput {
    pub chunks: Vec<Chunk>,
    pub warnings: Vec<Warning>,
}

/// Run one configuration against one document.
pub fn chunk_document(
    doc_id: &str,
    text: &str,
    config: &ChunkerConfig,
    ctx: &ChunkContext,
) -> Result<ChunkOutput> {
    let plain = |chunks: Vec<Chunk>| ChunkOutput {
        chunks,
        warnings: Vec::new(),
    };
    match config.strategy {
        Strategy::Fixed => Ok(plain(fixed_token_chunk(
            doc_id,
            text,
            ctx.tokenizer,
            config.chunk_size.expect("validated"),
            config.overlap.expect("validated"),
        )?)),
        Strategy::Recursive => Ok(plain(recursive_token_chunk(
            doc_id,
            text,
            ctx.tokenizer,
            config.chunk_size.expect("validated"),
            config.overlap.expect("validated"),
        )?)),
        Strategy::KamradtModified => {
            let embedder = ctx.embedder.ok_or_else(|| {
                Error::config("kamradt_modified requires an embedding provider")
            })?;
            let (chunks, warnings) = kamradt_modified_chunk(
                doc_id,
                text,
                ctx.tokenizer,
                embedder,
                config.chunk_size.expect("validated"),
            )?;
            Ok(ChunkOutput { chunks, warnings })
        }
        Strategy::ClusterSemantic => {
            let embedder = ctx.embedder.ok_or_else(|| {
                Error::config("cluster_semantic requires an embedding provider")
            })?;
            Ok(plain(cluster_semantic_chunk(
                doc_id,
                text,
                ctx.tokenizer,
                embedder,
                ctx.params.piece_size,
                ctx.params.cluster_max_tokens,
            )?))
        }
        Strategy::LlmSemantic => {
            let llm = ctx
                .llm
                .ok_or_else(|| Error::config("llm_semantic requires an LLM client"))?;
            let (chunks, warnings) = llm_semantic_chunk(
                doc_id,
                text,
                ctx.tokenizer,
                llm,
                ctx.params.llm_span_size,
            )?;
            Ok(ChunkOutput { chunks, warnings })
        }
    }
}

/// Char span for a window `[a, b)` of source tokens, extended so that
/// overlap-free windows tile the document: the first window starts at 0 and
/// a window ends where token `b` starts (document end for the last window).
pub(crate) fn window_span(
    offsets: &[CharSpan],
    a: usize,
    b: usize,
    doc_char_len: usize,
) -> CharSpan {
    debug_assert!(a < b && b <= offsets.len());
    let start = if a == 0 { 0 } else { offsets[a].start };
    let end = if b == offsets.len() {
        doc_char_len
    } else {
        offsets[b].start
    };
    CharSpan::new(start, end)
}

pub(crate) fn build_chunk(
    doc_id: &str,
    ordinal: usize,
    doc: &str,
    map: &CharMap,
    span: CharSpan,
    tokenizer: &dyn Tokenizer,
) -> Chunk {
    let text = map.slice(doc, span).to_string();
    let token_count = tokenizer.count_tokens(&text);
    Chunk {
        doc_id: doc_id.to_string(),
        chunk_id: chunk_id(doc_id, ordinal),
        span,
        text,
        token_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_names_round_trip() {
        for name in ["RT100-0", "FX64-12", "K200", "CL", "LLM", "RT512-100", "FX100-80"] {
            let config = ChunkerConfig::parse_short_name(name).unwrap();
            assert_eq!(config.short_name(), name);
        }
    }

    #[test]
    fn parse_rejects_bad_names() {
        for name in [
            "RT100", "K", "XX10-0", "RT100-", "RT-5", "FX0-0", "FX10-10", "FX10-12", "cl",
            "llm", "K0", "RT010-0", "FX100-007", " RT100-0", "RT100-0 ",
        ] {
            let err = ChunkerConfig::parse_short_name(name).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{name}");
        }
    }

    #[test]
    fn overlap_suffix_reads_as_tokens() {
        let config = ChunkerConfig::parse_short_name("RT100-20").unwrap();
        assert_eq!(config.chunk_size, Some(100));
        assert_eq!(config.overlap, Some(20));
        assert_eq!(config.strategy, Strategy::Recursive);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(ChunkerConfig::fixed(0, 0).is_err());
        assert!(ChunkerConfig::fixed(10, 10).is_err());
        assert!(ChunkerConfig::fixed(10, 11).is_err());
        assert!(ChunkerConfig::recursive(0, 0).is_err());
        assert!(ChunkerConfig::kamradt(0).is_err());
    }

    #[test]
    fn chunk_ids_sort_positionally() {
        let a = chunk_id("doc", 7);
        let b = chunk_id("doc", 70);
        assert!(a < b);
        assert_eq!(a, "doc::00007");
    }

    #[test]
    fn semantic_strategies_require_their_backends() {
        let tokenizer = crate::tokenize::WhitespaceTokenizer::new();
        let ctx = ChunkContext::new(&tokenizer);
        for config in [
            ChunkerConfig::kamradt(100).unwrap(),
            ChunkerConfig::cluster(),
            ChunkerConfig::llm(),
        ] {
            let err = chunk_document("d", "some text", &config, &ctx).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{:?}", config.strategy);
        }
    }
}
