//! LLM-guided semantic chunking.
//!
//! The document is cut into ~`span_size`-token spans, each prefixed with a
//! numbered marker, and a chat model is asked after which spans to split.
//! Chunk boundaries are therefore always a subset of span boundaries. A
//! malformed reply earns one re-prompt; a second malformed reply drops the
//! document to a fixed-size chunking and records a warning. Transport
//! failures are real errors and propagate.

use crate::chunk::{build_chunk, fixed_token_chunk, window_span, Chunk};
use crate::embed::LlmClient;
use crate::error::{Error, Result, Warning};
use crate::tokenize::{CharMap, CharSpan, Tokenizer};

/// Versioned prompt template. `{document}` receives the marker-annotated
/// document, `{max_split}` the largest valid split position.
pub const SPLIT_PROMPT_TEMPLATE: &str = include_str!("../../assets/llm_split_prompt_v1.txt");

const REPROMPT_SUFFIX: &str = "\nYour previous reply could not be parsed. Reply with exactly one \
     line in the required format and nothing else.\n";

/// Chunk `text` at span boundaries chosen by `llm`.
pub fn llm_semantic_chunk(
    doc_id: &str,
    text: &str,
    tokenizer: &dyn Tokenizer,
    llm: &dyn LlmClient,
    span_size: usize,
) -> Result<(Vec<Chunk>, Vec<Warning>)> {
    if span_size == 0 {
        return Err(Error::config("llm span_size must be >= 1"));
    }
    let seq = tokenizer.encode(text);
    let n_tokens = seq.len();
    if n_tokens == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let map = CharMap::new(text);
    let mut spans: Vec<CharSpan> = Vec::new();
    let mut start = 0usize;
    while start < n_tokens {
        let end = (start + span_size).min(n_tokens);
        spans.push(window_span(&seq.offsets, start, end, map.char_len()));
        start = end;
    }
    let n = spans.len();
    if n == 1 {
        let chunk = build_chunk(doc_id, 0, text, &map, spans[0], tokenizer);
        return Ok((vec![chunk], Vec::new()));
    }

    let mut marked = String::with_capacity(text.len() + n * 12);
    for (k, span) in spans.iter().enumerate() {
        marked.push_str(&format!("<|span_{}|>", k + 1));
        marked.push_str(map.slice(text, *span));
    }
    let prompt = SPLIT_PROMPT_TEMPLATE
        .replace("{max_split}", &(n - 1).to_string())
        .replace("{document}", &marked);

    let mut warnings = Vec::new();
    let mut splits = parse_split_reply(&llm.complete(&prompt)?, n);
    if splits.is_none() {
        let retry_prompt = format!("{prompt}{REPROMPT_SUFFIX}");
        splits = parse_split_reply(&llm.complete(&retry_prompt)?, n);
    }
    let Some(splits) = splits else {
        warnings.push(Warning::new(
            "llm_fallback",
            format!(
                "document {doc_id:?}: unparseable split reply after one retry; \
                 using fixed {}-token chunks",
                span_size * 4
            ),
        ));
        let chunks = fixed_token_chunk(doc_id, text, tokenizer, span_size * 4, 0)?;
        return Ok((chunks, warnings));
    };

    let mut chunks = Vec::with_capacity(splits.len() + 1);
    let mut first = 0usize;
    for boundary in splits.iter().copied().chain(std::iter::once(n)) {
        let span = CharSpan::new(spans[first].start, spans[boundary - 1].end);
        chunks.push(build_chunk(doc_id, chunks.len(), text, &map, span, tokenizer));
        first = boundary;
    }
    Ok((chunks, warnings))
}

/// Parse a reply against the grammar `split after spans: i, j, k`.
///
/// The colon is optional, `none` or an empty list means no splits, and
/// numbers outside `[1, span_count)` are dropped. Returns None when no line
/// of the reply matches the grammar.
pub fn parse_split_reply(reply: &str, span_count: usize) -> Option<Vec<usize>> {
    for line in reply.lines() {
        let lower = line.trim().to_ascii_lowercase();
        let Some(rest) = lower.strip_prefix("split after spans") else {
            continue;
        };
        let rest = rest.trim_start().trim_start_matches(':').trim();
        let rest = rest.strip_suffix('.').unwrap_or(rest).trim();
        if rest.is_empty() || rest == "none" {
            return Some(Vec::new());
        }
        let mut out = Vec::new();
        for part in rest.split(|c: char| c == ',' || c.is_whitespace()) {
            if part.is_empty() {
                continue;
            }
            let Ok(v) = part.parse::<usize>() else {
                return None;
            };
            if (1..span_count).contains(&v) {
                out.push(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        return Some(out);
    }
    None
}
