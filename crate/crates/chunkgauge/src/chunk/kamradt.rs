//! Kamradt-modified semantic chunking.
//!
//! Sentences are embedded with one neighbor of context on each side, and a
//! split happens wherever the distance between consecutive windows exceeds
//! a percentile threshold of all such distances. The modification is the
//! size cap: a binary search over the percentile keeps the coarsest
//! chunking whose chunks all fit in `max_tokens`. When no threshold can
//! satisfy the cap the sentences are packed greedily instead, and a single
//! sentence larger than the cap is split by the recursive strategy.

use crate::chunk::{build_chunk, recursive::split_into_groups, Chunk};
use crate::embed::{cosine, Embedder};
use crate::error::{Error, Result, Warning};
use crate::stats::percentile;
use crate::tokenize::{CharMap, CharSpan, Tokenizer};

const SEARCH_ITERATIONS: usize = 50;

/// Chunk `text` at sentence boundaries so that no chunk exceeds
/// `max_tokens`, preferring boundaries where embedding similarity drops.
pub fn kamradt_modified_chunk(
    doc_id: &str,
    text: &str,
    tokenizer: &dyn Tokenizer,
    embedder: &Embedder,
    max_tokens: usize,
) -> Result<(Vec<Chunk>, Vec<Warning>)> {
    if max_tokens == 0 {
        return Err(Error::config("kamradt max_tokens must be >= 1"));
    }
    let sentences = super::sentence::split_sentences(text);
    let n = sentences.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }

    let count = |bs: usize, be: usize| tokenizer.count_tokens(&text[bs..be]);
    let group_ranges = if n == 1 || count(0, text.len()) <= max_tokens {
        vec![(0, n)]
    } else {
        match threshold_search(text, &sentences, tokenizer, embedder, max_tokens)? {
            Some(groups) => groups,
            None => pack_greedy(&sentences, &|a, b| count(sentences[a].0, sentences[b - 1].1), max_tokens),
        }
    };

    let mut warnings = Vec::new();
    let mut byte_ranges: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &group_ranges {
        let (bs, be) = (sentences[a].0, sentences[b - 1].1);
        if count(bs, be) <= max_tokens {
            byte_ranges.push((bs, be));
            continue;
        }
        // Reachable only for a single sentence over the cap: the searches
        // above never emit a multi-sentence group that misses it.
        warnings.push(Warning::new(
            "kamradt_fallback",
            format!(
                "document {doc_id:?}: a {} token sentence exceeds max_tokens {max_tokens}; split recursively",
                count(bs, be)
            ),
        ));
        for (gs, ge) in split_into_groups(&text[bs..be], tokenizer, max_tokens) {
            byte_ranges.push((bs + gs, bs + ge));
        }
    }

    let map = CharMap::new(text);
    let chunks = byte_ranges
        .iter()
        .enumerate()
        .map(|(ordinal, &(bs, be))| {
            let span = CharSpan::new(map.char_of_byte(bs), map.char_of_byte(be));
            build_chunk(doc_id, ordinal, text, &map, span, tokenizer)
        })
        .collect();
    Ok((chunks, warnings))
}

/// Largest-percentile threshold whose induced groups all fit the cap, or
/// None when no percentile works.
fn threshold_search(
    text: &str,
    sentences: &[(usize, usize)],
    tokenizer: &dyn Tokenizer,
    embedder: &Embedder,
    max_tokens: usize,
) -> Result<Option<Vec<(usize, usize)>>> {
    let n = sentences.len();
    let windows: Vec<&str> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            &text[sentences[lo].0..sentences[hi].1]
        })
        .collect();
    let embeddings = embedder.embed_batch(&windows)?;
    let distances: Vec<f64> = (0..n - 1)
        .map(|i| 1.0 - cosine(&embeddings[i], &embeddings[i + 1]))
        .collect();
    let mut sorted = distances.clone();
    sorted.sort_by(f64::total_cmp);

    let groups_at = |p: f64| -> Vec<(usize, usize)> {
        let threshold = percentile(&sorted, p);
        let mut groups = Vec::new();
        let mut start = 0usize;
        for (i, &d) in distances.iter().enumerate() {
            if d > threshold {
                groups.push((start, i + 1));
                start = i + 1;
            }
        }
        groups.push((start, n));
        groups
    };
    let fits = |groups: &[(usize, usize)]| {
        groups
            .iter()
            .all(|&(a, b)| tokenizer.count_tokens(&text[sentences[a].0..sentences[b - 1].1]) <= max_tokens)
    };

    let top = groups_at(100.0);
    if fits(&top) {
        return Ok(Some(top));
    }
    let bottom = groups_at(0.0);
    if !fits(&bottom) {
        return Ok(None);
    }
    let mut best = bottom;
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    for _ in 0..SEARCH_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let groups = groups_at(mid);
        if fits(&groups) {
            best = groups;
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(best))
}

/// Greedy left-to-right sentence packing under the cap. Oversized single
/// sentences still come out as their own group; the caller splits them.
fn pack_greedy(
    sentences: &[(usize, usize)],
    count: &dyn Fn(usize, usize) -> usize,
    max_tokens: usize,
) -> Vec<(usize, usize)> {
    let n = sentences.len();
    let mut groups = Vec::new();
    let mut start = 0usize;
    let mut end = 1usize;
    while end < n {
        if count(start, end + 1) > max_tokens {
            groups.push((start, end));
            start = end;
        }
        end += 1;
    }
    groups.push((start, n));
    groups
}
