//! Cluster-semantic chunking.
//!
//! The document is cut into fine-grained pieces of roughly `piece_size`
//! tokens, each piece is embedded, and a dynamic program groups consecutive
//! pieces to maximize the summed pairwise cosine similarity inside each
//! group, subject to a token cap per group. The DP is exact, so the result
//! matches exhaustive enumeration of all contiguous partitions.

use crate::chunk::{build_chunk, recursive::split_into_groups, Chunk};
use crate::embed::{cosine, Embedder, EmbeddingVector};
use crate::error::{Error, Result};
use crate::tokenize::{CharMap, CharSpan, Tokenizer};

/// Chunk `text` by grouping ~`piece_size`-token pieces into chunks of at
/// most `max_tokens` (counted as the sum of member piece token counts).
pub fn cluster_semantic_chunk(
    doc_id: &str,
    text: &str,
    tokenizer: &dyn Tokenizer,
    embedder: &Embedder,
    piece_size: usize,
    max_tokens: usize,
) -> Result<Vec<Chunk>> {
    if piece_size == 0 {
        return Err(Error::config("cluster piece_size must be >= 1"));
    }
    if max_tokens < piece_size {
        return Err(Error::config(format!(
            "cluster max_tokens {max_tokens} must be >= piece_size {piece_size}"
        )));
    }
    let pieces = fold_whitespace_pieces(text, split_into_groups(text, tokenizer, piece_size));
    if pieces.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<&str> = pieces.iter().map(|&(s, e)| &text[s..e]).collect();
    let counts: Vec<usize> = texts.iter().map(|t| tokenizer.count_tokens(t)).collect();
    let embeddings = embedder.embed_batch(&texts)?;
    let (ranges, _objective) = optimal_partition(&embeddings, &counts, max_tokens);

    let map = CharMap::new(text);
    let chunks = ranges
        .iter()
        .enumerate()
        .map(|(ordinal, &(a, b))| {
            let (bs, be) = (pieces[a].0, pieces[b - 1].1);
            let span = CharSpan::new(map.char_of_byte(bs), map.char_of_byte(be));
            build_chunk(doc_id, ordinal, text, &map, span, tokenizer)
        })
        .collect();
    Ok(chunks)
}

/// Whitespace-only pieces cannot be embedded; fold them into the previous
/// piece (or the next one at the document head) so pieces still tile.
fn fold_whitespace_pieces(text: &str, pieces: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut folded: Vec<(usize, usize)> = Vec::new();
    let mut lead: Option<usize> = None;
    for (s, e) in pieces {
        if text[s..e].chars().all(char::is_whitespace) {
            match folded.last_mut() {
                Some(last) => last.1 = e,
                None => lead = Some(lead.unwrap_or(s)),
            }
        } else {
            folded.push((lead.take().unwrap_or(s), e));
        }
    }
    folded
}

/// Summed pairwise cosine similarity inside the half-open piece range
/// `[start, end)`. Pairs accumulate in a fixed order (both indexes
/// ascending), so repeated calls are bit-identical and the DP objective can
/// be compared exactly against a brute-force enumeration.
pub fn segment_reward(embeddings: &[EmbeddingVector], start: usize, end: usize) -> f64 {
    let mut acc = 0.0f64;
    for a in start..end {
        for b in (a + 1)..end {
            acc += cosine(&embeddings[a], &embeddings[b]);
        }
    }
    acc
}

/// Optimal contiguous partition of the piece sequence and its objective.
///
/// Maximizes the sum of [`segment_reward`] over groups, subject to each
/// group's token sum staying within `max_tokens`. A lone piece is always
/// admissible, so a partition exists even if one piece overshoots the cap.
/// When two groupings tie, the boundary is kept rather than absorbed:
/// merging groups must strictly improve the objective, so equal-similarity
/// content does not clump into one oversized chunk.
pub fn optimal_partition(
    embeddings: &[EmbeddingVector],
    token_counts: &[usize],
    max_tokens: usize,
) -> (Vec<(usize, usize)>, f64) {
    let n = embeddings.len();
    assert_eq!(n, token_counts.len(), "one token count per embedding");
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut prefix = vec![0usize; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + token_counts[i];
    }

    let mut opt = vec![f64::NEG_INFINITY; n + 1];
    let mut back = vec![0usize; n + 1];
    opt[0] = 0.0;
    for end in 1..=n {
        for start in 0..end {
            if prefix[end] - prefix[start] > max_tokens && end - start > 1 {
                continue;
            }
            let cand = opt[start] + segment_reward(embeddings, start, end);
            if cand >= opt[end] {
                opt[end] = cand;
                back[end] = start;
            }
        }
    }

    let mut ranges = Vec::new();
    let mut end = n;
    while end > 0 {
        let start = back[end];
        ranges.push((start, end));
        end = start;
    }
    ranges.reverse();
    (ranges, opt[n])
}
