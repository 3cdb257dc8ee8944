//! Recursive-token chunking over a separator hierarchy.
//!
//! The text is split at the highest-priority separator it contains;
//! oversized parts descend to the next separator level, bottoming out at
//! token windows. Separators stay attached to the preceding piece, so the
//! pieces tile the document and an overlap-free run reconstructs it
//! exactly. Pieces are then greedily packed into chunks up to the token
//! budget.

use crate::chunk::{build_chunk, Chunk};
use crate::error::Result;
use crate::tokenize::{CharMap, CharSpan, Tokenizer};

/// Separator hierarchy, highest priority first. The empty string is the
/// last resort and means "split at token boundaries".
pub const SEPARATORS: [&str; 7] = ["\n\n", "\n", ".", "?", "!", " ", ""];

/// Split `text` into chunks of at most `chunk_size` tokens, preferring
/// paragraph over sentence over word boundaries. Overlap is applied by
/// re-including the trailing `overlap` tokens of the previous chunk, with
/// packing budgeted to `chunk_size - overlap` so the invariant
/// `token_count <= chunk_size` holds for every chunk.
pub fn recursive_token_chunk(
    doc_id: &str,
    text: &str,
    tokenizer: &dyn Tokenizer,
    chunk_size: usize,
    overlap: usize,
) -> Result<Vec<Chunk>> {
    super::validate_size_overlap(chunk_size, overlap)?;
    let budget = chunk_size - overlap;
    let groups = split_into_groups(text, tokenizer, budget);
    let map = CharMap::new(text);
    let mut chunks = Vec::with_capacity(groups.len());
    let mut prev: Option<(usize, usize)> = None;
    for &(gs, ge) in &groups {
        let start_byte = match prev {
            Some((ps, pe)) if overlap > 0 => {
                let prev_slice = &text[ps..pe];
                let seq = tokenizer.encode(prev_slice);
                let k = overlap.min(seq.len());
                if k == 0 {
                    gs
                } else {
                    let prev_map = CharMap::new(prev_slice);
                    ps + prev_map.byte_of(seq.offsets[seq.len() - k].start)
                }
            }
            _ => gs,
        };
        let span = CharSpan::new(map.char_of_byte(start_byte), map.char_of_byte(ge));
        chunks.push(build_chunk(doc_id, chunks.len(), text, &map, span, tokenizer));
        prev = Some((gs, ge));
    }
    Ok(chunks)
}

/// Byte ranges of the packed piece groups, each within `budget` tokens.
/// Shared with the Cluster-Semantic piece stage.
pub(crate) fn split_into_groups(
    text: &str,
    tokenizer: &dyn Tokenizer,
    budget: usize,
) -> Vec<(usize, usize)> {
    debug_assert!(budget >= 1);
    if text.is_empty() {
        return Vec::new();
    }
    let mut pieces = Vec::new();
    split_range(text, 0, text.len(), &SEPARATORS, budget, tokenizer, &mut pieces);

    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut cur: Option<(usize, usize)> = None;
    for &(ps, pe) in &pieces {
        match cur {
            None => cur = Some((ps, pe)),
            Some((cs, ce)) => {
                if tokenizer.count_tokens(&text[cs..pe]) <= budget {
                    cur = Some((cs, pe));
                } else if tokenizer.count_tokens(&text[cs..ce]) == 0 {
                    // A token-free prefix (pure separators under a gap-ful
                    // tokenizer) folds into the following group instead of
                    // becoming an empty chunk.
                    cur = Some((cs, pe));
                } else {
                    groups.push((cs, ce));
                    cur = Some((ps, pe));
                }
            }
        }
    }
    if let Some((cs, ce)) = cur {
        groups.push((cs, ce));
    }
    if groups.len() == 1 && tokenizer.count_tokens(&text[groups[0].0..groups[0].1]) == 0 {
        groups.clear();
    }
    groups
}

fn split_range(
    text: &str,
    bs: usize,
    be: usize,
    seps: &[&str],
    budget: usize,
    tokenizer: &dyn Tokenizer,
    out: &mut Vec<(usize, usize)>,
) {
    let slice = &text[bs..be];
    if tokenizer.count_tokens(slice) <= budget {
        out.push((bs, be));
        return;
    }
    let mut chosen = None;
    for (idx, sep) in seps.iter().enumerate() {
        if sep.is_empty() || slice.contains(sep) {
            chosen = Some(idx);
            break;
        }
    }
    let Some(idx) = chosen else {
        token_window_split(text, bs, be, budget, tokenizer, out);
        return;
    };
    let sep = seps[idx];
    if sep.is_empty() {
        token_window_split(text, bs, be, budget, tokenizer, out);
        return;
    }
    let mut pos = bs;
    for part in slice.split_inclusive(sep) {
        let (pbs, pbe) = (pos, pos + part.len());
        pos = pbe;
        if tokenizer.count_tokens(part) <= budget {
            out.push((pbs, pbe));
        } else {
            split_range(text, pbs, pbe, &seps[idx + 1..], budget, tokenizer, out);
        }
    }
}

/// Last-resort split at token boundaries, tiling the byte range exactly.
fn token_window_split(
    text: &str,
    bs: usize,
    be: usize,
    budget: usize,
    tokenizer: &dyn Tokenizer,
    out: &mut Vec<(usize, usize)>,
) {
    let slice = &text[bs..be];
    let seq = tokenizer.encode(slice);
    let n = seq.len();
    if n == 0 {
        out.push((bs, be));
        return;
    }
    let map = CharMap::new(slice);
    let mut prev_byte = bs;
    let mut start = 0usize;
    while start < n {
        let end = (start + budget).min(n);
        let end_byte = if end == n {
            be
        } else {
            bs + map.byte_of(seq.offsets[end].start)
        };
        out.push((prev_byte, end_byte));
        prev_byte = end_byte;
        start = end;
    }
}
