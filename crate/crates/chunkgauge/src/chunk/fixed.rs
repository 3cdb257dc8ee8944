//! Fixed-token chunking: windows of `chunk_size` tokens advancing by
//! `chunk_size - overlap`.

use crate::chunk::{build_chunk, window_span, Chunk};
use crate::error::Result;
use crate::tokenize::{CharMap, Tokenizer};

/// Split `text` into token windows starting at every multiple of the stride
/// below the token count. Every chunk except possibly trailing ones has
/// exactly `chunk_size` tokens; consecutive full windows share exactly
/// `overlap` tokens.
pub fn fixed_token_chunk(
    doc_id: &str,
    text: &str,
    tokenizer: &dyn Tokenizer,
    chunk_size: usize,
    overlap: usize,
) -> Result<Vec<Chunk>> {
    super::validate_size_overlap(chunk_size, overlap)?;
    let seq = tokenizer.encode(text);
    let n = seq.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let map = CharMap::new(text);
    let stride = chunk_size - overlap;
    let mut chunks = Vec::new();
    let mut start = 0usize;
    while start < n {
        let end = (start + chunk_size).min(n);
        let span = window_span(&seq.offsets, start, end, map.char_len());
        chunks.push(build_chunk(
            doc_id,
            chunks.len(),
            text,
            &map,
            span,
            tokenizer,
        ));
        start += stride;
    }
    Ok(chunks)
}
