//! Byte-level BPE tokenizer loaded from a tiktoken-style rank file.
//!
//! Rank file format: one `base64(token_bytes) rank` pair per line. The
//! vocabulary must contain every single byte so arbitrary text is always
//! encodable. Pre-tokenization follows the cl100k_base pattern: text is cut
//! into pieces (contractions, letter runs with an optional leading
//! non-letter, digit groups of up to three, punctuation runs with an
//! optional leading space, newline runs, whitespace) and BPE merges apply
//! within a piece only.

use std::collections::HashMap;
use std::path::Path;

use base64::Engine;

use crate::error::{Error, Result};
use crate::tokenize::{CharSpan, TokenSequence, Tokenizer};

pub struct BpeTokenizer {
    ranks: HashMap<Vec<u8>, u32>,
    decoder: HashMap<u32, Vec<u8>>,
    name: String,
}

impl std::fmt::Debug for BpeTokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BpeTokenizer")
            .field("name", &self.name)
            .field("vocab", &self.ranks.len())
            .finish()
    }
}

impl BpeTokenizer {
    /// Load a rank file such as `cl100k_base.tiktoken`.
    ///
    /// Missing file, malformed lines, duplicate ranks and vocabularies that
    /// do not cover all 256 single bytes are configuration errors.
    pub fn from_rank_file(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            Error::config(format!("tokenizer vocabulary {}: {e}", path.display()))
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bpe".to_string());
        Self::from_rank_lines(&raw, name)
    }

    pub fn from_rank_lines(raw: &str, name: String) -> Result<Self> {
        let engine = base64::engine::general_purpose::STANDARD;
        let mut ranks = HashMap::new();
        let mut decoder = HashMap::new();
        for (lineno, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let (tok, rank) = match (parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(r), None) => (t, r),
                _ => {
                    return Err(Error::config(format!(
                        "vocabulary line {}: expected 'base64 rank'",
                        lineno + 1
                    )))
                }
            };
            let bytes = engine.decode(tok).map_err(|e| {
                Error::config(format!("vocabulary line {}: bad base64: {e}", lineno + 1))
            })?;
            let rank: u32 = rank.parse().map_err(|e| {
                Error::config(format!("vocabulary line {}: bad rank: {e}", lineno + 1))
            })?;
            if decoder.insert(rank, bytes.clone()).is_some() {
                return Err(Error::config(format!(
                    "vocabulary line {}: duplicate rank {rank}",
                    lineno + 1
                )));
            }
            ranks.insert(bytes, rank);
        }
        for byte in 0u16..=255 {
            if !ranks.contains_key(&vec![byte as u8]) {
                return Err(Error::config(format!(
                    "vocabulary does not cover single byte {byte:#04x}"
                )));
            }
        }
        Ok(BpeTokenizer {
            ranks,
            decoder,
            name,
        })
    }

    /// Apply BPE merges to one pre-tokenization piece. Returns byte ranges
    /// relative to the piece, lowest rank merged first, leftmost on ties.
    fn merge(&self, bytes: &[u8]) -> Vec<(usize, usize)> {
        let mut parts: Vec<(usize, usize)> = (0..bytes.len()).map(|i| (i, i + 1)).collect();
        while parts.len() > 1 {
            let mut best: Option<(usize, u32)> = None;
            for i in 0..parts.len() - 1 {
                let cand = &bytes[parts[i].0..parts[i + 1].1];
                if let Some(&rank) = self.ranks.get(cand) {
                    if best.is_none_or(|(_, r)| rank < r) {
                        best = Some((i, rank));
                    }
                }
            }
            match best {
                Some((i, _)) => {
                    parts[i].1 = parts[i + 1].1;
                    parts.remove(i + 1);
                }
                None => break,
            }
        }
        parts
    }
}

impl Tokenizer for BpeTokenizer {
    fn encode(&self, text: &str) -> TokenSequence {
        // Byte position -> index of the char containing it, floored. A token
        // whose byte range ends mid-char gets a zero-width span; the split
        // char belongs to the following token. Offsets stay a monotone
        // partition of [0, char_len).
        let mut char_at_byte = vec![0u32; text.len() + 1];
        let mut char_count = 0u32;
        for (ci, (b, ch)) in text.char_indices().enumerate() {
            for slot in &mut char_at_byte[b..b + ch.len_utf8()] {
                *slot = ci as u32;
            }
            char_count = ci as u32 + 1;
        }
        char_at_byte[text.len()] = char_count;

        let mut ids = Vec::new();
        let mut offsets = Vec::new();
        for piece in pre_tokenize(text) {
            let piece_bytes = &text.as_bytes()[piece.byte_start..piece.byte_end];
            for (s, e) in self.merge(piece_bytes) {
                let id = self.ranks[&piece_bytes[s..e]];
                ids.push(id);
                offsets.push(CharSpan::new(
                    char_at_byte[piece.byte_start + s] as usize,
                    char_at_byte[piece.byte_start + e] as usize,
                ));
            }
        }
        TokenSequence { ids, offsets }
    }

    fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut bytes = Vec::new();
        for &id in ids {
            let tok = self
                .decoder
                .get(&id)
                .ok_or_else(|| Error::data(format!("decode: unknown token id {id}")))?;
            bytes.extend_from_slice(tok);
        }
        String::from_utf8(bytes)
            .map_err(|e| Error::data(format!("decode: token ids are not valid UTF-8: {e}")))
    }

    fn identifier(&self) -> &str {
        &self.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Piece {
    byte_start: usize,
    byte_end: usize,
}

/// cl100k_base-style pre-tokenizer.
///
/// Alternatives are tried in order at each position, mirroring the reference
/// pattern `'(?:s|t|re|ve|m|ll|d) | [^\r\n L N]? L+ | N{1,3} |
/// ' '? [^\s L N]+ [\r\n]* | \s*[\r\n]+ | \s+(?!\S) | \s+` with L and N the
/// Unicode letter and number classes.
fn pre_tokenize(text: &str) -> Vec<Piece> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let n = chars.len();
    let byte_end = |idx: usize| -> usize {
        if idx < n {
            chars[idx].0
        } else {
            text.len()
        }
    };
    let mut pieces = Vec::new();
    let mut i = 0usize;
    while i < n {
        let start = i;
        let c = chars[i].1;

        // Contraction: '(s|t|m|d) or '(re|ve|ll), case-insensitive.
        if c == '\'' && i + 1 < n {
            let c1 = chars[i + 1].1.to_ascii_lowercase();
            let c2 = if i + 2 < n {
                Some(chars[i + 2].1.to_ascii_lowercase())
            } else {
                None
            };
            let len = match (c1, c2) {
                ('r', Some('e')) | ('v', Some('e')) | ('l', Some('l')) => Some(3),
                ('s', _) | ('t', _) | ('m', _) | ('d', _) => Some(2),
                _ => None,
            };
            if let Some(len) = len {
                i += len;
                pieces.push(Piece {
                    byte_start: chars[start].0,
                    byte_end: byte_end(i),
                });
                continue;
            }
        }

        // Optional non-letter prefix followed by a letter run.
        {
            let mut j = i;
            if !c.is_alphabetic()
                && c != '\r'
                && c != '\n'
                && !c.is_numeric()
                && j + 1 < n
                && chars[j + 1].1.is_alphabetic()
            {
                j += 1;
            }
            if chars[j].1.is_alphabetic() {
                while j < n && chars[j].1.is_alphabetic() {
                    j += 1;
                }
                i = j;
                pieces.push(Piece {
                    byte_start: chars[start].0,
                    byte_end: byte_end(i),
                });
                continue;
            }
        }

        // Up to three digits.
        if c.is_numeric() {
            let mut j = i;
            while j < n && j - i < 3 && chars[j].1.is_numeric() {
                j += 1;
            }
            i = j;
            pieces.push(Piece {
                byte_start: chars[start].0,
                byte_end: byte_end(i),
            });
            continue;
        }

        // Optional space, then a run that is not whitespace/letter/number,
        // then trailing newlines.
        {
            let mut j = i;
            if chars[j].1 == ' ' && j + 1 < n {
                j += 1;
            }
            let run_start = j;
            while j < n {
                let cj = chars[j].1;
                if cj.is_whitespace() || cj.is_alphabetic() || cj.is_numeric() {
                    break;
                }
                j += 1;
            }
            if j > run_start {
                while j < n && (chars[j].1 == '\r' || chars[j].1 == '\n') {
                    j += 1;
                }
                i = j;
                pieces.push(Piece {
                    byte_start: chars[start].0,
                    byte_end: byte_end(i),
                });
                continue;
            }
        }

        if c.is_whitespace() {
            let mut run_end = i;
            while run_end < n && chars[run_end].1.is_whitespace() {
                run_end += 1;
            }
            // Whitespace ending in a newline sequence.
            let last_nl = chars[i..run_end]
                .iter()
                .rposition(|&(_, ch)| ch == '\r' || ch == '\n')
                .map(|off| i + off);
            if let Some(k) = last_nl {
                i = k + 1;
                pieces.push(Piece {
                    byte_start: chars[start].0,
                    byte_end: byte_end(i),
                });
                continue;
            }
            // Whitespace not followed by a non-space: take the whole run.
            // Otherwise leave the final whitespace char to attach to the
            // next piece, when the run is long enough.
            if run_end == n {
                i = run_end;
            } else if run_end - i >= 2 {
                i = run_end - 1;
            } else {
                i = run_end;
            }
            pieces.push(Piece {
                byte_start: chars[start].0,
                byte_end: byte_end(i),
            });
            continue;
        }

        // Unreachable in practice: every char class is handled above.
        i += 1;
        pieces.push(Piece {
            byte_start: chars[start].0,
            byte_end: byte_end(i),
        });
    }
    pieces
}

#[cfg(test)]
pub(crate) fn test_vocab() -> BpeTokenizer {
    // All 256 single bytes plus a few merges, enough to exercise the merge
    // loop end to end.
    let engine = base64::engine::general_purpose::STANDARD;
    let mut lines = Vec::new();
    for b in 0u16..=255 {
        lines.push(format!("{} {}", engine.encode([b as u8]), b));
    }
    for (i, merged) in ["he", "ll", "llo", "hello", " w", "or", "ld", "orld", " world"]
        .iter()
        .enumerate()
    {
        lines.push(format!("{} {}", engine.encode(merged.as_bytes()), 256 + i));
    }
    BpeTokenizer::from_rank_lines(&lines.join("\n"), "test_vocab".into()).unwrap()
}
