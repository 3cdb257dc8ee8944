//! Tokenization primitives shared by every chunking strategy.
//!
//! All character indices in this crate are Unicode scalar positions, never
//! byte offsets. Question datasets annotate excerpts in character space, so
//! token offsets have to live in the same space for span set arithmetic to
//! be meaningful.

mod bpe;

pub use bpe::BpeTokenizer;

#[cfg(test)]
pub(crate) use bpe::test_vocab;

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Half-open character span `[start, end)` in Unicode scalar positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        CharSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// True when the two half-open spans share at least one position.
    pub fn intersects(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Char-index to byte-index mapping for one document.
///
/// Built once per document so span slicing is O(1) afterwards.
pub struct CharMap {
    byte_of_char: Vec<usize>,
}

impl CharMap {
    pub fn new(text: &str) -> Self {
        let mut byte_of_char = Vec::with_capacity(text.len() + 1);
        for (b, _) in text.char_indices() {
            byte_of_char.push(b);
        }
        byte_of_char.push(text.len());
        CharMap { byte_of_char }
    }

    /// Number of chars in the mapped document.
    pub fn char_len(&self) -> usize {
        self.byte_of_char.len() - 1
    }

    /// Slice `text` (the document this map was built from) by a char span.
    /// Spans are clamped to the document bounds.
    pub fn slice<'a>(&self, text: &'a str, span: CharSpan) -> &'a str {
        let last = self.char_len();
        let s = span.start.min(last);
        let e = span.end.min(last).max(s);
        &text[self.byte_of_char[s]..self.byte_of_char[e]]
    }

    /// Byte offset where char `char_idx` starts; `char_len()` maps to the
    /// byte length.
    pub fn byte_of(&self, char_idx: usize) -> usize {
        self.byte_of_char[char_idx.min(self.char_len())]
    }

    /// Char index for a byte offset that sits on a char boundary.
    pub fn char_of_byte(&self, byte: usize) -> usize {
        match self.byte_of_char.binary_search(&byte) {
            Ok(i) => i,
            // Mid-char byte offsets floor to the containing char.
            Err(i) => i - 1,
        }
    }
}

/// Slice a string by char span without a prebuilt [`CharMap`]. O(len) scan;
/// use [`CharMap`] in loops.
pub fn span_slice(text: &str, span: CharSpan) -> &str {
    let map = CharMap::new(text);
    map.slice(text, span)
}

/// Output of [`Tokenizer::encode`]: ids plus one char span per token.
///
/// Offsets are non-overlapping and monotonically increasing, and for the
/// byte-level BPE tokenizer they partition `[0, char_len)` (a token whose
/// byte range ends mid-character gets a zero-width span and the character
/// belongs to the following token). The whitespace test tokenizer leaves
/// gaps at whitespace runs by design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub offsets: Vec<CharSpan>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// A tokenizer that can report character offsets for every token.
///
/// Implementations are immutable after construction and safe to share across
/// threads. Repeated `encode` of identical text yields identical sequences.
pub trait Tokenizer: Send + Sync {
    /// Tokenize `text`. Infallible: construction validates everything that
    /// could fail, and every implementation covers arbitrary input text.
    fn encode(&self, text: &str) -> TokenSequence;

    /// Reassemble text from ids produced by this tokenizer.
    fn decode(&self, ids: &[u32]) -> Result<String>;

    /// Token count without materializing offsets.
    fn count_tokens(&self, text: &str) -> usize {
        self.encode(text).len()
    }

    /// Stable identifier recorded in report provenance.
    fn identifier(&self) -> &str;
}

/// Whitespace test tokenizer: tokens are maximal non-whitespace runs.
///
/// Exists so chunker tests are hand-checkable ("a b c" has exactly 3 tokens
/// at offsets [0,1), [2,3), [4,5)). Decode round-trips exactly: each id
/// interns the token text together with the whitespace run preceding it, and
/// the final token of a text absorbs trailing whitespace. The one degenerate
/// case is a non-empty all-whitespace text, which encodes to zero tokens and
/// decodes to "".
pub struct WhitespaceTokenizer {
    interner: Mutex<Interner>,
}

#[derive(Default)]
struct Interner {
    by_text: HashMap<String, u32>,
    by_id: Vec<String>,
}

impl Interner {
    fn intern(&mut self, text: &str) -> u32 {
        if let Some(&id) = self.by_text.get(text) {
            return id;
        }
        let id = self.by_id.len() as u32;
        self.by_id.push(text.to_string());
        self.by_text.insert(text.to_string(), id);
        id
    }
}

impl Default for WhitespaceTokenizer {
    fn default() -> Self {
        Self::new()
    }
}

impl WhitespaceTokenizer {
    pub fn new() -> Self {
        WhitespaceTokenizer {
            interner: Mutex::new(Interner::default()),
        }
    }

    /// Word spans (char space) and their byte ranges, in order.
    fn words(text: &str) -> Vec<WordPos> {
        let mut words = Vec::new();
        let mut current: Option<WordPos> = None;
        for (char_idx, (byte_idx, ch)) in text.char_indices().enumerate() {
            if ch.is_whitespace() {
                if let Some(w) = current.take() {
                    words.push(w);
                }
            } else {
                match current.as_mut() {
                    Some(w) => {
                        w.char_end = char_idx + 1;
                        w.byte_end = byte_idx + ch.len_utf8();
                    }
                    None => {
                        current = Some(WordPos {
                            char_start: char_idx,
                            char_end: char_idx + 1,
                            byte_end: byte_idx + ch.len_utf8(),
                        });
                    }
                }
            }
        }
        if let Some(w) = current.take() {
            words.push(w);
        }
        words
    }
}

#[derive(Clone, Copy)]
struct WordPos {
    char_start: usize,
    char_end: usize,
    byte_end: usize,
}

impl Tokenizer for WhitespaceTokenizer {
    fn encode(&self, text: &str) -> TokenSequence {
        let words = Self::words(text);
        let mut ids = Vec::with_capacity(words.len());
        let mut offsets = Vec::with_capacity(words.len());
        let mut interner = self.interner.lock().expect("interner poisoned");
        let mut prev_byte_end = 0usize;
        for (i, w) in words.iter().enumerate() {
            // Interned text carries the preceding whitespace; the last token
            // also carries trailing whitespace so decode is exact.
            let seg_end = if i + 1 == words.len() {
                text.len()
            } else {
                w.byte_end
            };
            let segment = &text[prev_byte_end..seg_end];
            prev_byte_end = w.byte_end;
            ids.push(interner.intern(segment));
            offsets.push(CharSpan::new(w.char_start, w.char_end));
        }
        TokenSequence { ids, offsets }
    }

    fn decode(&self, ids: &[u32]) -> Result<String> {
        let interner = self.interner.lock().expect("interner poisoned");
        let mut out = String::new();
        for &id in ids {
            let text = interner
                .by_id
                .get(id as usize)
                .ok_or_else(|| Error::data(format!("decode: unknown token id {id}")))?;
            out.push_str(text);
        }
        Ok(out)
    }

    fn count_tokens(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }

    fn identifier(&self) -> &str {
        "whitespace"
    }
}
