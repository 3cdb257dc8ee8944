//! Embedding providers and the batching pipeline in front of them.
//!
//! The pipeline ([`Embedder`]) owns everything a caller should not have to
//! think about: truncation of over-long inputs, batch splitting up to the
//! provider limit, retries with exponential backoff, a global in-flight
//! request limit, unit-norm enforcement and the on-disk cache. Results are
//! independent of how a call is split into batches.

mod cache;
mod deterministic;
mod remote;

pub use cache::EmbeddingCache;
pub use deterministic::{deterministic_embed, DeterministicProvider};
pub use remote::{RemoteChatClient, RemoteProvider};

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::tokenize::{CharSpan, Tokenizer};

/// Dense embedding vector. Values are finite f32s; vectors handed out by the
/// pipeline are unit-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Self {
        EmbeddingVector { values }
    }

    pub fn dims(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (*v as f64) * (*v as f64))
            .sum::<f64>()
            .sqrt()
    }

    /// Re-normalize in place when the norm deviates from 1 by more than
    /// 1e-6. A zero vector cannot be normalized.
    pub fn enforce_unit_norm(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::integrity("cannot normalize a zero vector"));
        }
        if (norm - 1.0).abs() > 1e-6 {
            for v in &mut self.values {
                *v = (*v as f64 / norm) as f32;
            }
        }
        Ok(())
    }
}

/// Cosine similarity computed in f64. Inputs need not be unit-norm.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    debug_assert_eq!(a.dims(), b.dims());
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        dot += *x as f64 * *y as f64;
        na += *x as f64 * *x as f64;
        nb += *y as f64 * *y as f64;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// A raw embedding backend. Implementations do one network (or compute)
/// round per call; batching, retries and caching live in [`Embedder`].
pub trait EmbeddingProvider: Send + Sync {
    /// Provider kind, e.g. "deterministic" or "remote".
    fn kind(&self) -> &str;

    /// Model name within the provider, used in cache paths and provenance.
    fn model(&self) -> &str;

    fn dims(&self) -> usize;

    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>>;

    /// Identifier recorded in report provenance.
    fn identifier(&self) -> String {
        format!("{}/{}", self.kind(), self.model())
    }
}

/// Text completion backend used by the LLM chunker. The remote
/// implementation shares HTTP plumbing with [`RemoteProvider`].
pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

/// Always replies with the same text. Useful for offline, reproducible runs
/// and as a scripted stub in tests.
pub struct FixedReplyClient {
    pub reply: String,
}

impl FixedReplyClient {
    pub fn new(reply: impl Into<String>) -> Self {
        FixedReplyClient {
            reply: reply.into(),
        }
    }
}

impl LlmClient for FixedReplyClient {
    fn complete(&self, _prompt: &str) -> Result<String> {
        Ok(self.reply.clone())
    }
}

/// Counting semaphore bounding in-flight provider requests process-wide.
pub struct RequestLimiter {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl RequestLimiter {
    pub fn new(max_concurrency: usize) -> Arc<Self> {
        Arc::new(RequestLimiter {
            permits: Mutex::new(max_concurrency.max(1)),
            cv: Condvar::new(),
        })
    }

    fn acquire(self: &Arc<Self>) -> LimiterGuard {
        let mut permits = self.permits.lock().expect("limiter poisoned");
        while *permits == 0 {
            permits = self.cv.wait(permits).expect("limiter poisoned");
        }
        *permits -= 1;
        LimiterGuard {
            limiter: Arc::clone(self),
        }
    }
}

struct LimiterGuard {
    limiter: Arc<RequestLimiter>,
}

impl Drop for LimiterGuard {
    fn drop(&mut self) {
        let mut permits = self.limiter.permits.lock().expect("limiter poisoned");
        *permits += 1;
        self.limiter.cv.notify_one();
    }
}

/// Number of tokens kept when an input exceeds the provider token ceiling.
pub const TRUNCATE_TOKENS: usize = 512;

/// The embedding pipeline. Cheap to clone; clones share the provider, cache
/// and request limiter.
#[derive(Clone)]
pub struct Embedder {
    provider: Arc<dyn EmbeddingProvider>,
    cache: Option<Arc<EmbeddingCache>>,
    tokenizer: Option<Arc<dyn Tokenizer>>,
    token_ceiling: Option<usize>,
    max_batch: usize,
    max_retries: u32,
    backoff_base: Duration,
    limiter: Arc<RequestLimiter>,
}

impl Embedder {
    pub fn new(provider: Arc<dyn EmbeddingProvider>) -> Self {
        Embedder {
            provider,
            cache: None,
            tokenizer: None,
            token_ceiling: None,
            max_batch: 128,
            max_retries: 3,
            backoff_base: Duration::from_secs(1),
            limiter: RequestLimiter::new(4),
        }
    }

    pub fn with_cache(mut self, cache: EmbeddingCache) -> Self {
        self.cache = Some(Arc::new(cache));
        self
    }

    /// Enable truncation: inputs longer than `ceiling` tokens are cut to
    /// their first `min(ceiling, TRUNCATE_TOKENS)` tokens before submission.
    pub fn with_truncation(mut self, tokenizer: Arc<dyn Tokenizer>, ceiling: usize) -> Self {
        self.tokenizer = Some(tokenizer);
        self.token_ceiling = Some(ceiling);
        self
    }

    pub fn with_max_batch(mut self, max_batch: usize) -> Self {
        self.max_batch = max_batch.max(1);
        self
    }

    pub fn with_retry(mut self, max_retries: u32, backoff_base: Duration) -> Self {
        self.max_retries = max_retries;
        self.backoff_base = backoff_base;
        self
    }

    pub fn with_limiter(mut self, limiter: Arc<RequestLimiter>) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn dims(&self) -> usize {
        self.provider.dims()
    }

    pub fn identifier(&self) -> String {
        self.provider.identifier()
    }

    fn truncated<'a>(&self, text: &'a str) -> std::borrow::Cow<'a, str> {
        let (Some(tokenizer), Some(ceiling)) = (&self.tokenizer, self.token_ceiling) else {
            return std::borrow::Cow::Borrowed(text);
        };
        let seq = tokenizer.encode(text);
        if seq.len() <= ceiling {
            return std::borrow::Cow::Borrowed(text);
        }
        let keep = ceiling.min(TRUNCATE_TOKENS);
        let span = CharSpan::new(0, seq.offsets[keep - 1].end);
        std::borrow::Cow::Owned(crate::tokenize::span_slice(text, span).to_string())
    }

    fn call_with_retry(&self, batch: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let mut attempt = 0u32;
        loop {
            let outcome = {
                let _permit = self.limiter.acquire();
                self.provider.embed_raw(batch)
            };
            match outcome {
                Ok(vectors) => return Ok(vectors),
                Err(err @ Error::Provider(_)) if attempt < self.max_retries => {
                    attempt += 1;
                    let backoff = self.backoff_base * 2u32.pow(attempt - 1);
                    let jitter = backoff.mul_f64(rand::random::<f64>() * 0.25);
                    std::thread::sleep(backoff + jitter);
                    let _ = err;
                }
                Err(err) => return Err(err),
            }
        }
    }

    /// Embed `texts`, preserving order. Equivalent to embedding one text at
    /// a time regardless of batch splitting.
    pub fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        for (i, text) in texts.iter().enumerate() {
            if text.trim().is_empty() {
                return Err(Error::data(format!(
                    "embed: text at index {i} is empty after trimming"
                )));
            }
        }
        let prepared: Vec<std::borrow::Cow<'_, str>> =
            texts.iter().map(|t| self.truncated(t)).collect();

        let mut results: Vec<Option<EmbeddingVector>> = vec![None; prepared.len()];
        let mut misses: Vec<usize> = Vec::new();
        if let Some(cache) = &self.cache {
            for (i, text) in prepared.iter().enumerate() {
                match cache.get(self.provider.kind(), self.provider.model(), text) {
                    Some(v) if v.dims() == self.provider.dims() => results[i] = Some(v),
                    _ => misses.push(i),
                }
            }
        } else {
            misses = (0..prepared.len()).collect();
        }

        for batch in misses.chunks(self.max_batch) {
            let batch_texts: Vec<&str> = batch.iter().map(|&i| prepared[i].as_ref()).collect();
            let vectors = self.call_with_retry(&batch_texts)?;
            if vectors.len() != batch.len() {
                return Err(Error::integrity(format!(
                    "provider returned {} vectors for {} inputs",
                    vectors.len(),
                    batch.len()
                )));
            }
            for (&i, mut vector) in batch.iter().zip(vectors) {
                if vector.dims() != self.provider.dims() {
                    return Err(Error::integrity(format!(
                        "provider returned {} dims, configured {}",
                        vector.dims(),
                        self.provider.dims()
                    )));
                }
                vector.enforce_unit_norm()?;
                if let Some(cache) = &self.cache {
                    cache.put(
                        self.provider.kind(),
                        self.provider.model(),
                        prepared[i].as_ref(),
                        &vector,
                    )?;
                }
                results[i] = Some(vector);
            }
        }

        Ok(results.into_iter().map(|v| v.expect("filled")).collect())
    }

    /// Single-text convenience wrapper.
    pub fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        Ok(self.embed_batch(&[text])?.pop().expect("one result"))
    }
}
