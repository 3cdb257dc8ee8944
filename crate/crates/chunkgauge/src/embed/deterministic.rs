//! Seeded test embedder: unit-norm Gaussian vectors derived from a stable
//! content hash, bit-identical across runs and platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::embed::{EmbeddingProvider, EmbeddingVector};
use crate::error::Result;

/// Embed `text` into `dims` dimensions deterministically.
///
/// The seed is a SHA-256 hash over the dimension count and the text bytes,
/// so the mapping is stable across processes, platforms and crate versions
/// that keep this function unchanged. Distinct texts get independent
/// pseudo-random directions on the unit sphere.
pub fn deterministic_embed(text: &str, dims: usize) -> EmbeddingVector {
    let mut hasher = Sha256::new();
    hasher.update((dims as u64).to_le_bytes());
    hasher.update(text.as_bytes());
    let seed: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha20Rng::from_seed(seed);
    let mut values: Vec<f64> = (0..dims)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        // Practically unreachable; keeps the unit-norm contract total.
        values[0] = 1.0;
        return EmbeddingVector::new(
            values
                .iter()
                .map(|v| *v as f32)
                .collect(),
        );
    }
    EmbeddingVector::new(values.iter().map(|v| (*v / norm) as f32).collect())
}

/// [`EmbeddingProvider`] backed by [`deterministic_embed`]. No IO, no
/// failure modes; the workhorse for tests and offline reproducible runs.
pub struct DeterministicProvider {
    dims: usize,
    model: String,
}

impl DeterministicProvider {
    pub fn new(dims: usize) -> Self {
        DeterministicProvider {
            dims,
            model: format!("det{dims}"),
        }
    }
}

impl EmbeddingProvider for DeterministicProvider {
    fn kind(&self) -> &str {
        "deterministic"
    }

    fn model(&self) -> &str {
        &self.model
    }

    fn dims(&self) -> usize {
        self.dims
    }

    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        Ok(texts
            .iter()
            .map(|t| deterministic_embed(t, self.dims))
            .collect())
    }
}
