//! Content-addressed on-disk embedding cache.
//!
//! Layout: `<root>/<provider>/<model>/<hh>/<hash>` where `hash` is the hex
//! SHA-256 of the (post-truncation) input text and `hh` its first two hex
//! chars. Files carry a 16-byte header (8-byte magic, u32 dims, u32
//! reserved) followed by the vector as little-endian f32s. A corrupt entry
//! is treated as a miss and evicted.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::embed::EmbeddingVector;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CGEMB1\0\0";

pub struct EmbeddingCache {
    root: PathBuf,
}

impl EmbeddingCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        EmbeddingCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry_path(&self, provider: &str, model: &str, text: &str) -> PathBuf {
        let hash = hex(&Sha256::digest(text.as_bytes()));
        self.root
            .join(sanitize(provider))
            .join(sanitize(model))
            .join(&hash[..2])
            .join(&hash)
    }

    /// Look up a vector. Returns None on miss; silently evicts corrupt
    /// entries.
    pub fn get(&self, provider: &str, model: &str, text: &str) -> Option<EmbeddingVector> {
        let path = self.entry_path(provider, model, text);
        let bytes = std::fs::read(&path).ok()?;
        match decode(&bytes) {
            Some(v) => Some(v),
            None => {
                let _ = std::fs::remove_file(&path);
                None
            }
        }
    }

    pub fn put(
        &self,
        provider: &str,
        model: &str,
        text: &str,
        vector: &EmbeddingVector,
    ) -> Result<()> {
        let path = self.entry_path(provider, model, text);
        let dir = path.parent().expect("entry path has a parent");
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut bytes = Vec::with_capacity(16 + vector.dims() * 4);
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&(vector.dims() as u32).to_le_bytes());
        bytes.extend_from_slice(&0u32.to_le_bytes());
        for v in &vector.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        // Write-then-rename so readers never observe a partial entry.
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, &bytes).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

fn decode(bytes: &[u8]) -> Option<EmbeddingVector> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return None;
    }
    let dims = u32::from_le_bytes(bytes[8..12].try_into().ok()?) as usize;
    let payload = &bytes[16..];
    if payload.len() != dims * 4 {
        return None;
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Some(EmbeddingVector::new(values))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Keep path components safe regardless of provider/model naming.
fn sanitize(part: &str) -> String {
    let cleaned: String = part
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if cleaned.is_empty() {
        "_".to_string()
    } else {
        cleaned
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::deterministic_embed;

    #[test]
    fn put_then_get_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::new(dir.path());
        let v = deterministic_embed("cached text", 32);
        cache.put("remote", "model-x", "cached text", &v).unwrap();
        let roundtrip = cache.get("remote", "model-x", "cached text").unwrap();
        assert_eq!(roundtrip, v);
    }

    #[test]
    fn distinct_keys_do_not_collide() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::new(dir.path());
        let v1 = deterministic_embed("one", 8);
        let v2 = deterministic_embed("two", 8);
        cache.put("p", "m", "one", &v1).unwrap();
        cache.put("p", "m", "two", &v2).unwrap();
        cache.put("p", "other", "one", &v2).unwrap();
        assert_eq!(cache.get("p", "m", "one").unwrap(), v1);
        assert_eq!(cache.get("p", "m", "two").unwrap(), v2);
        assert_eq!(cache.get("p", "other", "one").unwrap(), v2);
        assert!(cache.get("p", "m", "three").is_none());
    }

    #[test]
    fn corrupt_entry_is_missed_and_evicted() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::new(dir.path());
        let v = deterministic_embed("soon corrupt", 8);
        cache.put("p", "m", "soon corrupt", &v).unwrap();
        let path = cache.entry_path("p", "m", "soon corrupt");
        std::fs::write(&path, b"garbage").unwrap();
        assert!(cache.get("p", "m", "soon corrupt").is_none());
        assert!(!path.exists(), "corrupt entry should be evicted");
    }

    #[test]
    fn truncated_payload_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::new(dir.path());
        let v = deterministic_embed("short file", 8);
        cache.put("p", "m", "short file", &v).unwrap();
        let path = cache.entry_path("p", "m", "short file");
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..20]).unwrap();
        assert!(cache.get("p", "m", "short file").is_none());
    }

    #[test]
    fn ten_thousand_entries_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::new(dir.path());
        let texts: Vec<String> = (0..10_000).map(|i| format!("entry {i}")).collect();
        for t in &texts {
            cache.put("p", "m", t, &deterministic_embed(t, 4)).unwrap();
        }
        for t in &texts {
            assert_eq!(
                cache.get("p", "m", t).unwrap(),
                deterministic_embed(t, 4),
                "entry {t}"
            );
        }
    }
}
