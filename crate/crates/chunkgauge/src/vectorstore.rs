//! Exact top-k cosine search over unit-normalized chunk embeddings.
//!
//! No approximate structures: every query scores every entry, so results
//! are exact by construction and small enough corpora (tens of thousands of
//! chunks) stay fast. Scores multiply in 32-bit and reduce in 64-bit, and
//! ties break by ascending chunk id, so independent ports can reproduce
//! rankings to within float rounding.
//!
//! The index is single-writer while building. After [`VectorIndex::freeze`]
//! it is immutable, and concurrent read-only searches are safe without any
//! locking.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::embed::EmbeddingVector;
use crate::error::{Error, Result};

const SNAPSHOT_MAGIC: &[u8; 8] = b"CGVIX1\0\0";
const SNAPSHOT_VERSION: u32 = 1;

/// An exact cosine-similarity index with insertion-ordered entries.
pub struct VectorIndex {
    dims: usize,
    ids: Vec<String>,
    /// Row-major `len x dims` matrix of unit vectors.
    matrix: Vec<f32>,
    id_set: HashSet<String>,
    frozen: bool,
}

impl std::fmt::Debug for VectorIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorIndex")
            .field("dims", &self.dims)
            .field("len", &self.ids.len())
            .field("frozen", &self.frozen)
            .finish()
    }
}

impl VectorIndex {
    pub fn new(dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::config("vector index dims must be >= 1"));
        }
        Ok(VectorIndex {
            dims,
            ids: Vec::new(),
            matrix: Vec::new(),
            id_set: HashSet::new(),
            frozen: false,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Add one entry. The vector is re-normalized when its norm deviates
    /// from 1 by more than 1e-6.
    pub fn insert(&mut self, chunk_id: impl Into<String>, mut vector: EmbeddingVector) -> Result<()> {
        if self.frozen {
            return Err(Error::integrity("cannot insert into a frozen index"));
        }
        if vector.dims() != self.dims {
            return Err(Error::integrity(format!(
                "vector has {} dims, index expects {}",
                vector.dims(),
                self.dims
            )));
        }
        let chunk_id = chunk_id.into();
        if !self.id_set.insert(chunk_id.clone()) {
            return Err(Error::integrity(format!("duplicate chunk id {chunk_id:?}")));
        }
        vector.enforce_unit_norm()?;
        self.ids.push(chunk_id);
        self.matrix.extend_from_slice(&vector.values);
        Ok(())
    }

    /// End the build phase. Idempotent; after this the index is read-only.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Exact top-k by cosine similarity. The query is normalized
    /// internally, so any positive scaling of it returns the same ranking.
    /// Scores are non-increasing; ties order by ascending chunk id.
    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<(String, f64)>> {
        if !self.frozen {
            return Err(Error::integrity("search requires a frozen index"));
        }
        if k == 0 {
            return Err(Error::config("search k must be >= 1"));
        }
        if query.dims() != self.dims {
            return Err(Error::integrity(format!(
                "query has {} dims, index expects {}",
                query.dims(),
                self.dims
            )));
        }
        let q = normalized_query(query)?;
        let mut scored: Vec<(usize, f64)> = self
            .matrix
            .chunks_exact(self.dims)
            .enumerate()
            .map(|(row, values)| (row, dot(values, &q)))
            .collect();
        scored.sort_unstable_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.ids[a.0].cmp(&self.ids[b.0]))
        });
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(row, score)| (self.ids[row].clone(), score))
            .collect())
    }

    /// One [`VectorIndex::search`] per query, in order. Queries run in
    /// parallel; results are identical to sequential searches.
    pub fn batch_search(
        &self,
        queries: &[EmbeddingVector],
        k: usize,
    ) -> Result<Vec<Vec<(String, f64)>>> {
        queries.par_iter().map(|q| self.search(q, k)).collect()
    }

    /// Write the index to disk: a fixed header, the float32 little-endian
    /// matrix, then a length-prefixed id table.
    pub fn save_snapshot(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::with_capacity(32 + self.matrix.len() * 4);
        buf.extend_from_slice(SNAPSHOT_MAGIC);
        buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.dims as u32).to_le_bytes());
        buf.extend_from_slice(&(self.ids.len() as u64).to_le_bytes());
        for v in &self.matrix {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for id in &self.ids {
            buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
            buf.extend_from_slice(id.as_bytes());
        }
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let tmp = path.with_extension("tmp");
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(&buf).map_err(|e| Error::io(&tmp, e))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
        drop(file);
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Load a snapshot written by [`VectorIndex::save_snapshot`]. The
    /// loaded index is frozen. Reads are explicit little-endian, so the
    /// format is byte-order independent.
    pub fn load_snapshot(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let corrupt = |what: &str| {
            Error::data(format!("snapshot {}: {what}", path.display()))
        };
        if bytes.len() < 24 || &bytes[..8] != SNAPSHOT_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != SNAPSHOT_VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let dims = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        if dims == 0 {
            return Err(corrupt("zero dims"));
        }
        let matrix_bytes = count
            .checked_mul(dims)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| corrupt("size overflow"))?;
        let mut pos = 24usize;
        if bytes.len() < pos + matrix_bytes {
            return Err(corrupt("truncated matrix"));
        }
        let mut matrix = Vec::with_capacity(count * dims);
        for chunk in bytes[pos..pos + matrix_bytes].chunks_exact(4) {
            matrix.push(f32::from_le_bytes(chunk.try_into().unwrap()));
        }
        pos += matrix_bytes;
        let mut ids = Vec::with_capacity(count);
        let mut id_set = HashSet::with_capacity(count);
        for _ in 0..count {
            if bytes.len() < pos + 4 {
                return Err(corrupt("truncated id table"));
            }
            let len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
            pos += 4;
            if bytes.len() < pos + len {
                return Err(corrupt("truncated id entry"));
            }
            let id = std::str::from_utf8(&bytes[pos..pos + len])
                .map_err(|_| corrupt("id is not utf-8"))?
                .to_string();
            pos += len;
            if !id_set.insert(id.clone()) {
                return Err(corrupt("duplicate id"));
            }
            ids.push(id);
        }
        if pos != bytes.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(VectorIndex {
            dims,
            ids,
            matrix,
            id_set,
            frozen: true,
        })
    }
}

/// Products in f32, reduction in f64.
fn dot(row: &[f32], q: &[f32]) -> f64 {
    row.iter().zip(q).map(|(a, b)| (a * b) as f64).sum()
}

fn normalized_query(query: &EmbeddingVector) -> Result<Vec<f32>> {
    let norm = query.norm();
    if norm == 0.0 {
        return Err(Error::integrity("query vector has zero norm"));
    }
    Ok(query.values.iter().map(|v| (*v as f64 / norm) as f32).collect())
}
