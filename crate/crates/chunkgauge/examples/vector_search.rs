//! Build a cosine-similarity index, search it, and round-trip it through
//! an on-disk snapshot.
//!
//!     cargo run --example vector_search

use std::sync::Arc;

use chunkgauge::embed::{DeterministicProvider, Embedder};
use chunkgauge::vectorstore::VectorIndex;

fn main() -> chunkgauge::Result<()> {
    let embedder = Embedder::new(Arc::new(DeterministicProvider::new(32)));
    let passages = [
        ("p0", "acid base titration endpoint indicator"),
        ("p1", "chromatography separates mixtures by affinity"),
        ("p2", "spectroscopy measures light absorption"),
        ("p3", "gravimetric analysis weighs a precipitate"),
    ];

    let texts: Vec<&str> = passages.iter().map(|(_, text)| *text).collect();
    let vectors = embedder.embed_batch(&texts)?;
    let mut index = VectorIndex::new(embedder.dims())?;
    for ((id, _), vector) in passages.iter().zip(vectors) {
        index.insert(id.to_string(), vector)?;
    }
    index.freeze();

    let query = embedder.embed("how does titration find the endpoint")?;
    println!("top-3 for the titration query:");
    for (id, score) in index.search(&query, 3)? {
        println!("  {id}  cosine {score:+.6}");
    }

    // Snapshots restore to an identical, already-frozen index.
    let dir = std::env::temp_dir().join("chunkgauge_vector_search_example");
    let path = dir.join("index.cgvix");
    index.save_snapshot(&path)?;
    let restored = VectorIndex::load_snapshot(&path)?;
    assert_eq!(restored.len(), index.len());
    assert_eq!(restored.search(&query, 3)?, index.search(&query, 3)?);
    println!("snapshot round-trip ok: {} entries", restored.len());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
