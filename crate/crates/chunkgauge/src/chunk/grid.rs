//! The evaluation grid of chunker configurations.

use std::collections::HashSet;

use crate::chunk::ChunkerConfig;
use crate::error::{Error, Result};

/// Which configurations a grid run covers. The default spec is the standard
/// 25-configuration benchmark grid: a size sweep and an overlap sweep for
/// both token strategies, four Kamradt caps, and the two parameterless
/// semantic strategies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    /// (chunk_size, overlap) pairs for the Fixed strategy.
    pub fixed_sweep: Vec<(usize, usize)>,
    /// (chunk_size, overlap) pairs for the Recursive strategy.
    pub recursive_sweep: Vec<(usize, usize)>,
    /// max_tokens values for Kamradt-Modified.
    pub kamradt_sizes: Vec<usize>,
    pub include_cluster: bool,
    pub include_llm: bool,
}

impl GridSpec {
    /// A spec that generates nothing.
    pub fn empty() -> Self {
        GridSpec {
            fixed_sweep: Vec::new(),
            recursive_sweep: Vec::new(),
            kamradt_sizes: Vec::new(),
            include_cluster: false,
            include_llm: false,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            fixed_sweep: vec![
                (64, 12),
                (100, 0),
                (100, 20),
                (100, 40),
                (100, 60),
                (100, 80),
                (128, 25),
                (256, 64),
                (512, 100),
            ],
            recursive_sweep: vec![
                (64, 16),
                (100, 0),
                (100, 20),
                (100, 25),
                (100, 40),
                (100, 60),
                (100, 80),
                (128, 25),
                (256, 64),
                (512, 100),
            ],
            kamradt_sizes: vec![50, 100, 200, 400],
            include_cluster: true,
            include_llm: true,
        }
    }
}

/// Expand a [`GridSpec`] into validated configurations, in spec order:
/// fixed sweep, recursive sweep, Kamradt sizes, CL, LLM.
pub fn generate_grid(spec: &GridSpec) -> Result<Vec<ChunkerConfig>> {
    let mut configs = Vec::new();
    for &(size, overlap) in &spec.fixed_sweep {
        configs.push(ChunkerConfig::fixed(size, overlap)?);
    }
    for &(size, overlap) in &spec.recursive_sweep {
        configs.push(ChunkerConfig::recursive(size, overlap)?);
    }
    for &size in &spec.kamradt_sizes {
        configs.push(ChunkerConfig::kamradt(size)?);
    }
    if spec.include_cluster {
        configs.push(ChunkerConfig::cluster());
    }
    if spec.include_llm {
        configs.push(ChunkerConfig::llm());
    }

    let mut seen = HashSet::new();
    for config in &configs {
        let name = config.short_name();
        if !seen.insert(name.clone()) {
            return Err(Error::config(format!(
                "grid spec lists configuration {name} more than once"
            )));
        }
    }
    Ok(configs)
}
