//! Run configuration: a TOML file of key = value sections resolving
//! tokenizers, embedding providers, paths, the grid, and run defaults.
//!
//! Resolution order for the file itself: the `--config` flag, then the
//! `CHUNKGAUGE_CONFIG` environment variable, then `chunkgauge.toml` in
//! the working directory, then built-in defaults. Relative paths inside
//! the file are taken relative to the file's directory so a run behaves
//! the same from any working directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;

use crate::chunk::GridSpec;
use crate::embed::{
    DeterministicProvider, Embedder, EmbeddingCache, FixedReplyClient, LlmClient, RemoteChatClient,
    RemoteProvider,
};
use crate::error::{Error, Result};
use crate::tokenize::{BpeTokenizer, Tokenizer, WhitespaceTokenizer};

/// Environment variable naming the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "CHUNKGAUGE_CONFIG";

/// File consulted when neither the flag nor the environment names one.
pub const DEFAULT_CONFIG_FILE: &str = "chunkgauge.toml";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    tokenizer: TokenizerConfig,
    #[serde(default)]
    paths: PathsConfig,
    #[serde(default)]
    run: RunDefaults,
    #[serde(default)]
    grid: Option<GridConfig>,
    #[serde(default)]
    provider: BTreeMap<String, ProviderConfig>,
    #[serde(default)]
    llm: Option<LlmConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizerConfig {
    /// "whitespace" or "bpe".
    #[serde(default = "default_tokenizer_kind")]
    pub kind: String,
    /// Rank file for the BPE tokenizer.
    #[serde(default)]
    pub vocab: Option<PathBuf>,
}

fn default_tokenizer_kind() -> String {
    "whitespace".to_string()
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            kind: default_tokenizer_kind(),
            vocab: None,
        }
    }
}

/// Input and output locations. Inputs must exist when a command uses
/// them; outputs are created on demand.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    /// Directory of plain-text corpus files.
    #[serde(default)]
    pub corpora: Option<PathBuf>,
    /// Questions JSONL for grid evaluation.
    #[serde(default)]
    pub questions: Option<PathBuf>,
    /// Parent directory of retrieval task directories.
    #[serde(default)]
    pub tasks: Option<PathBuf>,
    /// Embedding cache root.
    #[serde(default)]
    pub cache: Option<PathBuf>,
    /// Default report output directory.
    #[serde(default)]
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDefaults {
    /// Rank cutoff used when `--k` is absent.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Seed for every seeded analysis when `--seed` is absent.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads and in-flight request bound. 0 means automatic.
    #[serde(default)]
    pub workers: usize,
    /// Provider used when `--provider` is absent.
    #[serde(default = "default_provider")]
    pub provider: String,
}

fn default_k() -> usize {
    10
}

fn default_seed() -> u64 {
    42
}

fn default_provider() -> String {
    "det64".to_string()
}

impl Default for RunDefaults {
    fn default() -> Self {
        RunDefaults {
            k: default_k(),
            seed: default_seed(),
            workers: 0,
            provider: default_provider(),
        }
    }
}

/// Grid sweep overrides. Absent sections fall back to the default grid.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    #[serde(default)]
    fixed: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    recursive: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    kamradt: Option<Vec<usize>>,
    #[serde(default)]
    cluster: Option<bool>,
    #[serde(default)]
    llm: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProviderConfig {
    /// "deterministic" or "remote".
    kind: String,
    #[serde(default)]
    dims: Option<usize>,
    #[serde(default)]
    endpoint: Option<String>,
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    timeout_secs: Option<u64>,
    #[serde(default)]
    max_batch: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LlmConfig {
    /// "fixed" or "remote".
    kind: String,
    #[serde(default)]
    reply: Option<String>,
    #[serde(default)]
    endpoint: Option<String>,
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    timeout_secs: Option<u64>,
}

/// A loaded, path-resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tokenizer: TokenizerConfig,
    pub paths: PathsConfig,
    pub run: RunDefaults,
    grid: Option<GridConfig>,
    providers: BTreeMap<String, ProviderConfig>,
    llm: Option<LlmConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_raw(RawConfig::default(), Path::new("."))
    }
}

impl RunConfig {
    /// Load the configuration the command line asked for; built-in
    /// defaults when nothing names a file. A file named explicitly (flag
    /// or environment) must exist.
    pub fn resolve(flag: Option<&Path>) -> Result<Self> {
        let explicit = flag
            .map(PathBuf::from)
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        match explicit {
            Some(path) => Self::load(&path),
            None => {
                let fallback = Path::new(DEFAULT_CONFIG_FILE);
                if fallback.is_file() {
                    Self::load(fallback)
                } else {
                    Ok(Self::default())
                }
            }
        }
    }

    /// Parse one TOML file. Unknown keys are config errors so typos fail
    /// loudly.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let config = Self::from_raw(raw, base);
        config.validate()?;
        Ok(config)
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Self {
        let rebase = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
        let mut tokenizer = raw.tokenizer;
        tokenizer.vocab = rebase(tokenizer.vocab);
        let paths = PathsConfig {
            corpora: rebase(raw.paths.corpora),
            questions: rebase(raw.paths.questions),
            tasks: rebase(raw.paths.tasks),
            cache: rebase(raw.paths.cache),
            reports: rebase(raw.paths.reports),
        };
        RunConfig {
            tokenizer,
            paths,
            run: raw.run,
            grid: raw.grid,
            providers: raw.provider,
            llm: raw.llm,
        }
    }

    /// Referenced input paths must exist up front; outputs are exempt.
    fn validate(&self) -> Result<()> {
        let mut missing = Vec::new();
        let mut check = |label: &str, path: &Option<PathBuf>| {
            if let Some(p) = path {
                if !p.exists() {
                    missing.push(format!("{label} = {}", p.display()));
                }
            }
        };
        check("tokenizer.vocab", &self.tokenizer.vocab);
        check("paths.corpora", &self.paths.corpora);
        check("paths.questions", &self.paths.questions);
        check("paths.tasks", &self.paths.tasks);
        if !missing.is_empty() {
            return Err(Error::config(format!(
                "missing input paths: {}",
                missing.join(", ")
            )));
        }
        if self.run.k == 0 {
            return Err(Error::config("run.k must be at least 1"));
        }
        Ok(())
    }

    pub fn tokenizer(&self) -> Result<Arc<dyn Tokenizer>> {
        match self.tokenizer.kind.as_str() {
            "whitespace" => Ok(Arc::new(WhitespaceTokenizer::new())),
            "bpe" => {
                let vocab = self.tokenizer.vocab.as_ref().ok_or_else(|| {
                    Error::config("tokenizer.kind = \"bpe\" requires tokenizer.vocab")
                })?;
                Ok(Arc::new(BpeTokenizer::from_rank_file(vocab)?))
            }
            other => Err(Error::config(format!("unknown tokenizer kind {other:?}"))),
        }
    }

    /// Build the embedding pipeline for a provider name. Names of the
    /// form `det<dims>` resolve to the deterministic provider without
    /// needing a config entry; everything else must be declared under
    /// `[provider.<name>]`. The cache attaches when `paths.cache` is set.
    pub fn embedder(&self, name: &str) -> Result<Embedder> {
        let mut embedder = match self.providers.get(name) {
            Some(spec) => self.build_provider(name, spec)?,
            None => match name.strip_prefix("det").and_then(|d| d.parse::<usize>().ok()) {
                Some(dims) if dims > 0 => {
                    Embedder::new(Arc::new(DeterministicProvider::new(dims)))
                }
                _ => {
                    return Err(Error::config(format!(
                        "unknown provider {name:?}; declare [provider.{name}] or use det<dims>"
                    )))
                }
            },
        };
        if let Some(cache) = &self.paths.cache {
            embedder = embedder.with_cache(EmbeddingCache::new(cache));
        }
        if self.run.workers > 0 {
            embedder = embedder
                .with_limiter(crate::embed::RequestLimiter::new(self.run.workers));
        }
        Ok(embedder)
    }

    fn build_provider(&self, name: &str, spec: &ProviderConfig) -> Result<Embedder> {
        match spec.kind.as_str() {
            "deterministic" => {
                let dims = spec.dims.unwrap_or(64);
                if dims == 0 {
                    return Err(Error::config(format!("provider.{name}: dims must be > 0")));
                }
                Ok(Embedder::new(Arc::new(DeterministicProvider::new(dims))))
            }
            "remote" => {
                let endpoint = spec.endpoint.as_deref().ok_or_else(|| {
                    Error::config(format!("provider.{name}: remote providers need endpoint"))
                })?;
                let model = spec.model.as_deref().ok_or_else(|| {
                    Error::config(format!("provider.{name}: remote providers need model"))
                })?;
                let dims = spec.dims.ok_or_else(|| {
                    Error::config(format!("provider.{name}: remote providers need dims"))
                })?;
                let timeout = Duration::from_secs(spec.timeout_secs.unwrap_or(30));
                let provider = RemoteProvider::new(endpoint, model, dims, timeout)?;
                let mut embedder = Embedder::new(Arc::new(provider));
                if let Some(max_batch) = spec.max_batch {
                    embedder = embedder.with_max_batch(max_batch);
                }
                Ok(embedder)
            }
            other => Err(Error::config(format!(
                "provider.{name}: unknown kind {other:?}"
            ))),
        }
    }

    /// The completion client for the LLM chunker, when one is configured.
    pub fn llm_client(&self) -> Result<Option<Box<dyn LlmClient>>> {
        let Some(spec) = &self.llm else {
            return Ok(None);
        };
        match spec.kind.as_str() {
            "fixed" => {
                let reply = spec.reply.clone().unwrap_or_default();
                Ok(Some(Box::new(FixedReplyClient::new(reply))))
            }
            "remote" => {
                let endpoint = spec
                    .endpoint
                    .as_deref()
                    .ok_or_else(|| Error::config("llm: remote clients need endpoint"))?;
                let model = spec
                    .model
                    .as_deref()
                    .ok_or_else(|| Error::config("llm: remote clients need model"))?;
                let timeout = Duration::from_secs(spec.timeout_secs.unwrap_or(60));
                Ok(Some(Box::new(RemoteChatClient::new(endpoint, model, timeout)?)))
            }
            other => Err(Error::config(format!("llm: unknown kind {other:?}"))),
        }
    }

    /// The grid to evaluate: the default 25-configuration sweep unless a
    /// `[grid]` section overrides parts of it.
    pub fn grid_spec(&self) -> GridSpec {
        let mut spec = GridSpec::default();
        if let Some(grid) = &self.grid {
            if let Some(fixed) = &grid.fixed {
                spec.fixed_sweep = fixed.clone();
            }
            if let Some(recursive) = &grid.recursive {
                spec.recursive_sweep = recursive.clone();
            }
            if let Some(kamradt) = &grid.kamradt {
                spec.kamradt_sizes = kamradt.clone();
            }
            if let Some(cluster) = grid.cluster {
                spec.include_cluster = cluster;
            }
            if let Some(llm) = grid.llm {
                spec.include_llm = llm;
            }
        }
        spec
    }
}
