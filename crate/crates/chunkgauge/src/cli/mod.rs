//! Command-line surface: argument parsing, config resolution, and the
//! exit-code contract (2 config, 3 data, 4 provider).
//!
//! All randomness is seeded and all floats print with nine significant
//! digits, so with the deterministic provider every command's output is
//! byte-identical across runs. Long runs checkpoint each completed unit
//! atomically; an interrupted grid resumes from the reports already on
//! disk instead of recomputing them.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_bench, cmd_build_task, cmd_chunk, cmd_grid, cmd_stats};
pub use config::{RunConfig, CONFIG_ENV, DEFAULT_CONFIG_FILE};

use crate::error::Result;

/// Chunking strategies and retrieval evaluation for text corpora.
#[derive(Debug, Parser)]
#[command(name = "chunkgauge", version, about)]
pub struct Cli {
    /// Run configuration file (default: $CHUNKGAUGE_CONFIG, then
    /// ./chunkgauge.toml, then built-in defaults).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chunk one document and emit the chunks as JSONL.
    Chunk {
        /// Plain-text document to chunk.
        doc_path: PathBuf,
        /// Strategy short name, e.g. RT100-20, FX512-100, K200, CL, LLM.
        short_name: String,
        /// Embedding provider for the semantic strategies.
        #[arg(long)]
        provider: Option<String>,
        /// Write JSONL here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Evaluate every grid configuration and write reports plus summary.csv.
    Grid {
        /// Embedding provider (default: run.provider from the config).
        #[arg(long)]
        provider: Option<String>,
        /// Retrieval depth per question (default: run.k).
        #[arg(long)]
        k: Option<usize>,
        /// Report directory (default: paths.reports).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Score embedding providers on a retrieval task directory.
    Bench {
        /// Task directory holding queries.jsonl, corpus.jsonl, qrels/.
        task_dir: PathBuf,
        /// Provider to score; repeat for several.
        #[arg(long, required = true)]
        provider: Vec<String>,
        /// Rank cutoff (default: run.k).
        #[arg(long)]
        k: Option<usize>,
        /// Scores CSV to merge into (default: paths.reports/scores.csv).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Assemble a retrieval task from QA and paragraph JSONL files.
    BuildTask {
        /// QA records: {"id"?, "question", "sources": [{"doc_id", "ordinal"}]}.
        qa_path: PathBuf,
        /// Paragraphs: {"doc_id", "title"?, "text"}, ordinals per doc in file order.
        paragraphs_path: PathBuf,
        /// Task directory to write.
        #[arg(long, value_name = "DIR", required = true)]
        out: PathBuf,
    },
    /// Cross-task statistics and PCA/k-means clusters from a scores CSV.
    Stats {
        /// Long-format scores CSV produced by bench.
        scores_csv: PathBuf,
        /// Seed for the clustering (default: run.seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: alongside the CSV).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

/// Dispatch a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let config = RunConfig::resolve(cli.config.as_deref())?;
    match &cli.command {
        Command::Chunk {
            doc_path,
            short_name,
            provider,
            out,
        } => cmd_chunk(&config, doc_path, short_name, provider.as_deref(), out.as_deref()),
        Command::Grid { provider, k, out } => {
            cmd_grid(&config, provider.as_deref(), *k, out.as_deref())
        }
        Command::Bench {
            task_dir,
            provider,
            k,
            out,
        } => cmd_bench(&config, task_dir, provider, *k, out.as_deref()),
        Command::BuildTask {
            qa_path,
            paragraphs_path,
            out,
        } => cmd_build_task(qa_path, paragraphs_path, out),
        Command::Stats {
            scores_csv,
            seed,
            out,
        } => cmd_stats(scores_csv, *seed, out.as_deref(), &config),
    }
}

/// Parse `std::env::args`, run, and translate the outcome into the
/// process exit code. Errors print as one structured JSON line on stderr.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            let line = serde_json::json!({
                "kind": "error",
                "message": err.to_string(),
            });
            eprintln!("{line}");
            err.exit_code()
        }
    }
}
