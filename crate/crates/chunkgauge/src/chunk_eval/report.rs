//! Report serialization and the resumable grid sweep.
//!
//! One JSON file per configuration, named by its short name, doubles as
//! the completion marker: reports are written atomically (temp file plus
//! rename), so a file that exists is complete and a rerun loads it instead
//! of recomputing. Fresh runs over the same inputs produce byte-identical
//! files because all floats serialize at fixed precision and every map is
//! ordered.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::chunk::{generate_grid, ChunkContext, GridSpec};
use crate::error::{Error, Result};

use super::{evaluate_chunking, ChunkEvalReport, CorpusSet, QuestionRecord};

/// How one grid configuration ended.
#[derive(Debug)]
pub enum GridOutcome {
    /// Evaluated in this run; its report file was written.
    Completed(ChunkEvalReport),
    /// A complete report already existed and was loaded.
    Resumed(ChunkEvalReport),
    /// Evaluation or persistence failed; the run continued without it.
    Failed { short_name: String, error: String },
}

impl GridOutcome {
    pub fn short_name(&self) -> &str {
        match self {
            GridOutcome::Completed(r) | GridOutcome::Resumed(r) => &r.short_name,
            GridOutcome::Failed { short_name, .. } => short_name,
        }
    }

    pub fn report(&self) -> Option<&ChunkEvalReport> {
        match self {
            GridOutcome::Completed(r) | GridOutcome::Resumed(r) => Some(r),
            GridOutcome::Failed { .. } => None,
        }
    }
}

/// The report file for a configuration short name.
pub fn report_path(out_dir: &Path, short_name: &str) -> PathBuf {
    out_dir.join(format!("{short_name}.json"))
}

/// Write a report atomically: the file appears only once fully written.
pub fn write_report(report: &ChunkEvalReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::data(format!("serializing report: {e}")))?;
    let tmp = path.with_extension("json.tmp");
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(json.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .and_then(|_| file.sync_all())
        .map_err(|e| Error::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<ChunkEvalReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::data(format!("bad report {}: {e}", path.display())))
}

/// Evaluate every configuration in `spec`, writing one report per
/// configuration into `out_dir`. Configurations whose report file already
/// exists are loaded, not recomputed, so an interrupted sweep resumes
/// where it stopped. A failing configuration is recorded and the sweep
/// continues; an unreadable existing file is treated as absent and
/// recomputed.
pub fn run_grid(
    corpus_set: &CorpusSet,
    questions: &[QuestionRecord],
    spec: &GridSpec,
    ctx: &ChunkContext,
    k: usize,
    out_dir: &Path,
) -> Result<Vec<GridOutcome>> {
    let configs = generate_grid(spec)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut outcomes = Vec::with_capacity(configs.len());
    for config in &configs {
        let short_name = config.short_name();
        let path = report_path(out_dir, &short_name);
        if path.exists() {
            if let Ok(report) = load_report(&path) {
                outcomes.push(GridOutcome::Resumed(report));
                continue;
            }
        }
        let outcome = evaluate_chunking(corpus_set, questions, config, ctx, k)
            .and_then(|report| write_report(&report, &path).map(|_| report));
        outcomes.push(match outcome {
            Ok(report) => GridOutcome::Completed(report),
            Err(error) => GridOutcome::Failed {
                short_name,
                error: error.to_string(),
            },
        });
    }
    Ok(outcomes)
}
