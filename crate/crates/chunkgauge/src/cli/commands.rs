//! The five subcommand implementations. Each returns `Ok(())` on success
//! and maps failures onto the process exit-code contract through
//! [`crate::error::Error::exit_code`]. All float output goes through the
//! nine-significant-digit formatter, so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::bench::{
    self, cross_task_stats, kmeans, load_score_cells, pca_project, record_scores,
    save_score_cells, ModelPerformanceMatrix, QaRecord,
};
use crate::chunk::{chunk_document, ChunkContext, ChunkerConfig};
use crate::chunk_eval::{load_questions, run_grid, CorpusSet, GridOutcome};
use crate::cli::config::RunConfig;
use crate::error::{Error, Result, Warning};
use crate::sig::format_sig;

/// Clusters requested from k-means, capped at the number of models.
const CLUSTER_COUNT: usize = 4;

/// Print warnings as one JSON object per stderr line.
pub fn emit_warnings(warnings: &[Warning]) {
    let mut stderr = std::io::stderr().lock();
    for warning in warnings {
        let line = serde_json::to_string(warning).expect("warning serializes");
        let _ = writeln!(stderr, "{line}");
    }
}

fn write_atomic(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Emit `body` to `out` when given, otherwise to stdout.
fn write_output(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn doc_id_of(path: &Path) -> String {
    path.file_stem()
        .map(|stem| stem.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

#[derive(serde::Serialize)]
struct ChunkRow<'a> {
    doc_id: &'a str,
    chunk_id: &'a str,
    start: usize,
    end: usize,
    token_count: usize,
    text: &'a str,
}

/// Chunk one document with the named configuration and emit one JSON
/// object per chunk.
pub fn cmd_chunk(
    config: &RunConfig,
    doc_path: &Path,
    short_name: &str,
    provider: Option<&str>,
    out: Option<&Path>,
) -> Result<()> {
    let chunker = ChunkerConfig::parse_short_name(short_name)?;
    let text = fs::read_to_string(doc_path).map_err(|e| Error::io(doc_path, e))?;
    let tokenizer = config.tokenizer()?;
    let embedder = config.embedder(provider.unwrap_or(&config.run.provider))?;
    let llm = config.llm_client()?;
    let mut ctx = ChunkContext::new(tokenizer.as_ref()).with_embedder(&embedder);
    if let Some(client) = llm.as_deref() {
        ctx = ctx.with_llm(client);
    }

    let doc_id = doc_id_of(doc_path);
    let output = chunk_document(&doc_id, &text, &chunker, &ctx)?;
    emit_warnings(&output.warnings);

    let mut body = String::new();
    for chunk in &output.chunks {
        let row = ChunkRow {
            doc_id: &chunk.doc_id,
            chunk_id: &chunk.chunk_id,
            start: chunk.span.start,
            end: chunk.span.end,
            token_count: chunk.token_count,
            text: &chunk.text,
        };
        writeln!(body, "{}", serde_json::to_string(&row).expect("row serializes"))
            .expect("string write");
    }
    write_output(out, &body)
}

/// Aggregate metrics reported per configuration in `summary.csv`.
const SUMMARY_METRICS: [&str; 6] = ["iou", "precision", "recall", "f1", "f2", "precision_omega"];

/// Evaluate every grid configuration over the configured corpora and
/// questions, writing one report per configuration plus `summary.csv`.
/// Completed configurations checkpoint atomically, so an interrupted run
/// resumes where it stopped and a finished directory is never rewritten.
pub fn cmd_grid(
    config: &RunConfig,
    provider: Option<&str>,
    k: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let corpora_dir = config
        .paths
        .corpora
        .as_deref()
        .ok_or_else(|| Error::config("grid needs paths.corpora in the config"))?;
    let questions_path = config
        .paths
        .questions
        .as_deref()
        .ok_or_else(|| Error::config("grid needs paths.questions in the config"))?;
    let out_dir = out
        .or(config.paths.reports.as_deref())
        .ok_or_else(|| Error::config("grid needs --out or paths.reports"))?;

    let mut corpus_set = CorpusSet::new();
    corpus_set.load_dir("corpus", corpora_dir)?;
    let questions = load_questions(questions_path)?;
    let tokenizer = config.tokenizer()?;
    let embedder = config.embedder(provider.unwrap_or(&config.run.provider))?;
    let llm = config.llm_client()?;
    let mut ctx = ChunkContext::new(tokenizer.as_ref()).with_embedder(&embedder);
    if let Some(client) = llm.as_deref() {
        ctx = ctx.with_llm(client);
    }

    let spec = config.grid_spec();
    let k = k.unwrap_or(config.run.k);
    let outcomes = run_grid(&corpus_set, &questions, &spec, &ctx, k, out_dir)?;

    let mut summary = String::from("config,metric,mean,std\n");
    let mut evaluated = 0usize;
    let mut failed = 0usize;
    for outcome in &outcomes {
        match outcome {
            GridOutcome::Completed(report) | GridOutcome::Resumed(report) => {
                evaluated += 1;
                let aggregates = [
                    ("iou", &report.global.iou),
                    ("precision", &report.global.precision),
                    ("recall", &report.global.recall),
                    ("f1", &report.global.f1),
                    ("f2", &report.global.f2),
                    ("precision_omega", &report.global.precision_omega),
                ];
                debug_assert_eq!(aggregates.len(), SUMMARY_METRICS.len());
                for (metric, aggregate) in aggregates {
                    writeln!(
                        summary,
                        "{},{metric},{},{}",
                        report.short_name,
                        format_sig(aggregate.mean),
                        format_sig(aggregate.std),
                    )
                    .expect("string write");
                }
            }
            GridOutcome::Failed { short_name, error } => {
                failed += 1;
                emit_warnings(&[Warning::new(
                    "config_failed",
                    format!("{short_name}: {error}"),
                )]);
            }
        }
    }
    write_atomic(&out_dir.join("summary.csv"), &summary)?;
    println!(
        "grid: {evaluated} configurations evaluated, {failed} failed; reports in {}",
        out_dir.display()
    );
    Ok(())
}

/// Score one or more providers on a retrieval task, merging the rows into
/// a shared scores CSV. Re-scoring a provider overwrites its old rows, so
/// reruns leave the file byte-identical.
pub fn cmd_bench(
    config: &RunConfig,
    task_dir: &Path,
    providers: &[String],
    k: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let out_path = match out {
        Some(path) => path.to_path_buf(),
        None => config
            .paths
            .reports
            .as_deref()
            .map(|dir| dir.join("scores.csv"))
            .ok_or_else(|| Error::config("bench needs --out or paths.reports"))?,
    };
    let task_name = doc_id_of(task_dir);
    let (task, warnings) = bench::load_task(task_dir)?;
    emit_warnings(&warnings);

    let k = k.unwrap_or(config.run.k);
    let mut cells = load_score_cells(&out_path)?;
    for provider in providers {
        let embedder = config.embedder(provider)?;
        let model = embedder.identifier();
        let (metrics, eval_warnings) = bench::evaluate_model(&task, &embedder, k)?;
        emit_warnings(&eval_warnings);
        record_scores(&mut cells, &model, &task_name, &metrics);
        println!(
            "bench: {model} on {task_name}: main_score {}",
            format_sig(metrics.main_score)
        );
    }
    save_score_cells(&out_path, &cells)?;
    println!("bench: scores in {}", out_path.display());
    Ok(())
}

fn load_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(line).map_err(|e| {
            Error::data(format!("{}:{}: bad record: {e}", path.display(), idx + 1))
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Assemble a retrieval task from QA records and paragraphs, write its
/// three JSONL files, and print the resulting counts.
pub fn cmd_build_task(qa_path: &Path, paragraphs_path: &Path, out_dir: &Path) -> Result<()> {
    let qa_records: Vec<QaRecord> = load_jsonl(qa_path)?;
    let paragraphs: Vec<bench::ParagraphRecord> = load_jsonl(paragraphs_path)?;
    if qa_records.is_empty() {
        return Err(Error::data(format!(
            "{}: no QA records",
            qa_path.display()
        )));
    }
    if paragraphs.is_empty() {
        return Err(Error::data(format!(
            "{}: no paragraphs",
            paragraphs_path.display()
        )));
    }
    let (task, warnings) = bench::build_task(&qa_records, &paragraphs)?;
    emit_warnings(&warnings);
    bench::save_task(&task, out_dir)?;
    let (queries, corpus, qrels) = task.counts();
    println!("build-task: queries={queries} corpus={corpus} qrels={qrels} -> {}", out_dir.display());
    Ok(())
}

/// Cross-task spread statistics plus a PCA and k-means cluster listing
/// for every model in a scores CSV. Writes `cross_task.csv` and
/// `clusters.csv` next to the input (or under `--out`) and prints the
/// cross-task table.
pub fn cmd_stats(scores_csv: &Path, seed: Option<u64>, out: Option<&Path>, config: &RunConfig) -> Result<()> {
    if !scores_csv.is_file() {
        return Err(Error::data(format!(
            "score matrix {} does not exist",
            scores_csv.display()
        )));
    }
    let out_dir: PathBuf = match out {
        Some(dir) => dir.to_path_buf(),
        None => scores_csv.parent().unwrap_or_else(|| Path::new(".")).to_path_buf(),
    };
    let cells = load_score_cells(scores_csv)?;
    let matrix = ModelPerformanceMatrix::from_cells(&cells)?;

    let mut cross = String::from("task,median,iqr,best_worst_delta\n");
    for (task, stats) in cross_task_stats(&matrix, "main_score")? {
        writeln!(
            cross,
            "{task},{},{},{}",
            format_sig(stats.median),
            format_sig(stats.iqr),
            format_sig(stats.best_worst_delta),
        )
        .expect("string write");
    }
    write_atomic(&out_dir.join("cross_task.csv"), &cross)?;
    print!("{cross}");

    let seed = seed.unwrap_or(config.run.seed);
    let clusters = cluster_listing(&matrix, seed)?;
    write_atomic(&out_dir.join("clusters.csv"), &clusters)?;
    println!("stats: analysis in {}", out_dir.display());
    Ok(())
}

/// Project models into PCA space and cluster them there, as the score
/// figures do. Falls back gracefully when the matrix is too small for a
/// two-dimensional projection.
fn cluster_listing(matrix: &ModelPerformanceMatrix, seed: u64) -> Result<String> {
    let n = matrix.models.len();
    let dims = matrix.columns.len();
    let n_components = 2.min(n.saturating_sub(1)).min(dims);
    let projections = if n_components >= 1 {
        Some(pca_project(&matrix.values, n_components)?)
    } else {
        None
    };
    let points: &[Vec<f64>] = match &projections {
        Some(pca) => &pca.projections,
        None => &matrix.values,
    };
    let clustering = kmeans(points, CLUSTER_COUNT.min(n), seed)?;

    let mut body = String::from("model,cluster");
    for i in 0..n_components {
        write!(body, ",pc{}", i + 1).expect("string write");
    }
    body.push('\n');
    for (i, model) in matrix.models.iter().enumerate() {
        write!(body, "{model},{}", clustering.labels[i]).expect("string write");
        if let Some(pca) = &projections {
            for value in &pca.projections[i] {
                write!(body, ",{}", format_sig(*value)).expect("string write");
            }
        }
        body.push('\n');
    }
    Ok(body)
}
