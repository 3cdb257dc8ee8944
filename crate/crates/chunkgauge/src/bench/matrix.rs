//! The model-score matrix: a long-format CSV accumulated across runs and
//! the cross-task statistics computed from it.
//!
//! The file is `model,task,metric,score` with one row per cell. Rows are
//! kept sorted and scores carry nine significant digits, so rewriting the
//! same scores reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::bench::metrics::IRMetrics;
use crate::error::{Error, Result};
use crate::sig::{format_sig, ser_sig};
use crate::stats;

/// (model, task, metric) -> score. The map form of the CSV.
pub type ScoreCells = BTreeMap<(String, String, String), f64>;

const HEADER: &str = "model,task,metric,score";

/// Record one evaluation's six metrics into the cell map, overwriting any
/// previous scores for the same model and task.
pub fn record_scores(cells: &mut ScoreCells, model: &str, task: &str, metrics: &IRMetrics) {
    for (metric, score) in metrics.named_scores() {
        cells.insert(
            (model.to_string(), task.to_string(), metric.to_string()),
            score,
        );
    }
}

/// Read a score CSV. A missing file is an empty map so a first run can
/// append to it; malformed rows and duplicate cells are data errors with
/// their line number.
pub fn load_score_cells(path: &Path) -> Result<ScoreCells> {
    if !path.exists() {
        return Ok(ScoreCells::new());
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == HEADER => {}
        Some((_, first)) => {
            return Err(Error::data(format!(
                "{}:1: expected header {HEADER:?}, found {first:?}",
                path.display()
            )))
        }
        None => return Ok(ScoreCells::new()),
    }
    let mut cells = ScoreCells::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| {
            Error::data(format!("{}:{}: {what}: {line:?}", path.display(), idx + 1))
        };
        let [model, task, metric, score] = fields.as_slice() else {
            return Err(bad("expected 4 fields"));
        };
        let score: f64 = score.parse().map_err(|_| bad("unparsable score"))?;
        let key = (model.to_string(), task.to_string(), metric.to_string());
        if cells.insert(key, score).is_some() {
            return Err(bad("duplicate cell"));
        }
    }
    Ok(cells)
}

/// Write the cell map as a sorted CSV, atomically.
pub fn save_score_cells(path: &Path, cells: &ScoreCells) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut body = String::from(HEADER);
    body.push('\n');
    for ((model, task, metric), score) in cells {
        body.push_str(&format!("{model},{task},{metric},{}\n", format_sig(*score)));
    }
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// A dense models-by-(task, metric) view of the score cells. Rows are
/// models in sorted order; every model holds a score for every column.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPerformanceMatrix {
    pub models: Vec<String>,
    pub columns: Vec<(String, String)>,
    /// Row-major, `models.len()` rows by `columns.len()` columns.
    pub values: Vec<Vec<f64>>,
}

impl ModelPerformanceMatrix {
    /// Assemble the dense matrix, failing with the missing cells listed
    /// when any model lacks a score for some column.
    pub fn from_cells(cells: &ScoreCells) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::data("score matrix is empty"));
        }
        let mut models: Vec<String> = cells.keys().map(|(m, _, _)| m.clone()).collect();
        models.sort();
        models.dedup();
        let mut columns: Vec<(String, String)> =
            cells.keys().map(|(_, t, metric)| (t.clone(), metric.clone())).collect();
        columns.sort();
        columns.dedup();

        let mut missing = Vec::new();
        let mut values = Vec::with_capacity(models.len());
        for model in &models {
            let mut row = Vec::with_capacity(columns.len());
            for (task, metric) in &columns {
                let key = (model.clone(), task.clone(), metric.clone());
                match cells.get(&key) {
                    Some(&score) => row.push(score),
                    None => missing.push(format!("{model}/{task}/{metric}")),
                }
            }
            values.push(row);
        }
        if !missing.is_empty() {
            return Err(Error::data(format!(
                "score matrix has missing cells: {}",
                missing.join(", ")
            )));
        }
        Ok(Self {
            models,
            columns,
            values,
        })
    }

    /// Task names present in the matrix, sorted and unique.
    pub fn tasks(&self) -> Vec<&str> {
        let mut tasks: Vec<&str> = self.columns.iter().map(|(t, _)| t.as_str()).collect();
        tasks.dedup();
        tasks
    }

    /// All models' scores for one (task, metric) column, in model order.
    pub fn column(&self, task: &str, metric: &str) -> Option<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|(t, m)| t == task && m == metric)?;
        Some(self.values.iter().map(|row| row[idx]).collect())
    }

    /// One model's full row, in column order.
    pub fn row(&self, model: &str) -> Option<&[f64]> {
        let idx = self.models.iter().position(|m| m == model)?;
        Some(&self.values[idx])
    }
}

/// Spread statistics for one task across models.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TaskStats {
    #[serde(serialize_with = "ser_sig")]
    pub median: f64,
    #[serde(serialize_with = "ser_sig")]
    pub iqr: f64,
    #[serde(serialize_with = "ser_sig")]
    pub best_worst_delta: f64,
}

/// Per-task medians, interquartile ranges, and best-to-worst deltas of
/// one metric across every model in the matrix.
pub fn cross_task_stats(
    matrix: &ModelPerformanceMatrix,
    metric: &str,
) -> Result<BTreeMap<String, TaskStats>> {
    let mut per_task = BTreeMap::new();
    for task in matrix.tasks() {
        let mut scores = matrix.column(task, metric).ok_or_else(|| {
            Error::data(format!("task {task:?} has no {metric:?} column"))
        })?;
        scores.sort_by(f64::total_cmp);
        let stats = TaskStats {
            median: stats::median(&scores),
            iqr: stats::iqr(&scores),
            best_worst_delta: scores[scores.len() - 1] - scores[0],
        };
        per_task.insert(task.to_string(), stats);
    }
    Ok(per_task)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Values are snapped to nine significant digits so that the CSV
    /// round trip is exact.
    fn clean(x: f64) -> f64 {
        format_sig(x).parse().unwrap()
    }

    fn metrics(base: f64) -> IRMetrics {
        IRMetrics {
            main_score: clean(base),
            ndcg_at_10: clean(base),
            map_at_10: clean(base - 0.1),
            recall_at_10: clean(base + 0.1),
            precision_at_10: clean(base / 2.0),
            mrr_at_10: clean(base),
        }
    }

    #[test]
    fn two_models_on_one_task_make_twelve_rows() {
        let mut cells = ScoreCells::new();
        record_scores(&mut cells, "det64", "demo", &metrics(0.5));
        record_scores(&mut cells, "det32", "demo", &metrics(0.4));
        assert_eq!(cells.len(), 12);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        save_score_cells(&path, &cells).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("model,task,metric,score\n"));
        assert_eq!(text.lines().count(), 13);
        assert!(text.contains("det64,demo,main_score,0.500000000\n"));

        assert_eq!(load_score_cells(&path).unwrap(), cells);
    }

    #[test]
    fn rewriting_the_same_cells_is_byte_identical() {
        let mut cells = ScoreCells::new();
        record_scores(&mut cells, "a", "t", &metrics(1.0 / 3.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        save_score_cells(&path, &cells).unwrap();
        let first = fs::read(&path).unwrap();
        let reloaded = load_score_cells(&path).unwrap();
        save_score_cells(&path, &reloaded).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }

    #[test]
    fn missing_files_load_as_empty_and_bad_rows_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        assert!(load_score_cells(&path).unwrap().is_empty());

        fs::write(&path, "model,task,metric,score\na,t,m\n").unwrap();
        let err = load_score_cells(&path).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains(":2:")));

        fs::write(&path, "wrong,header\n").unwrap();
        assert!(load_score_cells(&path).is_err());

        fs::write(&path, "model,task,metric,score\na,t,m,0.5\na,t,m,0.6\n").unwrap();
        let err = load_score_cells(&path).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("duplicate")));
    }

    #[test]
    fn dense_matrices_require_every_cell() {
        let mut cells = ScoreCells::new();
        record_scores(&mut cells, "a", "t1", &metrics(0.5));
        record_scores(&mut cells, "b", "t1", &metrics(0.6));
        record_scores(&mut cells, "a", "t2", &metrics(0.7));
        let err = ModelPerformanceMatrix::from_cells(&cells).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("b/t2/main_score")));

        record_scores(&mut cells, "b", "t2", &metrics(0.8));
        let matrix = ModelPerformanceMatrix::from_cells(&cells).unwrap();
        assert_eq!(matrix.models, vec!["a", "b"]);
        assert_eq!(matrix.tasks(), vec!["t1", "t2"]);
        assert_eq!(matrix.column("t1", "main_score").unwrap(), vec![0.5, 0.6]);
        assert_eq!(matrix.row("b").unwrap().len(), matrix.columns.len());
    }

    #[test]
    fn cross_task_stats_match_hand_computed_quartiles() {
        let mut cells = ScoreCells::new();
        record_scores(&mut cells, "m1", "t", &metrics(0.0));
        record_scores(&mut cells, "m2", "t", &metrics(1.0));
        let matrix = ModelPerformanceMatrix::from_cells(&cells).unwrap();
        let stats = cross_task_stats(&matrix, "main_score").unwrap();
        let t = &stats["t"];
        assert_eq!(t.median, 0.5);
        assert_eq!(t.iqr, 0.5);
        assert_eq!(t.best_worst_delta, 1.0);
    }

    #[test]
    fn constant_columns_have_zero_spread() {
        let mut cells = ScoreCells::new();
        for model in ["m1", "m2", "m3"] {
            record_scores(&mut cells, model, "t", &metrics(0.25));
        }
        let matrix = ModelPerformanceMatrix::from_cells(&cells).unwrap();
        let stats = cross_task_stats(&matrix, "main_score").unwrap();
        let t = &stats["t"];
        assert_eq!((t.median, t.iqr, t.best_worst_delta), (0.25, 0.0, 0.0));
    }

    #[test]
    fn single_model_matrices_have_zero_deltas() {
        let mut cells = ScoreCells::new();
        record_scores(&mut cells, "only", "t", &metrics(0.9));
        let matrix = ModelPerformanceMatrix::from_cells(&cells).unwrap();
        let stats = cross_task_stats(&matrix, "main_score").unwrap();
        assert_eq!(stats["t"].median, 0.9);
        assert_eq!(stats["t"].iqr, 0.0);
        assert_eq!(stats["t"].best_worst_delta, 0.0);
    }

    #[test]
    fn unknown_metrics_are_data_errors() {
        let mut cells = ScoreCells::new();
        record_scores(&mut cells, "m", "t", &metrics(0.5));
        let matrix = ModelPerformanceMatrix::from_cells(&cells).unwrap();
        assert!(cross_task_stats(&matrix, "nonexistent").is_err());
    }
}
