//! Retrieval benchmarking: MTEB-style task handling, rank-cutoff IR
//! metrics, model evaluation, and cross-task score analysis.

pub mod analysis;
pub mod eval;
pub mod matrix;
pub mod metrics;
pub mod task;

pub use analysis::{kmeans, pca_project, KMeansResult, PcaResult};
pub use eval::{evaluate_model, DEFAULT_K};
pub use matrix::{
    cross_task_stats, load_score_cells, record_scores, save_score_cells,
    ModelPerformanceMatrix, ScoreCells, TaskStats,
};
pub use metrics::{
    map_at_k, mrr_at_k, ndcg_at_k, precision_at_k, query_metrics, recall_at_k, IRMetrics,
};
pub use task::{
    build_task, load_task, paragraph_id, save_task, CorpusEntry, ParagraphRecord, ParagraphRef,
    QaRecord, RetrievalTask,
};
