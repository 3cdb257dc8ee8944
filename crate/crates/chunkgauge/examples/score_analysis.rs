//! Cross-task statistics, PCA projection, and k-means clustering of a
//! model-score matrix, mirroring `chunkgauge stats`.
//!
//!     cargo run --example score_analysis

use chunkgauge::bench::{
    cross_task_stats, kmeans, pca_project, record_scores, IRMetrics, ModelPerformanceMatrix,
    ScoreCells,
};

fn scores(base: f64) -> IRMetrics {
    IRMetrics {
        main_score: base,
        ndcg_at_10: base,
        map_at_10: 0.9 * base,
        recall_at_10: (1.1 * base).min(1.0),
        precision_at_10: base / 10.0,
        mrr_at_10: base,
    }
}

fn main() -> chunkgauge::Result<()> {
    // Two synthetic families of models: strong retrievers and weak ones,
    // scored on three tasks. The per-model task profiles differ so the
    // matrix has more than one principal direction.
    let mut cells = ScoreCells::new();
    let models: [(&str, [f64; 3]); 6] = [
        ("strong-a", [0.82, 0.74, 0.86]),
        ("strong-b", [0.78, 0.79, 0.77]),
        ("strong-c", [0.80, 0.71, 0.84]),
        ("weak-a", [0.35, 0.41, 0.30]),
        ("weak-b", [0.31, 0.28, 0.36]),
        ("weak-c", [0.28, 0.33, 0.24]),
    ];
    let tasks = ["synthesis", "spectra", "safety"];
    for (model, bases) in models {
        for (task, base) in tasks.iter().zip(bases) {
            record_scores(&mut cells, model, task, &scores(base));
        }
    }

    let matrix = ModelPerformanceMatrix::from_cells(&cells)?;
    println!("{:<12} {:>8} {:>8} {:>8}", "task", "median", "iqr", "delta");
    for (task, stats) in cross_task_stats(&matrix, "main_score")? {
        println!(
            "{task:<12} {:>8.4} {:>8.4} {:>8.4}",
            stats.median, stats.iqr, stats.best_worst_delta
        );
    }

    let pca = pca_project(&matrix.values, 2)?;
    println!(
        "pca explained variance: {:.4} + {:.4}",
        pca.explained_variance_ratios[0], pca.explained_variance_ratios[1]
    );

    let clustering = kmeans(&pca.projections, 2, 42)?;
    println!("clusters in pca space:");
    for (model, (label, point)) in matrix
        .models
        .iter()
        .zip(clustering.labels.iter().zip(&pca.projections))
    {
        println!(
            "  {model:<12} cluster {label}  ({:+.4}, {:+.4})",
            point[0], point[1]
        );
    }
    println!(
        "inertia {:.6} after {} iterations",
        clustering.inertia,
        clustering.inertia_history.len()
    );
    Ok(())
}
