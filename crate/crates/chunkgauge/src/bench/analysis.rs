//! Score-matrix analysis: PCA projection and k-means clustering.
//!
//! Both run on plain row-major `f64` matrices (one row per model) and are
//! fully deterministic: PCA fixes the sign of every component and k-means
//! derives all randomness from the caller's seed.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Principal components of a small matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// Row projections, one row per input row, `n_components` wide.
    pub projections: Vec<Vec<f64>>,
    /// Unit-length, mutually orthogonal component vectors, one per row.
    pub components: Vec<Vec<f64>>,
    /// Fraction of total variance captured per component, non-increasing,
    /// summing to at most 1.
    pub explained_variance_ratios: Vec<f64>,
}

fn check_rectangular(rows: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = rows.first() else {
        return Err(Error::config("matrix has no rows"));
    };
    let dims = first.len();
    if dims == 0 {
        return Err(Error::config("matrix rows are empty"));
    }
    if rows.iter().any(|row| row.len() != dims) {
        return Err(Error::config("matrix rows have unequal lengths"));
    }
    if rows
        .iter()
        .any(|row| row.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::config("matrix contains non-finite values"));
    }
    Ok(dims)
}

/// Project mean-centered rows onto their leading principal components.
/// Components come from a singular value decomposition, ordered by
/// decreasing variance with a deterministic sign (the entry of largest
/// magnitude in each component is positive). `n_components` must be
/// between 1 and `min(rows - 1, cols)`.
pub fn pca_project(rows: &[Vec<f64>], n_components: usize) -> Result<PcaResult> {
    let dims = check_rectangular(rows)?;
    let n = rows.len();
    if n < 2 {
        return Err(Error::config("PCA needs at least 2 rows"));
    }
    let max_components = (n - 1).min(dims);
    if n_components == 0 || n_components > max_components {
        return Err(Error::config(format!(
            "n_components must be in 1..={max_components}, got {n_components}"
        )));
    }

    let means: Vec<f64> = (0..dims)
        .map(|j| rows.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, dims, |i, j| rows[i][j] - means[j]);

    let svd = centered.clone().svd(true, true);
    let u = svd.u.expect("SVD with u requested");
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let sigma = &svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let total_variance: f64 = sigma.iter().map(|s| s * s).sum();

    let mut projections = vec![Vec::with_capacity(n_components); n];
    let mut components = Vec::with_capacity(n_components);
    let mut ratios = Vec::with_capacity(n_components);
    for &idx in order.iter().take(n_components) {
        let mut component: Vec<f64> = v_t.row(idx).iter().copied().collect();
        let mut column: Vec<f64> = u.column(idx).iter().map(|x| x * sigma[idx]).collect();
        let pivot = component
            .iter()
            .enumerate()
            .max_by(|(ai, a), (bi, b)| a.abs().total_cmp(&b.abs()).then(bi.cmp(ai)))
            .map(|(i, _)| i)
            .expect("component is non-empty");
        if component[pivot] < 0.0 {
            component.iter_mut().for_each(|x| *x = -*x);
            column.iter_mut().for_each(|x| *x = -*x);
        }
        for (row, value) in projections.iter_mut().zip(column) {
            row.push(value);
        }
        components.push(component);
        ratios.push(if total_variance == 0.0 {
            0.0
        } else {
            sigma[idx] * sigma[idx] / total_variance
        });
    }
    Ok(PcaResult {
        projections,
        components,
        explained_variance_ratios: ratios,
    })
}

/// A k-means clustering with its convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster index per input row, each below `k`.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances of every point to its centroid.
    pub inertia: f64,
    /// Inertia after each assignment step, never increasing.
    pub inertia_history: Vec<f64>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

const MAX_ITERATIONS: usize = 300;

/// Lloyd's algorithm with farthest-point initialisation. The seed picks
/// the first centroid; every later choice is a deterministic argmax with
/// ties broken toward the lowest index, so a fixed seed reproduces the
/// labels exactly. A cluster left empty by an assignment step is
/// re-seeded at the point sitting farthest from its assigned centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansResult> {
    let _dims = check_rectangular(points)?;
    let n = points.len();
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if k > n {
        return Err(Error::config(format!("k = {k} exceeds {n} points")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..n);
    let mut centroids: Vec<Vec<f64>> = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &points[first]))
        .collect();
    while centroids.len() < k {
        let far = (0..n)
            .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(b.cmp(&a)))
            .expect("points is non-empty");
        centroids.push(points[far].clone());
        for (slot, point) in nearest.iter_mut().zip(points) {
            *slot = slot.min(squared_distance(point, &points[far]));
        }
    }

    let mut labels = vec![0usize; n];
    let mut history = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut inertia = 0.0;
        let mut changed = false;
        for (i, point) in points.iter().enumerate() {
            let (best, cost) = centroids
                .iter()
                .map(|c| squared_distance(point, c))
                .enumerate()
                .min_by(|(ai, a), (bi, b)| a.total_cmp(b).then(ai.cmp(bi)))
                .expect("k is at least 1");
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
            inertia += cost;
        }
        history.push(inertia);
        if !changed && history.len() > 1 {
            break;
        }

        let mut sums = vec![vec![0.0; points[0].len()]; k];
        let mut counts = vec![0usize; k];
        for (point, &label) in points.iter().zip(&labels) {
            counts[label] += 1;
            for (slot, value) in sums[label].iter_mut().zip(point) {
                *slot += value;
            }
        }
        let mut reseeded: Vec<usize> = Vec::new();
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..n)
                    .filter(|i| !reseeded.contains(i))
                    .max_by(|&a, &b| {
                        let da = squared_distance(&points[a], &centroids[labels[a]]);
                        let db = squared_distance(&points[b], &centroids[labels[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("points is non-empty");
                reseeded.push(far);
                centroids[j] = points[far].clone();
            } else {
                for (slot, sum) in centroids[j].iter_mut().zip(&sums[j]) {
                    *slot = sum / counts[j] as f64;
                }
            }
        }
    }

    let inertia = *history.last().expect("at least one iteration ran");
    Ok(KMeansResult {
        labels,
        centroids,
        inertia,
        inertia_history: history,
    })
}
