//! k-means clustering and internal validity indices.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::types::{DistanceMatrix, EmbeddingSet, MetricTag, Seed};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    pub seed: Seed,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    pub silhouette: f64,
    /// Distance matrix the silhouette was computed on.
    pub silhouette_metric: MetricTag,
    pub calinski_harabasz: f64,
    pub davies_bouldin: f64,
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter().enumerate() {
        let d = sq_dist(x, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(set: &EmbeddingSet, k: usize, seed: Seed) -> Vec<Vec<f64>> {
    let n = set.n();
    let mut rng = stream(seed, Purpose::KMeans, 0);
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut closest: Vec<f64> = set.rows().map(|x| sq_dist(x, set.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = closest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &w) in closest.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with a centre already
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        let mu = set.row(next);
        for (i, x) in set.rows().enumerate() {
            closest[i] = closest[i].min(sq_dist(x, mu));
        }
    }
    chosen.into_iter().map(|i| set.row(i).to_vec()).collect()
}

/// Lloyd's algorithm from a seeded k-means++ start.
///
/// Stops when no centroid moves by `tol` or more, or after `max_iter` rounds. A cluster
/// that empties is reseeded with the point farthest from its own centroid.
pub fn kmeans(set: &EmbeddingSet, k: usize, seed: Seed, max_iter: usize, tol: f64) -> Result<KMeansFit> {
    let n = set.n();
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!("k must satisfy 2 <= k <= n = {n}, got {k}")));
    }
    let mut centroids = plus_plus_init(set, k, seed);
    let mut assignments = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    for iter in 1..=max_iter.max(1) {
        iterations = iter;
        let nearest_all: Vec<(usize, f64)> =
            (0..n).into_par_iter().map(|i| nearest(set.row(i), &centroids)).collect();
        let mut inertia = 0.0;
        let mut gaps = Vec::with_capacity(n);
        for (i, (c, d)) in nearest_all.into_iter().enumerate() {
            assignments[i] = c;
            gaps.push(d);
            inertia += d;
        }
        if let Some(&prev) = trace.last() {
            debug_assert!(
                inertia <= prev + 1e-9 * f64::max(1.0, prev),
                "inertia rose from {prev} to {inertia}"
            );
        }
        trace.push(inertia);

        let mut sizes = vec![0usize; k];
        for &c in &assignments {
            sizes[c] += 1;
        }
        for c in 0..k {
            if sizes[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| sizes[assignments[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if gaps[b] >= gaps[i] => Some(b),
                    _ => Some(i),
                })
                .expect("an empty cluster implies another holds two or more points");
            sizes[assignments[far]] -= 1;
            assignments[far] = c;
            sizes[c] = 1;
            gaps[far] = 0.0;
        }

        let dim = set.dim();
        let mut sums = vec![vec![0.0; dim]; k];
        for (x, &c) in set.rows().zip(&assignments) {
            for (s, v) in sums[c].iter_mut().zip(x) {
                *s += v;
            }
        }
        let mut shift = 0.0_f64;
        for c in 0..k {
            let inv = 1.0 / sizes[c] as f64;
            let updated: Vec<f64> = sums[c].iter().map(|s| s * inv).collect();
            shift = shift.max(sq_dist(&updated, &centroids[c]).sqrt());
            centroids[c] = updated;
        }
        if shift < tol {
            break;
        }
    }

    // final assignment against the final centroids
    let mut inertia = 0.0;
    for (i, x) in set.rows().enumerate() {
        let (c, d) = nearest(x, &centroids);
        assignments[i] = c;
        inertia += d;
    }
    Ok(KMeansFit { k, assignments, centroids, inertia, iterations, inertia_trace: trace })
}

/// Runs k-means and scores the result. The silhouette uses `distances`, which must be over
/// the same points as `set`.
pub fn cluster_and_score(
    set: &EmbeddingSet,
    distances: &DistanceMatrix,
    k: usize,
    seed: Seed,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterResult> {
    if distances.n() != set.n() {
        return Err(Error::Shape(format!(
            "distance matrix has {} points, embedding set {}",
            distances.n(),
            set.n()
        )));
    }
    let fit = kmeans(set, k, seed, max_iter, tol)?;
    Ok(ClusterResult {
        k,
        seed,
        silhouette: silhouette(distances, &fit.assignments)?,
        silhouette_metric: distances.tag(),
        calinski_harabasz: calinski_harabasz(set, &fit.assignments)?,
        davies_bouldin: davies_bouldin(set, &fit.assignments)?,
        assignments: fit.assignments,
        centroids: fit.centroids,
        inertia: fit.inertia,
        iterations: fit.iterations,
    })
}

/// Relabels to `0..k` in order of first appearance of each label value.
fn compact_labels(assignments: &[usize]) -> (Vec<usize>, usize) {
    let mut map = BTreeMap::new();
    let labels = assignments
        .iter()
        .map(|a| {
            let next = map.len();
            *map.entry(*a).or_insert(next)
        })
        .collect();
    (labels, map.len())
}

fn check_len(n: usize, assignments: &[usize]) -> Result<()> {
    if assignments.len() != n {
        return Err(Error::Shape(format!("{} assignments for {n} points", assignments.len())));
    }
    Ok(())
}

/// Mean silhouette coefficient; points in singleton clusters score 0.
pub fn silhouette(d: &DistanceMatrix, assignments: &[usize]) -> Result<f64> {
    let n = d.n();
    check_len(n, assignments)?;
    let (labels, k) = compact_labels(assignments);
    if k < 2 {
        return Err(Error::InvalidArgument("silhouette needs at least 2 clusters".into()));
    }
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, &l) in labels.iter().enumerate() {
                sums[l] += d.get(i, j);
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m > 0.0 { (b - a) / m } else { 0.0 }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / n as f64)
}

fn centroids_of(set: &EmbeddingSet, labels: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; set.dim()]; k];
    let mut sizes = vec![0usize; k];
    for (x, &l) in set.rows().zip(labels) {
        sizes[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &m) in sums.iter_mut().zip(&sizes) {
        for v in s.iter_mut() {
            *v /= m as f64;
        }
    }
    (sums, sizes)
}

/// Between-cluster over within-cluster dispersion, each divided by its degrees of freedom.
pub fn calinski_harabasz(set: &EmbeddingSet, assignments: &[usize]) -> Result<f64> {
    let n = set.n();
    check_len(n, assignments)?;
    let (labels, k) = compact_labels(assignments);
    if k < 2 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "Calinski-Harabasz needs 2 <= k < n, got k={k}, n={n}"
        )));
    }
    let (centroids, sizes) = centroids_of(set, &labels, k);
    let mut mean = vec![0.0; set.dim()];
    for x in set.rows() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let between: f64 = centroids
        .iter()
        .zip(&sizes)
        .map(|(c, &m)| m as f64 * sq_dist(c, &mean))
        .sum();
    let within: f64 = set.rows().zip(&labels).map(|(x, &l)| sq_dist(x, &centroids[l])).sum();
    if within == 0.0 {
        return Err(Error::Undefined("within-cluster dispersion is zero".into()));
    }
    Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
}

/// Mean over clusters of the worst `(s_i + s_j) / d(c_i, c_j)` ratio.
pub fn davies_bouldin(set: &EmbeddingSet, assignments: &[usize]) -> Result<f64> {
    let n = set.n();
    check_len(n, assignments)?;
    let (labels, k) = compact_labels(assignments);
    if k < 2 {
        return Err(Error::InvalidArgument("Davies-Bouldin needs at least 2 clusters".into()));
    }
    let (centroids, sizes) = centroids_of(set, &labels, k);
    let mut scatter = vec![0.0; k];
    for (x, &l) in set.rows().zip(&labels) {
        scatter[l] += sq_dist(x, &centroids[l]).sqrt();
    }
    for (s, &m) in scatter.iter_mut().zip(&sizes) {
        *s /= m as f64;
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0_f64;
        for j in (0..k).filter(|&j| j != i) {
            let sep = sq_dist(&centroids[i], &centroids[j]).sqrt();
            if sep == 0.0 {
                return Err(Error::Undefined(format!("centroids of clusters {i} and {j} coincide")));
            }
            worst = worst.max((scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}
