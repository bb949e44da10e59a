//! Synthetic metric spaces with known geometry.
//!
//! The sphere, dense-graph and Poincare-disk generators give spaces of differing curvature.
//! The tree and ultrametric fixtures are exact test oracles: tree metrics are 0-hyperbolic
//! and dendrogram heights are ultrametric by construction.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distances::{build_distance_matrix, MetricKind};
use crate::error::{Error, Result};
use crate::hyperbolicity::{exact_delta, DeltaFormula};
use crate::rng::{standard_normal, stream, Purpose};
use crate::types::{DistanceMatrix, EmbeddingSet, MetricTag, Seed};

pub const DEFAULT_N: usize = 50;
pub const DEFAULT_SPHERE_DIM: usize = 10;
pub const DEFAULT_EDGE_PROBABILITY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    Sphere,
    DenseGraph,
    PoincareDisk,
    TreeMetric,
    Ultrametric,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(SyntheticKind::Sphere),
            "graph" | "dense_graph" => Ok(SyntheticKind::DenseGraph),
            "disk" | "poincare_disk" => Ok(SyntheticKind::PoincareDisk),
            "tree" | "tree_metric" => Ok(SyntheticKind::TreeMetric),
            "ultra" | "ultrametric" => Ok(SyntheticKind::Ultrametric),
            other => Err(Error::InvalidArgument(format!("unknown synthetic kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    /// Ambient dimension, sphere only.
    pub dim: usize,
    /// Edge probability, dense graph only.
    pub p: f64,
    pub seed: Seed,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, seed: Seed) -> Self {
        SyntheticSpec {
            kind,
            n: DEFAULT_N,
            dim: DEFAULT_SPHERE_DIM,
            p: DEFAULT_EDGE_PROBABILITY,
            seed,
        }
    }

    pub fn generate(&self) -> Result<Synthetic> {
        Ok(match self.kind {
            SyntheticKind::Sphere => Synthetic::Embeddings(sample_sphere(self.n, self.dim, self.seed)?),
            SyntheticKind::PoincareDisk => Synthetic::Embeddings(sample_poincare_disk(self.n, self.seed)?),
            SyntheticKind::DenseGraph => Synthetic::Matrix(sample_dense_graph(self.n, self.p, self.seed)?),
            SyntheticKind::TreeMetric => Synthetic::Matrix(tree_metric_fixture(self.n, self.seed)?.matrix),
            SyntheticKind::Ultrametric => Synthetic::Matrix(ultrametric_fixture(self.n, self.seed)?),
        })
    }

    /// The distance matrix the space is analysed under: Euclidean for the sphere,
    /// hyperbolic for the disk, the generated matrix otherwise.
    pub fn distance_matrix(&self) -> Result<DistanceMatrix> {
        match (self.kind, self.generate()?) {
            (SyntheticKind::PoincareDisk, Synthetic::Embeddings(set)) => {
                build_distance_matrix(&set, MetricKind::Poincare)
            }
            (_, Synthetic::Embeddings(set)) => build_distance_matrix(&set, MetricKind::Euclidean),
            (_, Synthetic::Matrix(d)) => Ok(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Synthetic {
    Embeddings(EmbeddingSet),
    Matrix(DistanceMatrix),
}

/// `n` points uniform on the unit sphere in `dim` dimensions.
pub fn sample_sphere(n: usize, dim: usize, seed: Seed) -> Result<EmbeddingSet> {
    if dim < 2 || n < 1 {
        return Err(Error::InvalidArgument(format!(
            "sphere needs n >= 1 and dim >= 2, got n={n}, dim={dim}"
        )));
    }
    let mut data = Vec::with_capacity(n * dim);
    let mut row = vec![0.0; dim];
    for i in 0..n {
        let mut rng = stream(seed, Purpose::Sphere, i as u64);
        let norm = loop {
            for x in row.iter_mut() {
                *x = standard_normal(&mut rng);
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        data.extend(row.iter().map(|x| x / norm));
    }
    EmbeddingSet::from_flat(n, dim, data)
}

/// `n` points in the open unit disk with radius and angle drawn uniformly.
pub fn sample_poincare_disk(n: usize, seed: Seed) -> Result<EmbeddingSet> {
    if n < 1 {
        return Err(Error::InvalidArgument("disk needs n >= 1".into()));
    }
    let mut rng = stream(seed, Purpose::Disk, 0);
    let mut data = Vec::with_capacity(2 * n);
    while data.len() < 2 * n {
        let r: f64 = rng.gen();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        let (x, y) = (r * theta.cos(), r * theta.sin());
        // rounding can push r close to 1 onto the boundary
        if x * x + y * y < 1.0 {
            data.push(x);
            data.push(y);
        }
    }
    EmbeddingSet::from_flat(n, 2, data)
}

/// Erdos-Renyi G(n, p) with unit edges, turned into shortest-path distances.
pub fn sample_dense_graph(n: usize, p: f64, seed: Seed) -> Result<DistanceMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("graph needs n >= 2, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!("edge probability must lie in (0, 1], got {p}")));
    }
    let mut rng = stream(seed, Purpose::Graph, 0);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|_| rng.gen::<f64>() < p)
        .collect();
    let mut adjacency = vec![vec![false; n]; n];
    for (i, j) in edges {
        adjacency[i][j] = true;
        adjacency[j][i] = true;
    }
    graph_distance_matrix(&adjacency)
}

/// Shortest-path matrix of an unweighted graph; unreachable pairs get distance `n`.
pub fn graph_distance_matrix(adjacency: &[Vec<bool>]) -> Result<DistanceMatrix> {
    let n = adjacency.len();
    let weights: Vec<Vec<f64>> = adjacency
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != n {
                return Err(Error::Shape(format!("adjacency row {i} has {} entries", row.len())));
            }
            Ok(row
                .iter()
                .enumerate()
                .map(|(j, &e)| if i == j { 0.0 } else if e { 1.0 } else { f64::INFINITY })
                .collect())
        })
        .collect::<Result<_>>()?;
    floyd_warshall(&weights)
}

/// All-pairs shortest paths over a symmetric weight matrix with `INFINITY` for missing
/// edges. Pairs that stay unreachable are set to `n`.
pub fn floyd_warshall(weights: &[Vec<f64>]) -> Result<DistanceMatrix> {
    let n = weights.len();
    let mut dist = Vec::with_capacity(n * n);
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!("weight row {i} has {} entries", row.len())));
        }
        dist.extend_from_slice(row);
    }
    for i in 0..n {
        if dist[i * n + i] != 0.0 {
            return Err(Error::Validation(format!("nonzero diagonal at {i}")));
        }
        for j in (i + 1)..n {
            let (a, b) = (dist[i * n + j], dist[j * n + i]);
            if a != b {
                return Err(Error::Validation(format!("weights at ({i}, {j}) are asymmetric: {a} vs {b}")));
            }
            if a.is_nan() || a < 0.0 {
                return Err(Error::Validation(format!("invalid weight {a} at ({i}, {j})")));
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik == f64::INFINITY {
                continue;
            }
            for j in 0..n {
                let via = dik + dist[k * n + j];
                if via < dist[i * n + j] {
                    dist[i * n + j] = via;
                }
            }
        }
    }
    let sentinel = n as f64;
    // rebuild from the upper triangle so symmetry is exact
    let out = DistanceMatrix::from_upper_fn(n, MetricTag::GraphShortestPath, |i, j| {
        let v = dist[i * n + j];
        if v.is_finite() { v } else { sentinel }
    });
    Ok(out)
}

/// Leaf-to-leaf path distances of a random unrooted binary tree, plus its cherries.
#[derive(Debug, Clone)]
pub struct TreeFixture {
    pub matrix: DistanceMatrix,
    /// Leaf pairs `(i, j)`, `i < j`, attached to the same internal node.
    pub cherries: Vec<(usize, usize)>,
}

impl TreeFixture {
    pub fn is_cherry(&self, pair: (usize, usize)) -> bool {
        let p = (pair.0.min(pair.1), pair.0.max(pair.1));
        self.cherries.contains(&p)
    }
}

/// Random binary tree on `n_leaves` leaves with edge weights uniform in `[0.1, 2]`.
///
/// Grown from a three-leaf star by repeatedly subdividing a random edge and hanging a new
/// leaf off the midpoint. Leaf labels are shuffled afterwards.
pub fn tree_metric_fixture(n_leaves: usize, seed: Seed) -> Result<TreeFixture> {
    if n_leaves < 4 {
        return Err(Error::InvalidArgument(format!("tree fixture needs >= 4 leaves, got {n_leaves}")));
    }
    let mut rng = stream(seed, Purpose::Tree, 0);
    // node 0 is the first internal node; leaves 1..=3 hang off it
    let mut is_leaf = vec![false, true, true, true];
    let mut edges: Vec<(usize, usize, f64)> =
        (1..=3).map(|l| (0, l, rng.gen_range(0.1..=2.0))).collect();
    for _ in 3..n_leaves {
        let e = rng.gen_range(0..edges.len());
        let (u, v, _) = edges.swap_remove(e);
        let mid = is_leaf.len();
        let leaf = mid + 1;
        is_leaf.push(false);
        is_leaf.push(true);
        edges.push((u, mid, rng.gen_range(0.1..=2.0)));
        edges.push((mid, v, rng.gen_range(0.1..=2.0)));
        edges.push((mid, leaf, rng.gen_range(0.1..=2.0)));
    }

    let nodes = is_leaf.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes];
    for &(u, v, w) in &edges {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let leaf_nodes: Vec<usize> = (0..nodes).filter(|&v| is_leaf[v]).collect();
    let mut label: Vec<usize> = (0..n_leaves).collect();
    label.shuffle(&mut rng);
    let mut label_of = vec![usize::MAX; nodes];
    for (k, &v) in leaf_nodes.iter().enumerate() {
        label_of[v] = label[k];
    }

    let mut dist = vec![0.0; n_leaves * n_leaves];
    let mut stack = Vec::new();
    for &src in &leaf_nodes {
        let a = label_of[src];
        stack.clear();
        stack.push((src, usize::MAX, 0.0));
        while let Some((v, parent, acc)) = stack.pop() {
            if is_leaf[v] {
                dist[a * n_leaves + label_of[v]] = acc;
            }
            for &(u, w) in &adj[v] {
                if u != parent {
                    stack.push((u, v, acc + w));
                }
            }
        }
    }
    let matrix = DistanceMatrix::from_upper_fn(n_leaves, MetricTag::External, |i, j| dist[i * n_leaves + j]);

    let mut cherries = Vec::new();
    for v in (0..nodes).filter(|&v| !is_leaf[v]) {
        let leaves: Vec<usize> = adj[v].iter().filter(|(u, _)| is_leaf[*u]).map(|(u, _)| label_of[*u]).collect();
        for x in 0..leaves.len() {
            for y in (x + 1)..leaves.len() {
                cherries.push((leaves[x].min(leaves[y]), leaves[x].max(leaves[y])));
            }
        }
    }
    cherries.sort_unstable();
    Ok(TreeFixture { matrix, cherries })
}

/// Random dendrogram on `n` items: clusters merge in random order at strictly increasing
/// heights, and `D(i, j)` is the height at which `i` and `j` first share a cluster.
pub fn ultrametric_fixture(n: usize, seed: Seed) -> Result<DistanceMatrix> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("ultrametric fixture needs n >= 3, got {n}")));
    }
    let mut rng = stream(seed, Purpose::Dendrogram, 0);
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut dist = vec![0.0; n * n];
    let mut height = 0.0;
    while clusters.len() > 1 {
        let a = rng.gen_range(0..clusters.len());
        let mut b = rng.gen_range(0..clusters.len() - 1);
        if b >= a {
            b += 1;
        }
        height += rng.gen_range(0.1..1.0);
        let (lo, hi) = (a.min(b), a.max(b));
        let merged = clusters.swap_remove(hi);
        for &x in &clusters[lo] {
            for &y in &merged {
                dist[x * n + y] = height;
                dist[y * n + x] = height;
            }
        }
        clusters[lo].extend(merged);
    }
    Ok(DistanceMatrix::from_upper_fn(n, MetricTag::External, |i, j| dist[i * n + j]))
}

/// One row of the synthetic-space comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSummary {
    pub kind: SyntheticKind,
    /// Mean over seeds of the per-seed average delta.
    pub mean_delta_avg: f64,
    /// Mean over seeds of the per-seed delta standard deviation.
    pub mean_delta_std: f64,
    pub per_seed_delta_avg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticComparison {
    pub n: usize,
    pub sphere_dim: usize,
    pub p: f64,
    pub seeds: Vec<Seed>,
    pub formula: DeltaFormula,
    pub spaces: Vec<SpaceSummary>,
}

/// Exact four-point delta of the sphere, dense graph and Poincare disk over several seeds.
pub fn compare_synthetic_spaces(
    n: usize,
    sphere_dim: usize,
    p: f64,
    seeds: &[Seed],
) -> Result<SyntheticComparison> {
    let formula = DeltaFormula::FourPoint;
    let mut spaces = Vec::new();
    for kind in [SyntheticKind::Sphere, SyntheticKind::DenseGraph, SyntheticKind::PoincareDisk] {
        let mut avgs = Vec::with_capacity(seeds.len());
        let mut stds = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let spec = SyntheticSpec { kind, n, dim: sphere_dim, p, seed };
            let stats = exact_delta(&spec.distance_matrix()?, formula)?;
            avgs.push(stats.delta_avg);
            stds.push(stats.delta_std);
        }
        let count = seeds.len().max(1) as f64;
        spaces.push(SpaceSummary {
            kind,
            mean_delta_avg: avgs.iter().sum::<f64>() / count,
            mean_delta_std: stds.iter().sum::<f64>() / count,
            per_seed_delta_avg: avgs,
        });
    }
    Ok(SyntheticComparison { n, sphere_dim, p, seeds: seeds.to_vec(), formula, spaces })
}
