//! Embedding sets, distance matrices and their validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed for every stochastic operation. Same seed and inputs give bitwise-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(42)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// `n` finite vectors of a common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    n: usize,
    dim: usize,
    data: Vec<f64>,
    ids: Option<Vec<String>>,
    labels: Option<Vec<String>>,
}

impl EmbeddingSet {
    /// Builds a set from equally long rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape("embedding set is empty".into()));
        }
        let dim = rows[0].len();
        let mut data = Vec::with_capacity(n * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(n, dim, data)
    }

    /// Builds a set from a row-major buffer of `n * dim` values.
    pub fn from_flat(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::Shape(format!(
                "embedding set needs n >= 1 and dim >= 1, got n={n}, dim={dim}"
            )));
        }
        if data.len() != n * dim {
            return Err(Error::Shape(format!(
                "buffer has {} values, expected {n}x{dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / dim });
        }
        Ok(EmbeddingSet {
            n,
            dim,
            data,
            ids: None,
            labels: None,
        })
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::Shape(format!(
                "{} ids for {} rows",
                ids.len(),
                self.n
            )));
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Replaces the numeric payload, keeping ids and labels.
    pub(crate) fn with_data(&self, dim: usize, data: Vec<f64>) -> Result<Self> {
        let mut out = EmbeddingSet::from_flat(self.n, dim, data)?;
        out.ids = self.ids.clone();
        out.labels = self.labels.clone();
        Ok(out)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

/// Where a distance matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTag {
    Euclidean,
    Poincare,
    GraphShortestPath,
    External,
}

impl MetricTag {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricTag::Euclidean => "euclidean",
            MetricTag::Poincare => "poincare",
            MetricTag::GraphShortestPath => "graph_shortest_path",
            MetricTag::External => "external",
        }
    }
}

/// Dense `n x n` distance matrix, stored in full for O(1) access from the quadruple loops.
///
/// Matrices built inside this crate are symmetric bit-for-bit with a zero diagonal.
/// Externally supplied matrices carry [`MetricTag::External`] and should go through
/// [`DistanceMatrix::validate`] before use.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    tag: MetricTag,
}

impl DistanceMatrix {
    /// Wraps a row-major `n * n` buffer without checking the metric invariants.
    pub fn from_flat(n: usize, data: Vec<f64>, tag: MetricTag) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!(
                "buffer has {} values, expected {n}x{n}",
                data.len()
            )));
        }
        Ok(DistanceMatrix { n, data, tag })
    }

    /// Wraps nested rows without checking the metric invariants; rows must form a square.
    pub fn from_rows(rows: &[Vec<f64>], tag: MetricTag) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries in a matrix with {n} rows",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(DistanceMatrix { n, data, tag })
    }

    /// Fills the strict upper triangle from `f(i, j)` (i < j) and mirrors it.
    pub fn from_upper_fn(n: usize, tag: MetricTag, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DistanceMatrix { n, data, tag }
    }

    /// Builds from per-row upper-triangle values: `upper[i]` holds entries `(i, i+1..n)`.
    pub(crate) fn from_upper_rows(n: usize, tag: MetricTag, upper: Vec<Vec<f64>>) -> Self {
        let mut data = vec![0.0; n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DistanceMatrix { n, data, tag }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn tag(&self) -> MetricTag {
        self.tag
    }

    pub fn with_tag(mut self, tag: MetricTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks_exact(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        DistanceMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
            tag: self.tag,
        }
    }

    /// Restricts to the given indices, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange { index: bad, n: self.n });
        }
        let m = indices.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                data.push(self.get(i, j));
            }
        }
        Ok(DistanceMatrix { n: m, data, tag: self.tag })
    }

    /// Replaces every pair with its mean, D <- (D + D^T) / 2, and zeroes the diagonal.
    pub fn symmetrized(&self) -> Self {
        let n = self.n;
        let mut out = DistanceMatrix::from_upper_fn(n, self.tag, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i))
        });
        for i in 0..n {
            out.data[i * n + i] = 0.0;
        }
        out
    }

    /// Lists every broken distance-matrix invariant whose magnitude exceeds `tol`.
    pub fn validate(&self, tol: f64) -> Vec<Violation> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            let d = self.get(i, i);
            if !d.is_finite() {
                out.push(Violation::new(ViolationKind::NonFinite, i, i, d));
            } else if d.abs() > tol {
                out.push(Violation::new(ViolationKind::NonzeroDiagonal, i, i, d.abs()));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                for (r, c, v) in [(i, j, a), (j, i, b)] {
                    if !v.is_finite() {
                        out.push(Violation::new(ViolationKind::NonFinite, r, c, v));
                    } else if v < -tol {
                        out.push(Violation::new(ViolationKind::Negative, r, c, -v));
                    }
                }
                if a.is_finite() && b.is_finite() && (a - b).abs() > tol {
                    out.push(Violation::new(ViolationKind::Asymmetry, i, j, (a - b).abs()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Asymmetry,
    NonzeroDiagonal,
    Negative,
    NonFinite,
}

/// One broken invariant at entry `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub i: usize,
    pub j: usize,
    pub magnitude: f64,
}

impl Violation {
    fn new(kind: ViolationKind, i: usize, j: usize, magnitude: f64) -> Self {
        Violation { kind, i, j, magnitude }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} at ({}, {}) of magnitude {}", self.kind, self.i, self.j, self.magnitude)
    }
}

/// Validates a nested-row matrix, failing with a shape error when it is not square.
pub fn validate_distance_matrix(rows: &[Vec<f64>], tol: f64) -> Result<Vec<Violation>> {
    Ok(DistanceMatrix::from_rows(rows, MetricTag::External)?.validate(tol))
}
