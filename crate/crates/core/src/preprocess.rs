//! Embedding preprocessing: pad ragged rows to a common length, optional PCA to a
//! variance target, and a single global rescale into the open unit ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::EmbeddingSet;

/// Default largest row norm after [`rescale_to_ball`].
pub const DEFAULT_BALL_NORM: f64 = 0.9;

/// Right-pads every sequence with `pad_value` up to the longest length.
pub fn pad_and_flatten(raw: &[Vec<f64>], pad_value: f64) -> Result<EmbeddingSet> {
    if raw.is_empty() {
        return Err(Error::Shape("no sequences to pad".into()));
    }
    let mut dim = 0;
    for (i, seq) in raw.iter().enumerate() {
        if seq.is_empty() {
            return Err(Error::Shape(format!("sequence {i} is empty")));
        }
        if seq.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i });
        }
        dim = dim.max(seq.len());
    }
    let mut data = Vec::with_capacity(raw.len() * dim);
    for seq in raw {
        data.extend_from_slice(seq);
        data.extend(std::iter::repeat_n(pad_value, dim - seq.len()));
    }
    EmbeddingSet::from_flat(raw.len(), dim, data)
}

/// A fitted principal-component projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows of length `dim`, ordered by decreasing explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
    pub retained_fraction: f64,
}

impl PcaModel {
    pub fn out_dim(&self) -> usize {
        self.components.len()
    }

    /// Centers with the fitted mean and projects onto the components.
    pub fn transform(&self, set: &EmbeddingSet) -> Result<EmbeddingSet> {
        if set.dim() != self.mean.len() {
            return Err(Error::Shape(format!(
                "model fitted on dim {}, input has dim {}",
                self.mean.len(),
                set.dim()
            )));
        }
        let k = self.components.len();
        let mut out = Vec::with_capacity(set.n() * k);
        let mut centered = vec![0.0; set.dim()];
        for row in set.rows() {
            for ((c, x), m) in centered.iter_mut().zip(row).zip(&self.mean) {
                *c = x - m;
            }
            for comp in &self.components {
                out.push(dot(&centered, comp));
            }
        }
        set.with_data(k, out)
    }
}

/// Fits PCA keeping the fewest leading components whose cumulative explained variance
/// reaches `variance_target`, and returns the projected data with the model.
pub fn pca_fit_transform(
    set: &EmbeddingSet,
    variance_target: f64,
) -> Result<(EmbeddingSet, PcaModel)> {
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "variance target must lie in (0, 1], got {variance_target}"
        )));
    }
    let (n, dim) = (set.n(), set.dim());
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }

    let mut mean = vec![0.0; dim];
    for row in set.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<f64> = set
        .rows()
        .flat_map(|row| row.iter().zip(&mean).map(|(x, m)| x - m))
        .collect();
    let denom = (n - 1) as f64;
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / denom;
    if total_variance <= 0.0 {
        return Err(Error::Degenerate("all rows are identical".into()));
    }

    // Eigendecompose whichever of the covariance (dim x dim) or Gram (n x n) matrix is smaller.
    let (values, vectors) = if dim <= n {
        let mut cov = vec![0.0; dim * dim];
        for row in centered.chunks_exact(dim) {
            for a in 0..dim {
                let ra = row[a];
                for b in a..dim {
                    cov[a * dim + b] += ra * row[b];
                }
            }
        }
        for a in 0..dim {
            for b in a..dim {
                let v = cov[a * dim + b] / denom;
                cov[a * dim + b] = v;
                cov[b * dim + a] = v;
            }
        }
        let eig = symmetric_eigen(cov, dim);
        let vectors: Vec<Vec<f64>> = (0..dim)
            .map(|c| (0..dim).map(|r| eig.vectors[r * dim + c]).collect())
            .collect();
        (eig.values, vectors)
    } else {
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            let ri = &centered[i * dim..(i + 1) * dim];
            for j in i..n {
                let v = dot(ri, &centered[j * dim..(j + 1) * dim]) / denom;
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        let eig = symmetric_eigen(gram, n);
        // v = X^T u / sqrt((n - 1) lambda) maps Gram eigenvectors to covariance ones.
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|c| {
                let lambda = eig.values[c];
                let mut v = vec![0.0; dim];
                if lambda > 0.0 {
                    for i in 0..n {
                        let u = eig.vectors[i * n + c];
                        for (vd, x) in v.iter_mut().zip(&centered[i * dim..(i + 1) * dim]) {
                            *vd += u * x;
                        }
                    }
                    let norm = dot(&v, &v).sqrt();
                    if norm > 0.0 {
                        for vd in &mut v {
                            *vd /= norm;
                        }
                    }
                }
                v
            })
            .collect();
        (eig.values, vectors)
    };

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let threshold = variance_target - 1e-12;
    let mut cumulative = 0.0;
    let mut components = Vec::new();
    let mut explained = Vec::new();
    for &idx in &order {
        let lambda = values[idx].max(0.0);
        if lambda <= 0.0 && !components.is_empty() {
            break;
        }
        let mut comp = vectors[idx].clone();
        fix_sign(&mut comp);
        components.push(comp);
        explained.push(lambda);
        cumulative += lambda;
        if cumulative / total_variance >= threshold {
            break;
        }
    }

    let model = PcaModel {
        mean,
        components,
        explained_variance: explained,
        total_variance,
        retained_fraction: (cumulative / total_variance).min(1.0),
    };
    let projected = model.transform(set)?;
    Ok((projected, model))
}

/// Multiplies every row by `target_max_norm / max_row_norm`.
///
/// Returns the rescaled set and the scalar that was applied.
pub fn rescale_to_ball(set: &EmbeddingSet, target_max_norm: f64) -> Result<(EmbeddingSet, f64)> {
    if !(target_max_norm > 0.0 && target_max_norm < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target max norm must lie in (0, 1), got {target_max_norm}"
        )));
    }
    let max_norm = set
        .rows()
        .map(|r| dot(r, r).sqrt())
        .fold(0.0_f64, f64::max);
    if max_norm == 0.0 {
        return Err(Error::Degenerate("every row is zero; nothing to rescale".into()));
    }
    let s = target_max_norm / max_norm;
    let data = set.as_flat().iter().map(|v| v * s).collect();
    Ok((set.with_data(set.dim(), data)?, s))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Flips the vector so its largest-magnitude entry (first on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

pub(crate) struct Eigen {
    pub values: Vec<f64>,
    /// Row-major `m x m`; column `c` is the eigenvector for `values[c]`.
    pub vectors: Vec<f64>,
}

/// Cyclic Jacobi eigensolver for a symmetric row-major `m x m` matrix.
pub(crate) fn symmetric_eigen(mut a: Vec<f64>, m: usize) -> Eigen {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..m {
            for q in (p + 1)..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off.sqrt() <= 1e-15 * frob || off == 0.0 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                a[p * m + q] = 0.0;
                a[q * m + p] = 0.0;
                for k in 0..m {
                    let (vkp, vkq) = (v[k * m + p], v[k * m + q]);
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Eigen {
        values: (0..m).map(|i| a[i * m + i]).collect(),
        vectors: v,
    }
}
