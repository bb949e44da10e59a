//! Euclidean and Poincare-ball pairwise distances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::dot;
use crate::types::{DistanceMatrix, EmbeddingSet, MetricTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    Poincare,
}

impl MetricKind {
    pub fn tag(self) -> MetricTag {
        match self {
            MetricKind::Euclidean => MetricTag::Euclidean,
            MetricKind::Poincare => MetricTag::Poincare,
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "poincare" => Ok(MetricKind::Poincare),
            other => Err(Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "vectors have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

#[inline]
fn squared_gap(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    Ok(squared_gap(x, y).sqrt())
}

pub fn poincare_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    let (nx, ny) = (dot(x, x), dot(y, y));
    let outside: Vec<usize> = [nx, ny]
        .iter()
        .enumerate()
        .filter(|(_, &n)| n >= 1.0 || n.is_nan())
        .map(|(i, _)| i)
        .collect();
    if !outside.is_empty() {
        return Err(Error::OutsideBall { rows: outside });
    }
    Ok(poincare_from_parts(squared_gap(x, y), nx, ny))
}

/// arcosh(1 + 2u) with u = |x-y|^2 / ((1-|x|^2)(1-|y|^2)).
///
/// Written as ln1p(2u + 2 sqrt(u(1+u))), which is ln(z + sqrt(z^2-1)) at z = 1 + 2u without
/// the cancellation in z^2 - 1 for nearby points.
#[inline]
fn poincare_from_parts(gap_sq: f64, norm_sq_x: f64, norm_sq_y: f64) -> f64 {
    let u = (gap_sq / ((1.0 - norm_sq_x) * (1.0 - norm_sq_y))).max(0.0);
    (2.0 * u + 2.0 * (u * (1.0 + u)).sqrt()).ln_1p()
}

/// Pairwise distance matrix over the rows of `set`.
///
/// Rows are filled in parallel; each upper-triangle entry is computed exactly once and
/// mirrored, so the output does not depend on the worker count.
pub fn build_distance_matrix(set: &EmbeddingSet, kind: MetricKind) -> Result<DistanceMatrix> {
    let n = set.n();
    let upper: Vec<Vec<f64>> = match kind {
        MetricKind::Euclidean => (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = set.row(i);
                ((i + 1)..n).map(|j| squared_gap(xi, set.row(j)).sqrt()).collect()
            })
            .collect(),
        MetricKind::Poincare => {
            let norms: Vec<f64> = set.rows().map(|r| dot(r, r)).collect();
            let outside: Vec<usize> = norms
                .iter()
                .enumerate()
                .filter(|(_, &v)| v >= 1.0 || v.is_nan())
                .map(|(i, _)| i)
                .collect();
            if !outside.is_empty() {
                return Err(Error::OutsideBall { rows: outside });
            }
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let xi = set.row(i);
                    ((i + 1)..n)
                        .map(|j| poincare_from_parts(squared_gap(xi, set.row(j)), norms[i], norms[j]))
                        .collect()
                })
                .collect()
        }
    };
    Ok(DistanceMatrix::from_upper_rows(n, kind.tag(), upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean_distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        let d = euclidean_distance(&[1.0, 1.0, 1.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((d - 3.7416573867739413).abs() < 1e-12);
        assert!(matches!(euclidean_distance(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare_distance(&[0.3, 0.1], &[0.3, 0.1]).unwrap(), 0.0);
        let d = poincare_distance(&[0.0, 0.0], &[0.5, 0.0]).unwrap();
        assert!((d - 1.0986122886681098).abs() < 1e-12);
        let d = poincare_distance(&[0.0, 0.0], &[0.9, 0.0]).unwrap();
        assert!((d - 2.9444389791664403).abs() < 1e-12);
    }

    #[test]
    fn poincare_rejects_points_outside_ball() {
        match poincare_distance(&[0.1, 0.0], &[1.0, 0.0]) {
            Err(Error::OutsideBall { rows }) => assert_eq!(rows, vec![1]),
            other => panic!("unexpected {other:?}"),
        }
        let s = EmbeddingSet::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        match build_distance_matrix(&s, MetricKind::Poincare) {
            Err(Error::OutsideBall { rows }) => assert_eq!(rows, vec![1, 2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn matrix_examples() {
        let s = EmbeddingSet::from_rows(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let d = build_distance_matrix(&s, MetricKind::Euclidean).unwrap();
        assert_eq!(d.to_rows(), vec![vec![0.0, 5.0], vec![5.0, 0.0]]);
        assert_eq!(d.tag(), MetricTag::Euclidean);

        let one = EmbeddingSet::from_rows(vec![vec![0.7]]).unwrap();
        assert_eq!(build_distance_matrix(&one, MetricKind::Euclidean).unwrap().to_rows(), vec![vec![0.0]]);

        let s = EmbeddingSet::from_rows(vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let d = build_distance_matrix(&s, MetricKind::Poincare).unwrap();
        let ln3 = 3f64.ln();
        assert!((d.get(0, 1) - ln3).abs() < 1e-12);
        assert!((d.get(0, 2) - ln3).abs() < 1e-12);
        // arcosh(1 + 2 * 0.5 / 0.5625) = arcosh(25/9) = ln(25/9 + sqrt(544)/9)
        let expected = ((25.0 + 544f64.sqrt()) / 9.0).ln();
        assert!((d.get(1, 2) - expected).abs() < 1e-12);
        assert!(d.validate(0.0).is_empty());
    }
}
