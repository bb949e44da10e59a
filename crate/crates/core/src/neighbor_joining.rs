//! Neighbor-joining Q-matrix statistics. No tree is reconstructed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Summary;
use crate::types::DistanceMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NjStats {
    pub nj_max: f64,
    pub nj_avg: f64,
    pub nj_std: f64,
    pub n: usize,
}

/// `Q(i,j) = (n-2) D(i,j) - sum_k D(i,k) - sum_k D(j,k)`, with a zero diagonal.
///
/// Returned row-major, `n * n`.
pub fn q_matrix(d: &DistanceMatrix) -> Result<Vec<f64>> {
    let n = d.n();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    if n == 3 {
        // every entry is -(d01 + d02 + d12); summing once keeps them identical
        let v = -(d.get(0, 1) + d.get(0, 2) + d.get(1, 2));
        return Ok(vec![0.0, v, v, v, 0.0, v, v, v, 0.0]);
    }
    let row_sums: Vec<f64> = (0..n).map(|i| d.row(i).iter().sum()).collect();
    let scale = (n - 2) as f64;
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| scale * d.get(i, j) - row_sums[i] - row_sums[j])
                .collect()
        })
        .collect();
    let mut q = vec![0.0; n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    Ok(q)
}

/// Max, mean and population std of `|Q(i,j)|` over `i < j`. All zero when `n < 3`.
pub fn nj_scores(d: &DistanceMatrix) -> NjStats {
    let n = d.n();
    if n < 3 {
        return NjStats { nj_max: 0.0, nj_avg: 0.0, nj_std: 0.0, n };
    }
    let q = q_matrix(d).expect("n >= 3");
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            values.push(q[i * n + j].abs());
        }
    }
    let s = Summary::of(&values);
    NjStats { nj_max: s.max, nj_avg: s.mean, nj_std: s.std, n }
}

/// The pair `i < j` minimizing Q; ties go to the lexicographically smallest pair.
pub fn argmin_q_pair(d: &DistanceMatrix) -> Result<(usize, usize)> {
    let q = q_matrix(d)?;
    let n = d.n();
    let mut best = (0, 1);
    let mut best_q = q[1];
    for i in 0..n {
        for j in (i + 1)..n {
            if q[i * n + j] < best_q {
                best_q = q[i * n + j];
                best = (i, j);
            }
        }
    }
    Ok(best)
}
