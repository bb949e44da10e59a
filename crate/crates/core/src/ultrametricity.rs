//! Ultrametric-inequality violation statistics.
//!
//! For a triple with distances `d_ij, d_jk, d_ik` the violation is
//! `max(d_ik - max(d_ij, d_jk), d_ij - max(d_ik, d_jk), d_jk - max(d_ij, d_ik), 0)`, which is
//! the largest side minus the second largest. A triple counts as violating when its value
//! exceeds `epsilon`; max/avg/std are taken over the violating triples only.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolicity::Mode;
use crate::rng::{stream, Purpose};
use crate::stats::{choose, Summary};
use crate::types::{DistanceMatrix, Seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltraStats {
    pub max_violation: f64,
    pub avg_violation: f64,
    pub std_violation: f64,
    pub num_violations: u64,
    pub total_triples: u64,
    /// Mean violation over every evaluated triple, violating or not.
    pub avg_over_all_triples: f64,
    pub epsilon: f64,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Seed>,
}

#[inline]
fn violation(d: &DistanceMatrix, i: usize, j: usize, k: usize) -> f64 {
    let (dij, djk, dik) = (d.get(i, j), d.get(j, k), d.get(i, k));
    let v1 = dik - dij.max(djk);
    let v2 = dij - dik.max(djk);
    let v3 = djk - dij.max(dik);
    v1.max(v2).max(v3).max(0.0)
}

pub fn triple_violation(d: &DistanceMatrix, i: usize, j: usize, k: usize) -> Result<f64> {
    for idx in [i, j, k] {
        if idx >= d.n() {
            return Err(Error::IndexOutOfRange { index: idx, n: d.n() });
        }
    }
    if i == j || j == k || i == k {
        return Err(Error::RepeatedIndex(vec![i, j, k]));
    }
    Ok(violation(d, i, j, k))
}

fn require_three(d: &DistanceMatrix) -> Result<()> {
    if d.n() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: d.n() });
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(())
}

fn summarize(values: &[f64], epsilon: f64, mode: Mode, seed: Option<Seed>) -> UltraStats {
    let violating: Vec<f64> = values.iter().copied().filter(|&v| v > epsilon).collect();
    let s = Summary::of(&violating);
    let all = Summary::of(values);
    UltraStats {
        max_violation: s.max,
        avg_violation: s.mean,
        std_violation: s.std,
        num_violations: violating.len() as u64,
        total_triples: values.len() as u64,
        avg_over_all_triples: all.mean,
        epsilon,
        mode,
        seed,
    }
}

/// Evaluates `samples` distinct triples drawn without replacement.
///
/// When `C(n,3) <= 4 * samples` rejection sampling would thrash, so every triple is
/// enumerated instead and the result is marked [`Mode::Exact`].
pub fn sample_ultrametricity(
    d: &DistanceMatrix,
    samples: u64,
    epsilon: f64,
    seed: Seed,
) -> Result<UltraStats> {
    require_three(d)?;
    check_epsilon(epsilon)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let n = d.n();
    if choose(n, 3) <= samples.saturating_mul(4) {
        return exact_ultrametricity(d, epsilon);
    }

    // Uniqueness needs a sequential pass; evaluation afterwards is parallel.
    let mut rng = stream(seed, Purpose::Triple, 0);
    let mut seen = HashSet::with_capacity(samples as usize);
    let mut triples = Vec::with_capacity(samples as usize);
    while (triples.len() as u64) < samples {
        let mut t = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
        t.sort_unstable();
        if t[0] == t[1] || t[1] == t[2] {
            continue;
        }
        if seen.insert(t) {
            triples.push(t);
        }
    }
    let values: Vec<f64> = triples
        .par_iter()
        .map(|t| violation(d, t[0], t[1], t[2]))
        .collect();
    Ok(summarize(&values, epsilon, Mode::Sampled, Some(seed)))
}

/// Evaluates every unordered triple once. O(n^3).
pub fn exact_ultrametricity(d: &DistanceMatrix, epsilon: f64) -> Result<UltraStats> {
    require_three(d)?;
    check_epsilon(epsilon)?;
    let n = d.n();
    let blocks: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    out.push(violation(d, i, j, k));
                }
            }
            out
        })
        .collect();
    let values: Vec<f64> = blocks.concat();
    Ok(summarize(&values, epsilon, Mode::Exact, None))
}

/// True when no triple violates the ultrametric inequality by more than `epsilon`.
pub fn is_ultrametric(d: &DistanceMatrix, epsilon: f64) -> Result<bool> {
    require_three(d)?;
    check_epsilon(epsilon)?;
    let n = d.n();
    Ok((0..n).into_par_iter().all(|i| {
        ((i + 1)..n).all(|j| ((j + 1)..n).all(|k| violation(d, i, j, k) <= epsilon))
    }))
}
