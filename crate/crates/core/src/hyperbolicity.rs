//! Gromov delta-hyperbolicity from a distance matrix.
//!
//! Two per-quadruple quantities are available:
//!
//! * [`DeltaFormula::FourPoint`]: for the three pair sums `d(a,b)+d(c,w)`, `d(a,c)+d(b,w)`,
//!   `d(a,w)+d(b,c)` sorted as `M1 >= M2 >= M3`, the value `(M1 - M2) / 2`. It does not depend
//!   on how the four points are labelled.
//! * [`DeltaFormula::Slack`]: for the labelled quadruple, the smallest `delta >= 0` with
//!   `[a,c]_w >= min([a,b]_w, [b,c]_w) - delta`, i.e. `max(0, min([a,b]_w, [b,c]_w) - [a,c]_w)`.
//!   Its maximum over the 24 labellings equals the four-point value.
//!
//! Sampled estimation draws quadruple `i` from its own counter-keyed stream and stores the
//! result in slot `i`; statistics are reduced sequentially afterwards, so results are
//! bitwise independent of the rayon pool size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{distinct_indices, stream, Purpose};
use crate::stats::{choose, Summary};
use crate::types::{DistanceMatrix, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaFormula {
    #[default]
    FourPoint,
    Slack,
}

impl std::str::FromStr for DeltaFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four_point" | "four-point" => Ok(DeltaFormula::FourPoint),
            "slack" => Ok(DeltaFormula::Slack),
            other => Err(Error::InvalidArgument(format!("unknown delta formula {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sampled,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaStats {
    pub delta_max: f64,
    pub delta_avg: f64,
    pub delta_std: f64,
    pub samples_evaluated: u64,
    pub mode: Mode,
    pub formula: DeltaFormula,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Seed>,
}

fn check_index(d: &DistanceMatrix, i: usize) -> Result<()> {
    if i >= d.n() {
        return Err(Error::IndexOutOfRange { index: i, n: d.n() });
    }
    Ok(())
}

/// `[a, b]_w = (d(a,w) + d(b,w) - d(a,b)) / 2`.
pub fn gromov_product(d: &DistanceMatrix, a: usize, b: usize, w: usize) -> Result<f64> {
    for i in [a, b, w] {
        check_index(d, i)?;
    }
    Ok(gromov(d, a, b, w))
}

#[inline]
fn gromov(d: &DistanceMatrix, a: usize, b: usize, w: usize) -> f64 {
    0.5 * (d.get(a, w) + d.get(b, w) - d.get(a, b))
}

#[inline]
fn four_point(d: &DistanceMatrix, a: usize, b: usize, c: usize, w: usize) -> f64 {
    let mut s = [
        d.get(a, b) + d.get(c, w),
        d.get(a, c) + d.get(b, w),
        d.get(a, w) + d.get(b, c),
    ];
    // descending
    if s[0] < s[1] {
        s.swap(0, 1);
    }
    if s[1] < s[2] {
        s.swap(1, 2);
    }
    if s[0] < s[1] {
        s.swap(0, 1);
    }
    0.5 * (s[0] - s[1])
}

#[inline]
fn slack(d: &DistanceMatrix, a: usize, b: usize, c: usize, w: usize) -> f64 {
    let ab = gromov(d, a, b, w);
    let bc = gromov(d, b, c, w);
    let ac = gromov(d, a, c, w);
    (ab.min(bc) - ac).max(0.0)
}

#[inline]
fn eval(d: &DistanceMatrix, q: [usize; 4], formula: DeltaFormula) -> f64 {
    match formula {
        DeltaFormula::FourPoint => four_point(d, q[0], q[1], q[2], q[3]),
        DeltaFormula::Slack => slack(d, q[0], q[1], q[2], q[3]),
    }
}

/// Delta value of the quadruple `(a, b, c, w)` under `formula`.
pub fn quadruple_delta(d: &DistanceMatrix, q: [usize; 4], formula: DeltaFormula) -> Result<f64> {
    for &i in &q {
        check_index(d, i)?;
    }
    for x in 0..4 {
        for y in (x + 1)..4 {
            if q[x] == q[y] {
                return Err(Error::RepeatedIndex(q.to_vec()));
            }
        }
    }
    Ok(eval(d, q, formula))
}

/// Number of distinct quadruples the exact enumeration visits for `formula`.
pub fn exhaustive_count(n: usize, formula: DeltaFormula) -> u64 {
    match formula {
        DeltaFormula::FourPoint => choose(n, 4),
        DeltaFormula::Slack => choose(n, 4).saturating_mul(24),
    }
}

fn require_four(d: &DistanceMatrix) -> Result<()> {
    if d.n() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: d.n() });
    }
    Ok(())
}

/// Estimates delta from `samples` random quadruples of distinct points.
///
/// Quadruples are drawn with replacement. When `samples` reaches the number of distinct
/// quadruples the call enumerates them all instead and reports [`Mode::Exact`].
pub fn sample_delta(
    d: &DistanceMatrix,
    samples: u64,
    seed: Seed,
    formula: DeltaFormula,
) -> Result<DeltaStats> {
    require_four(d)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    if samples >= exhaustive_count(d.n(), formula) {
        return exact_delta(d, formula);
    }
    let n = d.n();
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Quadruple, i);
            eval(d, distinct_indices::<4>(&mut rng, n), formula)
        })
        .collect();
    let s = Summary::of(&values);
    Ok(DeltaStats {
        delta_max: s.max,
        delta_avg: s.mean,
        delta_std: s.std,
        samples_evaluated: samples,
        mode: Mode::Sampled,
        formula,
        seed: Some(seed),
    })
}

/// Visits every quadruple whose first index is `a`, in a fixed order.
fn for_each_in_block(
    d: &DistanceMatrix,
    a: usize,
    formula: DeltaFormula,
    mut f: impl FnMut(f64),
) {
    let n = d.n();
    match formula {
        DeltaFormula::FourPoint => {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for w in (c + 1)..n {
                        f(four_point(d, a, b, c, w));
                    }
                }
            }
        }
        DeltaFormula::Slack => {
            for b in (0..n).filter(|&b| b != a) {
                for c in (0..n).filter(|&c| c != a && c != b) {
                    for w in (0..n).filter(|&w| w != a && w != b && w != c) {
                        f(slack(d, a, b, c, w));
                    }
                }
            }
        }
    }
}

/// Exact statistics over all unordered quadruples (four-point) or all labelled role
/// assignments (slack). O(n^4); meant for small n.
pub fn exact_delta(d: &DistanceMatrix, formula: DeltaFormula) -> Result<DeltaStats> {
    require_four(d)?;
    let n = d.n();

    // Per-block partials are sequential within a block and combined in block order.
    let first: Vec<(f64, f64, u64)> = (0..n)
        .into_par_iter()
        .map(|a| {
            let (mut max, mut sum, mut count) = (f64::NEG_INFINITY, 0.0, 0u64);
            for_each_in_block(d, a, formula, |v| {
                if v > max {
                    max = v;
                }
                sum += v;
                count += 1;
            });
            (max, sum, count)
        })
        .collect();
    let (mut max, mut sum, mut count) = (f64::NEG_INFINITY, 0.0, 0u64);
    for (m, s, c) in first {
        if m > max {
            max = m;
        }
        sum += s;
        count += c;
    }
    let mean = sum / count as f64;
    let sq: f64 = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut acc = 0.0;
            for_each_in_block(d, a, formula, |v| acc += (v - mean) * (v - mean));
            acc
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    Ok(DeltaStats {
        delta_max: max,
        delta_avg: mean,
        delta_std: (sq / count as f64).sqrt(),
        samples_evaluated: count,
        mode: Mode::Exact,
        formula,
        seed: None,
    })
}
