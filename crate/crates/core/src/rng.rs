//! Counter-based random streams.
//!
//! Every stochastic draw is keyed by `(seed, purpose, index)`: a ChaCha8 generator seeded
//! from the user seed, with its 64-bit stream id set from the purpose and index. Sample `i`
//! therefore sees the same numbers no matter which worker evaluates it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::Seed;

/// Stream families, so distinct operations never share numbers under one seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Purpose {
    Quadruple = 1,
    Triple = 2,
    Sphere = 3,
    Graph = 4,
    Disk = 5,
    Tree = 6,
    Dendrogram = 7,
    KMeans = 8,
}

/// Generator for the `index`-th draw of `purpose`.
pub(crate) fn stream(seed: Seed, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    // 8 high bits select the family, the rest the counter.
    rng.set_stream(((purpose as u64) << 56) ^ index);
    rng
}

/// Draws `K` distinct indices in `0..n` by rejection. Requires `n >= K`.
pub(crate) fn distinct_indices<const K: usize>(rng: &mut impl Rng, n: usize) -> [usize; K] {
    debug_assert!(n >= K);
    let mut out = [0usize; K];
    let mut filled = 0;
    while filled < K {
        let c = rng.gen_range(0..n);
        if !out[..filled].contains(&c) {
            out[filled] = c;
            filled += 1;
        }
    }
    out
}

/// Standard normal variate via the Box-Muller transform.
pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    loop {
        // u1 in (0, 1]
        let u1 = 1.0 - rng.gen::<f64>();
        let u2 = rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let z = r * (std::f64::consts::TAU * u2).cos();
        if z.is_finite() {
            return z;
        }
    }
}
