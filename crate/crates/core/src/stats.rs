/// Max, mean and population standard deviation of a slice, reduced in index order.
///
/// Returns all zeros for an empty slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        if values.is_empty() {
            return Summary { max: 0.0, mean: 0.0, std: 0.0 };
        }
        let len = values.len() as f64;
        // shifting by the first value keeps constant inputs exact
        let shift = values[0];
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &v in values {
            if v > max {
                max = v;
            }
            sum += v - shift;
        }
        let offset = sum / len;
        let mean = shift + offset;
        let mut sq = 0.0;
        for &v in values {
            let d = (v - shift) - offset;
            sq += d * d;
        }
        Summary { max, mean, std: (sq / len).sqrt() }
    }
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn choose(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_has_zero_spread() {
        let s = Summary::of(&[0.1 + 0.2; 3]);
        assert_eq!(s.mean, 0.1 + 0.2);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn population_std() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.max, 9.0);
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.std, 2.0);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(Summary::of(&[]), Summary { max: 0.0, mean: 0.0, std: 0.0 });
    }

    #[test]
    fn binomials() {
        assert_eq!(choose(4, 4), 1);
        assert_eq!(choose(15, 4), 1365);
        assert_eq!(choose(60, 3), 34220);
        assert_eq!(choose(3, 4), 0);
    }
}
