//! The reference measures on ℝ: the Cauchy law `λ` (pushforward of circle
//! Lebesgue measure, normalized so the Denjoy-Wolff point sits at ∞) and
//! Lebesgue measure `μ`, which the maps preserve.

use std::f64::consts::PI;
use std::ops::Range;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Interval;

/// Standard Cauchy law, density `1/(π(1+x²))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CauchyLaw;

impl CauchyLaw {
    pub fn density(&self, x: f64) -> f64 {
        1.0 / (PI * (1.0 + x * x))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        0.5 + x.atan() / PI
    }

    pub fn quantile(&self, u: f64) -> f64 {
        (PI * (u - 0.5)).tan()
    }

    pub fn measure(&self, a: f64, b: f64) -> f64 {
        lambda_interval(a, b)
    }
}

/// `λ((a, b)) = (arctan b − arctan a)/π`; infinite endpoints are allowed.
pub fn lambda_interval(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b, "lambda_interval({a}, {b})");
    // for two large positive endpoints, compare arctangents of reciprocals
    if a > 1.0 && b > 1.0 {
        return ((1.0 / a).atan() - (1.0 / b).atan()) / PI;
    }
    if a < -1.0 && b < -1.0 {
        return ((1.0 / a).atan() - (1.0 / b).atan()).abs() / PI;
    }
    (b.atan() - a.atan()) / PI
}

/// `λ` of the complement `(−∞, a] ∪ [b, ∞)`, computed without cancellation.
pub fn lambda_complement(a: f64, b: f64) -> f64 {
    lambda_interval(f64::NEG_INFINITY, a) + lambda_interval(b, f64::INFINITY)
}

pub fn lambda(iv: Interval) -> f64 {
    lambda_interval(iv.lo, iv.hi)
}

/// Lebesgue measure of `(a, b)`.
pub fn mu_interval(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    b - a
}

/// Deterministic counter-based source of random draws.
///
/// Draw `i` of a run is produced by its own ChaCha8 stream `i` under the run
/// seed, so results do not depend on how indices are split across workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeededSampler {
    seed: u64,
    counter: u64,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Independent generator for sample index `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Claims the next `count` sample indices.
    pub fn reserve(&mut self, count: u64) -> Range<u64> {
        let start = self.counter;
        self.counter += count;
        start..self.counter
    }

    /// Derived sampler for a sub-experiment, with its own stream family.
    pub fn fork(&self, label: u64) -> SeededSampler {
        let mut rng = self.stream(u64::MAX - label);
        SeededSampler::new(rng.next_u64())
    }

    /// `count` draws from the Cauchy law.
    pub fn sample_lambda(&mut self, count: usize) -> Vec<f64> {
        let range = self.reserve(count as u64);
        range.map(|i| cauchy_draw(&mut self.stream(i))).collect()
    }
}

/// Uniform draw in the open interval `(0, 1)`.
pub fn open_unit(rng: &mut impl Rng) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

pub fn cauchy_draw(rng: &mut impl Rng) -> f64 {
    CauchyLaw.quantile(open_unit(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_interval(f64::NEG_INFINITY, f64::INFINITY), 1.0);
        assert_relative_eq!(lambda_interval(-1.0, 1.0), 0.5, epsilon = 1e-15);
        let tail = lambda_complement(-10.0, 10.0);
        assert_relative_eq!(tail, (PI - 2.0 * 10f64.atan()) / PI, epsilon = 1e-15);
        assert!((tail - 0.06345).abs() < 1e-5);
    }

    #[test]
    fn lambda_far_tail_keeps_precision() {
        // 1/(πx) asymptotics
        let t = lambda_interval(1e12, f64::INFINITY);
        assert_relative_eq!(t, 1.0 / (PI * 1e12), max_relative = 1e-12);
        let t = lambda_interval(f64::NEG_INFINITY, -1e12);
        assert_relative_eq!(t, 1.0 / (PI * 1e12), max_relative = 1e-12);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu_interval(0.0, 1.0), 1.0);
        assert_eq!(mu_interval(-1.0, 1.0), 2.0);
    }

    #[test]
    fn sampler_is_deterministic_and_partition_free() {
        let a = SeededSampler::new(7).sample_lambda(1000);
        let b = SeededSampler::new(7).sample_lambda(1000);
        assert_eq!(a, b);
        let mut s = SeededSampler::new(7);
        let mut c = s.sample_lambda(400);
        c.extend(s.sample_lambda(600));
        assert_eq!(a, c);
        assert_ne!(a, SeededSampler::new(8).sample_lambda(1000));
    }

    #[test]
    fn sampler_matches_cauchy_law() {
        let mut xs = SeededSampler::new(2024).sample_lambda(100_000);
        xs.sort_by(f64::total_cmp);
        let m = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = CauchyLaw.cdf(x);
                (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks <= 0.01, "KS {ks}");
        let median = xs[xs.len() / 2];
        assert!(median.abs() <= 0.02, "median {median}");
        let inside = xs.iter().filter(|x| x.abs() < 1.0).count() as f64 / m;
        assert!((inside - 0.5).abs() <= 0.01, "fraction {inside}");
    }

    #[test]
    fn open_unit_never_hits_endpoints() {
        struct Extreme(u64);
        impl RngCore for Extreme {
            fn next_u32(&mut self) -> u32 {
                self.0 as u32
            }
            fn next_u64(&mut self) -> u64 {
                self.0
            }
            fn fill_bytes(&mut self, dst: &mut [u8]) {
                dst.fill(0)
            }
        }
        for v in [0, u64::MAX] {
            let u = open_unit(&mut Extreme(v));
            assert!(u > 0.0 && u < 1.0);
            assert!(CauchyLaw.quantile(u).is_finite());
        }
    }
}
