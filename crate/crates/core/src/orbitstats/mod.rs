//! Orbit simulation and the statistics of infinite ergodic theory:
//! occupation, return, escape and last-visit times, the wandering rate,
//! Hopf ratios and the α = ½ limit laws. The finite-measure comparison on
//! the circle lives in [`circle`].

pub mod circle;
pub mod laws;
mod limits;
mod tails;

pub use laws::{fit_line, fit_loglog, EmpiricalDistribution, LineFit, ReferenceLaw};
pub use limits::{
    arcsine_last_visit, arcsine_occupation, darling_kac, hopf_ratio, occupation_growth,
    occupation_growth_exponent, ArcsineOccupationReport, HopfReport, LimitLawReport, OccupationRow,
    OccupationTable,
};
pub use tails::{
    escape_time_tail, return_time_tail, wandering_rate, EscapeRow, EscapeTail, ReturnTail, TailBin,
    WanderingReport,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PoleHit, Result};
use crate::maps::IntervalMap;
use crate::measures::{cauchy_draw, open_unit, SeededSampler};
use crate::Interval;

/// Give up on a sample after this many consecutive pole hits.
pub const MAX_RESAMPLES: u32 = 1000;

/// A finite target (bounded interval) or an infinite one (complement of a
/// bounded interval, or a half-line given as an unbounded interval).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Inside(Interval),
    Outside(Interval),
}

impl Target {
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Target::Inside(iv) => iv.contains(x),
            Target::Outside(iv) => x < iv.lo || x > iv.hi,
        }
    }

    /// Lebesgue measure, if finite.
    pub fn mu(&self) -> Option<f64> {
        match self {
            Target::Inside(iv) if iv.is_bounded() => Some(iv.length()),
            _ => None,
        }
    }
}

impl From<Interval> for Target {
    fn from(iv: Interval) -> Self {
        Target::Inside(iv)
    }
}

/// Law of the initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum InitialLaw {
    /// The reference measure `λ`.
    Cauchy,
    /// Centred normal with standard deviation `sigma`, conditioned on
    /// `|x| ≤ bound`.
    TruncatedGaussian { sigma: f64, bound: f64 },
    /// Lebesgue measure normalized on a bounded interval.
    Uniform { lo: f64, hi: f64 },
}

impl InitialLaw {
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            InitialLaw::Cauchy => cauchy_draw(rng),
            InitialLaw::TruncatedGaussian { sigma, bound } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let x = sigma * z;
                if x.abs() <= bound {
                    break x;
                }
            },
            InitialLaw::Uniform { lo, hi } => lo + (hi - lo) * open_unit(rng),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialLaw::Cauchy => Ok(()),
            InitialLaw::TruncatedGaussian { sigma, bound } if sigma > 0.0 && bound > 0.0 => Ok(()),
            InitialLaw::Uniform { lo, hi } if lo < hi && lo.is_finite() && hi.is_finite() => Ok(()),
            _ => Err(Error::invalid(format!("bad initial law {self:?}"))),
        }
    }
}

/// Statistics of a single orbit `x₀, T(x₀), …, T^{n−1}(x₀)` relative to a
/// target `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitStatistics {
    pub horizon: u64,
    /// Orbit points actually examined (`horizon` unless truncated).
    pub steps: u64,
    /// `S_nE`.
    pub occupation: u64,
    /// `Z_nE`: one plus the index of the last visit, 0 without visits.
    pub last_visit: u64,
    /// Gaps between consecutive visits.
    pub return_times: Vec<u64>,
    /// First `k ≥ 0` with `T^k(x₀) ∈ E`.
    pub escape_time: Option<u64>,
    pub truncated: Option<PoleHit>,
}

/// Runs the orbit of `x0` for `n` steps, calling `visit(k, x_k)`.
///
/// The point `x_k` is only visited after `T(x_k)` was computed, so an orbit
/// is cut at the first point inside a pole guard, before that point counts.
#[inline]
pub fn iterate<M: IntervalMap + ?Sized>(
    map: &M,
    x0: f64,
    n: u64,
    mut visit: impl FnMut(u64, f64),
) -> std::result::Result<(), (u64, PoleHit)> {
    let mut x = x0;
    for k in 0..n {
        let next = map.eval(x).map_err(|hit| (k, hit))?;
        visit(k, x);
        x = next;
    }
    Ok(())
}

/// Single-pass statistics; a pole hit ends the orbit and is recorded in
/// `truncated`.
pub fn simulate_orbit_partial<M: IntervalMap + ?Sized>(
    map: &M,
    x0: f64,
    target: Target,
    n: u64,
) -> OrbitStatistics {
    let mut stats = OrbitStatistics {
        horizon: n,
        steps: n,
        occupation: 0,
        last_visit: 0,
        return_times: Vec::new(),
        escape_time: None,
        truncated: None,
    };
    let mut previous: Option<u64> = None;
    let outcome = iterate(map, x0, n, |k, x| {
        if target.contains(x) {
            stats.occupation += 1;
            stats.last_visit = k + 1;
            if let Some(p) = previous {
                stats.return_times.push(k - p);
            } else {
                stats.escape_time = Some(k);
            }
            previous = Some(k);
        }
    });
    if let Err((k, hit)) = outcome {
        stats.steps = k;
        stats.truncated = Some(hit);
    }
    stats
}

/// Like [`simulate_orbit_partial`] but fails with
/// [`Error::OrbitTruncated`] on a pole hit.
pub fn simulate_orbit<M: IntervalMap + ?Sized>(
    map: &M,
    x0: f64,
    target: Target,
    n: u64,
) -> Result<OrbitStatistics> {
    if n == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if !x0.is_finite() {
        return Err(Error::invalid("initial point must be finite"));
    }
    let stats = simulate_orbit_partial(map, x0, target, n);
    match stats.truncated {
        Some(hit) => Err(Error::OrbitTruncated {
            steps: stats.steps as usize,
            hit,
        }),
        None => Ok(stats),
    }
}

/// Evaluates `f` on `m` fresh sample indices in parallel. Output order
/// follows the sample index, whatever the thread count.
pub(crate) fn parallel_samples<T, F>(sampler: &mut SeededSampler, m: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    let range = sampler.reserve(m as u64);
    let base = range.start;
    let frozen = sampler.clone();
    (0..m)
        .into_par_iter()
        .map(|i| f(&mut frozen.stream(base + i as u64)))
        .collect()
}

/// Draws initial points from `law` until `run` completes without a pole hit;
/// returns the result and the number of discarded draws.
pub(crate) fn with_resampling<R>(
    rng: &mut ChaCha8Rng,
    law: &InitialLaw,
    mut run: impl FnMut(f64) -> std::result::Result<R, PoleHit>,
) -> Result<(R, u32)> {
    for retries in 0..=MAX_RESAMPLES {
        let x0 = law.draw(rng);
        if let Ok(r) = run(x0) {
            return Ok((r, retries));
        }
    }
    Err(Error::InsufficientSamples(format!(
        "{MAX_RESAMPLES} consecutive orbits hit a pole"
    )))
}

/// Like [`with_resampling`], with initial points drawn from `λ` and
/// rejected until they fall in `accept`.
pub(crate) fn with_conditioned_resampling<R>(
    rng: &mut ChaCha8Rng,
    accept: impl Fn(f64) -> bool,
    mut run: impl FnMut(f64) -> std::result::Result<R, PoleHit>,
) -> Result<(R, u32)> {
    for retries in 0..=MAX_RESAMPLES {
        let x0 = loop {
            let x = cauchy_draw(rng);
            if accept(x) {
                break x;
            }
        };
        if let Ok(r) = run(x0) {
            return Ok((r, retries));
        }
    }
    Err(Error::InsufficientSamples(format!(
        "{MAX_RESAMPLES} consecutive orbits hit a pole"
    )))
}

pub(crate) fn unzip_retries<R>(results: Vec<Result<(R, u32)>>) -> Result<(Vec<R>, u64)> {
    let mut out = Vec::with_capacity(results.len());
    let mut retries = 0u64;
    for r in results {
        let (v, k) = r?;
        out.push(v);
        retries += k as u64;
    }
    Ok((out, retries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::GeneralizedBoole;
    use approx::assert_relative_eq;

    fn e() -> Target {
        Target::Inside(Interval::new(-1.0, 1.0))
    }

    #[test]
    fn pole_hit_truncates_after_first_point() {
        let t = GeneralizedBoole::boole();
        let s = simulate_orbit_partial(&t, 1.0, e(), 10);
        assert_eq!(s.occupation, 1);
        assert_eq!(s.steps, 1);
        assert!(s.truncated.is_some());
        assert!(matches!(
            simulate_orbit(&t, 1.0, e(), 10),
            Err(Error::OrbitTruncated { steps: 1, .. })
        ));
    }

    #[test]
    fn hand_iterated_orbit() {
        let t = GeneralizedBoole::boole();
        let s = simulate_orbit(&t, 2.0, e(), 3).unwrap();
        assert_eq!(s.occupation, 1);
        assert_eq!(s.last_visit, 3);
        assert_eq!(s.escape_time, Some(2));
        let s = simulate_orbit(&t, 0.5, e(), 1).unwrap();
        assert_eq!((s.occupation, s.last_visit), (1, 1));
        assert!(simulate_orbit(&t, 0.5, e(), 0).is_err());
    }

    #[test]
    fn return_times_are_visit_gaps() {
        let t = GeneralizedBoole::boole();
        let s = simulate_orbit(&t, 0.3, e(), 2000).unwrap();
        assert_eq!(s.return_times.len() as u64 + 1, s.occupation);
        let first = s.escape_time.unwrap();
        let total: u64 = s.return_times.iter().sum();
        assert_eq!(first + total + 1, s.last_visit);
        assert!(s.return_times.iter().all(|&r| r >= 1));
    }

    #[test]
    fn targets() {
        let out = Target::Outside(Interval::new(-1.0, 1.0));
        assert!(out.contains(2.0) && !out.contains(0.0) && !out.contains(1.0));
        assert_eq!(out.mu(), None);
        assert_eq!(e().mu(), Some(2.0));
        let half = Target::Inside(Interval::new(1.0, f64::INFINITY));
        assert!(half.contains(1e300));
        assert_eq!(half.mu(), None);
    }

    #[test]
    fn initial_laws() {
        let s = SeededSampler::new(3);
        let mut rng = s.stream(0);
        let g = InitialLaw::TruncatedGaussian {
            sigma: 1.0,
            bound: 0.5,
        };
        for _ in 0..1000 {
            assert!(g.draw(&mut rng).abs() <= 0.5);
        }
        let u = InitialLaw::Uniform { lo: 2.0, hi: 3.0 };
        let mean: f64 = (0..10_000).map(|_| u.draw(&mut rng)).sum::<f64>() / 10_000.0;
        assert_relative_eq!(mean, 2.5, epsilon = 0.01);
        assert!(InitialLaw::Uniform { lo: 1.0, hi: 1.0 }.validate().is_err());
    }

    #[test]
    fn parallel_samples_follow_index_order() {
        let mut a = SeededSampler::new(5);
        let v = parallel_samples(&mut a, 100, cauchy_draw);
        let w = SeededSampler::new(5).sample_lambda(100);
        assert_eq!(v, w);
        assert_eq!(a.counter(), 100);
    }
}
