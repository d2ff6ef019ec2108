//! Occupation-time statistics: growth of `S_nE`, the Darling-Kac law, both
//! arcsine laws and Hopf's ratio ergodic theorem.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::laws::{EmpiricalDistribution, ReferenceLaw};
use super::{iterate, parallel_samples, unzip_retries, with_resampling, InitialLaw, Target};
use crate::error::{Error, Result};
use crate::maps::{ParabolicMap, Side};
use crate::measures::SeededSampler;
use crate::Interval;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccupationRow {
    pub horizon: u64,
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
    pub mean: f64,
}

/// Quantiles of `S_nE/n^{½−ε}` per horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccupationTable {
    pub exponent: f64,
    pub rows: Vec<OccupationRow>,
    /// `S_nE` per orbit and horizon.
    #[serde(skip)]
    pub counts: Vec<Vec<u64>>,
    pub resampled: u64,
}

fn check_horizons(horizons: &[u64]) -> Result<()> {
    if horizons.is_empty() {
        return Err(Error::invalid("at least one horizon is required"));
    }
    if horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("horizons must be positive and increasing"));
    }
    Ok(())
}

fn bounded(e: Interval) -> Result<f64> {
    if !e.is_bounded() || e.length() <= 0.0 {
        return Err(Error::invalid(format!(
            "target {e} must be bounded with positive length"
        )));
    }
    Ok(e.length())
}

pub fn occupation_growth(
    map: &ParabolicMap,
    e: Interval,
    epsilon: f64,
    horizons: &[u64],
    m: usize,
    sampler: &mut SeededSampler,
) -> Result<OccupationTable> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid("epsilon must lie in (0, 1/2)"));
    }
    occupation_growth_exponent(map, e, 0.5 - epsilon, horizons, m, sampler)
}

/// As [`occupation_growth`] with the normalizing exponent given directly;
/// exponent 0 tabulates raw counts.
pub fn occupation_growth_exponent(
    map: &ParabolicMap,
    e: Interval,
    exponent: f64,
    horizons: &[u64],
    m: usize,
    sampler: &mut SeededSampler,
) -> Result<OccupationTable> {
    check_horizons(horizons)?;
    bounded(e)?;
    if m == 0 {
        return Ok(OccupationTable {
            exponent,
            rows: vec![],
            counts: vec![],
            resampled: 0,
        });
    }
    let target = Target::Inside(e);
    let n = *horizons.last().expect("non-empty");
    let results = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &InitialLaw::Cauchy, |x0| {
            let mut counts = Vec::with_capacity(horizons.len());
            let mut s = 0u64;
            let mut next = 0usize;
            iterate(map, x0, n, |k, x| {
                if target.contains(x) {
                    s += 1;
                }
                if k + 1 == horizons[next] {
                    counts.push(s);
                    next += 1;
                }
            })
            .map_err(|(_, hit)| hit)?;
            Ok(counts)
        })
    });
    let (counts, resampled) = unzip_retries(results)?;
    let rows = horizons
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let scale = (h as f64).powf(exponent);
            let values = counts.iter().map(|c| c[j] as f64 / scale).collect();
            let dist = EmpiricalDistribution::new(values)?;
            Ok(OccupationRow {
                horizon: h,
                p10: dist.quantile(0.1),
                median: dist.median(),
                p90: dist.quantile(0.9),
                mean: dist.mean(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OccupationTable {
        exponent,
        rows,
        counts,
        resampled,
    })
}

/// An empirical law compared with its reference limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitLawReport {
    pub statistic: String,
    pub law: ReferenceLaw,
    pub horizon: u64,
    pub samples: usize,
    pub ks: f64,
    pub mean: f64,
    pub median: f64,
    pub resampled: u64,
    #[serde(skip)]
    pub distribution: Option<EmpiricalDistribution>,
}

impl LimitLawReport {
    pub(crate) fn build(
        statistic: &str,
        law: ReferenceLaw,
        horizon: u64,
        values: Vec<f64>,
        resampled: u64,
    ) -> Result<Self> {
        let samples = values.len();
        let dist = EmpiricalDistribution::new(values)?;
        Ok(LimitLawReport {
            statistic: statistic.into(),
            law,
            horizon,
            samples,
            ks: dist.ks_law(law),
            mean: dist.mean(),
            median: dist.median(),
            resampled,
            distribution: Some(dist),
        })
    }
}

fn require_generalized(map: &ParabolicMap) -> Result<()> {
    if map.as_generalized_boole().is_none() {
        return Err(Error::Unsupported(
            "the limit laws are established for finite-degree maps only".into(),
        ));
    }
    Ok(())
}

/// `(π/√(2n))·S_nE/μ(E)` over `m` orbits, against the half-normal law.
pub fn darling_kac(
    map: &ParabolicMap,
    e: Interval,
    n: u64,
    m: usize,
    law: InitialLaw,
    sampler: &mut SeededSampler,
) -> Result<LimitLawReport> {
    require_generalized(map)?;
    law.validate()?;
    if n == 0 || m == 0 {
        return Err(Error::invalid("horizon and sample count must be positive"));
    }
    let mu = bounded(e)?;
    let target = Target::Inside(e);
    let scale = PI / (2.0 * n as f64).sqrt() / mu;
    let results = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &law, |x0| {
            let mut s = 0u64;
            iterate(map, x0, n, |_, x| {
                if target.contains(x) {
                    s += 1;
                }
            })
            .map_err(|(_, hit)| hit)?;
            Ok(s as f64 * scale)
        })
    });
    let (values, resampled) = unzip_retries(results)?;
    LimitLawReport::build(
        "darling_kac",
        ReferenceLaw::HalfNormalPi,
        n,
        values,
        resampled,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcsineOccupationReport {
    pub side: Side,
    pub target: Interval,
    pub report: LimitLawReport,
    /// KS distance between the laws of `S_nA⁺/n` and `S_nA⁻/n`, computed on
    /// the same orbits.
    pub side_ks: f64,
}

/// `S_nA/n` for `A = (z⁺, ∞)` or `(−∞, z⁻)`, against the arcsine law.
pub fn arcsine_occupation(
    map: &ParabolicMap,
    side: Side,
    n: u64,
    m: usize,
    sampler: &mut SeededSampler,
) -> Result<ArcsineOccupationReport> {
    require_generalized(map)?;
    if n == 0 || m == 0 {
        return Err(Error::invalid("horizon and sample count must be positive"));
    }
    let d = map.core_interval()?;
    let results = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &InitialLaw::Cauchy, |x0| {
            let (mut plus, mut minus) = (0u64, 0u64);
            iterate(map, x0, n, |_, x| {
                if x > d.hi {
                    plus += 1;
                } else if x < d.lo {
                    minus += 1;
                }
            })
            .map_err(|(_, hit)| hit)?;
            Ok((plus as f64 / n as f64, minus as f64 / n as f64))
        })
    });
    let (pairs, resampled) = unzip_retries(results)?;
    let (plus, minus): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (own, other, target) = match side {
        Side::Plus => (plus, minus, Interval::new(d.hi, f64::INFINITY)),
        Side::Minus => (minus, plus, Interval::new(f64::NEG_INFINITY, d.lo)),
    };
    let other = EmpiricalDistribution::new(other)?;
    let report = LimitLawReport::build(
        "arcsine_occupation",
        ReferenceLaw::Arcsine,
        n,
        own,
        resampled,
    )?;
    let side_ks = report
        .distribution
        .as_ref()
        .expect("built with distribution")
        .ks_two_sample(&other);
    Ok(ArcsineOccupationReport {
        side,
        target,
        report,
        side_ks,
    })
}

/// `Z_nE/n` against the arcsine law.
pub fn arcsine_last_visit(
    map: &ParabolicMap,
    e: Interval,
    n: u64,
    m: usize,
    sampler: &mut SeededSampler,
) -> Result<LimitLawReport> {
    require_generalized(map)?;
    if n == 0 || m == 0 {
        return Err(Error::invalid("horizon and sample count must be positive"));
    }
    bounded(e)?;
    let target = Target::Inside(e);
    let results = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &InitialLaw::Cauchy, |x0| {
            let mut z = 0u64;
            iterate(map, x0, n, |k, x| {
                if target.contains(x) {
                    z = k + 1;
                }
            })
            .map_err(|(_, hit)| hit)?;
            Ok(z as f64 / n as f64)
        })
    });
    let (values, resampled) = unzip_retries(results)?;
    LimitLawReport::build(
        "arcsine_last_visit",
        ReferenceLaw::Arcsine,
        n,
        values,
        resampled,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HopfReport {
    pub horizon: u64,
    pub expected: f64,
    pub median: f64,
    pub mean: f64,
    /// Orbits with `S_nF = 0`, left out of the ratio.
    pub excluded: usize,
    pub resampled: u64,
    #[serde(skip)]
    pub ratios: Option<EmpiricalDistribution>,
}

/// Distribution of `S_nE/S_nF`, to be compared with `μ(E)/μ(F)`.
pub fn hopf_ratio(
    map: &ParabolicMap,
    e: Interval,
    f: Interval,
    n: u64,
    m: usize,
    sampler: &mut SeededSampler,
) -> Result<HopfReport> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("horizon and sample count must be positive"));
    }
    let expected = bounded(e)? / bounded(f)?;
    let (te, tf) = (Target::Inside(e), Target::Inside(f));
    let results = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &InitialLaw::Cauchy, |x0| {
            let (mut se, mut sf) = (0u64, 0u64);
            iterate(map, x0, n, |_, x| {
                se += te.contains(x) as u64;
                sf += tf.contains(x) as u64;
            })
            .map_err(|(_, hit)| hit)?;
            Ok((se, sf))
        })
    });
    let (pairs, resampled) = unzip_retries(results)?;
    let ratios: Vec<f64> = pairs
        .iter()
        .filter(|(_, sf)| *sf > 0)
        .map(|&(se, sf)| se as f64 / sf as f64)
        .collect();
    let excluded = pairs.len() - ratios.len();
    if ratios.is_empty() {
        return Err(Error::InsufficientSamples("no orbit visited F".into()));
    }
    let dist = EmpiricalDistribution::new(ratios)?;
    Ok(HopfReport {
        horizon: n,
        expected,
        median: dist.median(),
        mean: dist.mean(),
        excluded,
        resampled,
        ratios: Some(dist),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{CotangentMap, GeneralizedBoole};

    fn boole() -> ParabolicMap {
        GeneralizedBoole::boole().into()
    }

    fn e() -> Interval {
        Interval::new(-1.0, 1.0)
    }

    #[test]
    fn empty_table_without_samples() {
        let t = occupation_growth(
            &boole(),
            e(),
            1.0 / 6.0,
            &[10, 100],
            0,
            &mut SeededSampler::new(1),
        )
        .unwrap();
        assert!(t.rows.is_empty());
    }

    #[test]
    fn raw_counts_are_monotone_per_orbit() {
        let t = occupation_growth_exponent(
            &boole(),
            e(),
            0.0,
            &[10, 100, 1000],
            50,
            &mut SeededSampler::new(1),
        )
        .unwrap();
        for c in &t.counts {
            assert!(c.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(t.rows.windows(2).all(|w| w[0].median <= w[1].median));
    }

    #[test]
    fn bad_parameters_rejected() {
        let mut s = SeededSampler::new(1);
        assert!(occupation_growth(&boole(), e(), 0.5, &[10], 5, &mut s).is_err());
        assert!(occupation_growth(&boole(), e(), 0.1, &[10, 10], 5, &mut s).is_err());
        assert!(darling_kac(&boole(), e(), 0, 5, InitialLaw::Cauchy, &mut s).is_err());
        let cot = ParabolicMap::from(CotangentMap);
        assert!(matches!(
            darling_kac(&cot, e(), 10, 5, InitialLaw::Cauchy, &mut s),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn hopf_equal_targets_give_one() {
        let r = hopf_ratio(&boole(), e(), e(), 1000, 50, &mut SeededSampler::new(2)).unwrap();
        let d = r.ratios.unwrap();
        assert!(d.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn hopf_nested_targets_bounded_by_one() {
        let inner = Interval::new(0.0, 0.5);
        let r = hopf_ratio(&boole(), inner, e(), 1000, 50, &mut SeededSampler::new(2)).unwrap();
        assert!(r.ratios.unwrap().values().iter().all(|&v| v <= 1.0));
    }

    #[test]
    fn small_scale_limit_laws_are_sane() {
        let mut s = SeededSampler::new(9);
        let dk = darling_kac(&boole(), e(), 2000, 400, InitialLaw::Cauchy, &mut s).unwrap();
        assert!(dk.distribution.unwrap().values().iter().all(|&v| v >= 0.0));
        assert!(dk.ks < 0.2, "ks {}", dk.ks);
        let last = arcsine_last_visit(&boole(), e(), 2000, 400, &mut s).unwrap();
        assert!(last
            .distribution
            .unwrap()
            .values()
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v)));
        let occ = arcsine_occupation(&boole(), Side::Plus, 2000, 400, &mut s).unwrap();
        assert!((occ.report.mean - 0.5).abs() < 0.1);
        assert_eq!(occ.target.lo, 1.0);
    }
}
