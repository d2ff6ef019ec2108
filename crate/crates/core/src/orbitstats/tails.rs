//! Return-time, escape-time and wandering-rate tails.

use serde::{Deserialize, Serialize};

use super::laws::{fit_loglog, LineFit};
use super::{
    parallel_samples, unzip_retries, with_conditioned_resampling, with_resampling, InitialLaw,
};
use crate::error::{Error, PoleHit, Result};
use crate::maps::{IntervalMap, ParabolicMap, Side};
use crate::measures::{lambda, lambda_complement, SeededSampler};
use crate::Interval;

/// Smallest number of returns accepted in a reported bin.
pub const MIN_BIN_COUNT: u64 = 100;

/// First return time to `e` of `x0 ∈ e`, or `None` beyond `n_max`.
fn first_return<M: IntervalMap + ?Sized>(
    map: &M,
    x0: f64,
    e: Interval,
    n_max: u64,
) -> std::result::Result<Option<u64>, PoleHit> {
    let mut x = x0;
    for k in 1..=n_max {
        x = map.eval(x)?;
        if e.contains(x) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailBin {
    pub lo: u64,
    pub hi: u64,
    pub count: u64,
    /// Average of `λ̂(E_n)` over `lo ≤ n < hi`.
    pub lambda_hat: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnTail {
    pub target: Interval,
    pub samples: usize,
    /// `counts[n−1]`: samples with `τ_E = n`.
    pub counts: Vec<u64>,
    /// Samples with `τ_E > n_max`.
    pub censored: u64,
    pub bins: Vec<TailBin>,
    pub fit: LineFit,
    pub resampled: u64,
}

impl ReturnTail {
    /// `λ̂(E_n) = λ(E)·#{τ = n}/M`.
    pub fn lambda_hat(&self, n: u64) -> f64 {
        if n == 0 || n as usize > self.counts.len() {
            return 0.0;
        }
        lambda(self.target) * self.counts[n as usize - 1] as f64 / self.samples as f64
    }
}

/// Estimates `λ(E_n)`, `E_n = {x ∈ E : τ_E(x) = n}`, from `m` samples of
/// `λ` conditioned on `E`, and fits the log-log slope over the dyadic bins
/// `[b, 2b)` with `bin_min ≤ b` and `2b ≤ n_max`.
pub fn return_time_tail(
    map: &ParabolicMap,
    e: Interval,
    n_max: u64,
    bin_min: u64,
    m: usize,
    sampler: &mut SeededSampler,
) -> Result<ReturnTail> {
    if !e.is_bounded() || e.length() <= 0.0 {
        return Err(Error::invalid("return times need a bounded target"));
    }
    if bin_min == 0 || 2 * bin_min > n_max {
        return Err(Error::invalid("need 1 ≤ bin_min and 2·bin_min ≤ n_max"));
    }
    if m == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let results = parallel_samples(sampler, m, |rng| {
        with_conditioned_resampling(rng, |x| e.contains(x), |x0| first_return(map, x0, e, n_max))
    });
    let (taus, resampled) = unzip_retries(results)?;
    let mut counts = vec![0u64; n_max as usize];
    let mut censored = 0;
    for t in taus {
        match t {
            Some(n) => counts[n as usize - 1] += 1,
            None => censored += 1,
        }
    }
    let lam = lambda(e);
    let mut bins = Vec::new();
    let mut lo = bin_min;
    while 2 * lo <= n_max {
        let hi = 2 * lo;
        let count: u64 = counts[lo as usize - 1..hi as usize - 1].iter().sum();
        if count < MIN_BIN_COUNT {
            return Err(Error::InsufficientSamples(format!(
                "only {count} returns with {lo} ≤ τ < {hi}"
            )));
        }
        bins.push(TailBin {
            lo,
            hi,
            count,
            lambda_hat: lam * count as f64 / (m as f64 * (hi - lo) as f64),
        });
        lo = hi;
    }
    let xs: Vec<f64> = bins.iter().map(|b| b.lo as f64).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.lambda_hat).collect();
    let fit = fit_loglog(&xs, &ys)?;
    Ok(ReturnTail {
        target: e,
        samples: m,
        counts,
        censored,
        bins,
        fit,
        resampled,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeRow {
    pub n: u64,
    pub p_minus: f64,
    pub p_plus: f64,
    /// `λ(F_n)`.
    pub lambda: f64,
    pub sqrt_n_lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeTail {
    /// The target is `E = [p_k⁻, p_k⁺]`.
    pub k: usize,
    pub target: Interval,
    pub rows: Vec<EscapeRow>,
    pub fit: Option<LineFit>,
}

/// Smallest `k` with `p_k⁻ < p_k⁺`.
pub fn default_escape_index(map: &ParabolicMap) -> usize {
    if map.extreme_pole(Side::Minus) < map.extreme_pole(Side::Plus) {
        1
    } else {
        2
    }
}

/// Exact `λ(F_n)` for `E = [p_k⁻, p_k⁺]`, where `F_n` is the set of points
/// whose first `n` orbit points avoid `E`:
/// `F_n = (−∞, p⁻_{k+n−1}] ∪ [p⁺_{k+n−1}, ∞)`. The slope of
/// `log λ(F_n)` is fitted over the rows with `fit_range.0 ≤ n ≤ fit_range.1`.
pub fn escape_time_tail(
    map: &ParabolicMap,
    k: Option<usize>,
    ns: &[u64],
    fit_range: (u64, u64),
) -> Result<EscapeTail> {
    let k = k.unwrap_or_else(|| default_escape_index(map));
    if k == 0 {
        return Err(Error::invalid("k is 1-based"));
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::invalid("escape horizons must be positive"));
    }
    let n_max = *ns.iter().max().expect("non-empty") as usize;
    let count = k + n_max;
    let plus = map.backward_parabolic_orbit(Side::Plus, count)?;
    let minus = map.backward_parabolic_orbit(Side::Minus, count)?;
    if minus[k - 1] >= plus[k - 1] {
        return Err(Error::invalid(format!("[p_{k}⁻, p_{k}⁺] is degenerate")));
    }
    let rows: Vec<EscapeRow> = ns
        .iter()
        .map(|&n| {
            let idx = k + n as usize - 2;
            let lam = lambda_complement(minus[idx], plus[idx]);
            EscapeRow {
                n,
                p_minus: minus[idx],
                p_plus: plus[idx],
                lambda: lam,
                sqrt_n_lambda: (n as f64).sqrt() * lam,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.n >= fit_range.0 && r.n <= fit_range.1)
        .map(|r| (r.n as f64, r.lambda))
        .unzip();
    let fit = if xs.len() >= 2 {
        Some(fit_loglog(&xs, &ys)?)
    } else {
        None
    };
    Ok(EscapeTail {
        k,
        target: Interval::new(minus[k - 1], plus[k - 1]),
        rows,
        fit,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WanderingReport {
    pub target: Interval,
    pub samples: usize,
    /// `w[n−1] = ŵ_n(E)`.
    pub w: Vec<f64>,
    pub resampled: u64,
}

impl WanderingReport {
    pub fn w(&self, n: u64) -> f64 {
        self.w[n as usize - 1]
    }

    pub fn ratio(&self, n: u64) -> f64 {
        self.w(n) / (n as f64).sqrt()
    }
}

/// `w_n(E) = Σ_{k<n} μ(E ∩ {τ_E > k})` for `n ≤ n_max`, estimated from `m`
/// points drawn uniformly (with respect to `μ`) from `E`.
pub fn wandering_rate(
    map: &ParabolicMap,
    e: Interval,
    n_max: u64,
    m: usize,
    sampler: &mut SeededSampler,
) -> Result<WanderingReport> {
    if !e.is_bounded() || e.length() <= 0.0 {
        return Err(Error::invalid("the wandering rate needs a bounded target"));
    }
    if n_max == 0 {
        return Err(Error::invalid("n_max must be positive"));
    }
    if m < MIN_BIN_COUNT as usize {
        return Err(Error::InsufficientSamples(format!(
            "{m} samples, at least {MIN_BIN_COUNT} needed"
        )));
    }
    let law = InitialLaw::Uniform { lo: e.lo, hi: e.hi };
    let results = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &law, |x0| first_return(map, x0, e, n_max))
    });
    let (taus, resampled) = unzip_retries(results)?;
    // survivors[k] = #{τ > k}
    let mut ends = vec![0u64; n_max as usize + 1];
    for t in taus {
        ends[t.unwrap_or(n_max) as usize] += 1;
    }
    let mut alive = m as u64;
    let mut acc = 0.0;
    let mut w = Vec::with_capacity(n_max as usize);
    for &ended in &ends[..n_max as usize] {
        alive -= ended;
        acc += e.length() * alive as f64 / m as f64;
        w.push(acc);
    }
    Ok(WanderingReport {
        target: e,
        samples: m,
        w,
        resampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::GeneralizedBoole;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn boole() -> ParabolicMap {
        GeneralizedBoole::boole().into()
    }

    #[test]
    fn escape_first_value_is_one_half() {
        let t = escape_time_tail(&boole(), None, &[1, 2], (1, 2)).unwrap();
        assert_eq!(t.k, 2);
        assert_relative_eq!(t.rows[0].lambda, 0.5, epsilon = 1e-15);
        assert_relative_eq!(t.rows[0].p_plus, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn escape_tail_uses_k1_for_separated_poles() {
        let m: ParabolicMap = GeneralizedBoole::new(vec![-2.0, -1.0, 1.0, 2.0], vec![1.0; 4])
            .unwrap()
            .into();
        let t = escape_time_tail(&m, None, &[1], (1, 1)).unwrap();
        assert_eq!(t.k, 1);
        assert_relative_eq!(t.rows[0].lambda, lambda_complement(-2.0, 2.0));
    }

    #[test]
    fn return_partition_and_first_step_oracle() {
        let e = Interval::new(-1.0, 1.0);
        let r = return_time_tail(&boole(), e, 64, 8, 20_000, &mut SeededSampler::new(4)).unwrap();
        assert_eq!(r.counts.iter().sum::<u64>() + r.censored, 20_000);
        // E₁ = [−1, −g] ∪ [g, 1] with g = (√5 − 1)/2
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let exact = 2.0 * (1f64.atan() - g.atan()) / PI;
        assert!(r.lambda_hat(1) > 0.1);
        assert!(
            (r.lambda_hat(1) - exact).abs() < 0.01,
            "{} vs {exact}",
            r.lambda_hat(1)
        );
    }

    #[test]
    fn return_tail_reports_thin_bins() {
        let e = Interval::new(-1.0, 1.0);
        let r = return_time_tail(&boole(), e, 512, 8, 200, &mut SeededSampler::new(4));
        assert!(matches!(r, Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn wandering_starts_at_mu_and_grows() {
        let e = Interval::new(-1.0, 1.0);
        let w = wandering_rate(&boole(), e, 100, 5000, &mut SeededSampler::new(6)).unwrap();
        assert_eq!(w.w(1), 2.0);
        assert!(w.w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn wandering_matches_backward_orbit_oracle() {
        // the union of E, T⁻¹E, …, T^{−(n−1)}E is [p⁻_{n+1}, p⁺_{n+1}], so w_n = 2 p_{n+1}
        let e = Interval::new(-1.0, 1.0);
        let w = wandering_rate(&boole(), e, 200, 40_000, &mut SeededSampler::new(6)).unwrap();
        let p = boole().backward_parabolic_orbit(Side::Plus, 202).unwrap();
        for n in [10u64, 50, 200] {
            let exact = 2.0 * p[n as usize];
            assert!(
                (w.w(n) / exact - 1.0).abs() < 0.03,
                "n={n}: {} vs {exact}",
                w.w(n)
            );
        }
    }
}
