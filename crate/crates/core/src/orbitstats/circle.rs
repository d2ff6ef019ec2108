//! Finite-measure comparison: the boundary action `θ ↦ dθ mod 1` of
//! `z ↦ z^d`, where Lebesgue measure is invariant and ergodic.
//!
//! Doubling in floating point collapses every orbit to 0 after 53 steps, so
//! orbits are carried as a sliding window of exact base-`d` digits.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::laws::fit_line;
use super::parallel_samples;
use crate::error::{Error, Result};
use crate::measures::SeededSampler;
use crate::Interval;

/// The last `len` base-`d` digits of an angle, `θ ≈ window/d^len`.
#[derive(Debug, Clone)]
pub struct DigitWindow {
    d: u64,
    top: u64,
    scale: f64,
    window: u64,
}

impl DigitWindow {
    /// Window with as many digits as fit below `2^62`, filled at random.
    pub fn random(d: u64, rng: &mut ChaCha8Rng) -> Self {
        let mut top = 1u64;
        let mut modulus = d;
        while modulus.checked_mul(d).is_some_and(|v| v <= 1 << 62) {
            top = modulus;
            modulus *= d;
        }
        let mut w = DigitWindow {
            d,
            top,
            scale: 1.0 / modulus as f64,
            window: 0,
        };
        let mut m = modulus;
        while m > 1 {
            w.push(rng.random_range(0..d));
            m /= d;
        }
        w
    }

    /// Applies the map: drops the leading digit and appends `digit`.
    #[inline]
    pub fn push(&mut self, digit: u64) {
        self.window = (self.window % self.top) * self.d + digit;
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.window as f64 * self.scale
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleParams {
    pub degree: u64,
    /// Arc `[lo, hi)` of `[0, 1)`.
    pub target: Interval,
    pub horizon: u64,
    pub samples: usize,
    pub kac_n_max: u64,
    pub kac_samples: usize,
    /// Half-width of the arc `G = (−δ, δ)` around the fixed point 0.
    pub waiting_delta: f64,
    pub waiting_steps: u32,
}

impl Default for CircleParams {
    fn default() -> Self {
        CircleParams {
            degree: 2,
            target: Interval::new(0.0, 0.5),
            horizon: 100_000,
            samples: 1_000,
            kac_n_max: 1_000,
            kac_samples: 1_000_000,
            waiting_delta: 0.1,
            waiting_steps: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaitingRow {
    pub n: u32,
    /// Exact `λ(G_n)` from arc preimages.
    pub exact: f64,
    /// Monte Carlo estimate from the Kac samples.
    pub sampled: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleReport {
    pub params: CircleParams,
    pub lambda_e: f64,
    pub mean_frequency: f64,
    /// `|mean(S_nE/n) − λ(E)|`.
    pub birkhoff_error: f64,
    /// `Σ_n n·λ̂(E_n)` over `n ≤ kac_n_max`.
    pub kac_sum: f64,
    /// Fraction of samples in `E` not returned by `kac_n_max`.
    pub kac_censored: f64,
    pub waiting: Vec<WaitingRow>,
    /// `exp` of the fitted slope of `log λ(G_n)`.
    pub waiting_decay_rate: f64,
}

fn in_arc(e: &Interval, theta: f64) -> bool {
    e.lo <= theta && theta < e.hi
}

/// `G_n = {θ ∈ G : Tθ, …, T^{n−1}θ ∈ G}` as a union of arcs in `(−½, ½]`.
pub fn waiting_arcs(d: u64, delta: f64, n: u32) -> Vec<(f64, f64)> {
    let g = (-delta, delta);
    let mut arcs = vec![g];
    for _ in 1..n {
        let mut next = Vec::new();
        for &(a, b) in &arcs {
            for j in -(d as i64)..=(d as i64) {
                let lo = ((a + j as f64) / d as f64).max(g.0);
                let hi = ((b + j as f64) / d as f64).min(g.1);
                if lo < hi {
                    next.push((lo, hi));
                }
            }
        }
        arcs = next;
    }
    arcs
}

pub fn circle_model_checks(
    params: &CircleParams,
    sampler: &mut SeededSampler,
) -> Result<CircleReport> {
    let p = params;
    let e = p.target;
    if p.degree < 2 {
        return Err(Error::invalid("degree must be at least 2"));
    }
    if !(0.0 <= e.lo && e.lo < e.hi && e.hi <= 1.0) {
        return Err(Error::invalid("target must be an arc [lo, hi) of [0, 1)"));
    }
    if p.horizon == 0 || p.samples == 0 || p.kac_samples == 0 || p.kac_n_max == 0 {
        return Err(Error::invalid(
            "horizons and sample counts must be positive",
        ));
    }
    if !(p.waiting_delta > 0.0 && p.waiting_delta < 0.5 / p.degree as f64) || p.waiting_steps < 2 {
        return Err(Error::invalid(
            "need 0 < δ < 1/(2d) and at least two waiting steps",
        ));
    }
    let d = p.degree;
    let lambda_e = e.length();

    let freqs = parallel_samples(sampler, p.samples, |rng| {
        let mut w = DigitWindow::random(d, rng);
        let mut s = 0u64;
        for _ in 0..p.horizon {
            s += in_arc(&e, w.theta()) as u64;
            w.push(rng.random_range(0..d));
        }
        s as f64 / p.horizon as f64
    });
    let mean_frequency = freqs.iter().sum::<f64>() / freqs.len() as f64;

    let wait_sampled_steps = p.waiting_steps.min(12);
    let delta = p.waiting_delta;
    let kac = parallel_samples(sampler, p.kac_samples, |rng| {
        let mut w = DigitWindow::random(d, rng);
        let theta0 = w.theta();
        // how long the orbit stays in G (capped)
        let mut stay = 0u32;
        {
            let mut v = w.clone();
            let mut probe = rng.clone();
            while stay < wait_sampled_steps {
                let t = v.theta();
                if !(t < delta || t > 1.0 - delta) {
                    break;
                }
                stay += 1;
                v.push(probe.random_range(0..d));
            }
        }
        let tau = if in_arc(&e, theta0) {
            let mut tau = None;
            for k in 1..=p.kac_n_max {
                w.push(rng.random_range(0..d));
                if in_arc(&e, w.theta()) {
                    tau = Some(k);
                    break;
                }
            }
            Some(tau)
        } else {
            None
        };
        (tau, stay)
    });
    let mut kac_sum = 0.0;
    let mut censored = 0usize;
    let mut inside = 0usize;
    let mut stays = vec![0usize; wait_sampled_steps as usize + 1];
    for (tau, stay) in &kac {
        stays[*stay as usize] += 1;
        match tau {
            Some(Some(n)) => {
                kac_sum += *n as f64;
                inside += 1;
            }
            Some(None) => {
                censored += 1;
                inside += 1;
            }
            None => {}
        }
    }
    let m_kac = p.kac_samples as f64;
    kac_sum /= m_kac;

    let mut waiting = Vec::new();
    for n in 1..=p.waiting_steps {
        let exact: f64 = waiting_arcs(d, delta, n).iter().map(|(a, b)| b - a).sum();
        let sampled = if n <= wait_sampled_steps {
            stays[n as usize..].iter().sum::<usize>() as f64 / m_kac
        } else {
            f64::NAN
        };
        waiting.push(WaitingRow { n, exact, sampled });
    }
    let xs: Vec<f64> = waiting.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = waiting.iter().map(|r| r.exact.ln()).collect();
    let waiting_decay_rate = fit_line(&xs, &ys)?.slope.exp();

    Ok(CircleReport {
        params: p.clone(),
        lambda_e,
        mean_frequency,
        birkhoff_error: (mean_frequency - lambda_e).abs(),
        kac_sum,
        kac_censored: if inside > 0 {
            censored as f64 / inside as f64
        } else {
            0.0
        },
        waiting,
        waiting_decay_rate,
    })
}
