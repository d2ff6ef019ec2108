//! Empirical distributions, the two α = ½ reference laws and least-squares
//! slope fits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Limit laws appearing for `α = β = ½`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceLaw {
    /// `(2/π)∫₀ᵗ e^{−y²/π} dy = erf(t/√π)`, the normalized Mittag-Leffler
    /// law of order ½.
    HalfNormalPi,
    /// `(2/π) arcsin √t` on `[0, 1]`.
    Arcsine,
}

impl ReferenceLaw {
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            ReferenceLaw::HalfNormalPi => {
                if t <= 0.0 {
                    0.0
                } else {
                    libm::erf(t / PI.sqrt())
                }
            }
            ReferenceLaw::Arcsine => {
                if t <= 0.0 {
                    0.0
                } else if t >= 1.0 {
                    1.0
                } else {
                    2.0 / PI * t.sqrt().asin()
                }
            }
        }
    }

    /// Inverse CDF, used to draw exact reference samples.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            ReferenceLaw::Arcsine => {
                let s = (0.5 * PI * u).sin();
                s * s
            }
            ReferenceLaw::HalfNormalPi => {
                // bisection on the monotone CDF
                let (mut lo, mut hi) = (0.0, 1.0);
                while self.cdf(hi) < u {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ReferenceLaw::HalfNormalPi => 1.0,
            ReferenceLaw::Arcsine => 0.5,
        }
    }
}

/// Sorted sample with right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("sample contains NaN"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of values `≤ t`.
    pub fn cdf(&self, t: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.partition_point(|&v| v <= t) as f64 / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.values.len();
        assert!(n > 0, "quantile of an empty sample");
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.values[idx]
    }

    pub fn median(&self) -> f64 {
        let n = self.values.len();
        assert!(n > 0, "median of an empty sample");
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            0.5 * (self.values[n / 2 - 1] + self.values[n / 2])
        }
    }

    /// `sup_t |F_m(t) − F(t)|` against a continuous CDF.
    pub fn ks_against(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let m = self.values.len();
        if m == 0 {
            return 1.0;
        }
        let mf = m as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < m {
            let v = self.values[i];
            let mut j = i;
            while j < m && self.values[j] == v {
                j += 1;
            }
            let f = cdf(v);
            d = d
                .max((f - i as f64 / mf).abs())
                .max((j as f64 / mf - f).abs());
            i = j;
        }
        d
    }

    pub fn ks_law(&self, law: ReferenceLaw) -> f64 {
        self.ks_against(|t| law.cdf(t))
    }

    /// Two-sample KS statistic.
    pub fn ks_two_sample(&self, other: &EmpiricalDistribution) -> f64 {
        let (a, b) = (&self.values, &other.values);
        if a.is_empty() || b.is_empty() {
            return 1.0;
        }
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut d: f64 = 0.0;
        while i < a.len() && j < b.len() {
            let t = a[i].min(b[j]);
            while i < a.len() && a[i] <= t {
                i += 1;
            }
            while j < b.len() && b[j] <= t {
                j += 1;
            }
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
        d
    }
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "line fit needs at least two points, got {}",
            xs.len().min(ys.len())
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("line fit with constant abscissae"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fit of `log y` against `log x`; all values must be positive.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::InsufficientSamples(
            "log-log fit needs positive values".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}
