//! The Baker domain of `f(z) = z + e^{−z}` and the family
//! `f(z) = z − P(e^{−z})` with `f′(z) = (1 − e^{−z})ⁿ`.
//!
//! Codes come from Boole orbits: the boundary map of the Baker domain is
//! conjugate to `x − 1/x`, and a hair switches half-strip each time the
//! orbit passes through `[−1, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PoleHit, Result};
use crate::maps::{GeneralizedBoole, IntervalMap};
use crate::measures::SeededSampler;
use crate::orbitstats::{
    fit_loglog, iterate, parallel_samples, unzip_retries, with_resampling, InitialLaw,
    LimitLawReport, LineFit, ReferenceLaw, Target,
};
use crate::Interval;

/// Relative tolerance for `|f(z) − w|`.
pub const TOL_INV: f64 = 1e-12;
pub const MAX_NEWTON: usize = 50;

/// `f(z) = z − P(e^{−z})` on the strip `|Im z| < π`, normalized so that
/// `P(0) = 0` and `1 + wP′(w) = (1 − w)ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripMap {
    degree: u32,
    /// Coefficient of `w^k` at index `k − 1`.
    coeffs: Vec<f64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl StripMap {
    pub fn new(degree: u32) -> Result<Self> {
        if !(1..=30).contains(&degree) {
            return Err(Error::invalid("degree must be in 1..=30"));
        }
        let coeffs = (1..=degree)
            .map(|k| binomial(degree, k) * if k % 2 == 0 { 1.0 } else { -1.0 } / k as f64)
            .collect();
        Ok(StripMap { degree, coeffs })
    }

    /// `z + e^{−z}`.
    pub fn exp_baker() -> Self {
        StripMap::new(1).expect("degree 1")
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Largest coefficient mismatch in `1 + wP′(w) = (1 − w)ⁿ`.
    pub fn normalization_error(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = i as u32 + 1;
                let want = binomial(self.degree, k) * if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                (k as f64 * c - want).abs()
            })
            .fold(0.0, f64::max)
    }

    fn p_eval(&self, w: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| (acc + c) * w)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        z - self.p_eval((-z).exp())
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        (1.0 - (-z).exp()).powu(self.degree)
    }

    /// `f(0) = −P(1)`, the image of the critical point.
    pub fn critical_value(&self) -> Complex64 {
        self.eval(Complex64::new(0.0, 0.0))
    }

    fn newton(&self, w: Complex64, mut z: Complex64) -> Option<Preimage> {
        let tol = TOL_INV * w.norm().max(1.0);
        for it in 0..MAX_NEWTON {
            let r = self.eval(z) - w;
            if r.norm() <= 0.1 * tol {
                return Some(Preimage {
                    z,
                    residual: r.norm(),
                    iterations: it,
                });
            }
            let d = self.derivative(z);
            if d.norm() == 0.0 || !d.is_finite() {
                return None;
            }
            z -= r / d;
            // stay inside the strip
            if z.im.abs() >= PI {
                z.im = z.im.signum() * (PI - 1e-9);
            }
            if !z.is_finite() {
                return None;
            }
        }
        let residual = (self.eval(z) - w).norm();
        (residual <= tol).then_some(Preimage {
            z,
            residual,
            iterations: MAX_NEWTON,
        })
    }

    fn seeds(&self, w: Complex64) -> Vec<Complex64> {
        let mut seeds = Vec::with_capacity(6);
        // z = w − ζ with ζe^{−ζ} = e^{−w}: the small root, then the large one
        let ew = (-w).exp();
        if ew.norm() < 0.5 {
            let mut zeta = Complex64::new(0.0, 0.0);
            for _ in 0..8 {
                zeta = (zeta - w).exp();
            }
            seeds.push(w - zeta);
        }
        let mut zeta = if w.norm() > 1.0 {
            w
        } else {
            Complex64::new(2.0, w.im)
        };
        for _ in 0..8 {
            zeta = w + zeta.ln();
        }
        seeds.push(-zeta.ln());
        // near the critical value ζ − Log ζ ≈ 1 + (ζ − 1)²/2
        let s = (2.0 * (w - 1.0)).sqrt();
        seeds.push(-(1.0 + s).ln());
        seeds.push(-(1.0 - s).ln());
        seeds.push(w + Complex64::new(0.0, PI / 2.0));
        seeds.push(w - Complex64::new(0.0, PI / 2.0));
        seeds
    }

    /// The preimage of `w` in the upper (`b = 0`) or lower (`b = 1`)
    /// half-strip. Real `w > 1` has two real preimages; `b = 0` then takes
    /// the right one. For degree `n ≥ 2` the strip holds `n + 1` preimages
    /// and the first one found in the requested half-strip is returned.
    pub fn inverse_branch(&self, w: Complex64, b: u8) -> Result<Preimage> {
        if b > 1 {
            return Err(Error::invalid("branch must be 0 or 1"));
        }
        if !(w.is_finite() && w.im.abs() < PI) {
            return Err(Error::invalid(format!("w = {w} is outside the strip")));
        }
        let mut real = Vec::new();
        for seed in self.seeds(w) {
            let Some(mut p) = self.newton(w, seed) else {
                continue;
            };
            if w.im == 0.0 {
                if p.z.im.abs() < 1e-9 {
                    p.z.im = 0.0;
                    real.push(p);
                }
                continue;
            }
            if (b == 0 && p.z.im > 0.0) || (b == 1 && p.z.im < 0.0) {
                return Ok(p);
            }
        }
        if real.is_empty() {
            // coarse grid over the half-strip; only reached for higher degrees
            let sign = if b == 0 { 1.0 } else { -1.0 };
            let xs = [-3.0, -2.0, -1.0, 0.0, 1.0]
                .into_iter()
                .chain([-2.0, 0.0].map(|dx| w.re + dx));
            for x in xs {
                for y in [0.2, 0.8, 1.3, 2.0, 2.8] {
                    let seed = Complex64::new(x, sign * y);
                    let Some(p) = self.newton(w, seed) else {
                        continue;
                    };
                    if w.im != 0.0 && p.z.im * sign > 0.0 {
                        return Ok(p);
                    }
                }
            }
        }
        let pick = if b == 0 {
            real.into_iter().max_by(|a, c| a.z.re.total_cmp(&c.z.re))
        } else {
            real.into_iter().min_by(|a, c| a.z.re.total_cmp(&c.z.re))
        };
        pick.ok_or_else(|| Error::NonConvergence(format!("no preimage of {w} on branch {b}")))
    }

    /// Newton from `seed`, falling back to [`Self::inverse_branch`].
    pub fn inverse_branch_near(&self, w: Complex64, b: u8, seed: Complex64) -> Result<Preimage> {
        if let Some(p) = self.newton(w, seed) {
            if (b == 0 && p.z.im > 0.0) || (b == 1 && p.z.im < 0.0) {
                return Ok(p);
            }
        }
        self.inverse_branch(w, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub z: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

/// A finite binary code `c₀c₁…c_{n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolCode {
    pub bits: Vec<u8>,
}

impl SymbolCode {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("a code is a nonempty string of 0s and 1s"));
        }
        Ok(SymbolCode { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Lengths of the maximal constant blocks.
    pub fn blocks(&self) -> Vec<usize> {
        let mut out = vec![1];
        for w in self.bits.windows(2) {
            if w[0] == w[1] {
                *out.last_mut().unwrap() += 1;
            } else {
                out.push(1);
            }
        }
        out
    }

    /// `B_n`, the number of blocks.
    pub fn block_count(&self) -> usize {
        1 + self.bits.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// `L_n`, the length of the last block.
    pub fn last_block(&self) -> usize {
        *self.blocks().last().unwrap()
    }

    pub fn first_block(&self) -> usize {
        self.blocks()[0]
    }
}

impl std::fmt::Display for SymbolCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn in_flip_zone(x: f64) -> bool {
    (-1.0..=1.0).contains(&x)
}

/// Code of length `n` read off the Boole orbit of `x0`: `c₀ = 0` and the
/// bit flips after every visit to `[−1, 1]`.
pub fn code_from_boole_orbit(x0: f64, n: usize) -> Result<SymbolCode> {
    if n == 0 {
        return Err(Error::invalid("code length must be positive"));
    }
    let t = GeneralizedBoole::boole();
    let mut bits = Vec::with_capacity(n);
    bits.push(0u8);
    let mut x = x0;
    for k in 0..n - 1 {
        let c = *bits.last().unwrap();
        bits.push(if in_flip_zone(x) { 1 - c } else { c });
        if k + 2 < n {
            x = t
                .eval(x)
                .map_err(|hit| Error::OrbitTruncated { steps: k + 1, hit })?;
        }
    }
    Ok(SymbolCode { bits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CodeSummary {
    blocks: u64,
    last: u64,
    first: u64,
    /// Visits to `[−1, 1]` over steps `0..n−1`, counted independently of
    /// the bits.
    occupation: u64,
}

/// Block data of a code without storing it.
fn code_summary(
    t: &GeneralizedBoole,
    x0: f64,
    n: u64,
) -> std::result::Result<CodeSummary, PoleHit> {
    let e = Target::Inside(Interval::new(-1.0, 1.0));
    let mut bit = 0u8;
    let mut s = CodeSummary {
        blocks: 1,
        last: n,
        first: n,
        occupation: 0,
    };
    if n > 1 {
        iterate(t, x0, n - 1, |k, x| {
            s.occupation += e.contains(x) as u64;
            let next = if in_flip_zone(x) { 1 - bit } else { bit };
            if next != bit {
                s.blocks += 1;
                if s.first == n {
                    s.first = k + 1;
                }
                s.last = n - (k + 1);
            }
            bit = next;
        })
        .map_err(|(_, hit)| hit)?;
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockStatistics {
    pub horizon: u64,
    pub samples: usize,
    /// `(m, ν̂(first block ≥ m))` on dyadic `m`.
    pub h_tail: Vec<(u64, f64)>,
    pub h_fit: LineFit,
    /// `(B_n/√n)/(2√2/π)` against the half-normal law.
    pub blocks: LimitLawReport,
    /// `1 − L_n/n` against the arcsine law.
    pub last_block: LimitLawReport,
    /// Samples with `B_n − 1` different from the occupation count.
    pub flip_mismatches: usize,
    pub resampled: u64,
}

/// Block statistics of `m` codes from λ-sampled Boole orbits.
pub fn block_statistics(m: usize, n: u64, sampler: &mut SeededSampler) -> Result<BlockStatistics> {
    if m < 2 || n < 2 {
        return Err(Error::InsufficientSamples(
            "need at least two codes of length two".into(),
        ));
    }
    let t = GeneralizedBoole::boole();
    let results = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &InitialLaw::Cauchy, |x0| code_summary(&t, x0, n))
    });
    let (summaries, resampled) = unzip_retries(results)?;
    let mut h_tail = Vec::new();
    let mut mm = 8u64;
    while mm <= 512.min(n) {
        let count = summaries.iter().filter(|s| s.first >= mm).count();
        h_tail.push((mm, count as f64 / m as f64));
        mm *= 2;
    }
    if h_tail.len() < 2 || h_tail.iter().any(|&(_, v)| v == 0.0) {
        return Err(Error::InsufficientSamples("empty first-block bins".into()));
    }
    let xs: Vec<f64> = h_tail.iter().map(|&(k, _)| k as f64).collect();
    let ys: Vec<f64> = h_tail.iter().map(|&(_, v)| v).collect();
    let h_fit = fit_loglog(&xs, &ys)?;
    let scale = 2.0 * std::f64::consts::SQRT_2 / PI;
    let rn = (n as f64).sqrt();
    let b: Vec<f64> = summaries
        .iter()
        .map(|s| s.blocks as f64 / rn / scale)
        .collect();
    let l: Vec<f64> = summaries
        .iter()
        .map(|s| 1.0 - s.last as f64 / n as f64)
        .collect();
    let flip_mismatches = summaries
        .iter()
        .filter(|s| s.blocks - 1 != s.occupation)
        .count();
    Ok(BlockStatistics {
        horizon: n,
        samples: m,
        h_tail,
        h_fit,
        blocks: LimitLawReport::build("block_count", ReferenceLaw::HalfNormalPi, n, b, resampled)?,
        last_block: LimitLawReport::build("last_block", ReferenceLaw::Arcsine, n, l, resampled)?,
        flip_mismatches,
        resampled,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Default for Disk {
    fn default() -> Self {
        Disk {
            center: Complex64::new(10.0, 0.5),
            radius: 0.25,
        }
    }
}

pub const CLOUD_POINTS: usize = 16;

/// Below this relative size the cloud is carried by the derivative at
/// its center.
const LINEARIZE_BELOW: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HairTrace {
    pub code: SymbolCode,
    pub disk: Disk,
    /// Cloud diameters, index 0 being `D₀`.
    pub diameters: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub centers: Vec<Complex64>,
    pub endpoint_estimate: Complex64,
    /// `|center_n − center_{n−1}|`.
    pub last_increment: f64,
    /// Least-squares `K̂` in `diam_k ≈ K̂^{−∛k}·diam₀`.
    pub k_hat: f64,
    /// First index from which `diam_k ≤ K̂^{−∛k}·diam₀` holds throughout.
    pub n0: Option<usize>,
    pub note: String,
}

fn cloud_diameter(offsets: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..offsets.len() {
        for j in i + 1..offsets.len() {
            d = d.max((offsets[i] - offsets[j]).norm());
        }
    }
    d
}

/// Pulls a 16-point boundary cloud of `disk` back through the inverse
/// branches named by the code, `G_k = F_{c_k}(G_{k−1})`. A code read off a
/// forward orbit, applied in this order, follows that orbit backwards.
pub fn hair_contraction(map: &StripMap, code: &SymbolCode, disk: Disk) -> Result<HairTrace> {
    if !(disk.radius > 0.0 && disk.center.im.abs() + disk.radius < PI) {
        return Err(Error::invalid("the disk must lie inside the strip"));
    }
    let mut center = disk.center;
    let mut offsets: Vec<Complex64> = (0..CLOUD_POINTS)
        .map(|j| Complex64::from_polar(disk.radius, 2.0 * PI * j as f64 / CLOUD_POINTS as f64))
        .collect();
    let mut diameters = vec![cloud_diameter(&offsets)];
    let mut centers = vec![center];
    for &bit in &code.bits {
        let next = map.inverse_branch_near(center, bit, center)?.z;
        let slope = 1.0 / map.derivative(next);
        let diam = *diameters.last().unwrap();
        if diam > LINEARIZE_BELOW * center.norm().max(1.0) {
            for o in offsets.iter_mut() {
                let seed = next + slope * *o;
                *o = map.inverse_branch_near(center + *o, bit, seed)?.z - next;
            }
        } else {
            for o in offsets.iter_mut() {
                *o *= slope;
            }
        }
        center = next;
        diameters.push(cloud_diameter(&offsets));
        centers.push(center);
    }
    let partial_sums: Vec<f64> = diameters
        .iter()
        .scan(0.0, |s, &d| {
            *s += d;
            Some(*s)
        })
        .collect();
    let d0 = diameters[0];
    // least squares through the origin for ln(diam_k/diam₀) = −∛k·ln K̂
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, &d) in diameters.iter().enumerate().skip(1) {
        let x = (k as f64).cbrt();
        sxy += x * (d / d0).ln();
        sxx += x * x;
    }
    let k_hat = if sxx > 0.0 { (-sxy / sxx).exp() } else { 1.0 };
    let n0 = if k_hat > 1.0 {
        let ok = |k: usize| diameters[k] <= k_hat.powf(-(k as f64).cbrt()) * d0;
        let mut first = diameters.len();
        while first > 1 && ok(first - 1) {
            first -= 1;
        }
        (first < diameters.len()).then_some(first)
    } else {
        None
    };
    let n = centers.len();
    let last_increment = if n > 1 {
        (centers[n - 1] - centers[n - 2]).norm()
    } else {
        0.0
    };
    Ok(HairTrace {
        code: code.clone(),
        disk,
        endpoint_estimate: center,
        diameters,
        partial_sums,
        centers,
        last_increment,
        k_hat,
        n0,
        note: "diameters estimated from a 16-point boundary cloud".into(),
    })
}

/// Hair traces for `m` codes of length `n` from λ-sampled Boole orbits.
pub fn sample_hairs(
    map: &StripMap,
    disk: Disk,
    m: usize,
    n: usize,
    sampler: &mut SeededSampler,
) -> Result<Vec<HairTrace>> {
    let codes = parallel_samples(sampler, m, |rng| {
        with_resampling(rng, &InitialLaw::Cauchy, |x0| {
            code_from_boole_orbit(x0, n).map_err(|e| match e {
                Error::OrbitTruncated { hit, .. } => hit,
                _ => unreachable!("only pole hits can end an orbit"),
            })
        })
    });
    let (codes, _) = unzip_retries(codes)?;
    codes
        .par_iter()
        .map(|c| hair_contraction(map, c, disk))
        .collect()
}

/// `g(z) = (3z² + 1)/(3 + z²)` on the disk.
pub fn g_disk(z: Complex64) -> Complex64 {
    (3.0 * z * z + 1.0) / (3.0 + z * z)
}

/// `M(z) = i(1 + z)/(1 − z)`, disk to upper half-plane.
pub fn cayley(z: Complex64) -> Complex64 {
    Complex64::i() * (1.0 + z) / (1.0 - z)
}

/// `h(z) = z − 1/z`.
pub fn h_half_plane(z: Complex64) -> Complex64 {
    z - 1.0 / z
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub points: usize,
    /// Largest `|M∘g − h∘M|/max(1, |h∘M|)`.
    pub max_error: f64,
    pub g_at_one: f64,
    pub g_prime_at_one: f64,
    pub g_second_at_one: f64,
    /// `(g(t) − t)/(t − 1)³` at `t = 1 − 10⁻³`; the limit is `−1/4`.
    pub cubic_coefficient: f64,
}

/// Checks `M∘g = h∘M` on a polar grid of the disk and the cubic normal
/// form of `g` at its fixed point `1`.
pub fn inner_function_identities(grid: usize) -> Result<IdentityReport> {
    if grid < 2 {
        return Err(Error::invalid("grid must have at least 2 points per axis"));
    }
    let mut points = 0;
    let mut max_error = 0.0f64;
    for i in 0..grid {
        let r = 0.999 * (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let z = Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.25) / grid as f64);
            if (z - 1.0).norm() < 1e-3 || (z + 1.0).norm() < 1e-3 {
                continue;
            }
            let lhs = cayley(g_disk(z));
            let rhs = h_half_plane(cayley(z));
            let err = (lhs - rhs).norm() / rhs.norm().max(1.0);
            if !(err <= 1e-12) {
                return Err(Error::IdentityViolation {
                    z: z.to_string(),
                    detail: format!("M(g(z)) = {lhs}, h(M(z)) = {rhs}"),
                });
            }
            max_error = max_error.max(err);
            points += 1;
        }
    }
    let g = |t: f64| g_disk(Complex64::new(t, 0.0)).re;
    let h = 1e-4;
    let g_prime = (g(1.0 + h) - g(1.0 - h)) / (2.0 * h);
    let g_second = (g(1.0 + h) - 2.0 * g(1.0) + g(1.0 - h)) / (h * h);
    let t = 1.0 - 1e-3;
    Ok(IdentityReport {
        points,
        max_error,
        g_at_one: g(1.0),
        g_prime_at_one: g_prime,
        g_second_at_one: g_second,
        cubic_coefficient: (g(t) - t) / (t - 1.0).powi(3),
    })
}
