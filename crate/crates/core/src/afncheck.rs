//! Numerical AFN certificate for generalized Boole maps.
//!
//! The conjugate `S = φ⁻¹∘T∘φ`, `φ(x) = p·tan x`, acts on `(−π/2, π/2)` with
//! neutral fixed points at both ends. Grid checks stand in for the universal
//! quantifiers of the AFN conditions: the output is a numerical certificate,
//! not a proof.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{GeneralizedBoole, IntervalMap, ParabolicMap, Side};
use crate::orbitstats::{fit_loglog, LineFit};
use crate::periodic::period_constants;
use crate::Interval;

/// Exclusion radius around branch endpoints, in the `x` coordinate.
pub const ENDPOINT_DELTA: f64 = 1e-3;

/// Neutral-point exponent `p_l` and the AFN parameters for these maps.
pub const PARABOLIC_EXPONENT: f64 = 2.0;
pub const ALPHA: f64 = 0.5;
pub const BETA: f64 = 0.5;

/// The conjugated map on `(−π/2, π/2)`.
#[derive(Debug, Clone)]
pub struct Conjugate<'a> {
    pub map: &'a GeneralizedBoole,
    pub p: f64,
}

impl Conjugate<'_> {
    pub fn phi(&self, x: f64) -> f64 {
        self.p * x.tan()
    }

    pub fn phi_inv(&self, s: f64) -> f64 {
        (s / self.p).atan()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let t = self.map.eval(self.phi(x))?;
        Ok(self.phi_inv(t))
    }

    /// `S(x) − x`, without cancellation.
    pub fn displacement(&self, x: f64) -> Result<f64> {
        let s = self.phi(x);
        let t = self.map.eval(s)?;
        let p = self.p;
        let num = p * self.map.displacement(s);
        let den = p * p + s * t;
        if den > 0.0 {
            Ok(num.atan2(den))
        } else {
            Ok(self.eval(x)? - x)
        }
    }

    /// `S′ = (p² + s²)·T′(s)/(p² + T(s)²)` with `s = p tan x`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let s = self.phi(x);
        let t = self.map.eval(s)?;
        let d = self.map.derivative(s)?;
        let p2 = self.p * self.p;
        Ok((p2 + s * s) * d / (p2 + t * t))
    }

    /// `S″/S′²`.
    pub fn adler_ratio(&self, x: f64) -> Result<f64> {
        let s = self.phi(x);
        let t = self.map.eval(s)?;
        let d1 = self.map.derivative(s)?;
        let d2 = self.map.second_derivative(s)?;
        let p2 = self.p * self.p;
        let sp = (p2 + s * s) / self.p;
        let sd = (p2 + s * s) * d1 / (p2 + t * t);
        let log_slope = d2 / d1 + 2.0 * s / (p2 + s * s) - 2.0 * t * d1 / (p2 + t * t);
        Ok(sp * log_slope / sd)
    }

    /// Branch endpoints in `x`: `±π/2` and the pole preimages.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut e = vec![-FRAC_PI_2];
        e.extend(self.map.poles().iter().map(|&a| self.phi_inv(a)));
        e.push(FRAC_PI_2);
        e
    }
}

/// Scale `p` satisfying the sufficient condition `p²(T′/K − 1) ≥ T²` on `D`.
///
/// In Nevanlinna form `T(x) = x + β₀ + Σ ρ_k u_k` with
/// `u_k = (1 + x a_k)/(a_k − x)`, `T′ = 1 + (R + Σ ρ_k u_k²)/(1 + x²)`, and
/// Cauchy-Schwarz gives `T²/T′ ≤ (z_max + |β₀|)² + R(1 + z_max²)` on `D`.
/// Since `T′/K − 1 ≥ θT′/K` with `θ = 1 − K/K_D`, it suffices that
/// `p² ≥ (K/θ)·((z_max + |β₀|)² + R(1 + z_max²))`; also `p ≥ √K`.
pub fn choose_p(map: &GeneralizedBoole, k_target: f64) -> Result<f64> {
    let consts = period_constants(map)?;
    if !(k_target > 1.0 && k_target < consts.k) {
        return Err(Error::invalid(format!(
            "K must lie in (1, {}) for this map",
            consts.k
        )));
    }
    let theta = 1.0 - k_target / consts.k;
    let z = consts.core.lo.abs().max(consts.core.hi.abs());
    let r = map.nevanlinna_mass();
    let b0 = map.nevanlinna_shift().abs();
    let ratio = (z + b0).powi(2) + r * (1.0 + z * z);
    let p2 = (k_target / theta * ratio).max(k_target);
    Ok(p2.sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AfnReport {
    pub p: f64,
    pub k_target: f64,
    /// Grid minimum of `S′` on `φ⁻¹(D)` away from the pole preimages.
    pub k: f64,
    /// Grid minimum of `S′` off the neutral ends.
    pub k_off_neutral: f64,
    pub adler_sup: f64,
    pub branch_count: usize,
    pub parabolic_fits: Vec<LineFit>,
    pub parabolic_exponents: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub conjugacy_error: f64,
    pub grid_size: usize,
    pub certificate: String,
}

fn grid(n: usize) -> impl IndexedParallelIterator<Item = f64> {
    (0..n)
        .into_par_iter()
        .map(move |i| -FRAC_PI_2 + std::f64::consts::PI * (i as f64 + 0.5) / n as f64)
}

/// Sup of `|S″/S′²|` over a grid, away from branch endpoints.
pub fn adler_sup(map: &GeneralizedBoole, p: f64, grid_size: usize) -> Result<f64> {
    let s = Conjugate { map, p };
    let ends = s.endpoints();
    grid(grid_size)
        .filter(|&x| ends.iter().all(|e| (x - e).abs() > ENDPOINT_DELTA))
        .map(|x| s.adler_ratio(x).map(f64::abs))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Checks the AFN conditions on a grid.
pub fn verify_afn(
    map: &GeneralizedBoole,
    p: f64,
    k_target: f64,
    grid_size: usize,
) -> Result<AfnReport> {
    if !(p > 0.0) || grid_size < 10 {
        return Err(Error::invalid("need p > 0 and at least 10 grid points"));
    }
    let s = Conjugate { map, p };
    let ends = s.endpoints();
    let d = ParabolicMap::from(map.clone()).core_interval()?;
    let core_x = Interval::new(s.phi_inv(d.lo), s.phi_inv(d.hi));
    let away = |x: f64| ends.iter().all(|e| (x - e).abs() > ENDPOINT_DELTA);

    struct Point {
        x: f64,
        deriv: f64,
        adler: f64,
        image: f64,
        conj: f64,
    }
    let points: Vec<Point> = grid(grid_size)
        .filter(|&x| away(x))
        .map(|x| -> Result<Point> {
            let image = s.eval(x)?;
            let t = map.eval(s.phi(x))?;
            let conj = (s.phi(image) - t).abs() / t.abs().max(1.0);
            Ok(Point {
                x,
                deriv: s.derivative(x)?,
                adler: s.adler_ratio(x)?.abs(),
                image,
                conj,
            })
        })
        .collect::<Result<_>>()?;

    // (i) Adler's condition
    let mut adler = 0.0f64;
    for pt in &points {
        if !pt.adler.is_finite() {
            return Err(Error::GridFailure {
                x: pt.x,
                clause: "adler".into(),
            });
        }
        adler = adler.max(pt.adler);
    }

    // (ii) each branch sweeps the whole interval
    for w in ends.windows(2) {
        let eps = 1e-9 * (w[1] - w[0]);
        let lo = s.eval(w[0] + eps)?;
        let hi = s.eval(w[1] - eps)?;
        if !(lo < -FRAC_PI_2 + 1e-3 && hi > FRAC_PI_2 - 1e-3) {
            return Err(Error::GridFailure {
                x: 0.5 * (w[0] + w[1]),
                clause: "finite_image".into(),
            });
        }
    }

    // images stay inside, conjugacy holds
    let mut conjugacy_error = 0.0f64;
    for pt in &points {
        if !(pt.image > -FRAC_PI_2 && pt.image < FRAC_PI_2) {
            return Err(Error::GridFailure {
                x: pt.x,
                clause: "invariance".into(),
            });
        }
        conjugacy_error = conjugacy_error.max(pt.conj);
    }

    // (iv) neutral ends: |S(x) − x| ≈ a·t³ with t the distance to ±π/2
    let mut fits = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        let mut ts = Vec::new();
        let mut ds = Vec::new();
        for j in 0..=20 {
            let t = 10f64.powf(-4.0 + 2.0 * j as f64 / 20.0);
            let x = match side {
                Side::Plus => FRAC_PI_2 - t,
                Side::Minus => -FRAC_PI_2 + t,
            };
            ts.push(t);
            ds.push(s.displacement(x)?.abs());
        }
        fits.push(fit_loglog(&ts, &ds)?);
    }
    let exponents: Vec<f64> = fits.iter().map(|f| f.slope).collect();

    // (v) uniform expansion off the neutral ends
    let neutral = |x: f64| (x.abs() - FRAC_PI_2).abs() <= ENDPOINT_DELTA;
    let mut k_core = f64::INFINITY;
    let mut k_off = f64::INFINITY;
    for pt in &points {
        if neutral(pt.x) {
            continue;
        }
        k_off = k_off.min(pt.deriv);
        if core_x.lo < pt.x && pt.x < core_x.hi {
            k_core = k_core.min(pt.deriv);
        }
    }
    if !(k_off > 1.0) {
        return Err(Error::GridFailure {
            x: points
                .iter()
                .find(|pt| pt.deriv <= 1.0)
                .map_or(f64::NAN, |pt| pt.x),
            clause: "expansion".into(),
        });
    }
    if k_core < k_target {
        let bad = points
            .iter()
            .find(|pt| core_x.lo < pt.x && pt.x < core_x.hi && pt.deriv < k_target)
            .map_or(f64::NAN, |pt| pt.x);
        return Err(Error::GridFailure {
            x: bad,
            clause: format!("expansion_on_core (min {k_core} < {k_target})"),
        });
    }

    Ok(AfnReport {
        p,
        k_target,
        k: k_core,
        k_off_neutral: k_off,
        adler_sup: adler,
        branch_count: ends.len() - 1,
        parabolic_fits: fits,
        parabolic_exponents: exponents,
        alpha: ALPHA,
        beta: BETA,
        conjugacy_error,
        grid_size,
        certificate: "numerical grid check, not a proof".into(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionReport {
    pub depth: usize,
    pub target: Interval,
    pub max_return: usize,
    pub cylinders: usize,
    pub skipped: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max(max_ratio, 1/min_ratio)`.
    pub m_hat: f64,
    /// `μ` of the depth-1 cylinders over `μ(D)`.
    pub covered: f64,
}

/// Most cylinders enumerated before giving up.
pub const MAX_CYLINDERS: usize = 1_000_000;

#[derive(Clone)]
struct Cylinder {
    domain: (f64, f64),
    image: (f64, f64),
    /// `T_D^{-n}(E) ∩ domain`, empty when `lo ≥ hi`.
    epre: (f64, f64),
    word: Vec<u16>,
}

fn inverse_word(map: &GeneralizedBoole, word: &[u16], y: f64) -> Result<f64> {
    let mut v = y;
    for &b in word.iter().rev() {
        v = map.inverse_on_branch(b as usize, v)?;
    }
    Ok(v)
}

fn forward_word(map: &GeneralizedBoole, word: &[u16], x: f64) -> f64 {
    word.iter().fold(x, |v, _| map.eval_unchecked(v))
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

fn pull(map: &GeneralizedBoole, word: &[u16], iv: (f64, f64)) -> Result<(f64, f64)> {
    if iv.0 >= iv.1 {
        return Ok((0.0, 0.0));
    }
    Ok((
        inverse_word(map, word, iv.0)?,
        inverse_word(map, word, iv.1)?,
    ))
}

/// Depth-one cylinders of the return map to `D`, with return times capped
/// at `max_return`.
fn first_cylinders(
    map: &GeneralizedBoole,
    d: Interval,
    e: (f64, f64),
    max_return: usize,
) -> Result<Vec<Cylinder>> {
    let pm = ParabolicMap::from(map.clone());
    let right = pm.parabolic_branch(Side::Plus) as u16;
    let left = pm.parabolic_branch(Side::Minus) as u16;
    // q_m: preimages of z± on the parabolic branches
    let mut qr = vec![d.hi];
    let mut ql = vec![d.lo];
    for _ in 1..max_return {
        qr.push(map.inverse_on_branch(right as usize, *qr.last().unwrap())?);
        ql.push(map.inverse_on_branch(left as usize, *ql.last().unwrap())?);
    }
    let mut out = Vec::new();
    for j in 0..map.branch_count() {
        let b = map.branch(j).expect("branch");
        let piece = (b.lo.max(d.lo), b.hi.min(d.hi));
        let t_lo = if piece.0 == b.lo {
            f64::NEG_INFINITY
        } else {
            map.eval_unchecked(piece.0)
        };
        let t_hi = if piece.1 == b.hi {
            f64::INFINITY
        } else {
            map.eval_unchecked(piece.1)
        };
        let range = (t_lo, t_hi);
        // return after one step
        let o = intersect(range, (d.lo, d.hi));
        if o.0 < o.1 {
            let word = vec![j as u16];
            out.push(Cylinder {
                domain: pull(map, &word, o)?,
                image: o,
                epre: pull(map, &word, intersect(o, e))?,
                word,
            });
        }
        // excursions of m ≥ 1 steps outside D
        for m in 1..max_return {
            for (q, side, landing) in [
                (&qr, right, (map.eval_unchecked(d.hi).min(0.0), d.hi)),
                (&ql, left, (d.lo, map.eval_unchecked(d.lo).max(0.0))),
            ] {
                let band = if side == right {
                    (q[m - 1], q[m])
                } else {
                    (q[m], q[m - 1])
                };
                let o = intersect(range, band);
                if o.0 >= o.1 {
                    continue;
                }
                let mut word = vec![j as u16];
                word.extend(std::iter::repeat_n(side, m));
                let image = if o == band {
                    landing
                } else {
                    let a = forward_word(map, &word, o.0);
                    let c = forward_word(map, &word, o.1);
                    (a.min(c), a.max(c))
                };
                out.push(Cylinder {
                    domain: pull(map, &word, image)?,
                    image,
                    epre: pull(map, &word, intersect(image, e))?,
                    word,
                });
            }
        }
    }
    Ok(out)
}

/// Estimates the distortion constant of the return map `T_D` from the
/// cylinders of the given depth. Each cylinder `C` is compared with its own
/// image `I_C = T_D^n(C)`:
/// `[μ(C ∩ T_D^{−n}E)/μ(C)] / [μ(E ∩ I_C)/μ(I_C)]`; cylinders whose image
/// misses `E` are skipped.
pub fn distortion_estimate(
    map: &GeneralizedBoole,
    depth: usize,
    e: Interval,
    max_return: usize,
) -> Result<DistortionReport> {
    if depth == 0 || max_return == 0 {
        return Err(Error::invalid("depth and max_return must be positive"));
    }
    let d = ParabolicMap::from(map.clone()).core_interval()?;
    if !(d.lo <= e.lo && e.hi <= d.hi && e.lo < e.hi) {
        return Err(Error::invalid(format!(
            "E = {e} must be a subinterval of D = {d}"
        )));
    }
    let ev = (e.lo, e.hi);
    let base = first_cylinders(map, d, ev, max_return)?;
    let covered = base.iter().map(|c| c.domain.1 - c.domain.0).sum::<f64>() / d.length();
    let mut level = base.clone();
    for _ in 1..depth {
        let mut next = Vec::new();
        for y in &base {
            for z in &level {
                let o = intersect(z.domain, y.image);
                if o.0 >= o.1 {
                    continue;
                }
                let (image, epre_z) = if o == z.domain {
                    (z.image, z.epre)
                } else {
                    let a = forward_word(map, &z.word, o.0);
                    let c = forward_word(map, &z.word, o.1);
                    (
                        intersect((a.min(c), a.max(c)), z.image),
                        intersect(z.epre, o),
                    )
                };
                let mut word = y.word.clone();
                word.extend_from_slice(&z.word);
                next.push(Cylinder {
                    domain: pull(map, &y.word, o)?,
                    image,
                    epre: pull(map, &y.word, epre_z)?,
                    word,
                });
                if next.len() > MAX_CYLINDERS {
                    return Err(Error::CylinderOverflow {
                        limit: MAX_CYLINDERS,
                    });
                }
            }
        }
        level = next;
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut skipped = 0;
    for c in &level {
        let ei = intersect(c.image, ev);
        if ei.0 >= ei.1 {
            skipped += 1;
            continue;
        }
        let image_share = (ei.1 - ei.0) / (c.image.1 - c.image.0);
        let share = (c.epre.1 - c.epre.0).max(0.0) / (c.domain.1 - c.domain.0);
        let ratio = share / image_share;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    if level.len() == skipped {
        return Err(Error::InsufficientSamples(
            "no cylinder image meets E".into(),
        ));
    }
    Ok(DistortionReport {
        depth,
        target: e,
        max_return,
        cylinders: level.len(),
        skipped,
        min_ratio,
        max_ratio,
        m_hat: max_ratio.max(1.0 / min_ratio),
        covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn four() -> GeneralizedBoole {
        GeneralizedBoole::new(vec![-2.0, -1.0, 1.0, 2.0], vec![1.0; 4]).unwrap()
    }

    #[test]
    fn choose_p_for_boole() {
        let t = GeneralizedBoole::boole();
        let p = choose_p(&t, 1.5).unwrap();
        assert_relative_eq!(p * p, 18.0, epsilon = 1e-9);
        let rep = verify_afn(&t, p, 1.5, 10_000).unwrap();
        assert!(rep.k >= 1.5, "{}", rep.k);
        assert!(choose_p(&t, 1.8).unwrap() > choose_p(&t, 1.2).unwrap());
        assert!(choose_p(&t, 2.5).is_err());
    }

    #[test]
    fn expansion_outside_core_for_any_p() {
        let t = GeneralizedBoole::boole();
        for p in [0.3, 1.0, 7.0] {
            let s = Conjugate { map: &t, p };
            for i in 1..200 {
                let v = 1.0 + i as f64 * 0.37;
                for x in [s.phi_inv(v), s.phi_inv(-v)] {
                    assert!(s.derivative(x).unwrap() > 1.0);
                }
            }
        }
    }

    #[test]
    fn conjugacy_and_exponents() {
        let t = GeneralizedBoole::boole();
        let p = choose_p(&t, 1.5).unwrap();
        let rep = verify_afn(&t, p, 1.5, 20_000).unwrap();
        assert!(rep.conjugacy_error < 1e-10, "{}", rep.conjugacy_error);
        for e in &rep.parabolic_exponents {
            assert!((e - 3.0).abs() <= 0.2, "exponent {e}");
        }
        assert_eq!(rep.branch_count, 2);
    }

    #[test]
    fn adler_ratio_matches_finite_differences() {
        let t = four();
        let s = Conjugate { map: &t, p: 3.0 };
        for x in [-1.2, -0.5, 0.1, 0.9, 1.3] {
            let h = 1e-5;
            let d2 = (s.derivative(x + h).unwrap() - s.derivative(x - h).unwrap()) / (2.0 * h);
            let d1 = s.derivative(x).unwrap();
            assert_relative_eq!(
                s.adler_ratio(x).unwrap(),
                d2 / (d1 * d1),
                max_relative = 1e-5
            );
            let fd = (s.eval(x + h).unwrap() - s.eval(x - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(d1, fd, max_relative = 1e-7);
        }
    }

    #[test]
    fn four_pole_branch_count() {
        let t = four();
        let p = choose_p(&t, 1.1).unwrap();
        let rep = verify_afn(&t, p, 1.1, 20_000).unwrap();
        assert_eq!(rep.branch_count, 5);
    }

    #[test]
    fn certificate_survives_larger_p() {
        // the core minimum sits at T = 0, where S′ = T′(1 + s²/p²) falls to K_D
        let t = GeneralizedBoole::boole();
        let base = choose_p(&t, 1.5).unwrap();
        for f in [1.0, 2.0, 4.0, 16.0] {
            let rep = verify_afn(&t, base * f, 1.5, 5_000).unwrap();
            assert!(rep.k >= 1.5);
            assert!(rep.k >= 2.0 - 1e-3, "{}", rep.k);
        }
    }

    #[test]
    fn distortion_full_target_is_exact() {
        let t = GeneralizedBoole::boole();
        let rep = distortion_estimate(&t, 2, Interval::new(-1.0, 1.0), 10).unwrap();
        assert_relative_eq!(rep.min_ratio, 1.0, epsilon = 1e-9);
        assert_relative_eq!(rep.max_ratio, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn distortion_depth_one_and_counts() {
        let t = GeneralizedBoole::boole();
        let rep = distortion_estimate(&t, 1, Interval::new(0.0, 1.0), 10).unwrap();
        assert_eq!(rep.cylinders, 20);
        assert!(rep.min_ratio >= 1.0 / rep.m_hat && rep.max_ratio <= rep.m_hat);
        assert!(rep.covered > 0.5 && rep.covered <= 1.0 + 1e-12);
        let rep2 = distortion_estimate(&t, 2, Interval::new(0.1, 0.6), 10).unwrap();
        assert_eq!(rep2.cylinders, 20 * 10);
        assert!(rep2.m_hat.is_finite() && rep2.m_hat >= 1.0);
    }

    #[test]
    fn distortion_four_poles() {
        let rep = distortion_estimate(&four(), 2, Interval::new(-0.5, 0.8), 6).unwrap();
        assert!(rep.m_hat.is_finite() && rep.m_hat >= 1.0);
    }

    #[test]
    fn distortion_overflow() {
        let t = GeneralizedBoole::boole();
        assert!(matches!(
            distortion_estimate(&t, 5, Interval::new(0.1, 0.6), 40),
            Err(Error::CylinderOverflow { .. })
        ));
    }
}
