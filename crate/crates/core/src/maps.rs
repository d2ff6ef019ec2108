//! Parabolic interval maps: Boole's transformation, generalized Boole
//! transformations `x - Σ b_k/(x - a_k)` and the infinite-degree example
//! `x ↦ cot(1/x)`.
//!
//! Every branch of these maps is an increasing bijection from an open
//! interval between consecutive poles onto the whole real line. The two
//! unbounded branches are parabolic (the point at infinity is a parabolic
//! fixed point), the bounded ones are hyperbolic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PoleHit, Result};
use crate::Interval;

/// Relative size of the pole guard, in units of the local pole spacing.
pub const POLE_GUARD: f64 = 1e-12;

/// Hyperbolic branches of the cotangent map with `|k|` above this index are
/// treated as pole territory.
pub const COT_BRANCH_CUTOFF: i64 = 1_000_000;

/// Upper bound on the length of a computed backward parabolic orbit.
pub const MAX_BACKWARD_ORBIT: usize = 1_000_000;

/// A real map that can be iterated pointwise, failing near its poles.
pub trait IntervalMap: Sync {
    fn eval(&self, x: f64) -> std::result::Result<f64, PoleHit>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub lo: f64,
    pub hi: f64,
    pub kind: BranchKind,
}

impl Branch {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// `T(x) = x - Σ b_k/(x - a_k)` with strictly increasing poles `a_k` and
/// positive weights `b_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBoole", into = "RawBoole")]
pub struct GeneralizedBoole {
    poles: Vec<f64>,
    weights: Vec<f64>,
    guards: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBoole {
    poles: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawBoole> for GeneralizedBoole {
    type Error = Error;
    fn try_from(raw: RawBoole) -> Result<Self> {
        GeneralizedBoole::new(raw.poles, raw.weights)
    }
}

impl From<GeneralizedBoole> for RawBoole {
    fn from(map: GeneralizedBoole) -> Self {
        RawBoole {
            poles: map.poles,
            weights: map.weights,
        }
    }
}

impl GeneralizedBoole {
    pub fn new(poles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::invalid(
                "a generalized Boole map needs at least one pole",
            ));
        }
        if poles.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} poles but {} weights",
                poles.len(),
                weights.len()
            )));
        }
        if poles.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::invalid("poles and weights must be finite"));
        }
        if poles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("poles must be strictly increasing"));
        }
        if weights.iter().any(|&b| b <= 0.0) {
            return Err(Error::invalid("weights must be positive"));
        }
        let guards = (0..poles.len())
            .map(|k| {
                let left = if k > 0 {
                    poles[k] - poles[k - 1]
                } else {
                    f64::INFINITY
                };
                let right = if k + 1 < poles.len() {
                    poles[k + 1] - poles[k]
                } else {
                    f64::INFINITY
                };
                let spacing = left.min(right);
                POLE_GUARD * if spacing.is_finite() { spacing } else { 1.0 }
            })
            .collect();
        Ok(Self {
            poles,
            weights,
            guards,
        })
    }

    /// Boole's map `x - 1/x`.
    pub fn boole() -> Self {
        Self::new(vec![0.0], vec![1.0]).expect("valid")
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self) -> usize {
        self.poles.len()
    }

    /// Coefficient `c` of the expansion `T(x) = x - c/x + O(1/x²)` at infinity.
    pub fn parabolic_coefficient(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Total mass `R = Σ b_k/(1 + a_k²)` of the measure in the Nevanlinna
    /// representation of the associated inner function.
    pub fn nevanlinna_mass(&self) -> f64 {
        self.poles
            .iter()
            .zip(&self.weights)
            .map(|(a, b)| b / (1.0 + a * a))
            .sum()
    }

    /// Constant term of `T(x) - x - ∫ (1 + x w)/(w - x) dρ(w)`, i.e.
    /// `Σ ρ_k a_k`. Zero for maps with symmetric poles and weights.
    pub fn nevanlinna_shift(&self) -> f64 {
        self.poles
            .iter()
            .zip(&self.weights)
            .map(|(a, b)| b * a / (1.0 + a * a))
            .sum()
    }

    fn check_guard(&self, x: f64) -> std::result::Result<(), PoleHit> {
        for (&a, &g) in self.poles.iter().zip(&self.guards) {
            if (x - a).abs() < g {
                return Err(PoleHit { x, pole: a });
            }
        }
        Ok(())
    }

    /// Evaluates without the pole guard.
    #[inline]
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (&a, &b) in self.poles.iter().zip(&self.weights) {
            acc += b / (x - a);
        }
        x - acc
    }

    #[inline]
    fn derivative_unchecked(&self, x: f64) -> f64 {
        let mut acc = 1.0;
        for (&a, &b) in self.poles.iter().zip(&self.weights) {
            let d = x - a;
            acc += b / (d * d);
        }
        acc
    }

    pub fn derivative(&self, x: f64) -> std::result::Result<f64, PoleHit> {
        self.check_guard(x)?;
        Ok(self.derivative_unchecked(x))
    }

    pub fn second_derivative(&self, x: f64) -> std::result::Result<f64, PoleHit> {
        self.check_guard(x)?;
        let mut acc = 0.0;
        for (&a, &b) in self.poles.iter().zip(&self.weights) {
            let d = x - a;
            acc -= 2.0 * b / (d * d * d);
        }
        Ok(acc)
    }

    /// `T(x) - x`, computed without cancellation.
    pub fn displacement(&self, x: f64) -> f64 {
        -self
            .poles
            .iter()
            .zip(&self.weights)
            .map(|(a, b)| b / (x - a))
            .sum::<f64>()
    }

    pub fn branch_count(&self) -> usize {
        self.poles.len() + 1
    }

    pub fn branch(&self, index: usize) -> Option<Branch> {
        let n = self.poles.len();
        if index > n {
            return None;
        }
        let lo = if index == 0 {
            f64::NEG_INFINITY
        } else {
            self.poles[index - 1]
        };
        let hi = if index == n {
            f64::INFINITY
        } else {
            self.poles[index]
        };
        let kind = if index == 0 || index == n {
            BranchKind::Parabolic
        } else {
            BranchKind::Hyperbolic
        };
        Some(Branch { lo, hi, kind })
    }

    /// Index of the branch containing `x`; poles themselves belong to none.
    pub fn branch_of(&self, x: f64) -> Option<usize> {
        let idx = self.poles.partition_point(|&a| a < x);
        if idx < self.poles.len() && self.poles[idx] == x {
            None
        } else {
            Some(idx)
        }
    }

    pub fn inverse_on_branch(&self, index: usize, y: f64) -> Result<f64> {
        let branch = self
            .branch(index)
            .ok_or_else(|| Error::invalid(format!("branch {index} does not exist")))?;
        if !y.is_finite() {
            return Err(Error::invalid("inverse of a non-finite value"));
        }
        solve_increasing(
            |x| self.eval_unchecked(x),
            |x| self.derivative_unchecked(x),
            branch.lo,
            branch.hi,
            y,
        )
    }

    /// `μ(T⁻¹[c, d])`, summed over the preimage intervals of all branches.
    pub fn preimage_length(&self, c: f64, d: f64) -> Result<f64> {
        if !(c < d) {
            return Err(Error::invalid("need c < d"));
        }
        (0..self.branch_count())
            .map(|j| Ok(self.inverse_on_branch(j, d)? - self.inverse_on_branch(j, c)?))
            .sum()
    }
}

impl IntervalMap for GeneralizedBoole {
    #[inline]
    fn eval(&self, x: f64) -> std::result::Result<f64, PoleHit> {
        let mut acc = 0.0;
        for ((&a, &b), &g) in self.poles.iter().zip(&self.weights).zip(&self.guards) {
            let d = x - a;
            if d.abs() < g {
                return Err(PoleHit { x, pole: a });
            }
            acc += b / d;
        }
        Ok(x - acc)
    }
}

/// Solves `f(x) = y` for an increasing function on `(lo, hi)` that tends to
/// `-∞` at `lo` and `+∞` at `hi` (poles or infinities). Newton steps are
/// kept inside a shrinking bracket and replaced by bisection when they leave
/// it.
fn solve_increasing(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    y: f64,
) -> Result<f64> {
    let mut l = if lo.is_finite() {
        let gap = if hi.is_finite() { 0.5 * (hi - lo) } else { 1.0 };
        let mut step = gap;
        let mut x = lo + step;
        let mut tries = 0;
        while f(x) > y {
            step *= 0.5;
            x = lo + step;
            tries += 1;
            if x <= lo || tries > 1100 {
                return Err(Error::NonConvergence(format!(
                    "cannot bracket {y} above pole {lo}"
                )));
            }
        }
        x
    } else {
        let base = if hi.is_finite() { y.min(hi) } else { y };
        let mut step = 1.0;
        let mut x = base - step;
        while f(x) > y {
            step *= 2.0;
            x = base - step;
            if !x.is_finite() {
                return Err(Error::NonConvergence(format!(
                    "cannot bracket {y} from below"
                )));
            }
        }
        x
    };
    let mut h = if hi.is_finite() {
        let gap = if lo.is_finite() { 0.5 * (hi - lo) } else { 1.0 };
        let mut step = gap;
        let mut x = hi - step;
        let mut tries = 0;
        while f(x) < y {
            step *= 0.5;
            x = hi - step;
            tries += 1;
            if x >= hi || tries > 1100 {
                return Err(Error::NonConvergence(format!(
                    "cannot bracket {y} below pole {hi}"
                )));
            }
        }
        x
    } else {
        let base = if lo.is_finite() { y.max(lo) } else { y };
        let mut step = 1.0;
        let mut x = base + step;
        while f(x) < y {
            step *= 2.0;
            x = base + step;
            if !x.is_finite() {
                return Err(Error::NonConvergence(format!(
                    "cannot bracket {y} from above"
                )));
            }
        }
        x
    };
    if l > h {
        std::mem::swap(&mut l, &mut h);
    }

    let mut x = 0.5 * (l + h);
    for _ in 0..200 {
        let r = f(x) - y;
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            l = x;
        } else {
            h = x;
        }
        let d = df(x);
        let newton = x - r / d;
        let next = if newton > l && newton < h && d.is_finite() {
            newton
        } else {
            0.5 * (l + h)
        };
        let scale = next.abs().max(f64::MIN_POSITIVE);
        if (next - x).abs() <= 4.0 * f64::EPSILON * scale || h - l <= 4.0 * f64::EPSILON * scale {
            // two polishing steps, kept only if they improve the residual
            let mut best = next;
            let mut best_r = (f(best) - y).abs();
            let mut cur = best;
            for _ in 0..2 {
                let cand = cur - (f(cur) - y) / df(cur);
                if !cand.is_finite() {
                    break;
                }
                let cr = (f(cand) - y).abs();
                if cr < best_r {
                    best = cand;
                    best_r = cr;
                }
                cur = cand;
            }
            return Ok(best);
        }
        x = next;
    }
    Err(Error::NonConvergence(format!(
        "no convergence solving for {y} on ({lo}, {hi})"
    )))
}

/// `x ↦ cot(1/x)`: poles at `1/(kπ)`, `k ≠ 0`, accumulating at the
/// singularity `0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CotangentMap;

impl CotangentMap {
    /// Branch count with the hyperbolic branches truncated at
    /// [`COT_BRANCH_CUTOFF`] on each side.
    pub fn branch_count(&self) -> usize {
        2 * COT_BRANCH_CUTOFF as usize + 2
    }

    /// Pole index `k` of the hyperbolic branch at `index`, or `None` for the
    /// two parabolic branches.
    fn branch_k(&self, index: usize) -> Option<i64> {
        let kmax = COT_BRANCH_CUTOFF as usize;
        if index == 0 || index == 2 * kmax + 1 {
            None
        } else if index <= kmax {
            Some(-(index as i64))
        } else {
            Some((2 * kmax + 1 - index) as i64)
        }
    }

    pub fn branch(&self, index: usize) -> Option<Branch> {
        if index >= self.branch_count() {
            return None;
        }
        let kmax = COT_BRANCH_CUTOFF as usize;
        let b = match self.branch_k(index) {
            None if index == 0 => Branch {
                lo: f64::NEG_INFINITY,
                hi: -1.0 / PI,
                kind: BranchKind::Parabolic,
            },
            None => {
                debug_assert_eq!(index, 2 * kmax + 1);
                Branch {
                    lo: 1.0 / PI,
                    hi: f64::INFINITY,
                    kind: BranchKind::Parabolic,
                }
            }
            Some(k) if k > 0 => Branch {
                lo: 1.0 / ((k + 1) as f64 * PI),
                hi: 1.0 / (k as f64 * PI),
                kind: BranchKind::Hyperbolic,
            },
            Some(k) => {
                let m = (-k) as f64;
                Branch {
                    lo: -1.0 / (m * PI),
                    hi: -1.0 / ((m + 1.0) * PI),
                    kind: BranchKind::Hyperbolic,
                }
            }
        };
        Some(b)
    }

    pub fn branch_of(&self, x: f64) -> Option<usize> {
        if x == 0.0 || !x.is_finite() {
            return None;
        }
        let kmax = COT_BRANCH_CUTOFF as usize;
        let u = 1.0 / x;
        if x > 1.0 / PI {
            return Some(2 * kmax + 1);
        }
        if x < -1.0 / PI {
            return Some(0);
        }
        let k = (u / PI).floor() as i64;
        // u ∈ (kπ, (k+1)π) for x > 0, u ∈ ((k)π, (k+1)π) with k ≤ -2 for x < 0
        if x > 0.0 {
            (1..=COT_BRANCH_CUTOFF)
                .contains(&k)
                .then(|| 2 * kmax + 1 - k as usize)
        } else {
            let m = -(k + 1);
            (1..=COT_BRANCH_CUTOFF).contains(&m).then_some(m as usize)
        }
    }

    pub fn derivative(&self, x: f64) -> std::result::Result<f64, PoleHit> {
        self.guard(x)?;
        let s = (1.0 / x).sin();
        Ok(1.0 / (s * s * x * x))
    }

    fn guard(&self, x: f64) -> std::result::Result<(), PoleHit> {
        if x == 0.0 || x.abs() * PI * (COT_BRANCH_CUTOFF as f64) < 1.0 {
            return Err(PoleHit { x, pole: 0.0 });
        }
        let u = 1.0 / x;
        let k = (u / PI).round();
        if k != 0.0 {
            let pole = 1.0 / (k * PI);
            let ka = k.abs();
            let spacing = 1.0 / (ka * (ka + 1.0) * PI);
            if (x - pole).abs() < POLE_GUARD * spacing {
                return Err(PoleHit { x, pole });
            }
        }
        Ok(())
    }

    pub fn inverse_on_branch(&self, index: usize, y: f64) -> Result<f64> {
        if index >= self.branch_count() {
            return Err(Error::invalid(format!("branch {index} does not exist")));
        }
        if !y.is_finite() {
            return Err(Error::invalid("inverse of a non-finite value"));
        }
        // arccot with values in (0, π)
        let arccot = 0.5 * PI - y.atan();
        let kmax = COT_BRANCH_CUTOFF as usize;
        let u = match self.branch_k(index) {
            None if index == 0 => arccot - PI,
            None => arccot,
            Some(k) if k > 0 => k as f64 * PI + arccot,
            Some(k) => (k - 1) as f64 * PI + arccot,
        };
        let _ = kmax;
        Ok(1.0 / u)
    }
}

impl IntervalMap for CotangentMap {
    fn eval(&self, x: f64) -> std::result::Result<f64, PoleHit> {
        self.guard(x)?;
        Ok(1.0 / (1.0 / x).tan())
    }
}

/// Structured description of a map, as found in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub kind: MapKind,
    #[serde(default)]
    pub poles: Vec<f64>,
    #[serde(default)]
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Boole,
    GeneralizedBoole,
    Cotangent,
}

impl MapSpec {
    pub fn boole() -> Self {
        MapSpec {
            kind: MapKind::Boole,
            poles: vec![],
            weights: vec![],
        }
    }

    pub fn build(&self) -> Result<ParabolicMap> {
        match self.kind {
            MapKind::Boole => {
                if !self.poles.is_empty() || !self.weights.is_empty() {
                    return Err(Error::invalid("kind `boole` takes no poles or weights"));
                }
                Ok(ParabolicMap::Boole(GeneralizedBoole::boole()))
            }
            MapKind::GeneralizedBoole => Ok(ParabolicMap::Boole(GeneralizedBoole::new(
                self.poles.clone(),
                self.weights.clone(),
            )?)),
            MapKind::Cotangent => {
                if !self.poles.is_empty() || !self.weights.is_empty() {
                    return Err(Error::invalid("kind `cotangent` takes no poles or weights"));
                }
                Ok(ParabolicMap::Cotangent(CotangentMap))
            }
        }
    }

    /// Short label used in output file names and headers.
    pub fn label(&self) -> String {
        match self.kind {
            MapKind::Boole => "boole".into(),
            MapKind::Cotangent => "cotangent".into(),
            MapKind::GeneralizedBoole => format!("generalized_boole_n{}", self.poles.len()),
        }
    }
}

impl std::str::FromStr for MapSpec {
    type Err = Error;

    /// Parses `boole`, `cotangent` or `generalized_boole:a1,a2,..;b1,b2,..`
    /// (weights default to 1).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "boole" => return Ok(MapSpec::boole()),
            "cotangent" => {
                return Ok(MapSpec {
                    kind: MapKind::Cotangent,
                    poles: vec![],
                    weights: vec![],
                })
            }
            _ => {}
        }
        let rest = s
            .strip_prefix("generalized_boole:")
            .ok_or_else(|| Error::config("map", format!("unknown map `{s}`")))?;
        let (poles, weights) = match rest.split_once(';') {
            Some((p, w)) => (p, Some(w)),
            None => (rest, None),
        };
        let parse = |list: &str| -> Result<Vec<f64>> {
            list.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::config("map", format!("bad number `{v}`: {e}")))
                })
                .collect()
        };
        let poles = parse(poles)?;
        let weights = match weights {
            Some(w) => parse(w)?,
            None => vec![1.0; poles.len()],
        };
        Ok(MapSpec {
            kind: MapKind::GeneralizedBoole,
            poles,
            weights,
        })
    }
}

/// Any of the parabolic interval maps.
#[derive(Debug, Clone, PartialEq)]
pub enum ParabolicMap {
    Boole(GeneralizedBoole),
    Cotangent(CotangentMap),
}

impl From<GeneralizedBoole> for ParabolicMap {
    fn from(map: GeneralizedBoole) -> Self {
        ParabolicMap::Boole(map)
    }
}

impl From<CotangentMap> for ParabolicMap {
    fn from(map: CotangentMap) -> Self {
        ParabolicMap::Cotangent(map)
    }
}

impl IntervalMap for ParabolicMap {
    #[inline]
    fn eval(&self, x: f64) -> std::result::Result<f64, PoleHit> {
        match self {
            ParabolicMap::Boole(m) => m.eval(x),
            ParabolicMap::Cotangent(m) => m.eval(x),
        }
    }
}

impl ParabolicMap {
    pub fn as_generalized_boole(&self) -> Option<&GeneralizedBoole> {
        match self {
            ParabolicMap::Boole(m) => Some(m),
            ParabolicMap::Cotangent(_) => None,
        }
    }

    pub fn derivative(&self, x: f64) -> std::result::Result<f64, PoleHit> {
        match self {
            ParabolicMap::Boole(m) => m.derivative(x),
            ParabolicMap::Cotangent(m) => m.derivative(x),
        }
    }

    pub fn branch_count(&self) -> usize {
        match self {
            ParabolicMap::Boole(m) => m.branch_count(),
            ParabolicMap::Cotangent(m) => m.branch_count(),
        }
    }

    pub fn branch(&self, index: usize) -> Option<Branch> {
        match self {
            ParabolicMap::Boole(m) => m.branch(index),
            ParabolicMap::Cotangent(m) => m.branch(index),
        }
    }

    pub fn branch_of(&self, x: f64) -> Option<usize> {
        match self {
            ParabolicMap::Boole(m) => m.branch_of(x),
            ParabolicMap::Cotangent(m) => m.branch_of(x),
        }
    }

    pub fn inverse_on_branch(&self, index: usize, y: f64) -> Result<f64> {
        match self {
            ParabolicMap::Boole(m) => m.inverse_on_branch(index, y),
            ParabolicMap::Cotangent(m) => m.inverse_on_branch(index, y),
        }
    }

    pub fn parabolic_branch(&self, side: Side) -> usize {
        match side {
            Side::Minus => 0,
            Side::Plus => self.branch_count() - 1,
        }
    }

    /// The extreme pole `p₁^±`.
    pub fn extreme_pole(&self, side: Side) -> f64 {
        let idx = self.parabolic_branch(side);
        let b = self.branch(idx).expect("parabolic branch exists");
        match side {
            Side::Minus => b.hi,
            Side::Plus => b.lo,
        }
    }

    /// `p₁^±, p₂^±, …`: the extreme pole followed by its successive
    /// preimages on the parabolic branch of that side.
    pub fn backward_parabolic_orbit(&self, side: Side, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::invalid("count must be at least 1"));
        }
        if count > MAX_BACKWARD_ORBIT {
            return Err(Error::invalid(format!(
                "count {count} exceeds the cap of {MAX_BACKWARD_ORBIT}"
            )));
        }
        let branch = self.parabolic_branch(side);
        let mut out = Vec::with_capacity(count);
        let mut p = self.extreme_pole(side);
        out.push(p);
        for _ in 1..count {
            p = self.inverse_on_branch(branch, p)?;
            out.push(p);
        }
        Ok(out)
    }

    /// `D = (z⁻, z⁺)`, spanned by the extreme preimages of zero.
    pub fn core_interval(&self) -> Result<Interval> {
        let lo = self.inverse_on_branch(self.parabolic_branch(Side::Minus), 0.0)?;
        let hi = self.inverse_on_branch(self.parabolic_branch(Side::Plus), 0.0)?;
        Ok(Interval::new(lo, hi))
    }

    /// Branch decomposition together with `count` points of each backward
    /// parabolic orbit. Cotangent branches are listed up to `|k| ≤ listed`.
    pub fn branch_structure(&self, count: usize, guard_radius: f64) -> Result<BranchStructure> {
        let branches = match self {
            ParabolicMap::Boole(m) => (0..m.branch_count()).filter_map(|i| m.branch(i)).collect(),
            ParabolicMap::Cotangent(m) => {
                const LISTED: usize = 64;
                let n = m.branch_count();
                (0..=LISTED)
                    .chain(n - 1 - LISTED..n)
                    .filter_map(|i| m.branch(i))
                    .collect()
            }
        };
        Ok(BranchStructure {
            branches,
            p_plus: self.backward_parabolic_orbit(Side::Plus, count)?,
            p_minus: self.backward_parabolic_orbit(Side::Minus, count)?,
            core: self.core_interval()?,
            guard_radius,
        })
    }
}

/// Branch intervals, backward parabolic orbits and the core interval `D`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchStructure {
    pub branches: Vec<Branch>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub core: Interval,
    pub guard_radius: f64,
}

impl BranchStructure {
    /// `J_n^± = [p_n^±, p_{n+1}^±]` (1-based `n`).
    pub fn j_interval(&self, side: Side, n: usize) -> Option<Interval> {
        let p = match side {
            Side::Plus => &self.p_plus,
            Side::Minus => &self.p_minus,
        };
        if n == 0 || n >= p.len() {
            return None;
        }
        let (a, b) = (p[n - 1], p[n]);
        Some(Interval::new(a.min(b), a.max(b)))
    }

    /// `sup_n p_n^+/√n` over the computed range.
    pub fn sqrt_growth_constant(&self) -> f64 {
        self.p_plus
            .iter()
            .enumerate()
            .map(|(i, p)| p.abs() / ((i + 1) as f64).sqrt())
            .fold(0.0, f64::max)
    }

    /// The guarded core `D_r`: points of `D` at distance less than `r` from
    /// a pole.
    pub fn in_guard(&self, x: f64) -> bool {
        self.branches
            .iter()
            .flat_map(|b| [b.lo, b.hi])
            .filter(|a| a.is_finite())
            .any(|a| (x - a).abs() < self.guard_radius)
    }
}
