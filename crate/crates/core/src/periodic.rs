//! Periodic points near a prescribed center, with the explicit period
//! bounds for Boole's map and for generalized Boole maps, and the mapping
//! properties those bounds rest on.
//!
//! The search pushes `B = (x − r, x + r)` forward as a union of pieces, each
//! carrying its branch word. A piece whose image covers `B̄` yields an
//! inverse branch `G_w` of `T^N` mapping `B̄` into `B`; once `G_w` also
//! shrinks `B̄` to less than half its length, its fixed point is periodic.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{GeneralizedBoole, IntervalMap, ParabolicMap};
use crate::Interval;

/// Most pieces kept per step.
pub const MAX_PIECES: usize = 64;

/// Absolute residual accepted for `|T^N(p) − p|`, scaled by `max(1, |p|)`.
pub const TOL_PER: f64 = 1e-12;

const CONSTANT_GRID: usize = 10_000;

/// `(−ln r/ln 2 + 1)·4/r² + x²`.
pub fn period_bound_boole(x: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 0.25) {
        return Err(Error::invalid("the Boole bound needs 0 < r < 1/4"));
    }
    Ok((-r.ln() / 2f64.ln() + 1.0) * 4.0 / (r * r) + x * x)
}

/// Constants of the general period bound for a generalized Boole map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodConstants {
    /// `min T′` on `D`, from a grid.
    pub k: f64,
    /// `c = Σ b_k`, from `T(x) = x − c/x + O(1/x²)`.
    pub c: f64,
    /// `W = z_max + (1 + z_max·M)·R`.
    pub w: f64,
    /// `r₀ = min(¼, ¼·min pole gap)`.
    pub r0: f64,
    pub core: Interval,
}

pub fn period_constants(map: &GeneralizedBoole) -> Result<PeriodConstants> {
    let d = ParabolicMap::from(map.clone()).core_interval()?;
    let mut k = f64::INFINITY;
    for i in 0..=CONSTANT_GRID {
        let x = d.lo + d.length() * i as f64 / CONSTANT_GRID as f64;
        if let Ok(v) = map.derivative(x) {
            k = k.min(v);
        }
    }
    if !(k > 1.0 + 1e-9) {
        return Err(Error::ConstantsUnavailable(format!(
            "expansion constant {k} on D = {d} is not above 1"
        )));
    }
    let z_max = d.lo.abs().max(d.hi.abs());
    let m_supp = map.poles().iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let w = z_max + (1.0 + z_max * m_supp) * map.nevanlinna_mass();
    let min_gap = map
        .poles()
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::INFINITY, f64::min);
    Ok(PeriodConstants {
        k,
        c: map.parabolic_coefficient(),
        w,
        r0: 0.25f64.min(0.25 * min_gap),
        core: d,
    })
}

/// `(−ln r/ln K + 1)·W/(c r²) + x²/c`.
pub fn period_bound_general(map: &GeneralizedBoole, x: f64, r: f64) -> Result<f64> {
    let k = period_constants(map)?;
    if !(r > 0.0 && r < k.r0) {
        return Err(Error::invalid(format!("need 0 < r < r0 = {}", k.r0)));
    }
    Ok((-r.ln() / k.k.ln() + 1.0) * k.w / (k.c * r * r) + x * x / k.c)
}

fn is_boole(map: &GeneralizedBoole) -> bool {
    map.poles() == [0.0] && map.weights() == [1.0]
}

/// Bound applying to `map`: the Boole formula for Boole's map, the general
/// formula otherwise.
pub fn applicable_bound(map: &GeneralizedBoole, x: f64, r: f64) -> Result<f64> {
    if is_boole(map) {
        period_bound_boole(x, r)
    } else {
        period_bound_general(map, x, r)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicSearchResult {
    pub center: f64,
    pub radius: f64,
    pub point: f64,
    pub period: usize,
    /// `|T^N(p) − p|` by forward iteration.
    pub residual: f64,
    /// `|G_w(p) − p|` through the recorded inverse branches.
    pub inverse_residual: f64,
    pub bound: f64,
    /// `|G_w(B̄)|/|B̄|`.
    pub contraction: f64,
    /// Smallest distance of an orbit point to a pole.
    pub pole_margin: f64,
    pub branch_word: Vec<u16>,
}

impl PeriodicSearchResult {
    pub fn verified(&self) -> bool {
        self.residual <= TOL_PER * self.point.abs().max(1.0)
            && self.period as f64 <= self.bound
            && self.pole_margin > 0.0
            && (self.point - self.center).abs() < self.radius
    }
}

#[derive(Clone)]
struct Piece {
    word: Vec<u16>,
    lo: f64,
    hi: f64,
}

impl Piece {
    fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Image of the open interval `(lo, hi)` inside one branch.
fn branch_image(
    map: &GeneralizedBoole,
    lo: f64,
    hi: f64,
    branch_lo: f64,
    branch_hi: f64,
) -> (f64, f64) {
    let a = if lo <= branch_lo {
        f64::NEG_INFINITY
    } else {
        map.eval_unchecked(lo)
    };
    let b = if hi >= branch_hi {
        f64::INFINITY
    } else {
        map.eval_unchecked(hi)
    };
    (a, b)
}

fn compose_inverse(map: &GeneralizedBoole, word: &[u16], y: f64) -> Result<f64> {
    let mut v = y;
    for &b in word.iter().rev() {
        v = map.inverse_on_branch(b as usize, v)?;
    }
    Ok(v)
}

/// Searches a periodic point in `(x − r, x + r)`.
pub fn find_periodic(map: &ParabolicMap, x: f64, r: f64) -> Result<PeriodicSearchResult> {
    let map = map
        .as_generalized_boole()
        .ok_or_else(|| Error::Unsupported("periodic search needs a finite-degree map".into()))?;
    if !x.is_finite() {
        return Err(Error::invalid("center must be finite"));
    }
    let r0 = if is_boole(map) {
        0.25
    } else {
        period_constants(map)?.r0
    };
    if !(r > 0.0 && r < r0) {
        return Err(Error::invalid(format!("radius must lie in (0, {r0})")));
    }
    let bound = applicable_bound(map, x, r)?;
    let closure = Interval::new(x - r, x + r);
    let max_steps = bound.floor() as usize;

    let mut pieces = vec![Piece {
        word: Vec::new(),
        lo: x - r,
        hi: x + r,
    }];
    for n in 1..=max_steps {
        let mut next = Vec::new();
        for piece in &pieces {
            let first = map.branch_of(piece.lo).unwrap_or_else(|| {
                // a pole endpoint belongs to the branch on its right
                map.poles().partition_point(|&a| a <= piece.lo)
            });
            let mut idx = first;
            let mut lo = piece.lo;
            loop {
                let b = map.branch(idx).expect("branch");
                let hi = piece.hi.min(b.hi);
                if lo < hi {
                    let (a, c) = branch_image(map, lo, hi, b.lo, b.hi);
                    let mut word = piece.word.clone();
                    word.push(idx as u16);
                    next.push(Piece { word, lo: a, hi: c });
                }
                if piece.hi <= b.hi || idx + 1 >= map.branch_count() {
                    break;
                }
                lo = b.hi;
                idx += 1;
            }
        }
        if next.len() > MAX_PIECES {
            next.sort_by(|p, q| {
                q.length()
                    .partial_cmp(&p.length())
                    .unwrap_or(Ordering::Equal)
            });
            next.truncate(MAX_PIECES);
        }
        pieces = next;

        let mut best: Option<(f64, f64, &Piece)> = None;
        for piece in &pieces {
            if !(piece.lo < closure.lo && piece.hi > closure.hi) {
                continue;
            }
            let a = compose_inverse(map, &piece.word, closure.lo)?;
            let b = compose_inverse(map, &piece.word, closure.hi)?;
            let len = b - a;
            if len < r && best.is_none_or(|(l, _, _)| len > l) {
                best = Some((len, a, piece));
            }
        }
        if let Some((len, start, piece)) = best {
            return certify(map, x, r, bound, n, len / (2.0 * r), start, &piece.word);
        }
    }
    Err(Error::SearchExhausted {
        steps: max_steps,
        bound,
    })
}

#[allow(clippy::too_many_arguments)]
fn certify(
    map: &GeneralizedBoole,
    x: f64,
    r: f64,
    bound: f64,
    period: usize,
    contraction: f64,
    start: f64,
    word: &[u16],
) -> Result<PeriodicSearchResult> {
    // fixed point of the contraction G_w
    let mut p = start;
    for _ in 0..200 {
        let q = compose_inverse(map, word, p)?;
        let done = (q - p).abs() <= 2.0 * f64::EPSILON * q.abs().max(1e-300);
        p = q;
        if done {
            break;
        }
    }
    // Newton on G_w(y) − y; G_w′ is the reciprocal of the product of T′
    for _ in 0..2 {
        let mut v = p;
        let mut slope = 1.0;
        for &b in word.iter().rev() {
            v = map.inverse_on_branch(b as usize, v)?;
            slope /= map.derivative(v)?;
        }
        let g = v - p;
        let cand = p - g / (slope - 1.0);
        if (compose_inverse(map, word, cand)? - cand).abs() <= g.abs() {
            p = cand;
        }
    }
    let inverse_residual = (compose_inverse(map, word, p)? - p).abs();
    let mut y = p;
    let mut pole_margin = f64::INFINITY;
    for _ in 0..period {
        for &a in map.poles() {
            pole_margin = pole_margin.min((y - a).abs());
        }
        y = map.eval(y)?;
    }
    Ok(PeriodicSearchResult {
        center: x,
        radius: r,
        point: p,
        period,
        residual: (y - p).abs(),
        inverse_residual,
        bound,
        contraction,
        pole_margin,
        branch_word: word.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClauseResult {
    pub clause: String,
    pub pass: bool,
    pub points: usize,
    /// Largest step count needed (passage clauses) or smallest derivative.
    pub worst: f64,
    /// Step limit or derivative bound the clause is checked against.
    pub limit: f64,
    pub failure: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MappingReport {
    pub core: Interval,
    pub radius: f64,
    pub clauses: Vec<ClauseResult>,
}

impl MappingReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

/// First `n` in `start..=limit` with `T^n(x) ∈ D`.
fn passage(map: &GeneralizedBoole, x: f64, d: Interval, start: u64, limit: u64) -> Option<u64> {
    let inside = |v: f64| d.lo < v && v < d.hi;
    let mut y = x;
    for n in 0..=limit {
        if n >= start && inside(y) {
            return Some(n);
        }
        y = map.eval(y).ok()?;
    }
    None
}

fn grid(lo: f64, hi: f64, size: usize) -> impl Iterator<Item = f64> {
    // open grid, endpoints excluded
    (1..=size).map(move |i| lo + (hi - lo) * i as f64 / (size + 1) as f64)
}

/// Checks the mapping properties behind the period bounds on `size`-point
/// grids: expansion on `D`, passage into `D` within `⌊x²/c⌋` steps (from
/// `[−span, span]`), and return to `D` from `D ∖ D_r` within `⌊4/r²⌋` steps
/// for Boole's map, `⌊W/(c r²)⌋` otherwise. For Boole's map `D_r` is the
/// interval of length `r` around the pole, otherwise the union of the
/// `r`-balls around the poles.
pub fn check_mapping_properties(
    map: &GeneralizedBoole,
    size: usize,
    r: f64,
    span: f64,
) -> Result<MappingReport> {
    if size == 0 || !(r > 0.0) || !(span > 0.0) {
        return Err(Error::invalid(
            "grid size, radius and span must be positive",
        ));
    }
    let boole = is_boole(map);
    let consts = period_constants(map)?;
    let d = consts.core;
    let mut clauses = Vec::new();

    let k_req = if boole { 2.0 } else { consts.k };
    let mut worst = f64::INFINITY;
    let mut failure = None;
    let mut points = 0;
    for x in grid(d.lo, d.hi, size) {
        if let Ok(v) = map.derivative(x) {
            points += 1;
            worst = worst.min(v);
            let ok = if boole { v > k_req } else { v >= k_req };
            if !ok && failure.is_none() {
                failure = Some(x);
            }
        }
    }
    clauses.push(ClauseResult {
        clause: "expansion_on_core".into(),
        pass: failure.is_none(),
        points,
        worst,
        limit: k_req,
        failure,
    });

    let mut worst = 0.0f64;
    let mut failure = None;
    let mut points = 0;
    let mut limit_max = 0.0f64;
    for x in grid(-span, span, size) {
        if map.eval(x).is_err() {
            continue;
        }
        points += 1;
        let limit = (x * x / consts.c).floor() as u64;
        limit_max = limit_max.max(limit as f64);
        match passage(map, x, d, 0, limit) {
            Some(n) => worst = worst.max(n as f64),
            None => {
                failure.get_or_insert(x);
            }
        }
    }
    clauses.push(ClauseResult {
        clause: "passage_into_core".into(),
        pass: failure.is_none(),
        points,
        worst,
        limit: limit_max,
        failure,
    });

    let limit = if boole {
        (4.0 / (r * r)).floor() as u64
    } else {
        (consts.w / (consts.c * r * r)).floor() as u64
    };
    let in_guard = |x: f64| {
        map.poles().iter().any(|&a| {
            if boole {
                (x - a).abs() < r / 2.0
            } else {
                (x - a).abs() < r
            }
        })
    };
    let mut worst = 0.0f64;
    let mut failure = None;
    let mut points = 0;
    for x in grid(d.lo, d.hi, size).filter(|&x| !in_guard(x)) {
        points += 1;
        match passage(map, x, d, 1, limit) {
            Some(n) => worst = worst.max(n as f64),
            None => {
                failure.get_or_insert(x);
            }
        }
    }
    clauses.push(ClauseResult {
        clause: "return_from_core".into(),
        pass: failure.is_none() && points > 0,
        points,
        worst,
        limit: limit as f64,
        failure,
    });

    Ok(MappingReport {
        core: d,
        radius: r,
        clauses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn boole() -> ParabolicMap {
        GeneralizedBoole::boole().into()
    }

    #[test]
    fn boole_bound_values() {
        let b = period_bound_boole(0.0, 0.1).unwrap();
        assert_relative_eq!(b, (10f64.ln() / 2f64.ln() + 1.0) * 400.0, epsilon = 1e-9);
        assert!((b - 1728.8).abs() < 0.1);
        assert!((period_bound_boole(0.0, 0.2).unwrap() - 332.2).abs() < 0.1);
        assert!(period_bound_boole(0.0, 0.05).unwrap() > b);
        assert!(period_bound_boole(3.0, 0.1).unwrap() > b);
        assert!(period_bound_boole(0.0, 0.3).is_err());
    }

    #[test]
    fn general_constants_for_boole() {
        let k = period_constants(&GeneralizedBoole::boole()).unwrap();
        assert_relative_eq!(k.k, 2.0, epsilon = 1e-12);
        assert_eq!(k.c, 1.0);
        assert_relative_eq!(k.w, 2.0, epsilon = 1e-12);
        assert_eq!(k.r0, 0.25);
        for r in [0.1, 0.05] {
            let g = period_bound_general(&GeneralizedBoole::boole(), 0.0, r).unwrap();
            let b = period_bound_boole(0.0, r).unwrap();
            assert_relative_eq!(g / b, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn general_constants_four_poles() {
        let m = GeneralizedBoole::new(vec![-2.0, -1.0, 1.0, 2.0], vec![1.0; 4]).unwrap();
        let k = period_constants(&m).unwrap();
        assert_eq!(k.c, 4.0);
        assert_eq!(k.r0, 0.25);
        assert!(k.k > 1.0);
        let b1 = period_bound_general(&m, 0.0, 0.1).unwrap();
        let b2 = period_bound_general(&m, 0.0, 0.01).unwrap();
        let scale = |r: f64| (-r.ln() / k.k.ln() + 1.0) / (r * r);
        assert_relative_eq!(b2 / b1, scale(0.01) / scale(0.1), epsilon = 1e-9);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn two_cycle_of_boole() {
        let res = find_periodic(&boole(), 0.7071, 0.05).unwrap();
        assert_eq!(res.period, 2);
        assert_relative_eq!(res.point, 0.5f64.sqrt(), epsilon = 1e-12);
        assert!(res.residual <= 1e-10);
        assert!(res.verified());
    }

    #[test]
    fn cycle_near_the_pole() {
        let res = find_periodic(&boole(), 0.0, 0.1).unwrap();
        assert!(res.period as f64 <= 1729.0);
        assert!(res.residual <= 1e-10, "{res:?}");
        assert!(res.verified());
        // the orbit returns after exactly N forward steps
        let t = GeneralizedBoole::boole();
        let mut y = res.point;
        for _ in 0..res.period {
            y = t.eval(y).unwrap();
        }
        assert!((y - res.point).abs() <= 10.0 * res.residual.max(1e-16));
    }

    #[test]
    fn periodic_rejects_unsupported() {
        assert!(matches!(
            find_periodic(&crate::maps::CotangentMap.into(), 0.5, 0.05),
            Err(Error::Unsupported(_))
        ));
        assert!(find_periodic(&boole(), 0.0, 0.3).is_err());
    }

    #[test]
    fn boole_mapping_properties() {
        let rep = check_mapping_properties(&GeneralizedBoole::boole(), 1000, 0.5, 30.0).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert!(rep.clauses[0].worst > 2.0);
    }

    #[test]
    fn mapping_witnesses() {
        let t = GeneralizedBoole::boole();
        let d = Interval::new(-1.0, 1.0);
        assert!(passage(&t, 5.0, d, 0, 25).is_some());
        assert!(passage(&t, 0.6, d, 1, 16).is_some());
    }
}
