//! Numerical dynamics of parabolic interval maps: Boole-type transformations,
//! their infinite-ergodic statistics, periodic points, AFN verification and
//! the symbolic boundary dynamics of the Baker domain of `z + e^{-z}`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod afncheck;
pub mod error;
pub mod expbaker;
pub mod experiments;
pub mod maps;
pub mod measures;
pub mod orbitstats;
pub mod periodic;

pub use error::{Error, PoleHit, Result};
pub use maps::{
    Branch, BranchKind, BranchStructure, CotangentMap, GeneralizedBoole, IntervalMap, MapKind,
    MapSpec, ParabolicMap, Side,
};

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
