//! Property tests for the interval maps and the single-orbit statistics.

use innerdyn::orbitstats::{simulate_orbit_partial, Target};
use innerdyn::{CotangentMap, GeneralizedBoole, Interval, IntervalMap};
use proptest::prelude::*;

/// Sorted, well separated poles with positive weights.
fn generalized_boole() -> impl Strategy<Value = GeneralizedBoole> {
    prop::collection::vec((0.3f64..2.0, 0.1f64..3.0), 1..5).prop_map(|pieces| {
        let mut a = -3.0;
        let (mut poles, mut weights) = (Vec::new(), Vec::new());
        for (gap, w) in pieces {
            a += gap;
            poles.push(a);
            weights.push(w);
        }
        GeneralizedBoole::new(poles, weights).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_is_two_sided(t in generalized_boole(), y in -50.0f64..50.0, u in 0.05f64..0.95) {
        for j in 0..t.branch_count() {
            let x = t.inverse_on_branch(j, y).unwrap();
            let back = t.eval(x).unwrap();
            prop_assert!((back - y).abs() <= 1e-9 * y.abs().max(1.0), "branch {j}: {back} vs {y}");

            // a point inside branch j, away from its ends
            let b = t.branch(j).unwrap();
            let (lo, hi) = (b.lo.max(-60.0), b.hi.min(60.0));
            let x = lo + u * (hi - lo);
            let again = t.inverse_on_branch(j, t.eval(x).unwrap()).unwrap();
            prop_assert!((again - x).abs() <= 1e-8 * x.abs().max(1.0), "branch {j}: {again} vs {x}");
        }
    }

    #[test]
    fn lebesgue_measure_is_invariant(t in generalized_boole(), c in -100.0f64..100.0, len in 1e-3f64..50.0) {
        let total = t.preimage_length(c, c + len).unwrap();
        prop_assert!((total - len).abs() <= 1e-8 * len, "{total} vs {len}");
    }

    #[test]
    fn preimages_interleave_with_poles(t in generalized_boole(), y in -1e3f64..1e3) {
        let pre: Vec<f64> = (0..t.branch_count()).map(|j| t.inverse_on_branch(j, y).unwrap()).collect();
        for (j, a) in t.poles().iter().enumerate() {
            prop_assert!(pre[j] < *a && *a < pre[j + 1]);
        }
    }

    #[test]
    fn cotangent_inverse_round_trip(index in 0usize..200, y in -20.0f64..20.0) {
        let c = CotangentMap;
        // low indices on both sides of the branch list
        let j = if index < 100 { index } else { c.branch_count() - 1 - (index - 100) };
        let x = c.inverse_on_branch(j, y).unwrap();
        prop_assert_eq!(c.branch_of(x), Some(j));
        let back = c.eval(x).unwrap();
        prop_assert!((back - y).abs() <= 1e-8 * y.abs().max(1.0), "{back} vs {y}");
    }

    #[test]
    fn occupation_is_monotone_in_the_target(
        t in generalized_boole(),
        x0 in -20.0f64..20.0,
        lo in -3.0f64..0.0,
        width in 0.1f64..3.0,
        grow in 0.0f64..2.0,
    ) {
        let inner = Interval::new(lo, lo + width);
        let outer = Interval::new(lo - grow, lo + width + grow);
        let n = 2_000;
        let a = simulate_orbit_partial(&t, x0, Target::Inside(inner), n);
        let b = simulate_orbit_partial(&t, x0, Target::Inside(outer), n);
        prop_assert!(a.occupation <= b.occupation);
        prop_assert_eq!(a.occupation, a.return_times.len() as u64 + a.escape_time.is_some() as u64);
        if let (Some(ea), Some(eb)) = (a.escape_time, b.escape_time) {
            prop_assert!(eb <= ea);
        }
        prop_assert!(a.last_visit >= a.occupation);
        prop_assert!(b.last_visit >= a.last_visit);
    }

    #[test]
    fn derivative_exceeds_two_on_the_boole_core(x in -0.999f64..0.999) {
        let t = GeneralizedBoole::boole();
        prop_assert!(t.derivative(x).unwrap() > 2.0);
    }
}
