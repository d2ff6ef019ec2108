//! Property tests for the strip model, its inverse branches and codes.

use innerdyn::expbaker::{code_from_boole_orbit, StripMap};
use innerdyn::orbitstats::{simulate_orbit, Target};
use innerdyn::{GeneralizedBoole, Interval};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_branches_round_trip(re in -5.0f64..40.0, im in -3.0f64..3.0) {
        prop_assume!(im.abs() > 1e-3);
        let f = StripMap::exp_baker();
        let w = Complex64::new(re, im);
        let upper = f.inverse_branch(w, 0).unwrap();
        let lower = f.inverse_branch(w, 1).unwrap();
        for p in [upper, lower] {
            prop_assert!((f.eval(p.z) - w).norm() <= 1e-10 * w.norm().max(1.0));
            prop_assert!(p.z.im.abs() < std::f64::consts::PI);
        }
        prop_assert!(upper.z.im > lower.z.im);
    }

    #[test]
    fn higher_degree_round_trip(n in 1u32..6, re in 2.0f64..30.0, im in -2.5f64..2.5) {
        prop_assume!(im.abs() > 1e-3);
        let f = StripMap::new(n).unwrap();
        let w = Complex64::new(re, im);
        for b in 0..2 {
            let p = f.inverse_branch(w, b).unwrap();
            prop_assert!((f.eval(p.z) - w).norm() <= 1e-10 * w.norm().max(1.0));
        }
    }

    #[test]
    fn first_block_is_one_plus_escape_time(x0 in prop_oneof![-50.0f64..-1.001, 1.001f64..50.0]) {
        let n = 500;
        let code = code_from_boole_orbit(x0, n).unwrap();
        let stats = simulate_orbit(&GeneralizedBoole::boole(), x0, Target::Inside(Interval::new(-1.0, 1.0)), n as u64).unwrap();
        match stats.escape_time {
            Some(k) if (k as usize) < n - 1 => prop_assert_eq!(code.first_block() as u64, k + 1),
            _ => prop_assert_eq!(code.block_count(), 1),
        }
    }

    #[test]
    fn blocks_partition_the_code(x0 in -20.0f64..20.0, n in 2usize..400) {
        let code = code_from_boole_orbit(x0, n).unwrap();
        let blocks = code.blocks();
        prop_assert_eq!(blocks.iter().sum::<usize>(), n);
        prop_assert_eq!(code.last_block(), *blocks.last().unwrap());
        // flips happen exactly after visits to [-1, 1] in steps 0..n-2
        let stats = simulate_orbit(&GeneralizedBoole::boole(), x0, Target::Inside(Interval::new(-1.0, 1.0)), n as u64 - 1).unwrap();
        prop_assert_eq!(blocks.len() as u64 - 1, stats.occupation);
    }
}
