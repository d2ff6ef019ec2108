//! Cross-checks of the statistical drivers that do not fit in one module.

use innerdyn::measures::SeededSampler;
use innerdyn::orbitstats::{darling_kac, return_time_tail, InitialLaw};
use innerdyn::{Interval, MapSpec};

#[test]
fn return_slope_does_not_depend_on_the_target_scale() {
    let map = MapSpec::boole().build().unwrap();
    let slope = |e: Interval| {
        let mut s = SeededSampler::new(99);
        return_time_tail(&map, e, 512, 8, 1_000_000, &mut s)
            .unwrap()
            .fit
            .slope
    };
    let (a, b) = (
        slope(Interval::new(-1.0, 1.0)),
        slope(Interval::new(-2.0, 2.0)),
    );
    assert!((a - b).abs() <= 0.1, "slopes {a} and {b}");
}

#[test]
fn darling_kac_holds_for_another_initial_law() {
    // the limit does not depend on the absolutely continuous initial law
    let map = MapSpec::boole().build().unwrap();
    let e = Interval::new(-1.0, 1.0);
    let law = InitialLaw::TruncatedGaussian {
        sigma: 3.0,
        bound: 20.0,
    };
    let r = darling_kac(&map, e, 20_000, 2_000, law, &mut SeededSampler::new(5)).unwrap();
    assert!(r.ks < 0.08, "KS {}", r.ks);
}

#[test]
fn equal_seeds_give_equal_statistics() {
    let map = MapSpec::boole().build().unwrap();
    let e = Interval::new(-1.0, 1.0);
    let run = || {
        darling_kac(
            &map,
            e,
            1_000,
            300,
            InitialLaw::Cauchy,
            &mut SeededSampler::new(8),
        )
        .unwrap()
        .distribution
        .unwrap()
    };
    assert_eq!(run().values(), run().values());
}
