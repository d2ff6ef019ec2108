//! Iterates Boole's map and a four-pole generalization, and checks that
//! Lebesgue measure is preserved by summing preimage lengths.

use innerdyn::orbitstats::{simulate_orbit, Target};
use innerdyn::{GeneralizedBoole, Interval, IntervalMap};

fn main() -> innerdyn::Result<()> {
    let boole = GeneralizedBoole::boole();
    let mut x = 2.0;
    for k in 0..8 {
        println!("x_{k} = {x:.6}");
        x = boole.eval(x).expect("orbit of 2 avoids the pole");
    }

    let stats = simulate_orbit(
        &boole,
        2.0,
        Target::Inside(Interval::new(-1.0, 1.0)),
        100_000,
    )?;
    println!(
        "S_n[-1,1] = {} of n = {}, first escape at {:?}, last visit {}",
        stats.occupation, stats.horizon, stats.escape_time, stats.last_visit
    );

    let four = GeneralizedBoole::new(vec![-2.0, -1.0, 1.0, 2.0], vec![1.0; 4])?;
    for (c, d) in [(-0.3, 0.4), (1.0, 5.0), (-10.0, -9.5)] {
        let len = four.preimage_length(c, d)?;
        println!(
            "[{c}, {d}]: preimage length {len:.15}, interval length {}",
            d - c
        );
    }
    Ok(())
}
