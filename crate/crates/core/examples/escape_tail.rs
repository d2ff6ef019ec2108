//! Escape times from backward parabolic orbits (no sampling) next to the
//! sampled return-time tail.

use innerdyn::measures::SeededSampler;
use innerdyn::orbitstats::{escape_time_tail, return_time_tail};
use innerdyn::{Interval, MapSpec};

fn main() -> innerdyn::Result<()> {
    let map = MapSpec::boole().build()?;
    let ns: Vec<u64> = (0..=5).map(|j| 10u64.pow(j)).collect();
    let esc = escape_time_tail(&map, None, &ns, (100, 100_000))?;
    println!("target [p_k-, p_k+] = {} (k = {})", esc.target, esc.k);
    for r in &esc.rows {
        println!(
            "n = {:>6}: lambda(F_n) = {:.6e}, sqrt(n) lambda = {:.5}",
            r.n, r.lambda, r.sqrt_n_lambda
        );
    }
    if let Some(fit) = esc.fit {
        println!("escape slope {:.4}", fit.slope);
    }

    let mut sampler = SeededSampler::new(11);
    let ret = return_time_tail(
        &map,
        Interval::new(-1.0, 1.0),
        512,
        8,
        200_000,
        &mut sampler,
    )?;
    for b in &ret.bins {
        println!("tau in [{}, {}): {} samples", b.lo, b.hi, b.count);
    }
    println!(
        "return slope {:.4} (censored {})",
        ret.fit.slope, ret.censored
    );
    Ok(())
}
