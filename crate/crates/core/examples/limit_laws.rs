//! The α = ½ limit laws for Boole's map at a small scale: Darling-Kac,
//! both arcsine laws, occupation growth, the wandering rate and Hopf's
//! ratio theorem.

use innerdyn::measures::SeededSampler;
use innerdyn::orbitstats::{
    arcsine_last_visit, arcsine_occupation, darling_kac, hopf_ratio, occupation_growth_exponent,
    wandering_rate, InitialLaw,
};
use innerdyn::{Interval, MapSpec, Side};

fn main() -> innerdyn::Result<()> {
    let map = MapSpec::boole().build()?;
    let e = Interval::new(-1.0, 1.0);
    let mut sampler = SeededSampler::new(7);
    let (n, m) = (10_000, 2_000);

    let dk = darling_kac(&map, e, n, m, InitialLaw::Cauchy, &mut sampler)?;
    println!("Darling-Kac: KS {:.4} vs half-normal", dk.ks);
    let occ = arcsine_occupation(&map, Side::Plus, n, m, &mut sampler)?;
    println!(
        "time right of the core: KS {:.4}, mean {:.4}, KS between sides {:.4}",
        occ.report.ks, occ.report.mean, occ.side_ks
    );
    let last = arcsine_last_visit(&map, e, n, m, &mut sampler)?;
    println!("last visit: KS {:.4}", last.ks);

    let table = occupation_growth_exponent(
        &map,
        e,
        1.0 / 3.0,
        &[10_000, 100_000, 1_000_000],
        300,
        &mut sampler,
    )?;
    for r in &table.rows {
        println!("n = {:>6}: p10 of S_n/n^(1/3) = {:.3}", r.horizon, r.p10);
    }

    let w = wandering_rate(&map, e, 1_000, 20_000, &mut sampler)?;
    println!(
        "w_n/sqrt(n): {:.4} at 100, {:.4} at 1000",
        w.ratio(100),
        w.ratio(1_000)
    );

    let hopf = hopf_ratio(&map, e, Interval::new(0.0, 1.0), 100_000, 200, &mut sampler)?;
    println!(
        "Hopf: median S_nE/S_nF = {:.3}, expected {}",
        hopf.median, hopf.expected
    );
    Ok(())
}
