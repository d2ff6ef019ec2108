//! Pulls a small disk back along a code and watches the diameters shrink;
//! converging diameter sums mean the hair lands.

use innerdyn::expbaker::{code_from_boole_orbit, hair_contraction, Disk, StripMap};

fn main() -> innerdyn::Result<()> {
    let f = StripMap::exp_baker();
    let code = code_from_boole_orbit(0.37, 1_000)?;
    let trace = hair_contraction(&f, &code, Disk::default())?;
    for k in [0, 10, 100, 500, 1_000] {
        println!(
            "k = {k:>4}: diameter {:.3e}, partial sum {:.6}",
            trace.diameters[k], trace.partial_sums[k]
        );
    }
    match trace.n0 {
        Some(n0) => println!("K_hat = {:.4}, bound holds from step {n0}", trace.k_hat),
        None => println!(
            "K_hat = {:.4}, bound does not settle within {} steps",
            trace.k_hat,
            code.len()
        ),
    }
    println!("endpoint estimate {:.6}", trace.endpoint_estimate);
    Ok(())
}
