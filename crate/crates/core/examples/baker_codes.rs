//! The strip model of `z + e^{-z}`: evaluation, the two inverse branches,
//! and boundary codes read off Boole orbits.

use innerdyn::expbaker::{block_statistics, code_from_boole_orbit, StripMap};
use innerdyn::measures::SeededSampler;
use num_complex::Complex64;

fn main() -> innerdyn::Result<()> {
    let f = StripMap::exp_baker();
    let w = Complex64::new(10.0, 0.5);
    for b in 0..2 {
        let pre = f.inverse_branch(w, b)?;
        println!(
            "branch {b}: z = {:.12}, |f(z) - w| = {:.1e}",
            pre.z,
            (f.eval(pre.z) - w).norm()
        );
    }

    let code = code_from_boole_orbit(2.0, 40)?;
    println!("code of 2.0: {code}");
    println!("blocks {:?}", code.blocks());

    let mut sampler = SeededSampler::new(5);
    let stats = block_statistics(2_000, 10_000, &mut sampler)?;
    println!(
        "first-block tail slope {:.3}, KS blocks {:.4}, KS last block {:.4}, mismatches {}",
        stats.h_fit.slope, stats.blocks.ks, stats.last_block.ks, stats.flip_mismatches
    );
    Ok(())
}
