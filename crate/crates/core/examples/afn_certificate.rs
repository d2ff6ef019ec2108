//! Conjugates Boole's map to a finite interval, certifies the AFN
//! conditions on a grid and estimates the distortion of the return map.

use innerdyn::afncheck::{choose_p, distortion_estimate, verify_afn};
use innerdyn::{GeneralizedBoole, Interval};

fn main() -> innerdyn::Result<()> {
    let boole = GeneralizedBoole::boole();
    let p = choose_p(&boole, 1.5)?;
    println!("p = {p:.6} (p^2 = {:.3})", p * p);
    let report = verify_afn(&boole, p, 1.5, 10_000)?;
    println!(
        "min S' on the core {:.4}, Adler sup {:.4}, exponents {:?}",
        report.k, report.adler_sup, report.parabolic_exponents
    );
    println!("{}", report.certificate);

    for depth in 1..=3 {
        let d = distortion_estimate(&boole, depth, Interval::new(0.1, 0.6), 20)?;
        println!(
            "depth {depth}: {} cylinders, ratios in [{:.4}, {:.4}], M = {:.4}",
            d.cylinders, d.min_ratio, d.max_ratio, d.m_hat
        );
    }
    Ok(())
}
