//! The finite-measure comparison: the doubling map on the circle.

use innerdyn::measures::SeededSampler;
use innerdyn::orbitstats::circle::{circle_model_checks, CircleParams};

fn main() -> innerdyn::Result<()> {
    let params = CircleParams {
        kac_samples: 100_000,
        ..CircleParams::default()
    };
    let report = circle_model_checks(&params, &mut SeededSampler::new(1))?;
    println!("Birkhoff error {:.2e}", report.birkhoff_error);
    println!(
        "sum of n lambda(E_n) = {:.4} (censored {:.1e})",
        report.kac_sum, report.kac_censored
    );
    for w in report.waiting.iter().take(6) {
        println!(
            "n = {:>2}: lambda(G_n) = {:.6} (sampled {:.6})",
            w.n, w.exact, w.sampled
        );
    }
    println!("waiting decay rate {:.6}", report.waiting_decay_rate);
    Ok(())
}
