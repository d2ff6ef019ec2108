//! Runs the acceptance suite and prints one line per criterion.
//!
//! `cargo run --release --example run_suite -- desk out/`

use innerdyn::experiments::{run_suite, Profile, DEFAULT_SEED};

fn main() -> innerdyn::Result<()> {
    let mut args = std::env::args().skip(1);
    let profile: Profile = args.next().as_deref().unwrap_or("smoke").parse()?;
    let out = args.next().map(std::path::PathBuf::from);
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
    }
    let report = run_suite(profile, DEFAULT_SEED, out.as_deref())?;
    for r in &report.results {
        for c in &r.criteria {
            let mark = if c.pass { "pass" } else { "FAIL" };
            println!(
                "{mark} [{:>2}] {:<22} {}: {} (want {})",
                c.id, r.name, c.name, c.measured, c.threshold
            );
        }
    }
    println!(
        "{profile} suite in {:.1}s, all pass: {}",
        report.wall_time_s, report.all_pass
    );
    Ok(())
}
