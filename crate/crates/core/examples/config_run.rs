//! Runs one experiment from a TOML config, the way `innerdyn run` does.

use innerdyn::experiments::{run_config, ExperimentConfig};

const CONFIG: &str = r#"
experiment = "hopf"
seed = 42
horizons = [100000]
samples = 200
target = [-1.0, 1.0]
reference = [0.0, 1.0]
"#;

fn main() -> innerdyn::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let result = run_config(&cfg, None)?;
    println!("{}", result.config.resolved()?.to_toml());
    for c in &result.criteria {
        println!(
            "{}: {} against {} -> {}",
            c.name, c.measured, c.threshold, c.pass
        );
    }
    Ok(())
}
