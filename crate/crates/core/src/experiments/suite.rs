//! The acceptance suite at desk scale, and a fast smoke variant.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use super::run::{run_config, ExperimentResult, Table, VERSION};
use crate::error::{Error, Result};
use crate::maps::MapSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Roughly one percent of desk scale, tolerances widened to match.
    Smoke,
    /// The scales and tolerances of the acceptance criteria.
    Desk,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Profile::Smoke),
            "desk" => Ok(Profile::Desk),
            other => Err(Error::config(
                "profile",
                format!("unknown profile `{other}` (expected smoke or desk)"),
            )),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Smoke => "smoke",
            Profile::Desk => "desk",
        })
    }
}

fn four_poles() -> MapSpec {
    "generalized_boole:-2,-1,1,2".parse().expect("valid spec")
}

/// The suite's configs in run order. Unset keys take the desk defaults.
pub fn suite_configs(profile: Profile, seed: u64) -> Vec<ExperimentConfig> {
    use Experiment::*;
    let cfg = |e: Experiment| ExperimentConfig {
        seed: Some(seed),
        ..ExperimentConfig::new(e)
    };
    let mut inv4 = cfg(Invariance).with_map(&four_poles());
    inv4.name = Some("invariance_four_poles".into());
    let mut list = vec![
        cfg(Invariance),
        inv4,
        cfg(Returns),
        cfg(Escapes),
        cfg(Occupation),
        cfg(DarlingKac),
        cfg(ArcsineOccupation),
        cfg(ArcsineLast),
        cfg(Wandering),
        cfg(Hopf),
        cfg(Periodic),
        cfg(Mapping),
        cfg(AfnCheck),
        cfg(Distortion),
        cfg(ExpBakerIdentities),
        cfg(ExpBakerCodes),
        cfg(ExpBakerHairs),
        cfg(CircleModel),
    ];
    if profile == Profile::Smoke {
        for c in &mut list {
            shrink(c);
        }
    }
    list
}

fn shrink(c: &mut ExperimentConfig) {
    use Experiment::*;
    let ks = Some(0.12);
    match c.experiment.expect("suite configs name their experiment") {
        Invariance => c.samples = Some(50),
        Returns => {
            c.samples = Some(20_000);
            c.horizons = Some(vec![256]);
            c.fit_range = Some([8, 256]);
            c.slope_min = Some(-1.9);
            c.slope_max = Some(-1.1);
        }
        Escapes => {
            c.horizons = Some(vec![10_000]);
            c.fit_range = Some([100, 10_000]);
        }
        Occupation => {
            c.horizons = Some(vec![1_000, 10_000]);
            c.samples = Some(200);
        }
        DarlingKac | ArcsineLast => {
            c.horizons = Some(vec![10_000]);
            c.samples = Some(500);
            c.ks_max = ks;
        }
        ArcsineOccupation => {
            c.horizons = Some(vec![10_000]);
            c.samples = Some(500);
            c.ks_max = ks;
            c.mean_tol = Some(0.08);
        }
        Wandering => {
            c.horizons = Some(vec![100, 1_000]);
            c.samples = Some(20_000);
            c.ratio_tol = Some(0.2);
        }
        Hopf => {
            c.horizons = Some(vec![100_000]);
            c.samples = Some(100);
            c.median_min = Some(1.7);
            c.median_max = Some(2.3);
        }
        Periodic => c.centers = Some(10),
        Mapping => c.grid = Some(100),
        AfnCheck => c.grid = Some(1_000),
        Distortion => {
            c.depth = Some(3);
            c.max_return = Some(10);
        }
        ExpBakerIdentities => c.grid = Some(16),
        ExpBakerCodes => {
            c.horizons = Some(vec![10_000]);
            c.samples = Some(1_000);
            c.fit_range = Some([8, 256]);
            c.slope_min = Some(-0.75);
            c.slope_max = Some(-0.25);
            c.ks_max = ks;
        }
        ExpBakerHairs => {
            c.horizons = Some(vec![200]);
            c.samples = Some(20);
            c.landing_tol = Some(0.05);
            c.fraction_min = Some(0.8);
        }
        CircleModel => {
            c.horizons = Some(vec![10_000]);
            c.samples = Some(100);
            c.kac_samples = Some(20_000);
            c.birkhoff_max = Some(0.03);
        }
        Simulate => {}
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub profile: Profile,
    pub seed: u64,
    pub version: String,
    pub results: Vec<ExperimentResult>,
    pub all_pass: bool,
    pub wall_time_s: f64,
}

impl SuiteReport {
    /// One row per criterion.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "experiment",
            "criterion",
            "name",
            "measured",
            "threshold",
            "pass",
        ]);
        for r in &self.results {
            for c in &r.criteria {
                t.push(vec![
                    r.name.clone(),
                    c.id.to_string(),
                    c.name.clone(),
                    c.measured.to_string(),
                    c.threshold.clone(),
                    c.pass.to_string(),
                ]);
            }
        }
        t
    }
}

/// Runs every suite config; with `out_dir`, each experiment writes its own
/// artifacts there and the suite adds `suite.csv` and `suite.json`.
pub fn run_suite(profile: Profile, seed: u64, out_dir: Option<&Path>) -> Result<SuiteReport> {
    let start = Instant::now();
    let results = suite_configs(profile, seed)
        .iter()
        .map(|c| run_config(c, out_dir))
        .collect::<Result<Vec<_>>>()?;
    let report = SuiteReport {
        profile,
        seed,
        version: VERSION.into(),
        all_pass: results.iter().all(ExperimentResult::passed),
        results,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out_dir {
        std::fs::write(dir.join("suite.csv"), report.table().to_csv())?;
        std::fs::write(
            dir.join("suite.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_profile_is_a_config_error() {
        assert!(matches!(
            "huge".parse::<Profile>(),
            Err(Error::Config { .. })
        ));
        assert_eq!("desk".parse::<Profile>().unwrap(), Profile::Desk);
    }

    #[test]
    fn suite_names_are_unique_and_configs_resolve() {
        for p in [Profile::Smoke, Profile::Desk] {
            let list = suite_configs(p, 7);
            let mut names: Vec<String> = list.iter().map(ExperimentConfig::stem).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), list.len());
            for c in &list {
                c.resolved().unwrap();
            }
        }
    }
}
