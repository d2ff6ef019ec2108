//! Flat TOML experiment configs. Every key is optional except
//! `experiment`; missing keys take the desk-scale defaults of the named
//! experiment. Unknown keys are rejected.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{MapKind, MapSpec};
use crate::Interval;

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Simulate,
    Invariance,
    Occupation,
    Returns,
    Escapes,
    DarlingKac,
    ArcsineOccupation,
    ArcsineLast,
    Wandering,
    Hopf,
    CircleModel,
    Periodic,
    Mapping,
    AfnCheck,
    Distortion,
    ExpBakerIdentities,
    ExpBakerCodes,
    ExpBakerHairs,
}

impl Experiment {
    pub const ALL: [Experiment; 18] = [
        Experiment::Simulate,
        Experiment::Invariance,
        Experiment::Occupation,
        Experiment::Returns,
        Experiment::Escapes,
        Experiment::DarlingKac,
        Experiment::ArcsineOccupation,
        Experiment::ArcsineLast,
        Experiment::Wandering,
        Experiment::Hopf,
        Experiment::CircleModel,
        Experiment::Periodic,
        Experiment::Mapping,
        Experiment::AfnCheck,
        Experiment::Distortion,
        Experiment::ExpBakerIdentities,
        Experiment::ExpBakerCodes,
        Experiment::ExpBakerHairs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Invariance => "invariance",
            Experiment::Occupation => "occupation",
            Experiment::Returns => "returns",
            Experiment::Escapes => "escapes",
            Experiment::DarlingKac => "darling_kac",
            Experiment::ArcsineOccupation => "arcsine_occupation",
            Experiment::ArcsineLast => "arcsine_last",
            Experiment::Wandering => "wandering",
            Experiment::Hopf => "hopf",
            Experiment::CircleModel => "circle_model",
            Experiment::Periodic => "periodic",
            Experiment::Mapping => "mapping",
            Experiment::AfnCheck => "afn_check",
            Experiment::Distortion => "distortion",
            Experiment::ExpBakerIdentities => "exp_baker_identities",
            Experiment::ExpBakerCodes => "exp_baker_codes",
            Experiment::ExpBakerHairs => "exp_baker_hairs",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// One experiment run. Keys that an experiment does not use stay unset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    /// Output file stem; defaults to the experiment name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poles: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// The interval `E`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<[f64; 2]>,
    /// The interval `F` of Hopf ratios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Number of λ-sampled centers for the periodic search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_return: Option<usize>,
    /// `[lo, hi]` of the dyadic bins or horizons used in slope fits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_range: Option<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disk_center: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disk_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kac_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kac_n_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waiting_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waiting_steps: Option<u32>,
    // tolerances
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landing_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub birkhoff_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kac_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kac_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adler_tol: Option<f64>,
}

fn set<T>(slot: &mut Option<T>, v: T) {
    if slot.is_none() {
        *slot = Some(v);
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment: Some(experiment),
            ..Default::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // serde names the offending key in backticks
            let field = msg
                .split('`')
                .nth(1)
                .map_or_else(|| "config".to_string(), str::to_string);
            Error::config(field, msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.experiment
            .ok_or_else(|| Error::config("experiment", "missing experiment name"))
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.experiment
                .map_or("experiment", |e| e.name())
                .to_string()
        })
    }

    /// Sets `map`, `poles` and `weights` from a compact spec such as
    /// `generalized_boole:-1,1;1,1`.
    pub fn with_map(mut self, spec: &MapSpec) -> Self {
        self.map = Some(spec.kind);
        if spec.kind == MapKind::GeneralizedBoole {
            self.poles = Some(spec.poles.clone());
            self.weights = Some(spec.weights.clone());
        }
        self
    }

    pub fn map_spec(&self) -> Result<MapSpec> {
        let kind = self.map.unwrap_or(MapKind::Boole);
        let spec = MapSpec {
            kind,
            poles: self.poles.clone().unwrap_or_default(),
            weights: self.weights.clone().unwrap_or_default(),
        };
        spec.build()
            .map_err(|e| Error::config("map", e.to_string()))?;
        Ok(spec)
    }

    pub fn target(&self) -> Interval {
        let [a, b] = self.target.unwrap_or([-1.0, 1.0]);
        Interval::new(a, b)
    }

    pub fn reference(&self) -> Interval {
        let [a, b] = self.reference.unwrap_or([0.0, 1.0]);
        Interval::new(a, b)
    }

    /// The last configured horizon.
    pub fn horizon(&self) -> u64 {
        self.horizons
            .as_ref()
            .and_then(|h| h.last().copied())
            .unwrap_or(1)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(1)
    }

    /// Fills unset keys with the desk-scale defaults and validates.
    pub fn resolved(&self) -> Result<ExperimentConfig> {
        let mut c = self.clone();
        let exp = c.experiment()?;
        set(&mut c.seed, DEFAULT_SEED);
        set(&mut c.map, MapKind::Boole);
        match exp {
            Experiment::Simulate => {
                set(&mut c.x0, 2.0);
                set(&mut c.horizons, vec![1000]);
                set(&mut c.target, [-1.0, 1.0]);
            }
            Experiment::Invariance => {
                set(&mut c.samples, 200);
                set(&mut c.rel_tol, 1e-8);
            }
            Experiment::Occupation => {
                set(&mut c.target, [-1.0, 1.0]);
                set(&mut c.horizons, vec![10_000, 100_000, 1_000_000]);
                set(&mut c.samples, 2000);
            }
            Experiment::Returns => {
                set(&mut c.target, [-1.0, 1.0]);
                set(&mut c.horizons, vec![512]);
                set(&mut c.samples, 1_000_000);
                set(&mut c.fit_range, [8, 512]);
                set(&mut c.slope_min, -1.65);
                set(&mut c.slope_max, -1.35);
            }
            Experiment::Escapes => {
                set(&mut c.horizons, vec![100_000]);
                set(&mut c.fit_range, [100, 100_000]);
                set(&mut c.slope_min, -0.55);
                set(&mut c.slope_max, -0.45);
                set(&mut c.rel_tol, 1e-12);
            }
            Experiment::DarlingKac => {
                set(&mut c.target, [-1.0, 1.0]);
                set(&mut c.horizons, vec![100_000]);
                set(&mut c.samples, 10_000);
                set(&mut c.ks_max, 0.05);
            }
            Experiment::ArcsineOccupation => {
                set(&mut c.horizons, vec![100_000]);
                set(&mut c.samples, 10_000);
                set(&mut c.ks_max, 0.05);
                set(&mut c.mean_tol, 0.03);
            }
            Experiment::ArcsineLast => {
                set(&mut c.target, [-1.0, 1.0]);
                set(&mut c.horizons, vec![100_000]);
                set(&mut c.samples, 10_000);
                set(&mut c.ks_max, 0.05);
            }
            Experiment::Wandering => {
                set(&mut c.target, [-1.0, 1.0]);
                set(&mut c.horizons, vec![1000, 10_000]);
                set(&mut c.samples, 200_000);
                set(&mut c.ratio_tol, 0.1);
            }
            Experiment::Hopf => {
                set(&mut c.target, [-1.0, 1.0]);
                set(&mut c.reference, [0.0, 1.0]);
                set(&mut c.horizons, vec![1_000_000]);
                set(&mut c.samples, 1000);
                set(&mut c.median_min, 1.9);
                set(&mut c.median_max, 2.1);
            }
            Experiment::CircleModel => {
                set(&mut c.degree, 2);
                set(&mut c.target, [0.0, 0.5]);
                set(&mut c.horizons, vec![100_000]);
                set(&mut c.samples, 1000);
                set(&mut c.kac_samples, 1_000_000);
                set(&mut c.kac_n_max, 1000);
                set(&mut c.waiting_delta, 0.1);
                set(&mut c.waiting_steps, 20);
                set(&mut c.birkhoff_max, 0.01);
                set(&mut c.kac_min, 0.45);
                set(&mut c.kac_max, 0.55);
                set(&mut c.rel_tol, 1e-9);
            }
            Experiment::Periodic => {
                // near 1/√2 but not on it, so the search has work to do
                #[allow(clippy::approx_constant)]
                set(&mut c.x0, 0.7071);
                set(&mut c.radius, 0.05);
                set(&mut c.centers, 50);
                set(&mut c.residual_max, 1e-10);
            }
            Experiment::Mapping => {
                set(&mut c.grid, 1000);
                set(&mut c.radius, 0.5);
            }
            Experiment::AfnCheck => {
                set(&mut c.k_target, 1.5);
                set(&mut c.grid, 10_000);
                set(&mut c.exponent_tol, 0.2);
                set(&mut c.adler_tol, 0.1);
            }
            Experiment::Distortion => {
                set(&mut c.target, [0.1, 0.6]);
                set(&mut c.depth, 4);
                set(&mut c.max_return, 20);
                set(&mut c.growth_max, 0.5);
            }
            Experiment::ExpBakerIdentities => {
                set(&mut c.grid, 32);
                set(&mut c.rel_tol, 1e-12);
            }
            Experiment::ExpBakerCodes => {
                set(&mut c.horizons, vec![100_000]);
                set(&mut c.samples, 10_000);
                set(&mut c.fit_range, [8, 512]);
                set(&mut c.slope_min, -0.6);
                set(&mut c.slope_max, -0.4);
                set(&mut c.ks_max, 0.05);
            }
            Experiment::ExpBakerHairs => {
                set(&mut c.degree, 1);
                set(&mut c.horizons, vec![1000]);
                set(&mut c.samples, 200);
                set(&mut c.disk_center, [10.0, 0.5]);
                set(&mut c.disk_radius, 0.25);
                set(&mut c.landing_tol, 0.01);
                set(&mut c.fraction_min, 0.95);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment()?;
        self.map_spec()?;
        if let Some(h) = &self.horizons {
            if h.is_empty() {
                return Err(Error::config("horizons", "at least one horizon is needed"));
            }
            if h.contains(&0) {
                return Err(Error::config("horizons", "horizons must be positive"));
            }
            if h.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(
                    "horizons",
                    "horizons must be strictly ascending",
                ));
            }
        }
        for (field, v) in [
            ("samples", self.samples),
            ("centers", self.centers),
            ("grid", self.grid),
            ("depth", self.depth),
            ("max_return", self.max_return),
            ("kac_samples", self.kac_samples),
        ] {
            if v == Some(0) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        for (field, v) in [
            ("ks_max", self.ks_max),
            ("mean_tol", self.mean_tol),
            ("ratio_tol", self.ratio_tol),
            ("residual_max", self.residual_max),
            ("rel_tol", self.rel_tol),
            ("growth_max", self.growth_max),
            ("fraction_min", self.fraction_min),
            ("landing_tol", self.landing_tol),
            ("birkhoff_max", self.birkhoff_max),
            ("exponent_tol", self.exponent_tol),
            ("adler_tol", self.adler_tol),
            ("radius", self.radius),
            ("disk_radius", self.disk_radius),
            ("waiting_delta", self.waiting_delta),
            ("k_target", self.k_target),
        ] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::config(field, format!("must be positive, got {x}")));
                }
            }
        }
        for (field, lo, hi) in [
            ("slope_min/slope_max", self.slope_min, self.slope_max),
            ("median_min/median_max", self.median_min, self.median_max),
            ("kac_min/kac_max", self.kac_min, self.kac_max),
        ] {
            if let (Some(a), Some(b)) = (lo, hi) {
                if !(a < b) {
                    return Err(Error::config(
                        field,
                        "lower bound must be below upper bound",
                    ));
                }
            }
        }
        for (field, iv) in [("target", self.target), ("reference", self.reference)] {
            if let Some([a, b]) = iv {
                if !(a < b) || a.is_nan() || b.is_nan() {
                    return Err(Error::config(field, "need lo < hi"));
                }
            }
        }
        if let Some([a, b]) = self.fit_range {
            if !(0 < a && a < b) {
                return Err(Error::config("fit_range", "need 0 < lo < hi"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let c = ExperimentConfig::from_toml(
            "experiment = \"darling_kac\"\nseed = 7\nmap = \"boole\"\nhorizons = [1000]\nsamples = 50\n",
        )
        .unwrap();
        let r = c.resolved().unwrap();
        assert_eq!(r.seed, Some(7));
        assert_eq!(r.ks_max, Some(0.05));
        assert_eq!(r.horizon(), 1000);
        let again = ExperimentConfig::from_toml(&r.to_toml()).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn errors_name_the_field() {
        let err =
            ExperimentConfig::from_toml("experiment = \"hopf\"\nks_maxx = 0.1\n").unwrap_err();
        assert!(
            matches!(&err, Error::Config { field, .. } if field == "ks_maxx"),
            "{err}"
        );
        let c = ExperimentConfig::from_toml("experiment = \"hopf\"\nhorizons = [0]\n").unwrap();
        assert!(matches!(c.resolved(), Err(Error::Config { field, .. }) if field == "horizons"));
        let c = ExperimentConfig::from_toml("experiment = \"hopf\"\nhorizons = [10, 5]\n").unwrap();
        assert!(matches!(c.resolved(), Err(Error::Config { field, .. }) if field == "horizons"));
        let c = ExperimentConfig::from_toml("experiment = \"hopf\"\nks_max = -1.0\n").unwrap();
        assert!(matches!(c.resolved(), Err(Error::Config { field, .. }) if field == "ks_max"));
        let c = ExperimentConfig::from_toml("experiment = \"hopf\"\nmap = \"generalized_boole\"\n")
            .unwrap();
        assert!(matches!(c.resolved(), Err(Error::Config { field, .. }) if field == "map"));
        assert!(matches!(
            ExperimentConfig::from_toml("experiment = \"nope\"\n"),
            Err(Error::Config { .. })
        ));
        assert!(
            matches!(ExperimentConfig::default().resolved(), Err(Error::Config { field, .. }) if field == "experiment")
        );
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert_eq!(
            "darling-kac".parse::<Experiment>().unwrap(),
            Experiment::DarlingKac
        );
    }
}
