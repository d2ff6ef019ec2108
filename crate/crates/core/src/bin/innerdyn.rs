//! Command-line front end: one subcommand per experiment, plus `suite` and
//! `run`. Prints a JSON summary on stdout; exits 0 iff every criterion
//! passed, 1 if some failed and 2 on errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use innerdyn::experiments::{
    run_config, run_suite, Experiment, ExperimentConfig, Profile, DEFAULT_SEED,
};
use innerdyn::{MapSpec, Result};

#[derive(Parser)]
#[command(
    name = "innerdyn",
    version,
    about = "Numerical experiments on parabolic interval maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// `boole`, `cotangent` or `generalized_boole:a1,a2,..;b1,b2,..`
    #[arg(long)]
    map: Option<MapSpec>,
    #[arg(long)]
    seed: Option<u64>,
    /// Orbit length (the largest horizon for multi-horizon experiments).
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Where CSV and JSON artifacts are written.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// TOML config; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate one orbit and write it out.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Total preimage length of random intervals.
    Invariance(Common),
    /// Growth of occupation times.
    Occupation(Common),
    /// Tail of the first return time.
    Returns(Common),
    /// Exact escape-time tail from backward parabolic orbits.
    Escapes(Common),
    DarlingKac(Common),
    /// Time spent right of the core against the arcsine law.
    ArcsineOcc(Common),
    /// Last visit time against the arcsine law.
    ArcsineLast(Common),
    Wandering(Common),
    Hopf(Common),
    /// Finite-measure comparison on the circle.
    CircleModel(Common),
    /// Verified periodic cycles near a center.
    Periodic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Expansion, passage and return clauses on a grid.
    Mapping(Common),
    AfnCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long = "K")]
        k: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Cylinder distortion of the return map.
    Distortion {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: Option<usize>,
    },
    ExpBaker {
        #[command(subcommand)]
        part: BakerPart,
    },
    /// The acceptance suite.
    Suite {
        #[arg(long, default_value = "desk")]
        profile: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the experiment named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BakerPart {
    /// Block statistics of boundary codes.
    Codes(Common),
    /// Diameter sums along sampled hairs.
    Hairs(Common),
    /// The conjugacy identities of the inner function.
    Identities(Common),
}

fn build(exp: Experiment, common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let c = ExperimentConfig::load(path)?;
            if c.experiment.is_some_and(|e| e != exp) {
                return Err(innerdyn::Error::Config {
                    field: "experiment".into(),
                    message: format!("config is not for `{}`", exp.name()),
                });
            }
            ExperimentConfig {
                experiment: Some(exp),
                ..c
            }
        }
        None => ExperimentConfig::new(exp),
    };
    if let Some(spec) = &common.map {
        cfg = cfg.with_map(spec);
    }
    cfg.seed = common.seed.or(cfg.seed);
    cfg.samples = common.samples.or(cfg.samples);
    if let Some(n) = common.horizon {
        // keep the shorter default horizons of multi-horizon experiments
        let mut hs: Vec<u64> = cfg.resolved()?.horizons.unwrap_or_default();
        hs.retain(|&h| h < n);
        hs.push(n);
        cfg.horizons = Some(hs);
    }
    Ok(cfg)
}

/// Sets the subcommand's own flags on the config.
type Tweak = Box<dyn FnOnce(&mut ExperimentConfig)>;

fn execute(command: Command) -> Result<bool> {
    let (exp, common, tweak): (Experiment, Common, Tweak) = match command {
        Command::Suite {
            profile,
            seed,
            out_dir,
        } => {
            let profile: Profile = profile.parse()?;
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir)?;
            }
            let report = run_suite(profile, seed, out_dir.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            return Ok(report.all_pass);
        }
        Command::Run { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = run_config(&cfg, out_dir.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&result)?);
            return Ok(result.passed());
        }
        Command::Simulate { common, x0 } => (
            Experiment::Simulate,
            common,
            Box::new(move |c| c.x0 = x0.or(c.x0)),
        ),
        Command::Periodic { common, x0, radius } => (
            Experiment::Periodic,
            common,
            Box::new(move |c| {
                c.x0 = x0.or(c.x0);
                c.radius = radius.or(c.radius);
            }),
        ),
        Command::AfnCheck { common, k, grid } => (
            Experiment::AfnCheck,
            common,
            Box::new(move |c| {
                c.k_target = k.or(c.k_target);
                c.grid = grid.or(c.grid);
            }),
        ),
        Command::Distortion { common, depth } => (
            Experiment::Distortion,
            common,
            Box::new(move |c| c.depth = depth.or(c.depth)),
        ),
        Command::Invariance(c) => (Experiment::Invariance, c, Box::new(|_| {})),
        Command::Occupation(c) => (Experiment::Occupation, c, Box::new(|_| {})),
        Command::Returns(c) => (Experiment::Returns, c, Box::new(|_| {})),
        Command::Escapes(c) => (Experiment::Escapes, c, Box::new(|_| {})),
        Command::DarlingKac(c) => (Experiment::DarlingKac, c, Box::new(|_| {})),
        Command::ArcsineOcc(c) => (Experiment::ArcsineOccupation, c, Box::new(|_| {})),
        Command::ArcsineLast(c) => (Experiment::ArcsineLast, c, Box::new(|_| {})),
        Command::Wandering(c) => (Experiment::Wandering, c, Box::new(|_| {})),
        Command::Hopf(c) => (Experiment::Hopf, c, Box::new(|_| {})),
        Command::CircleModel(c) => (Experiment::CircleModel, c, Box::new(|_| {})),
        Command::Mapping(c) => (Experiment::Mapping, c, Box::new(|_| {})),
        Command::ExpBaker { part } => match part {
            BakerPart::Codes(c) => (Experiment::ExpBakerCodes, c, Box::new(|_| {})),
            BakerPart::Hairs(c) => (Experiment::ExpBakerHairs, c, Box::new(|_| {})),
            BakerPart::Identities(c) => (Experiment::ExpBakerIdentities, c, Box::new(|_| {})),
        },
    };
    let mut cfg = build(exp, &common)?;
    tweak(&mut cfg);
    if let Some(dir) = &common.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let result = run_config(&cfg, common.out_dir.as_deref())?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(result.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
