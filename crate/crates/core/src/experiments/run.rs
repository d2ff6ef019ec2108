//! Runs one configured experiment and writes its CSV and JSON artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Experiment, ExperimentConfig};
use crate::afncheck::{choose_p, distortion_estimate, verify_afn};
use crate::error::{Error, Result};
use crate::expbaker::{
    block_statistics, cayley, g_disk, h_half_plane, inner_function_identities, sample_hairs, Disk,
    StripMap,
};
use crate::maps::{GeneralizedBoole, MapKind, ParabolicMap, Side};
use crate::measures::SeededSampler;
use crate::orbitstats::circle::{circle_model_checks, CircleParams};
use crate::orbitstats::{
    arcsine_last_visit, arcsine_occupation, darling_kac, escape_time_tail, hopf_ratio, iterate,
    occupation_growth_exponent, return_time_tail, simulate_orbit_partial, wandering_rate,
    EmpiricalDistribution, InitialLaw, LimitLawReport, ReferenceLaw, Target,
};
use crate::periodic::{check_mapping_properties, find_periodic};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rows kept from an orbit by the `simulate` experiment.
const MAX_ORBIT_ROWS: u64 = 10_000;

/// Half-width of the window the passage clause is checked on.
const MAPPING_SPAN: f64 = 10.0;

/// A measured value against its acceptance threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    /// Acceptance criterion number, 0 for none.
    pub id: u8,
    pub name: String,
    pub measured: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Criterion {
    pub fn within(id: u8, name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Criterion {
            id,
            name: name.into(),
            measured,
            threshold: format!("[{lo}, {hi}]"),
            pass: lo <= measured && measured <= hi,
        }
    }

    pub fn at_most(id: u8, name: &str, measured: f64, max: f64) -> Self {
        Criterion {
            id,
            name: name.into(),
            measured,
            threshold: format!("<= {max}"),
            pass: measured <= max,
        }
    }

    pub fn at_least(id: u8, name: &str, measured: f64, min: f64) -> Self {
        Criterion {
            id,
            name: name.into(),
            measured,
            threshold: format!(">= {min}"),
            pass: measured >= min,
        }
    }

    pub fn below(id: u8, name: &str, measured: f64, max: f64) -> Self {
        Criterion {
            id,
            name: name.into(),
            measured,
            threshold: format!("< {max}"),
            pass: measured < max,
        }
    }

    pub fn above(id: u8, name: &str, measured: f64, min: f64) -> Self {
        Criterion {
            id,
            name: name.into(),
            measured,
            threshold: format!("> {min}"),
            pass: measured > min,
        }
    }
}

/// A CSV table: header row plus data rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        fn field(s: &str) -> String {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = row.iter().map(|s| field(s)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

const DISTRIBUTION: [&str; 4] = ["index", "value", "empirical_cdf", "reference_cdf"];

/// CSV headers per experiment and file suffix (`""` is `<name>.csv`).
pub const CSV_COLUMNS: &[(Experiment, &str, &[&str])] = &[
    (Experiment::Simulate, "", &["k", "x"]),
    (
        Experiment::Invariance,
        "",
        &["index", "c", "d", "preimage_length", "rel_error"],
    ),
    (
        Experiment::Occupation,
        "",
        &["horizon", "p10", "median", "p90", "mean"],
    ),
    (
        Experiment::Returns,
        "",
        &["bin_lo", "bin_hi", "count", "lambda_hat"],
    ),
    (
        Experiment::Escapes,
        "",
        &["n", "p_minus", "p_plus", "lambda", "sqrt_n_lambda"],
    ),
    (Experiment::Wandering, "", &["n", "w", "w_over_sqrt_n"]),
    (Experiment::Hopf, "", &["index", "ratio"]),
    (Experiment::CircleModel, "", &["n", "exact", "sampled"]),
    (
        Experiment::Periodic,
        "",
        &["center", "point", "period", "bound", "residual", "verified"],
    ),
    (
        Experiment::Mapping,
        "",
        &["clause", "pass", "points", "worst", "limit"],
    ),
    (
        Experiment::AfnCheck,
        "",
        &[
            "grid",
            "p",
            "k",
            "adler_sup",
            "exponent_minus",
            "exponent_plus",
            "conjugacy_error",
        ],
    ),
    (
        Experiment::Distortion,
        "",
        &[
            "depth",
            "cylinders",
            "skipped",
            "min_ratio",
            "max_ratio",
            "m_hat",
            "covered",
        ],
    ),
    (
        Experiment::ExpBakerIdentities,
        "",
        &[
            "points",
            "max_error",
            "g_at_one",
            "g_prime_at_one",
            "g_second_at_one",
            "cubic_coefficient",
        ],
    ),
    (Experiment::ExpBakerCodes, "", &["m", "nu_hat"]),
    (
        Experiment::ExpBakerHairs,
        "",
        &[
            "index",
            "blocks",
            "k_hat",
            "n0",
            "partial_sum_half",
            "partial_sum",
            "endpoint_re",
            "endpoint_im",
        ],
    ),
    (
        Experiment::ExpBakerHairs,
        "_trace",
        &["k", "diameter", "partial_sum", "center_re", "center_im"],
    ),
    (Experiment::DarlingKac, "", &DISTRIBUTION),
    (Experiment::ArcsineOccupation, "", &DISTRIBUTION),
    (Experiment::ArcsineLast, "", &DISTRIBUTION),
    (Experiment::ExpBakerCodes, "_blocks", &DISTRIBUTION),
];

fn columns(exp: Experiment, suffix: &str) -> Table {
    let (_, _, header) = CSV_COLUMNS
        .iter()
        .find(|(e, s, _)| *e == exp && *s == suffix)
        .expect("every table has a registered header");
    Table::new(header)
}

/// Markdown listing of [`CSV_COLUMNS`], kept in the README.
pub fn csv_columns_markdown() -> String {
    let mut out = String::from("| file | columns |\n|---|---|\n");
    for (exp, suffix, header) in CSV_COLUMNS {
        let _ = writeln!(
            out,
            "| `{}{suffix}.csv` | {} |",
            exp.name(),
            header.join(", ")
        );
    }
    out
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: Experiment,
    pub name: String,
    pub version: String,
    pub seed: u64,
    /// The resolved config, defaults filled in.
    pub config: ExperimentConfig,
    pub criteria: Vec<Criterion>,
    pub artifacts: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub summary: Value,
    /// CSV tables by file suffix (`""` for the main table).
    #[serde(skip)]
    pub tables: Vec<(String, Table)>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

struct Outcome {
    criteria: Vec<Criterion>,
    tables: Vec<(String, Table)>,
    summary: Value,
}

/// Loads, resolves and runs the config at `path`.
pub fn run(config_path: &Path, out_dir: Option<&Path>) -> Result<ExperimentResult> {
    let cfg = ExperimentConfig::load(config_path)?;
    run_config(&cfg, out_dir)
}

/// Runs a config; with `out_dir`, writes `<name>.csv` and `<name>.json`.
pub fn run_config(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentResult> {
    let cfg = cfg.resolved()?;
    let exp = cfg.experiment()?;
    let start = Instant::now();
    let outcome = execute(exp, &cfg).map_err(|e| Error::Experiment {
        experiment: exp.name().into(),
        source: Box::new(e),
    })?;
    let mut result = ExperimentResult {
        experiment: exp,
        name: cfg.stem(),
        version: VERSION.into(),
        seed: cfg.seed.expect("resolved"),
        config: cfg,
        criteria: outcome.criteria,
        artifacts: Vec::new(),
        wall_time_s: start.elapsed().as_secs_f64(),
        summary: outcome.summary,
        tables: outcome.tables,
    };
    if let Some(dir) = out_dir {
        write_artifacts(&mut result, dir)?;
    }
    Ok(result)
}

fn write_artifacts(result: &mut ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (suffix, table) in &result.tables {
        let path = dir.join(format!("{}{suffix}.csv", result.name));
        std::fs::write(&path, table.to_csv())?;
        result.artifacts.push(path);
    }
    let path = dir.join(format!("{}.json", result.name));
    result.artifacts.push(path.clone());
    std::fs::write(&path, serde_json::to_string_pretty(result)?)?;
    Ok(())
}

fn generalized(cfg: &ExperimentConfig) -> Result<GeneralizedBoole> {
    match cfg.map_spec()?.build()? {
        ParabolicMap::Boole(t) => Ok(t),
        ParabolicMap::Cotangent(_) => Err(Error::Unsupported(
            "this experiment needs a generalized Boole map".into(),
        )),
    }
}

fn distribution_table(
    mut t: Table,
    dist: Option<&EmpiricalDistribution>,
    law: ReferenceLaw,
) -> Table {
    if let Some(d) = dist {
        let n = d.len() as f64;
        for (i, &v) in d.values().iter().enumerate() {
            t.push(row![i, v, (i + 1) as f64 / n, law.cdf(v)]);
        }
    }
    t
}

fn law_summary(r: &LimitLawReport) -> Value {
    json!({
        "statistic": r.statistic, "horizon": r.horizon, "samples": r.samples,
        "ks": r.ks, "mean": r.mean, "median": r.median, "resampled": r.resampled,
    })
}

fn execute(exp: Experiment, cfg: &ExperimentConfig) -> Result<Outcome> {
    let seed = cfg.seed.expect("resolved");
    let mut sampler = SeededSampler::new(seed);
    let n = cfg.horizon();
    let m = cfg.samples();
    let e = cfg.target();
    let main = |t: Table| vec![(String::new(), t)];
    match exp {
        Experiment::Simulate => {
            let map = cfg.map_spec()?.build()?;
            let x0 = cfg.x0.expect("resolved");
            let stats = simulate_orbit_partial(&map, x0, Target::Inside(e), n);
            let mut t = columns(Experiment::Simulate, "");
            let _ = iterate(&map, x0, n.min(MAX_ORBIT_ROWS), |k, x| t.push(row![k, x]));
            let criteria = vec![Criterion::at_most(
                0,
                "occupation <= steps",
                stats.occupation as f64,
                stats.steps as f64,
            )];
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary: serde_json::to_value(&stats)?,
            })
        }
        Experiment::Invariance => {
            let t = generalized(cfg)?;
            let pts = sampler.sample_lambda(2 * m);
            let mut table = columns(Experiment::Invariance, "");
            let mut worst = 0.0f64;
            let mut interleaved = true;
            for (i, pair) in pts.chunks(2).enumerate() {
                let (c, d) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                let len = t.preimage_length(c, d)?;
                let rel = (len - (d - c)).abs() / (d - c);
                worst = worst.max(rel);
                let pre: Vec<f64> = (0..t.branch_count())
                    .map(|j| t.inverse_on_branch(j, c))
                    .collect::<Result<_>>()?;
                interleaved &= pre.windows(2).all(|w| w[0] < w[1]);
                table.push(row![i, c, d, len, rel]);
            }
            let criteria = vec![
                Criterion::at_most(
                    1,
                    "max relative preimage length error",
                    worst,
                    cfg.rel_tol.unwrap(),
                ),
                Criterion::at_least(1, "preimages interleave", interleaved as u8 as f64, 1.0),
            ];
            Ok(Outcome {
                criteria,
                tables: main(table),
                summary: json!({"map": cfg.map_spec()?.label(), "intervals": m, "max_rel_error": worst}),
            })
        }
        Experiment::Occupation => {
            let map = cfg.map_spec()?.build()?;
            let hs = cfg.horizons.clone().expect("resolved");
            let occ = occupation_growth_exponent(&map, e, 1.0 / 3.0, &hs, m, &mut sampler)?;
            let mut t = columns(Experiment::Occupation, "");
            for r in &occ.rows {
                t.push(row![r.horizon, r.p10, r.median, r.p90, r.mean]);
            }
            let min_ratio = occ
                .rows
                .windows(2)
                .map(|w| w[1].p10 / w[0].p10)
                .reduce(f64::min)
                .unwrap_or(f64::NAN);
            let criteria = vec![Criterion::above(
                4,
                "min growth ratio of p10(S_n/n^(1/3))",
                min_ratio,
                1.0,
            )];
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary: serde_json::to_value(&occ)?,
            })
        }
        Experiment::Returns => {
            let map = cfg.map_spec()?.build()?;
            let [lo, _] = cfg.fit_range.expect("resolved");
            let r = return_time_tail(&map, e, n, lo, m, &mut sampler)?;
            let mut t = columns(Experiment::Returns, "");
            for b in &r.bins {
                t.push(row![b.lo, b.hi, b.count, b.lambda_hat]);
            }
            let criteria = vec![Criterion::within(
                2,
                "return-time tail slope",
                r.fit.slope,
                cfg.slope_min.unwrap(),
                cfg.slope_max.unwrap(),
            )];
            let summary = json!({"fit": r.fit, "samples": r.samples, "censored": r.censored, "resampled": r.resampled});
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary,
            })
        }
        Experiment::Escapes => {
            let map = cfg.map_spec()?.build()?;
            let [lo, hi] = cfg.fit_range.expect("resolved");
            let mut ns: Vec<u64> = (0..=100)
                .map(|j| (10f64.powf(j as f64 * (n as f64).log10() / 100.0)).round() as u64)
                .filter(|&v| v >= 1 && v <= n)
                .collect();
            ns.push(1);
            ns.sort_unstable();
            ns.dedup();
            let r = escape_time_tail(&map, cfg.escape_index, &ns, (lo, hi))?;
            let mut t = columns(Experiment::Escapes, "");
            for row in &r.rows {
                t.push(row![
                    row.n,
                    row.p_minus,
                    row.p_plus,
                    row.lambda,
                    row.sqrt_n_lambda
                ]);
            }
            let slope = r.fit.map_or(f64::NAN, |f| f.slope);
            let mut criteria = vec![Criterion::within(
                3,
                "escape-time tail slope",
                slope,
                cfg.slope_min.unwrap(),
                cfg.slope_max.unwrap(),
            )];
            if cfg.map == Some(MapKind::Boole) {
                criteria.push(Criterion::at_most(
                    3,
                    "|lambda(F_1) - 1/2|",
                    (r.rows[0].lambda - 0.5).abs(),
                    cfg.rel_tol.unwrap(),
                ));
            }
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary: json!({"k": r.k, "target": r.target, "fit": r.fit}),
            })
        }
        Experiment::DarlingKac => {
            let map = cfg.map_spec()?.build()?;
            let r = darling_kac(&map, e, n, m, InitialLaw::Cauchy, &mut sampler)?;
            let criteria = vec![Criterion::at_most(
                5,
                "KS vs half-normal",
                r.ks,
                cfg.ks_max.unwrap(),
            )];
            let t = distribution_table(columns(exp, ""), r.distribution.as_ref(), r.law);
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary: law_summary(&r),
            })
        }
        Experiment::ArcsineOccupation => {
            let map = cfg.map_spec()?.build()?;
            let r = arcsine_occupation(&map, Side::Plus, n, m, &mut sampler)?;
            let tol = cfg.mean_tol.unwrap();
            let criteria = vec![
                Criterion::at_most(
                    6,
                    "KS of S_nA/n vs arcsine",
                    r.report.ks,
                    cfg.ks_max.unwrap(),
                ),
                Criterion::within(6, "mean of S_nA/n", r.report.mean, 0.5 - tol, 0.5 + tol),
            ];
            let t = distribution_table(
                columns(exp, ""),
                r.report.distribution.as_ref(),
                r.report.law,
            );
            let mut summary = law_summary(&r.report);
            summary["side_ks"] = json!(r.side_ks);
            summary["target"] = json!(r.target);
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary,
            })
        }
        Experiment::ArcsineLast => {
            let map = cfg.map_spec()?.build()?;
            let r = arcsine_last_visit(&map, e, n, m, &mut sampler)?;
            let criteria = vec![Criterion::at_most(
                6,
                "KS of Z_nE/n vs arcsine",
                r.ks,
                cfg.ks_max.unwrap(),
            )];
            let t = distribution_table(columns(exp, ""), r.distribution.as_ref(), r.law);
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary: law_summary(&r),
            })
        }
        Experiment::Wandering => {
            let map = cfg.map_spec()?.build()?;
            let hs = cfg.horizons.clone().expect("resolved");
            let r = wandering_rate(&map, e, n, m, &mut sampler)?;
            let mut t = columns(Experiment::Wandering, "");
            let mut k = 1u64;
            while k <= n {
                t.push(row![k, r.w(k), r.ratio(k)]);
                k *= 2;
            }
            for &h in &hs {
                t.push(row![h, r.w(h), r.ratio(h)]);
            }
            let first = hs[0];
            let rel = (r.ratio(n) / r.ratio(first) - 1.0).abs();
            let criteria = vec![Criterion::at_most(
                7,
                "relative change of w_n/sqrt(n)",
                rel,
                cfg.ratio_tol.unwrap(),
            )];
            let summary = json!({"samples": r.samples, "ratios": hs.iter().map(|&h| r.ratio(h)).collect::<Vec<_>>()});
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary,
            })
        }
        Experiment::Hopf => {
            let map = cfg.map_spec()?.build()?;
            let r = hopf_ratio(&map, e, cfg.reference(), n, m, &mut sampler)?;
            let mut t = columns(Experiment::Hopf, "");
            if let Some(d) = &r.ratios {
                for (i, v) in d.values().iter().enumerate() {
                    t.push(row![i, v]);
                }
            }
            let criteria = vec![Criterion::within(
                8,
                "median of S_nE/S_nF",
                r.median,
                cfg.median_min.unwrap(),
                cfg.median_max.unwrap(),
            )];
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary: serde_json::to_value(&r)?,
            })
        }
        Experiment::CircleModel => {
            let [lo, hi] = cfg.target.expect("resolved");
            let params = CircleParams {
                degree: cfg.degree.unwrap(),
                target: crate::Interval::new(lo, hi),
                horizon: n,
                samples: m,
                kac_n_max: cfg.kac_n_max.unwrap(),
                kac_samples: cfg.kac_samples.unwrap(),
                waiting_delta: cfg.waiting_delta.unwrap(),
                waiting_steps: cfg.waiting_steps.unwrap(),
            };
            let r = circle_model_checks(&params, &mut sampler)?;
            let mut t = columns(Experiment::CircleModel, "");
            for w in &r.waiting {
                t.push(row![w.n, w.exact, w.sampled]);
            }
            let d = params.degree as f64;
            let criteria = vec![
                Criterion::at_most(
                    16,
                    "Birkhoff error",
                    r.birkhoff_error,
                    cfg.birkhoff_max.unwrap(),
                ),
                Criterion::within(
                    16,
                    "Kac sum",
                    r.kac_sum,
                    cfg.kac_min.unwrap(),
                    cfg.kac_max.unwrap(),
                ),
                Criterion::at_most(
                    16,
                    "|waiting decay rate - 1/d|",
                    (r.waiting_decay_rate - 1.0 / d).abs(),
                    cfg.rel_tol.unwrap(),
                ),
            ];
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary: serde_json::to_value(&r)?,
            })
        }
        Experiment::Periodic => {
            let map = cfg.map_spec()?.build()?;
            let r = cfg.radius.unwrap();
            let first = find_periodic(&map, cfg.x0.unwrap(), r)?;
            let mut t = columns(Experiment::Periodic, "");
            let mut push = |p: &crate::periodic::PeriodicSearchResult| {
                t.push(row![
                    p.center,
                    p.point,
                    p.period,
                    p.bound,
                    p.residual,
                    p.verified()
                ]);
            };
            push(&first);
            let centers = sampler.sample_lambda(cfg.centers.unwrap());
            let mut verified = 0usize;
            let mut worst_residual = 0.0f64;
            for &c in &centers {
                let p = find_periodic(&map, c, r)?;
                verified += p.verified() as usize;
                worst_residual = worst_residual.max(p.residual);
                push(&p);
            }
            let mut criteria = vec![
                Criterion::at_most(
                    9,
                    "residual of the cycle from x0",
                    first.residual,
                    cfg.residual_max.unwrap(),
                ),
                Criterion::at_least(
                    9,
                    "fraction of sampled centers verified",
                    verified as f64 / centers.len() as f64,
                    1.0,
                ),
            ];
            if cfg.map == Some(MapKind::Boole) {
                criteria.push(Criterion::within(
                    9,
                    "period of the cycle from x0",
                    first.period as f64,
                    2.0,
                    2.0,
                ));
            }
            let summary = json!({"first": first, "centers": centers.len(), "verified": verified, "worst_residual": worst_residual});
            Ok(Outcome {
                criteria,
                tables: main(t),
                summary,
            })
        }
        Experiment::Mapping => {
            let t = generalized(cfg)?;
            let rep =
                check_mapping_properties(&t, cfg.grid.unwrap(), cfg.radius.unwrap(), MAPPING_SPAN)?;
            let mut table = columns(Experiment::Mapping, "");
            let mut criteria = Vec::new();
            for c in &rep.clauses {
                table.push(row![c.clause, c.pass, c.points, c.worst, c.limit]);
                criteria.push(Criterion::at_least(10, &c.clause, c.pass as u8 as f64, 1.0));
            }
            Ok(Outcome {
                criteria,
                tables: main(table),
                summary: serde_json::to_value(&rep)?,
            })
        }
        Experiment::AfnCheck => {
            let t = generalized(cfg)?;
            let k = cfg.k_target.unwrap();
            let grid = cfg.grid.unwrap();
            let p = choose_p(&t, k)?;
            let coarse = verify_afn(&t, p, k, grid)?;
            let fine = verify_afn(&t, p, k, 10 * grid)?;
            let mut table = columns(Experiment::AfnCheck, "");
            for r in [&coarse, &fine] {
                table.push(row![
                    r.grid_size,
                    r.p,
                    r.k,
                    r.adler_sup,
                    r.parabolic_exponents[0],
                    r.parabolic_exponents[1],
                    r.conjugacy_error
                ]);
            }
            let tol = cfg.exponent_tol.unwrap();
            let criteria = vec![
                Criterion::at_least(11, "grid-min S' on the core", fine.k, k),
                Criterion::within(
                    11,
                    "parabolic exponent at -pi/2",
                    fine.parabolic_exponents[0],
                    3.0 - tol,
                    3.0 + tol,
                ),
                Criterion::within(
                    11,
                    "parabolic exponent at +pi/2",
                    fine.parabolic_exponents[1],
                    3.0 - tol,
                    3.0 + tol,
                ),
                Criterion::at_most(
                    11,
                    "relative change of adler_sup under refinement",
                    (fine.adler_sup / coarse.adler_sup - 1.0).abs(),
                    cfg.adler_tol.unwrap(),
                ),
            ];
            Ok(Outcome {
                criteria,
                tables: main(table),
                summary: json!({"coarse": coarse, "fine": fine}),
            })
        }
        Experiment::Distortion => {
            let t = generalized(cfg)?;
            let depth = cfg.depth.unwrap();
            let mut table = columns(Experiment::Distortion, "");
            let mut reports = Vec::new();
            for d in 1..=depth {
                let r = distortion_estimate(&t, d, e, cfg.max_return.unwrap())?;
                table.push(row![
                    r.depth,
                    r.cylinders,
                    r.skipped,
                    r.min_ratio,
                    r.max_ratio,
                    r.m_hat,
                    r.covered
                ]);
                reports.push(r);
            }
            let worst = reports.iter().map(|r| r.m_hat).fold(0.0, f64::max);
            let mut criteria = vec![Criterion::below(
                12,
                "largest M_hat over depths",
                worst,
                f64::INFINITY,
            )];
            if depth >= 2 {
                let growth = reports[depth - 1].m_hat / reports[depth - 2].m_hat - 1.0;
                criteria.push(Criterion::below(
                    12,
                    "growth of M_hat at the last depth",
                    growth,
                    cfg.growth_max.unwrap(),
                ));
            }
            Ok(Outcome {
                criteria,
                tables: main(table),
                summary: serde_json::to_value(&reports)?,
            })
        }
        Experiment::ExpBakerIdentities => {
            let r = inner_function_identities(cfg.grid.unwrap())?;
            let zero = Complex64::new(0.0, 0.0);
            let g0 = g_disk(zero);
            let oracle = (g0 - 1.0 / 3.0)
                .norm()
                .max((cayley(g0) - h_half_plane(cayley(zero))).norm());
            let mut table = columns(Experiment::ExpBakerIdentities, "");
            table.push(row![
                r.points,
                r.max_error,
                r.g_at_one,
                r.g_prime_at_one,
                r.g_second_at_one,
                r.cubic_coefficient
            ]);
            let tol = cfg.rel_tol.unwrap();
            let criteria = vec![
                Criterion::at_most(13, "max |M(g) - h(M)| relative", r.max_error, tol),
                Criterion::at_most(13, "g(0) = 1/3 and M(g(0)) = h(M(0))", oracle, tol),
            ];
            Ok(Outcome {
                criteria,
                tables: main(table),
                summary: serde_json::to_value(&r)?,
            })
        }
        Experiment::ExpBakerCodes => {
            let r = block_statistics(m, n, &mut sampler)?;
            let mut t = columns(Experiment::ExpBakerCodes, "");
            for &(k, v) in &r.h_tail {
                t.push(row![k, v]);
            }
            let ks = cfg.ks_max.unwrap();
            let criteria = vec![
                Criterion::within(
                    14,
                    "first-block tail slope",
                    r.h_fit.slope,
                    cfg.slope_min.unwrap(),
                    cfg.slope_max.unwrap(),
                ),
                Criterion::at_most(14, "KS of B_n/sqrt(n) vs half-normal", r.blocks.ks, ks),
                Criterion::at_most(14, "KS of 1 - L_n/n vs arcsine", r.last_block.ks, ks),
                Criterion::at_most(
                    14,
                    "samples with B_n - 1 != occupation",
                    r.flip_mismatches as f64,
                    0.0,
                ),
            ];
            let summary = json!({
                "h_fit": r.h_fit, "blocks": law_summary(&r.blocks), "last_block": law_summary(&r.last_block),
                "flip_mismatches": r.flip_mismatches, "resampled": r.resampled,
            });
            let tables = vec![
                (String::new(), t),
                (
                    "_blocks".into(),
                    distribution_table(
                        columns(exp, "_blocks"),
                        r.blocks.distribution.as_ref(),
                        ReferenceLaw::HalfNormalPi,
                    ),
                ),
            ];
            Ok(Outcome {
                criteria,
                tables,
                summary,
            })
        }
        Experiment::ExpBakerHairs => {
            let f = StripMap::new(cfg.degree.unwrap() as u32)?;
            let [re, im] = cfg.disk_center.unwrap();
            let disk = Disk {
                center: Complex64::new(re, im),
                radius: cfg.disk_radius.unwrap(),
            };
            let n = n as usize;
            let hairs = sample_hairs(&f, disk, m, n, &mut sampler)?;
            let tol = cfg.landing_tol.unwrap();
            let mut table = columns(Experiment::ExpBakerHairs, "");
            let (mut landed, mut contracting) = (0usize, 0usize);
            for (i, h) in hairs.iter().enumerate() {
                let (half, full) = (h.partial_sums[n / 2], h.partial_sums[n]);
                landed += (full - half < tol * full) as usize;
                contracting += (h.k_hat > 1.0) as usize;
                let n0 = h.n0.map_or(String::new(), |v| v.to_string());
                table.push(row![
                    i,
                    h.code.block_count(),
                    h.k_hat,
                    n0,
                    half,
                    full,
                    h.endpoint_estimate.re,
                    h.endpoint_estimate.im
                ]);
            }
            let mut trace = columns(Experiment::ExpBakerHairs, "_trace");
            if let Some(h) = hairs.first() {
                for k in 0..=n {
                    trace.push(row![
                        k,
                        h.diameters[k],
                        h.partial_sums[k],
                        h.centers[k].re,
                        h.centers[k].im
                    ]);
                }
            }
            let frac = cfg.fraction_min.unwrap();
            let criteria = vec![
                Criterion::at_least(
                    15,
                    "fraction of hairs with converged diameter sums",
                    landed as f64 / m as f64,
                    frac,
                ),
                Criterion::at_least(
                    15,
                    "fraction of hairs with K_hat > 1",
                    contracting as f64 / m as f64,
                    frac,
                ),
            ];
            let summary = json!({
                "disk": disk, "codes": m, "length": n, "landed": landed, "contracting": contracting,
                "note": "diameters estimated from a 16-point boundary cloud",
            });
            Ok(Outcome {
                criteria,
                tables: vec![(String::new(), table), ("_trace".into(), trace)],
                summary,
            })
        }
    }
}
