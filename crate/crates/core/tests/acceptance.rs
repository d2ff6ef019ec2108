//! Acceptance suite: one line per criterion, measured against thresholds
//! pinned here rather than read back from the configs.
//!
//! Runs the desk suite twice (the second run checks determinism), about
//! three minutes on one core. Criteria listed in `KNOWN_FAILURES` are
//! reported but do not fail the target; any other failure, or a known
//! failure that starts passing, does.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use innerdyn::experiments::{run_suite, ExperimentResult, Profile, SuiteReport, DEFAULT_SEED};

/// Criteria that are measured faithfully and miss their window.
const KNOWN_FAILURES: &[u8] = &[16];

struct Line {
    id: u8,
    pass: bool,
    detail: String,
}

struct Checks<'a> {
    by_name: BTreeMap<&'a str, &'a ExperimentResult>,
    lines: Vec<Line>,
}

impl<'a> Checks<'a> {
    fn new(report: &'a SuiteReport) -> Self {
        let by_name = report
            .results
            .iter()
            .map(|r| (r.name.as_str(), r))
            .collect();
        Checks {
            by_name,
            lines: Vec::new(),
        }
    }

    fn result(&self, name: &str) -> &'a ExperimentResult {
        self.by_name
            .get(name)
            .unwrap_or_else(|| panic!("experiment {name} missing from the suite"))
    }

    fn measured(&self, experiment: &str, criterion: &str) -> f64 {
        self.result(experiment)
            .criteria
            .iter()
            .find(|c| c.name == criterion)
            .unwrap_or_else(|| panic!("{experiment}: no criterion {criterion}"))
            .measured
    }

    fn check(&mut self, id: u8, parts: Vec<(String, bool)>) {
        let pass = parts.iter().all(|(_, ok)| *ok);
        let detail = parts
            .into_iter()
            .map(|(d, ok)| if ok { d } else { format!("{d} [miss]") })
            .collect::<Vec<_>>()
            .join("; ");
        self.lines.push(Line { id, pass, detail });
    }
}

fn within(label: &str, v: f64, lo: f64, hi: f64) -> (String, bool) {
    (
        format!("{label} = {v:.6} in [{lo}, {hi}]"),
        lo <= v && v <= hi,
    )
}

fn at_most(label: &str, v: f64, max: f64) -> (String, bool) {
    (format!("{label} = {v:.3e} <= {max:e}"), v <= max)
}

fn scale(label: &str, ok: bool) -> (String, bool) {
    (format!("scale {label}"), ok)
}

fn criteria(c: &mut Checks<'_>) {
    for name in ["invariance", "invariance_four_poles"] {
        let r = c.result(name);
        assert_eq!(r.config.samples, Some(200));
    }
    let inv = ["invariance", "invariance_four_poles"].map(|n| {
        (
            c.measured(n, "max relative preimage length error"),
            c.measured(n, "preimages interleave"),
            c.result(n).wall_time_s,
        )
    });
    c.check(
        1,
        vec![
            at_most("Boole rel. error", inv[0].0, 1e-8),
            at_most("{±1,±2} rel. error", inv[1].0, 1e-8),
            (
                format!("interleaving {} {}", inv[0].1, inv[1].1),
                inv[0].1 == 1.0 && inv[1].1 == 1.0,
            ),
            (
                format!("runtime {:.3}s + {:.3}s < 1s each", inv[0].2, inv[1].2),
                inv[0].2 < 1.0 && inv[1].2 < 1.0,
            ),
        ],
    );

    let r = c.result("returns");
    let ok = r.config.samples == Some(1_000_000) && r.config.fit_range == Some([8, 512]);
    c.check(
        2,
        vec![
            within(
                "slope",
                c.measured("returns", "return-time tail slope"),
                -1.65,
                -1.35,
            ),
            scale("M=1e6, n in [8,512]", ok),
        ],
    );

    let r = c.result("escapes");
    let ok = r.config.fit_range == Some([100, 100_000]);
    c.check(
        3,
        vec![
            within(
                "slope",
                c.measured("escapes", "escape-time tail slope"),
                -0.55,
                -0.45,
            ),
            (
                format!(
                    "lambda(F_1) off 1/2 by {:e}",
                    c.measured("escapes", "|lambda(F_1) - 1/2|")
                ),
                c.measured("escapes", "|lambda(F_1) - 1/2|") == 0.0,
            ),
            scale("n in [1e2,1e5]", ok),
        ],
    );

    let r = c.result("occupation");
    let p10: Vec<f64> = r.summary["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["p10"].as_f64().unwrap())
        .collect();
    let ok = r.config.samples == Some(2000)
        && r.config.horizons == Some(vec![10_000, 100_000, 1_000_000]);
    c.check(
        4,
        vec![
            (
                format!("p10 of S_n/n^(1/3) = {p10:.4?} strictly increasing"),
                p10.windows(2).all(|w| w[0] < w[1]),
            ),
            scale("M=2000, n=1e4,1e5,1e6", ok),
        ],
    );

    let r = c.result("darling_kac");
    let ok = r.config.samples == Some(10_000) && r.config.horizons == Some(vec![100_000]);
    c.check(
        5,
        vec![
            at_most("KS", c.measured("darling_kac", "KS vs half-normal"), 0.05),
            scale("n=1e5, M=1e4", ok),
        ],
    );

    let ok = ["arcsine_occupation", "arcsine_last"].iter().all(|n| {
        c.result(n).config.samples == Some(10_000)
            && c.result(n).config.horizons == Some(vec![100_000])
    });
    c.check(
        6,
        vec![
            at_most(
                "KS S_nA/n",
                c.measured("arcsine_occupation", "KS of S_nA/n vs arcsine"),
                0.05,
            ),
            at_most(
                "KS Z_nE/n",
                c.measured("arcsine_last", "KS of Z_nE/n vs arcsine"),
                0.05,
            ),
            within(
                "mean S_nA/n",
                c.measured("arcsine_occupation", "mean of S_nA/n"),
                0.47,
                0.53,
            ),
            scale("n=1e5, M=1e4", ok),
        ],
    );

    let r = c.result("wandering");
    let ok = r.config.horizons == Some(vec![1_000, 10_000]);
    c.check(
        7,
        vec![
            at_most(
                "|ratio change|",
                c.measured("wandering", "relative change of w_n/sqrt(n)"),
                0.1,
            ),
            scale("n=1e3 vs 1e4", ok),
        ],
    );

    let r = c.result("hopf");
    let ok = r.config.samples == Some(1_000)
        && r.config.horizons == Some(vec![1_000_000])
        && r.config.reference == Some([0.0, 1.0]);
    c.check(
        8,
        vec![
            within(
                "median",
                c.measured("hopf", "median of S_nE/S_nF"),
                1.9,
                2.1,
            ),
            scale("n=1e6, M=1e3, F=[0,1]", ok),
        ],
    );

    let r = c.result("periodic");
    let ok = r.config.centers == Some(50) && r.config.radius == Some(0.05);
    c.check(
        9,
        vec![
            at_most(
                "2-cycle residual",
                c.measured("periodic", "residual of the cycle from x0"),
                1e-10,
            ),
            within(
                "2-cycle period",
                c.measured("periodic", "period of the cycle from x0"),
                2.0,
                2.0,
            ),
            within(
                "verified fraction",
                c.measured("periodic", "fraction of sampled centers verified"),
                1.0,
                1.0,
            ),
            scale("50 centers, r=0.05", ok),
        ],
    );

    let r = c.result("mapping");
    let mut parts: Vec<(String, bool)> = r
        .criteria
        .iter()
        .map(|k| (k.name.clone(), k.pass))
        .collect();
    parts.push((format!("{} clauses", parts.len()), parts.len() == 3));
    parts.push(scale(
        "grid 1e3, r=0.5",
        r.config.grid == Some(1000) && r.config.radius == Some(0.5),
    ));
    c.check(10, parts);

    let r = c.result("afn_check");
    c.check(
        11,
        vec![
            (
                format!(
                    "min S' = {:.4} >= 1.5",
                    c.measured("afn_check", "grid-min S' on the core")
                ),
                c.measured("afn_check", "grid-min S' on the core") >= 1.5,
            ),
            within(
                "exponent at -pi/2",
                c.measured("afn_check", "parabolic exponent at -pi/2"),
                2.8,
                3.2,
            ),
            within(
                "exponent at +pi/2",
                c.measured("afn_check", "parabolic exponent at +pi/2"),
                2.8,
                3.2,
            ),
            at_most(
                "adler_sup change",
                c.measured("afn_check", "relative change of adler_sup under refinement"),
                0.1,
            ),
            scale("K=1.5", r.config.k_target == Some(1.5)),
        ],
    );

    let r = c.result("distortion");
    let m_hat: Vec<f64> = r
        .summary
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["m_hat"].as_f64().unwrap())
        .collect();
    c.check(
        12,
        vec![
            (
                format!("M_hat by depth {m_hat:.4?} finite"),
                m_hat.len() == 4 && m_hat.iter().all(|m| m.is_finite()),
            ),
            (
                format!("growth 3->4 = {:.2e} < 0.5", m_hat[3] / m_hat[2] - 1.0),
                m_hat[3] / m_hat[2] - 1.0 < 0.5,
            ),
        ],
    );

    let r = c.result("exp_baker_identities");
    let points = r.summary["points"].as_u64().unwrap();
    c.check(
        13,
        vec![
            at_most(
                "max error",
                c.measured("exp_baker_identities", "max |M(g) - h(M)| relative"),
                1e-12,
            ),
            at_most(
                "g(0) oracle",
                c.measured("exp_baker_identities", "g(0) = 1/3 and M(g(0)) = h(M(0))"),
                1e-12,
            ),
            (format!("{points} grid points >= 1000"), points >= 1000),
        ],
    );

    let r = c.result("exp_baker_codes");
    let ok = r.config.samples == Some(10_000) && r.config.horizons == Some(vec![100_000]);
    c.check(
        14,
        vec![
            within(
                "H_m slope",
                c.measured("exp_baker_codes", "first-block tail slope"),
                -0.6,
                -0.4,
            ),
            at_most(
                "KS B_n",
                c.measured("exp_baker_codes", "KS of B_n/sqrt(n) vs half-normal"),
                0.05,
            ),
            at_most(
                "KS L_n",
                c.measured("exp_baker_codes", "KS of 1 - L_n/n vs arcsine"),
                0.05,
            ),
            within(
                "mismatches",
                c.measured("exp_baker_codes", "samples with B_n - 1 != occupation"),
                0.0,
                0.0,
            ),
            scale("n=1e5, M=1e4", ok),
        ],
    );

    let r = c.result("exp_baker_hairs");
    let ok = r.config.samples == Some(200)
        && r.config.horizons == Some(vec![1_000])
        && r.config.landing_tol == Some(0.01);
    c.check(
        15,
        vec![
            (
                format!(
                    "landed {:.3} >= 0.95",
                    c.measured(
                        "exp_baker_hairs",
                        "fraction of hairs with converged diameter sums"
                    )
                ),
                c.measured(
                    "exp_baker_hairs",
                    "fraction of hairs with converged diameter sums",
                ) >= 0.95,
            ),
            (
                format!(
                    "K_hat > 1 for {:.3} >= 0.95",
                    c.measured("exp_baker_hairs", "fraction of hairs with K_hat > 1")
                ),
                c.measured("exp_baker_hairs", "fraction of hairs with K_hat > 1") >= 0.95,
            ),
            scale("200 codes, n=1e3, 1%", ok),
        ],
    );

    c.check(
        16,
        vec![
            at_most(
                "Birkhoff error",
                c.measured("circle_model", "Birkhoff error"),
                0.01,
            ),
            within("Kac sum", c.measured("circle_model", "Kac sum"), 0.45, 0.55),
            at_most(
                "|decay - 1/2|",
                c.measured("circle_model", "|waiting decay rate - 1/d|"),
                1e-9,
            ),
        ],
    );
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn main() -> ExitCode {
    // `cargo test -- --list` and name filters must not start a long run
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return ExitCode::SUCCESS;
        }
    }

    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_suite(Profile::Desk, DEFAULT_SEED, Some(a.path())).expect("desk suite runs");
    let mut checks = Checks::new(&first);
    criteria(&mut checks);

    run_suite(Profile::Desk, DEFAULT_SEED, Some(b.path())).expect("desk suite reruns");
    let (ca, cb) = (csv_files(a.path()), csv_files(b.path()));
    let differing: Vec<&String> = ca.keys().filter(|k| ca.get(*k) != cb.get(*k)).collect();
    checks.check(
        17,
        vec![
            (
                format!("{} CSV files, same names", ca.len()),
                ca.len() > 18 && ca.keys().eq(cb.keys()),
            ),
            (
                format!("byte-identical (differing: {differing:?})"),
                differing.is_empty(),
            ),
        ],
    );

    let mut unexpected = 0;
    for line in &checks.lines {
        let known = KNOWN_FAILURES.contains(&line.id);
        let status = match (line.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (expected to fail)",
        };
        unexpected += (line.pass == known) as usize;
        println!("criterion {:>2}: {status:<24} {}", line.id, line.detail);
    }
    println!(
        "desk suite {:.1}s, {unexpected} unexpected outcome(s)",
        first.wall_time_s
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
