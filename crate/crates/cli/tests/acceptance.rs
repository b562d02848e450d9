//! Exit criteria of the laboratory, one line per criterion.
//!
//! Runs as a plain binary so every line is printed whether it passes or
//! not; the process fails if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bimeron::analytic::CompetitorModel;
use bimeron::competitor::{estimate_c1, measure_vs_model, C1GridPolicy, CompetitorSpec};
use bimeron::field::GridSpec;
use bimeron::report::{
    anisotropy_disc, competitor_degree, dirichlet_disc, dmi_ball, gradient_checks, Check, VerifyConfig, C1_RADII,
};
use serde_json::Value;

const POHOZAEV_TOL: f64 = 0.05;
const RHO_LOG_BAND: (f64, f64) = (0.6, 1.4);
const ALPHA_MAX: f64 = 0.5;
const DEFICIT_BAND: f64 = 0.3;
const SWEEP_BUDGET: Duration = Duration::from_secs(30 * 60);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn bimeron() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bimeron"))
}

fn describe(c: &Check) -> String {
    format!("{} err {:.3e} (tol {:.3e})", c.name, c.error, c.tolerance)
}

fn checks(list: Vec<Check>, elapsed: Duration, budget: Duration) -> Outcome {
    let mut passed = list.iter().all(|c| c.passed);
    let mut parts: Vec<String> = list.iter().map(describe).collect();
    if elapsed > budget {
        passed = false;
    }
    parts.push(format!("{:.1}s (budget {}s)", elapsed.as_secs_f64(), budget.as_secs()));
    Outcome::new(passed, parts.join("; "))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

fn dirichlet() -> Outcome {
    let (c, t) = timed(|| dirichlet_disc(1.0).expect("quadrature runs"));
    checks(vec![c], t, Duration::from_secs(10))
}

fn dmi() -> Outcome {
    let mut list = Vec::new();
    let mut slowest = Duration::ZERO;
    for (alpha, beta, radius) in [(0.7, 0.3, 10.0), (0.0, 0.0, 10.0), (1.2, -0.2, 5.0)] {
        let (c, t) = timed(|| dmi_ball(alpha, beta, radius, 1.0).expect("quadrature runs"));
        slowest = slowest.max(t);
        list.push(c);
    }
    checks(list, slowest, Duration::from_secs(5))
}

fn anisotropy() -> Outcome {
    let (list, t) = timed(|| [5.0, 10.0, 20.0].map(|l| anisotropy_disc(l, 1.0).expect("quadrature runs")).to_vec());
    checks(list, t, Duration::from_secs(60))
}

fn degree() -> Outcome {
    let (list, t) = timed(|| competitor_degree(1.0).expect("competitor builds").to_vec());
    checks(list, t, Duration::from_secs(60))
}

fn gradient() -> Outcome {
    let (list, t) = timed(|| gradient_checks(&VerifyConfig::default()).expect("fields build"));
    checks(list, t, Duration::from_secs(120))
}

/// Competitor at the model optimum against the main term `πσ²/ln(σ⁻¹ ln(1/σ))`,
/// plus the descent rows of the sweep starting from the same competitor.
fn upper_bound(rows: &[Value]) -> Outcome {
    let c1 = match estimate_c1(&C1_RADII, C1GridPolicy::default()) {
        Ok(est) => est.c1_hat,
        Err(e) => return Outcome::new(false, format!("c1 estimate failed: {e}")),
    };
    let mut passed = true;
    let mut parts = vec![format!("c1_hat {c1:.4}")];
    for sigma in [0.1, 0.15, 0.2] {
        let pred = CompetitorModel::new(c1, sigma).and_then(|m| m.optimal_scales()).expect("valid coupling");
        let spec = CompetitorSpec::new(0.0, pred.rho_l, pred.l_sigma).expect("valid competitor");
        let grid = GridSpec::with_max_spacing(spec.required_half_width(), pred.rho_l / 8.0).expect("valid grid");
        let m = measure_vs_model(&spec, sigma, grid).expect("competitor builds");
        let deficit = 4.0 * PI - m.energy.total;
        let main_term = PI * sigma * sigma / ((1.0 / sigma).ln() / sigma).ln();
        let ratio = deficit / main_term;
        let below = m.energy.total < 4.0 * PI;
        let in_band = (ratio - 1.0).abs() <= DEFICIT_BAND;
        let descent = rows
            .iter()
            .find(|r| r["sigma"].as_f64() == Some(sigma))
            .and_then(|r| Some((r["e_init"].as_f64()?, r["e_final"].as_f64()?)));
        let decreased = matches!(descent, Some((a, b)) if b < a);
        passed &= below && in_band && decreased;
        parts.push(format!(
            "sigma {sigma}: E {:.8} deficit {deficit:.6} main term {main_term:.6} ratio {ratio:.3} descent {}",
            m.energy.total,
            match descent {
                Some((a, b)) => format!("{a:.8} -> {b:.8}"),
                None => "missing".into(),
            }
        ));
    }
    Outcome::new(passed, parts.join("; "))
}

fn pohozaev(rows: &[Value]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for sigma in [0.1, 0.15] {
        let value = rows.iter().find(|r| r["sigma"].as_f64() == Some(sigma)).and_then(|r| r["pohozaev"].as_f64());
        passed &= matches!(value, Some(p) if p <= POHOZAEV_TOL);
        parts.push(format!("sigma {sigma}: residual {value:?} (tol {POHOZAEV_TOL})"));
    }
    Outcome::new(passed, parts.join("; "))
}

fn concentration(rows: &[Value], elapsed: Duration) -> Outcome {
    let mut parts = Vec::new();
    let mut passed = true;
    let mut deviations = Vec::new();
    for sigma in [0.05, 0.1, 0.15, 0.2] {
        let row = rows.iter().find(|r| r["sigma"].as_f64() == Some(sigma));
        let rho_log = row.and_then(|r| r["rho_log"].as_f64());
        let alpha = row.and_then(|r| r["alpha_abs"].as_f64());
        let in_band = matches!(rho_log, Some(v) if v >= RHO_LOG_BAND.0 && v <= RHO_LOG_BAND.1);
        let aligned = matches!(alpha, Some(a) if a <= ALPHA_MAX);
        passed &= in_band && aligned;
        deviations.push(rho_log.map(|v| (v - 1.0).abs()));
        let error = row.and_then(|r| r["error"].as_str()).map(|e| format!(" error: {e}")).unwrap_or_default();
        parts.push(format!("sigma {sigma}: rho_log {rho_log:?} |alpha| {alpha:?}{error}"));
    }
    // deviations are listed by ascending σ; shrinking σ must not raise them
    let monotone = deviations.windows(2).all(|w| matches!((w[0], w[1]), (Some(small), Some(large)) if small <= large));
    passed &= monotone;
    passed &= elapsed <= SWEEP_BUDGET;
    parts.push(format!("deviation non-increasing as sigma decreases: {monotone}"));
    parts.push(format!("sweep {:.0}s (budget {}s)", elapsed.as_secs_f64(), SWEEP_BUDGET.as_secs()));
    Outcome::new(passed, parts.join("; "))
}

fn determinism(dir: &Path) -> Outcome {
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        for run in 0..2 {
            let path = dir.join(format!("verify_{threads}_{run}.json"));
            let status = bimeron()
                .env("BIMERON_THREADS", threads)
                .args(["verify", "--output"])
                .arg(&path)
                .status()
                .expect("binary runs");
            if !status.success() {
                return Outcome::new(false, format!("verify exited with {status} at {threads} threads"));
            }
            outputs.push(std::fs::read(&path).expect("report written"));
        }
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    Outcome::new(identical, format!("4 runs, {} bytes each, identical: {identical}", outputs[0].len()))
}

/// Runs the default sweep through the binary and returns its rows.
fn sweep(dir: &Path) -> (Vec<Value>, Duration, Option<String>) {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/sweep.conf");
    let out = dir.join("sweep");
    let t0 = Instant::now();
    let status = bimeron().arg("sweep").arg(&config).arg("--output-dir").arg(&out).status().expect("binary runs");
    let elapsed = t0.elapsed();
    let note = (!status.success()).then(|| format!("sweep exited with {status}"));
    let rows = std::fs::read(out.join("sweep.json"))
        .ok()
        .and_then(|bytes| serde_json::from_slice::<Value>(&bytes).ok())
        .and_then(|v| v["rows"].as_array().cloned())
        .unwrap_or_default();
    (rows, elapsed, note)
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Dirichlet energy of a Möbius map", dirichlet()),
        (2, "DMI on finite balls", dmi()),
        (3, "anisotropy on finite balls", anisotropy()),
        (4, "degree of the truncated competitor", degree()),
        (5, "gradient and convex form", gradient()),
    ];
    let (rows, elapsed, note) = sweep(dir.path());
    if let Some(note) = note {
        eprintln!("{note}");
    }
    results.push((6, "upper bound realized by the competitor", upper_bound(&rows)));
    results.push((7, "Pohozaev balance of minimizers", pohozaev(&rows)));
    results.push((8, "concentration scale trend", concentration(&rows, elapsed)));
    results.push((9, "deterministic verify output", determinism(dir.path())));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {n} {tag}: {name}: {}", outcome.detail);
        failed += usize::from(!outcome.passed);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
