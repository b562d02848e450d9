use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bimeron::analytic::CompetitorModel;
use bimeron::competitor::{build_competitor, measure_vs_model, CompetitorSpec};
use bimeron::energy::{breakdown, EnergySpec};
use bimeron::field::{io, Field, GridSpec};
use bimeron::fit::{fit, initial_guess, stability_check, FitConfig};
use bimeron::minimizer::{minimize, Termination};
use bimeron::report::{
    optimal_competitor, resolve_c1, run_sweep, run_verify, save_field, write_sweep_outputs, SweepConfig,
    VerifyConfig,
};
use bimeron::Error;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bimeron", version, about = "Bimeron energy laboratory: checks, descents, sweeps and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-form quadrature, degree and gradient checks.
    Verify {
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a truncated competitor and compare it with the model.
    Competitor {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        l: f64,
        #[arg(long)]
        sigma: f64,
        /// Grid half-width; defaults to the competitor's required width.
        #[arg(long)]
        half_width: Option<f64>,
        /// Largest grid spacing.
        #[arg(long, default_value_t = 0.05)]
        spacing: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Minimize the energy from a competitor or a field file.
    Minimize {
        #[arg(long)]
        sigma: f64,
        /// `competitor` or the path of a BMF1 field file.
        #[arg(long, default_value = "competitor")]
        init: String,
        /// Sweep-style config file supplying grid and descent settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=value` override of a config entry; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "minimize_out")]
        output_dir: PathBuf,
        /// Also export the minimizer as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Run a σ-sweep described by a config file.
    Sweep {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Fit a Möbius chart to a field file.
    Fit {
        field: PathBuf,
        /// Coupling used for the ρ·ln(1/σ²) diagnostic.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Failure of a command, carrying its exit status.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::InvalidGrid(_) | Error::GridTooSmall { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Check(format!("{}: {e}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn emit(json: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, json).map_err(|e| io_failure(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(json.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Check(e.to_string()))
        }
    }
}

fn read_field(path: &Path) -> Result<Field<f64>, Failure> {
    let file = File::open(path).map_err(|e| io_failure(path, e))?;
    Ok(io::read_binary(BufReader::new(file))?)
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<SweepConfig, Failure> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            SweepConfig::parse(&text)?
        }
        None => SweepConfig::default(),
    };
    for item in overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("override {item:?} is not KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn verify(tolerance_scale: f64, output: Option<&Path>) -> Result<(), Failure> {
    let report = run_verify(&VerifyConfig { tolerance_scale, ..VerifyConfig::default() })?;
    emit(&to_json(&report), output)?;
    if report.passed {
        Ok(())
    } else {
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Check(format!("failed checks: {}", names.join(", "))))
    }
}

#[derive(Serialize)]
struct CompetitorRecord<M> {
    measurement: M,
    /// `4π + σ²(4πρ² ln L − 4πρ cos α)`, the model without the truncation cost.
    model_energy: f64,
    below_four_pi: bool,
}

fn competitor(a: CompetitorArgs) -> Result<(), Failure> {
    let spec = CompetitorSpec::new(a.alpha, a.rho, a.l)?;
    let half = a.half_width.unwrap_or_else(|| spec.required_half_width());
    let grid = GridSpec::with_max_spacing(half, a.spacing)?;
    let m = measure_vs_model(&spec, a.sigma, grid)?;
    let model_energy = m.model_dirichlet + a.sigma * a.sigma * (m.model_anisotropy + m.model_dmi);
    let record = CompetitorRecord {
        below_four_pi: m.energy.total < 4.0 * std::f64::consts::PI,
        model_energy,
        measurement: m,
    };
    emit(&to_json(&record), a.output.as_deref())
}

struct CompetitorArgs {
    alpha: f64,
    rho: f64,
    l: f64,
    sigma: f64,
    half_width: Option<f64>,
    spacing: f64,
    output: Option<PathBuf>,
}

fn minimize_cmd(
    sigma: f64,
    init: &str,
    config: Option<&Path>,
    overrides: &[String],
    output_dir: &Path,
    csv: bool,
) -> Result<(), Failure> {
    let cfg = load_config(config, overrides)?;
    let spec = EnergySpec::new(sigma)?;
    let start = if init == "competitor" {
        let (c1, _) = resolve_c1(&cfg)?;
        let pred = CompetitorModel::new(c1, sigma)?.optimal_scales()?;
        let grid = cfg.grid.grid(&pred)?;
        build_competitor(&optimal_competitor(&pred, &grid)?, grid)?
    } else {
        read_field(Path::new(init))?
    };
    let init_energy = breakdown(&start, spec);
    let (field, report) = minimize(&start, spec, &cfg.descent_for(sigma))?;
    std::fs::create_dir_all(output_dir).map_err(|e| io_failure(output_dir, e))?;
    let field_path = output_dir.join("field.bmf");
    let file = File::create(&field_path).map_err(|e| io_failure(&field_path, e))?;
    io::write_binary(&field, BufWriter::new(file))?;
    if csv {
        let csv_path = output_dir.join("field.csv");
        let file = File::create(&csv_path).map_err(|e| io_failure(&csv_path, e))?;
        io::write_csv(&field, BufWriter::new(file))?;
    }
    let trace_path = output_dir.join("trace.csv");
    let file = File::create(&trace_path).map_err(|e| io_failure(&trace_path, e))?;
    report.write_trace_csv(BufWriter::new(file))?;

    #[derive(Serialize)]
    struct MinimizeRecord<'a, B, R> {
        init: B,
        report: &'a R,
    }
    let json = to_json(&MinimizeRecord { init: init_energy, report: &report });
    emit(&json, Some(&output_dir.join("report.json")))?;
    emit(&json, None)?;
    match report.terminated_by {
        Termination::DegreeLost => Err(Error::DegreeLost { iterations: report.iterations }.into()),
        _ => Ok(()),
    }
}

fn sweep(config: &Path, overrides: &[String], output_dir: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = load_config(Some(config), overrides)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    let report = run_sweep(&cfg, |row, field| {
        match &row.error {
            None => eprintln!(
                "sigma {}: E {:.8} rho_log {:.4} pohozaev {:.4} ({} iterations)",
                row.sigma, row.e_final, row.rho_log, row.pohozaev, row.iterations
            ),
            Some(e) => eprintln!("sigma {}: failed: {e}", row.sigma),
        }
        if let (true, Some(f)) = (cfg.save_fields, field) {
            if let Err(e) = save_field(&cfg, row.sigma, f) {
                eprintln!("sigma {}: cannot save field: {e}", row.sigma);
            }
        }
    })?;
    write_sweep_outputs(&report)?;
    if report.all_ok() {
        Ok(())
    } else {
        Err(Failure::Check("one or more sweep rows failed".into()))
    }
}

fn fit_cmd(path: &Path, sigma: Option<f64>, output: Option<&Path>) -> Result<(), Failure> {
    let field = read_field(path)?;
    let guess = initial_guess(&field)?;
    let mut report = fit(&field, &guess, &FitConfig::default())?;
    if let Some(s) = sigma {
        EnergySpec::new(s)?;
        report = report.with_sigma(s);
    }
    #[derive(Serialize)]
    struct FitRecord<F, S> {
        fit: F,
        stability: S,
    }
    let stability = stability_check(&field, &report);
    emit(&to_json(&FitRecord { fit: report, stability }), output)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify { tolerance_scale, output } => verify(tolerance_scale, output.as_deref()),
        Command::Competitor { alpha, rho, l, sigma, half_width, spacing, output } => {
            competitor(CompetitorArgs { alpha, rho, l, sigma, half_width, spacing, output })
        }
        Command::Minimize { sigma, init, config, overrides, output_dir, csv } => {
            minimize_cmd(sigma, &init, config.as_deref(), &overrides, &output_dir, csv)
        }
        Command::Sweep { config, overrides, output_dir } => sweep(&config, &overrides, output_dir),
        Command::Fit { field, sigma, output } => fit_cmd(&field, sigma, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
