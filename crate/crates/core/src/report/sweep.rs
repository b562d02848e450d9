//! σ-sweeps: competitor at the model optimum, descent, Möbius fit.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use crate::analytic::{AsymptoticPrediction, CompetitorModel};
use crate::competitor::{build_competitor, estimate_c1, C1Estimate, C1GridPolicy, CompetitorSpec, COLLAR};
use crate::energy::{breakdown, EnergySpec};
use crate::field::{io, Field, GridSpec};
use crate::fit::{fit, initial_guess, FitConfig};
use crate::minimizer::{minimize, Boundary, DescentConfig, Method, Preconditioner, Termination};
use crate::{Error, Result};

/// Header of the sweep table.
pub const CSV_HEADER: &str = "sigma,E_final,e_upper,e_theorem,rho_fit,rho_log,alpha_abs,pohozaev,defect";

/// Largest coupling a sweep accepts.
pub const SIGMA_MAX: f64 = 0.3;

/// Fewest grid points per predicted core scale a sweep accepts.
pub const MIN_POINTS_PER_RHO: f64 = 4.0;

/// Truncation radii used when `C₁` is estimated rather than given.
pub const C1_RADII: [f64; 4] = [8.0, 12.0, 16.0, 24.0];

/// Grid of each sweep row: spacing `ρ_pred / n_ρ` with
/// `n_ρ = max(points_per_rho, points_per_rho_sigma / σ)` and half-width
/// `half_width_multiplier / σ`, shrunk if needed so the side has at most
/// `max_points` nodes.
///
/// The lattice error of the core falls like `(h/ρ)⁶` while the energy
/// differences that set the core size scale like `σ²`; below σ ≈ 0.09 the
/// fixed resolution lets the core slip through a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPolicy {
    pub half_width_multiplier: f64,
    pub points_per_rho: f64,
    pub points_per_rho_sigma: f64,
    pub max_points: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { half_width_multiplier: 2.0, points_per_rho: 9.0, points_per_rho_sigma: 0.84, max_points: 2049 }
    }
}

impl GridPolicy {
    pub fn points_per_rho_at(&self, sigma: f64) -> f64 {
        self.points_per_rho.max(self.points_per_rho_sigma / sigma)
    }

    pub fn grid(&self, pred: &AsymptoticPrediction<f64>) -> Result<GridSpec<f64>> {
        let h = pred.rho_pred / self.points_per_rho_at(pred.sigma);
        let cap = 0.5 * (self.max_points - 1) as f64 * h;
        let half = (self.half_width_multiplier / pred.sigma).min(cap);
        GridSpec::with_max_spacing_smooth(half, h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub sigmas: Vec<f64>,
    /// Truncation constant of the model; estimated from [`C1_RADII`] when `None`.
    pub c1: Option<f64>,
    pub grid: GridPolicy,
    pub descent: DescentConfig<f64>,
    /// Sobolev shift in units of `σ²`.
    pub shift_factor: f64,
    pub fit: FitConfig<f64>,
    /// Allowed excess of `E_final` over the model upper bound.
    pub upper_band: f64,
    pub output_dir: PathBuf,
    /// Also write each minimizer as a binary field file.
    pub save_fields: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.05, 0.1, 0.15, 0.2],
            c1: None,
            grid: GridPolicy::default(),
            descent: DescentConfig::accelerated(1.0),
            shift_factor: 1.0,
            fit: FitConfig::default(),
            upper_band: 1e-3,
            output_dir: PathBuf::from("sweep_out"),
            save_fields: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl SweepConfig {
    /// Parses a flat `key = value` file with optional `[section]` headers;
    /// keys inside a section are read as `section.key`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            cfg.set(&full, value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one dotted key; used by the config file and by overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "sigmas" => {
                self.sigmas = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse(key, s))
                    .collect::<Result<_>>()?
            }
            "c1" => self.c1 = if value == "auto" { None } else { Some(parse(key, value)?) },
            "output_dir" => self.output_dir = PathBuf::from(value),
            "save_fields" => self.save_fields = parse_bool(key, value)?,
            "upper_band" => self.upper_band = parse(key, value)?,
            "grid.half_width_multiplier" => self.grid.half_width_multiplier = parse(key, value)?,
            "grid.points_per_rho" => self.grid.points_per_rho = parse(key, value)?,
            "grid.points_per_rho_sigma" => self.grid.points_per_rho_sigma = parse(key, value)?,
            "grid.max_points" => self.grid.max_points = parse(key, value)?,
            "descent.max_iters" => self.descent.max_iters = parse(key, value)?,
            "descent.grad_tol" => self.descent.grad_tol = parse(key, value)?,
            "descent.armijo_c" => self.descent.armijo_c = parse(key, value)?,
            "descent.backtrack" => self.descent.backtrack = parse(key, value)?,
            "descent.energy_tol" => self.descent.energy_tol = parse(key, value)?,
            "descent.stall_window" => self.descent.stall_window = parse(key, value)?,
            "descent.degree_guard" => self.descent.degree_guard = parse_bool(key, value)?,
            "descent.shift_factor" => self.shift_factor = parse(key, value)?,
            "descent.method" => {
                self.descent.method = match value {
                    "gradient" => Method::Gradient,
                    "bb" => Method::BarzilaiBorwein,
                    v => match v.strip_prefix("lbfgs") {
                        Some("") => Method::Lbfgs { memory: 8 },
                        Some(m) => Method::Lbfgs { memory: parse(key, m.trim_start_matches(':'))? },
                        None => return Err(Error::InvalidParameter(format!("{key}: unknown method {v:?}"))),
                    },
                }
            }
            "descent.preconditioner" => {
                self.descent.preconditioner = match value {
                    "none" => Preconditioner::None,
                    "sobolev" => Preconditioner::Sobolev { shift: 1.0 },
                    v => return Err(Error::InvalidParameter(format!("{key}: unknown preconditioner {v:?}"))),
                }
            }
            "descent.boundary" => {
                self.descent.boundary = match value {
                    "free" => Boundary::Free,
                    "pinned" => Boundary::Pinned,
                    "exterior" => Boundary::Exterior,
                    v => return Err(Error::InvalidParameter(format!("{key}: unknown boundary {v:?}"))),
                }
            }
            "fit.max_iters" => self.fit.max_iters = parse(key, value)?,
            "fit.f_tol" => self.fit.f_tol = parse(key, value)?,
            "fit.x_tol" => self.fit.x_tol = parse(key, value)?,
            "fit.window" => self.fit.window = if value == "none" { None } else { Some(parse(key, value)?) },
            _ => return Err(Error::InvalidParameter(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() {
            return Err(Error::InvalidParameter("sigma list is empty".into()));
        }
        if let Some(s) = self.sigmas.iter().find(|&&s| !(s > 0.0 && s <= SIGMA_MAX)) {
            return Err(Error::InvalidParameter(format!("sigma {s} outside (0, {SIGMA_MAX}]")));
        }
        if !(self.grid.points_per_rho >= MIN_POINTS_PER_RHO) {
            return Err(Error::InvalidParameter(format!(
                "points_per_rho must be at least {MIN_POINTS_PER_RHO}, got {}",
                self.grid.points_per_rho
            )));
        }
        if !(self.grid.points_per_rho_sigma >= 0.0) {
            return Err(Error::InvalidParameter("points_per_rho_sigma must be non-negative".into()));
        }
        if !(self.grid.half_width_multiplier > 0.0) || self.grid.max_points < 3 {
            return Err(Error::InvalidParameter("grid policy needs a positive multiplier and 3 points".into()));
        }
        if !(self.shift_factor > 0.0) {
            return Err(Error::InvalidParameter(format!("shift_factor must be positive, got {}", self.shift_factor)));
        }
        if let Some(c1) = self.c1 {
            if !(c1 > 0.0 && c1.is_finite()) {
                return Err(Error::InvalidParameter(format!("c1 must be positive, got {c1}")));
            }
        }
        self.descent.validate()
    }

    /// Descent settings for one coupling.
    pub fn descent_for(&self, sigma: f64) -> DescentConfig<f64> {
        let mut d = self.descent;
        if let Preconditioner::Sobolev { .. } = d.preconditioner {
            d.preconditioner = Preconditioner::Sobolev { shift: self.shift_factor * sigma * sigma };
        }
        d
    }
}

/// One row of the sweep. Quantities that a failed stage did not produce are `NaN`
/// (`null` in JSON) and `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub e_final: f64,
    pub e_upper: f64,
    pub e_theorem: f64,
    pub rho_fit: f64,
    pub rho_log: f64,
    pub alpha_abs: f64,
    pub pohozaev: f64,
    pub defect: f64,
    pub rho_pred: f64,
    pub e_init: f64,
    pub half_width: f64,
    pub points: usize,
    pub l_trunc: f64,
    pub iterations: usize,
    pub terminated_by: Option<Termination>,
    /// `E_final ≤ e_upper + upper_band`.
    pub below_upper: bool,
    /// `E_final ≥ (1 − 8σ²)·4π`.
    pub above_lower: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(sigma: f64) -> Self {
        Self {
            sigma,
            e_final: f64::NAN,
            e_upper: f64::NAN,
            e_theorem: f64::NAN,
            rho_fit: f64::NAN,
            rho_log: f64::NAN,
            alpha_abs: f64::NAN,
            pohozaev: f64::NAN,
            defect: f64::NAN,
            rho_pred: f64::NAN,
            e_init: f64::NAN,
            half_width: f64::NAN,
            points: 0,
            l_trunc: f64::NAN,
            iterations: 0,
            terminated_by: None,
            below_upper: false,
            above_lower: false,
            error: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn csv_line(&self) -> String {
        let cols = [
            self.sigma,
            self.e_final,
            self.e_upper,
            self.e_theorem,
            self.rho_fit,
            self.rho_log,
            self.alpha_abs,
            self.pohozaev,
            self.defect,
        ];
        cols.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub version: &'static str,
    pub c1: f64,
    pub c1_estimate: Option<C1Estimate<f64>>,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(out, "{}", r.csv_line())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(SweepRow::is_ok)
    }
}

/// Competitor at the model optimum for `sigma`, shortened if the box cannot hold its collar.
pub fn optimal_competitor(pred: &AsymptoticPrediction<f64>, grid: &GridSpec<f64>) -> Result<CompetitorSpec<f64>> {
    let mut spec = CompetitorSpec::new(0.0, pred.rho_l, pred.l_sigma)?;
    if spec.required_half_width() > grid.half_width {
        spec = CompetitorSpec::new(0.0, pred.rho_l, grid.half_width / (COLLAR * pred.rho_l))?;
    }
    Ok(spec)
}

/// Runs one coupling; returns the row and the minimizer when descent ran.
pub fn run_sigma(cfg: &SweepConfig, c1: f64, sigma: f64) -> (SweepRow, Option<Field<f64>>) {
    let mut row = SweepRow::empty(sigma);
    let mut field = None;
    if let Err(e) = fill_row(cfg, c1, sigma, &mut row, &mut field) {
        row.error = Some(e.to_string());
    }
    (row, field)
}

fn fill_row(cfg: &SweepConfig, c1: f64, sigma: f64, row: &mut SweepRow, out: &mut Option<Field<f64>>) -> Result<()> {
    let pred = CompetitorModel::new(c1, sigma)?.optimal_scales()?;
    row.e_upper = pred.e_min_upper;
    row.e_theorem = pred.e_min_theorem;
    row.rho_pred = pred.rho_pred;
    let grid = cfg.grid.grid(&pred)?;
    row.half_width = grid.half_width;
    row.points = grid.n();
    let spec = optimal_competitor(&pred, &grid)?;
    row.l_trunc = spec.l_trunc;
    let init = build_competitor(&spec, grid)?;
    let energy_spec = EnergySpec::new(sigma)?;
    row.e_init = breakdown(&init, energy_spec).total;
    let (field, report) = minimize(&init, energy_spec, &cfg.descent_for(sigma))?;
    row.e_final = report.final_energy.total;
    row.pohozaev = report.pohozaev_residual;
    row.iterations = report.iterations;
    row.terminated_by = Some(report.terminated_by);
    row.below_upper = row.e_final <= row.e_upper + cfg.upper_band;
    row.above_lower = row.e_final >= (1.0 - 8.0 * sigma * sigma) * 4.0 * PI;
    let field = out.insert(field);
    if report.terminated_by == Termination::DegreeLost {
        return Err(Error::DegreeLost { iterations: report.iterations });
    }
    let guess = initial_guess(field)?;
    let fitted = fit(field, &guess, &cfg.fit)?.with_sigma(sigma);
    row.rho_fit = fitted.params.rho;
    row.rho_log = fitted.rho_times_log.unwrap_or(f64::NAN);
    row.alpha_abs = fitted.alpha_abs;
    row.defect = fitted.defect;
    Ok(())
}

/// `C₁` from the config, or estimated on the default radii.
pub fn resolve_c1(cfg: &SweepConfig) -> Result<(f64, Option<C1Estimate<f64>>)> {
    match cfg.c1 {
        Some(c1) => Ok((c1, None)),
        None => {
            let est = estimate_c1(&C1_RADII, C1GridPolicy::default())?;
            Ok((est.c1_hat, Some(est)))
        }
    }
}

/// Runs every coupling in ascending order. Failures are recorded in their
/// row and do not stop the sweep; `on_row` sees each row as it completes.
pub fn run_sweep(cfg: &SweepConfig, mut on_row: impl FnMut(&SweepRow, Option<&Field<f64>>)) -> Result<SweepReport> {
    cfg.validate()?;
    let (c1, c1_estimate) = resolve_c1(cfg)?;
    let mut sigmas = cfg.sigmas.clone();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    let mut rows = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        let (row, field) = run_sigma(cfg, c1, sigma);
        on_row(&row, field.as_ref());
        rows.push(row);
    }
    Ok(SweepReport { version: env!("CARGO_PKG_VERSION"), c1, c1_estimate, config: cfg.clone(), rows })
}

/// Writes `sweep.csv`, `sweep.json` and, if requested, the field files of
/// a finished sweep into the configured directory.
pub fn write_sweep_outputs(report: &SweepReport) -> Result<()> {
    let dir = &report.config.output_dir;
    std::fs::create_dir_all(dir)?;
    report.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join("sweep.csv"))?))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("sweep.json"), json + "\n")?;
    Ok(())
}

/// File name of the minimizer for `sigma` inside the output directory.
pub fn field_file_name(sigma: f64) -> String {
    format!("field_sigma_{sigma}.bmf")
}

/// Writes a minimizer next to the sweep table.
pub fn save_field(cfg: &SweepConfig, sigma: f64, field: &Field<f64>) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let file = std::fs::File::create(cfg.output_dir.join(field_file_name(sigma)))?;
    io::write_binary(field, std::io::BufWriter::new(file))
}
