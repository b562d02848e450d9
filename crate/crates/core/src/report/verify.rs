//! Closed-form checks of the quadratures, the degree and the gradient.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic::{anisotropy_ball, dmi_mobius_ball};
use crate::competitor::{build_competitor, CompetitorSpec};
use crate::energy::{self, degree, parts, parts_in, EnergySpec, Region};
use crate::field::{apply_symmetry, sample, stereographic, w_star, Director, Field, GridSpec, MobiusParams, Symmetry};
use crate::Result;

/// Seed of the random fields in the gradient check.
pub const GRADIENT_SEED: u64 = 0x6269_6d65_726f_6e;

/// Knobs of the verification suite. Every tolerance is multiplied by
/// `tolerance_scale`, so a scale of zero makes every check fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub tolerance_scale: f64,
    pub gradient_fields: usize,
    pub gradient_directions: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { tolerance_scale: 1.0, gradient_fields: 20, gradient_directions: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    /// Relative error, or absolute where the reference is an integer.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, reference: f64, error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, reference, error, tolerance, passed: error <= tolerance }
    }

    fn relative(name: impl Into<String>, measured: f64, reference: f64, tolerance: f64) -> Self {
        let error = ((measured - reference) / reference).abs();
        Self::new(name, measured, reference, error, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs the whole suite on its fixed grids.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let s = cfg.tolerance_scale;
    let mut checks = Vec::new();
    checks.push(dirichlet_disc(s)?);
    for (alpha, beta, radius) in [(0.7, 0.3, 10.0), (0.0, 0.0, 10.0), (1.2, -0.2, 5.0)] {
        checks.push(dmi_ball(alpha, beta, radius, s)?);
    }
    for l in [5.0, 10.0, 20.0] {
        checks.push(anisotropy_disc(l, s)?);
    }
    checks.extend(competitor_degree(s)?);
    checks.push(boundary_identity(s)?);
    checks.extend(gradient_checks(cfg)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { passed, checks })
}

/// `D = 4π` for a degree −1 Möbius map, integrated over the disc of radius 20.
/// The neglected tail outside the disc is `4π/(1 + R²)`.
pub fn dirichlet_disc(scale: f64) -> Result<Check> {
    let radius = 20.0;
    let grid = GridSpec::new(radius, 2001)?;
    let m = MobiusParams::base(0.0, 0.0);
    let f = sample(|z| m.eval(z), grid);
    let d = parts_in(&f, Region::disc(radius)).dirichlet;
    let tol = 10.0 / (radius * radius) / (4.0 * PI) + 1e-3;
    Ok(Check::relative("dirichlet_mobius_disc", d, 4.0 * PI, tol * scale))
}

pub fn dmi_ball(alpha: f64, beta: f64, radius: f64, scale: f64) -> Result<Check> {
    let grid = GridSpec::new(radius, 2001)?;
    let m = MobiusParams::base(alpha, beta);
    let f = sample(|z| m.eval(z), grid);
    let h = parts_in(&f, Region::disc(radius)).dmi;
    let name = format!("dmi_ball(alpha={alpha},beta={beta},R={radius})");
    Ok(Check::relative(name, h, dmi_mobius_ball(alpha, beta, radius), 1e-3 * scale))
}

pub fn anisotropy_disc(l: f64, scale: f64) -> Result<Check> {
    let grid = GridSpec::new(1.02 * l, 2041)?;
    let f = sample(|z| stereographic(w_star(z)).expect("finite pair"), grid);
    let a = parts_in(&f, Region::disc(l)).anisotropy;
    Ok(Check::relative(format!("anisotropy_ball(L={l})"), a, anisotropy_ball(l), 1e-4 * scale))
}

/// Degree of the truncated competitor and of its reflection.
pub fn competitor_degree(scale: f64) -> Result<[Check; 3]> {
    let spec = CompetitorSpec::new(0.0, 1.0, 10.0)?;
    let f = build_competitor(&spec, GridSpec::new(25.0, 1001)?)?;
    let q = degree(&f);
    let r = degree(&apply_symmetry(&f, Symmetry::Reflection));
    let tol = 1e-3 * scale;
    let rounded = |name: &str, value: i64, target: i64| {
        let error = (value - target).abs() as f64;
        Check::new(name, value as f64, target as f64, error, 0.5 * scale)
    };
    Ok([
        Check::new("competitor_degree_raw", q.raw, -1.0, (q.raw + 1.0).abs(), tol),
        rounded("competitor_degree", q.value, -1),
        rounded("reflected_degree", r.value, 1),
    ])
}

/// `∫m·∇×m = H̃ + boundary flux` on a Möbius map whose flux does not vanish.
pub fn boundary_identity(scale: f64) -> Result<Check> {
    let m = MobiusParams::<f64>::base(0.4, 0.2);
    let f = sample(|z| m.eval(z), GridSpec::new(5.0, 301)?);
    let p = parts(&f);
    let flux = energy::boundary_flux(&f);
    let error = (p.dmi_curl - p.dmi - flux).abs() / p.dmi_curl.abs().max(1.0);
    Ok(Check::new("boundary_identity", p.dmi_curl, p.dmi + flux, error, 1e-10 * scale))
}

/// Random smooth vector field: a few low Fourier modes per component.
fn smooth_vectors(rng: &mut ChaCha8Rng, grid: &GridSpec<f64>, offset: [f64; 3]) -> Vec<Director<f64>> {
    const MODES: usize = 3;
    let half = grid.coord(grid.n() - 1);
    let mut coeff = [[[0.0; 4]; MODES * MODES]; 3];
    for c in coeff.iter_mut() {
        for m in c.iter_mut() {
            for v in m.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
    }
    let n = grid.n();
    (0..n * n)
        .map(|k| {
            let z = grid.point(k % n, k / n);
            let (u, v) = (PI * z.re / half, PI * z.im / half);
            let mut out = offset;
            for (o, c) in out.iter_mut().zip(&coeff) {
                for (idx, a) in c.iter().enumerate() {
                    let (p, q) = ((idx % MODES) as f64, (idx / MODES) as f64);
                    let (su, cu) = (p * u).sin_cos();
                    let (sv, cv) = (q * v).sin_cos();
                    *o += 0.5 * (a[0] * cu * cv + a[1] * su * cv + a[2] * cu * sv + a[3] * su * sv) / (1.0 + p + q);
                }
            }
            Director::from_array(out)
        })
        .collect()
}

fn random_field(rng: &mut ChaCha8Rng, grid: GridSpec<f64>) -> Result<Field<f64>> {
    let values = smooth_vectors(rng, &grid, [0.6, 0.3, 0.5]);
    Field::from_vectors(grid, values)
}

/// Directional derivatives of the discrete energy against central
/// differences along `normalize(m + εv)`, and the convex rewriting of the
/// energy against the three-term form.
pub fn gradient_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(GRADIENT_SEED);
    let grid = GridSpec::new(2.0, 41)?;
    let eps = 1e-5;
    let mut worst_grad = Check::new("gradient_fd", 0.0, 0.0, 0.0, 1e-6 * cfg.tolerance_scale);
    let mut worst_convex = Check::new("convex_form", 0.0, 0.0, 0.0, 1e-10 * cfg.tolerance_scale);
    for _ in 0..cfg.gradient_fields {
        let sigma = rng.gen_range(0.05..0.45);
        let spec = EnergySpec::new(sigma)?;
        let f = random_field(&mut rng, grid)?;
        let g = energy::gradient(&f, spec);
        let total = parts(&f).total(sigma);
        let convex = energy::convex_form_total(&f, spec);
        let err = ((convex - total) / total).abs();
        if err >= worst_convex.error {
            worst_convex = Check::new("convex_form", convex, total, err, worst_convex.tolerance);
        }
        for _ in 0..cfg.gradient_directions {
            let v = smooth_vectors(&mut rng, &grid, [0.0; 3]);
            let analytic: f64 = g.iter().zip(&v).map(|(a, b)| a.dot(*b)).sum();
            let shifted = |t: f64| -> Result<f64> {
                let values = f.values().iter().zip(&v).map(|(&m, &d)| m + d * t).collect();
                Ok(parts(&Field::from_vectors(grid, values)?).total(sigma))
            };
            let fd = (shifted(eps)? - shifted(-eps)?) / (2.0 * eps);
            let err = ((fd - analytic) / analytic).abs();
            if err >= worst_grad.error {
                worst_grad = Check::new("gradient_fd", analytic, fd, err, worst_grad.tolerance);
            }
        }
    }
    worst_grad.passed = worst_grad.error <= worst_grad.tolerance;
    worst_convex.passed = worst_convex.error <= worst_convex.tolerance;
    Ok(vec![worst_grad, worst_convex])
}
