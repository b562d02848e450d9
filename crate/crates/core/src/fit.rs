//! Closest Möbius map to a sampled field in the Dirichlet seminorm.
//!
//! The objective is the defect `∫|∇(m − Ψ)|²` with `Ψ` evaluated exactly at
//! the nodes, minimized by Nelder-Mead over `(x₀, y₀, ln ρ, φ, α, β)`.
//! A first pass restricted to a window around the core finds the basin
//! cheaply; the second pass refines on the whole grid.

use num_complex::Complex;
use serde::Serialize;

use crate::analytic::stability_scale;
use crate::energy::{block_dirichlet, nodal_density, parts};
use crate::error::{Error, Result};
use crate::field::{Director, Field, MobiusParams};
use crate::reduce::install;
use crate::scalar::Real;

use rayon::prelude::*;

/// Density level below which a field is treated as constant.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitConfig<T> {
    /// Simplex iterations allowed in each pass.
    pub max_iters: usize,
    /// Convergence when the simplex spread in objective falls below this (relative).
    pub f_tol: T,
    /// Convergence when every simplex edge is shorter than this.
    pub x_tol: T,
    /// Half-width of the first-pass window in units of the guessed `ρ`; `None` skips it.
    pub window: Option<T>,
}

impl<T: Real> Default for FitConfig<T> {
    fn default() -> Self {
        Self { max_iters: 2000, f_tol: T::lit(1e-10), x_tol: T::lit(1e-7), window: Some(T::lit(12.0)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport<T> {
    pub params: MobiusParams<T>,
    /// `∫|∇(m − Ψ)|²` on the whole grid.
    pub defect: T,
    /// `ρ·ln(1/σ²)` once a coupling is attached.
    pub rho_times_log: Option<T>,
    pub alpha_abs: T,
    pub iterations: usize,
    pub evaluations: usize,
}

impl<T: Real> FitReport<T> {
    pub fn with_sigma(mut self, sigma: T) -> Self {
        self.rho_times_log = Some(self.params.rho * (sigma * sigma).recip().ln());
        self
    }
}

/// Centroid, half-mass radius and far-field orientation of the Dirichlet density.
pub fn initial_guess<T: Real>(field: &Field<T>) -> Result<MobiusParams<T>> {
    let grid = *field.grid();
    let n = grid.n();
    let zero_sigma = T::zero();
    let density: Vec<T> = nodal_density(field, zero_sigma).iter().map(|d| d.density).collect();
    let floor = T::lit(DENSITY_FLOOR);
    if density.iter().all(|&d| d < floor) {
        return Err(Error::DegenerateDensity);
    }
    let weights = crate::energy::node_weights(&grid);
    let mass: Vec<T> = density.iter().zip(&weights).map(|(&d, &w)| d * w).collect();
    let total: T = mass.iter().copied().sum();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for (k, &w) in mass.iter().enumerate() {
        let z = grid.point(k % n, k / n);
        cx += w * z.re;
        cy += w * z.im;
    }
    let z0 = Complex::new(cx / total, cy / total);
    let mut radial: Vec<(T, T)> = mass
        .iter()
        .enumerate()
        .map(|(k, &w)| ((grid.point(k % n, k / n) - z0).norm(), w))
        .collect();
    radial.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite radius"));
    let half = total * T::lit(0.5);
    let mut acc = T::zero();
    let mut rho = radial[radial.len() - 1].0;
    for (r, w) in radial {
        acc += w;
        if acc >= half {
            rho = r;
            break;
        }
    }
    let rho = rho.max(grid.spacing());
    let (mut sx, mut sy) = (T::zero(), T::zero());
    for k in 0..n {
        for v in [field.at(k, 0), field.at(k, n - 1), field.at(0, k), field.at(n - 1, k)] {
            sx += v.x;
            sy += v.y;
        }
    }
    let phi = sy.atan2(sx) - T::FRAC_PI_2();
    MobiusParams::new(z0, rho, phi, T::zero(), T::zero()).map(MobiusParams::canonical)
}

/// Index rectangle `[i0, i1) × [j0, j1)` of the grid.
#[derive(Debug, Clone, Copy)]
struct Block {
    i0: usize,
    i1: usize,
    j0: usize,
    j1: usize,
}

fn defect_on<T: Real>(field: &Field<T>, params: &MobiusParams<T>, b: Block) -> T {
    let grid = field.grid();
    let width = b.i1 - b.i0;
    let height = b.j1 - b.j0;
    let diff: Vec<Director<T>> = install(|| {
        (0..width * height)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (b.i0 + k % width, b.j0 + k / width);
                field.at(i, j) - params.eval(grid.point(i, j))
            })
            .collect()
    });
    T::lit(2.0) * block_dirichlet(&diff, width, height, grid.spacing())
}

/// Defect `∫|∇(m − Ψ)|²` of `field` against the Möbius map `params` on the whole grid.
pub fn defect<T: Real>(field: &Field<T>, params: &MobiusParams<T>) -> T {
    let n = field.grid().n();
    defect_on(field, params, Block { i0: 0, i1: n, j0: 0, j1: n })
}

fn to_vec<T: Real>(p: &MobiusParams<T>) -> [T; 6] {
    [p.z0.re, p.z0.im, p.rho.ln(), p.phi, p.alpha, p.beta]
}

fn from_vec<T: Real>(v: &[T; 6]) -> MobiusParams<T> {
    MobiusParams { z0: Complex::new(v[0], v[1]), rho: v[2].exp(), phi: v[3], alpha: v[4], beta: v[5] }
}

/// Outcome of a Nelder-Mead run.
struct Simplex<T> {
    best: [T; 6],
    value: T,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

fn nelder_mead<T: Real, F: Fn(&[T; 6]) -> T>(
    f: F,
    start: [T; 6],
    steps: [T; 6],
    cfg: &FitConfig<T>,
) -> Simplex<T> {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut pts: Vec<[T; 6]> = vec![start];
    for k in 0..6 {
        let mut p = start;
        p[k] += steps[k];
        pts.push(p);
    }
    let mut vals: Vec<T> = pts.iter().map(&f).collect();
    let mut evaluations = 7;
    let combine = |a: &[T; 6], b: &[T; 6], t: T| {
        let mut out = [T::zero(); 6];
        for k in 0..6 {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        out
    };
    for iter in 0..cfg.max_iters {
        let mut order: Vec<usize> = (0..7).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        pts = order.iter().map(|&k| pts[k]).collect();
        vals = order.iter().map(|&k| vals[k]).collect();
        let spread = (vals[6] - vals[0]).abs();
        let size = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        if spread <= cfg.f_tol * vals[0].abs().max(T::lit(1e-300)) && size <= cfg.x_tol
            || spread == T::zero() && size <= cfg.x_tol
        {
            return Simplex { best: pts[0], value: vals[0], iterations: iter, evaluations, converged: true };
        }
        let mut centroid = [T::zero(); 6];
        for p in &pts[..6] {
            for k in 0..6 {
                centroid[k] += p[k] / T::lit(6.0);
            }
        }
        let reflected = combine(&centroid, &pts[6], -T::one());
        let fr = f(&reflected);
        evaluations += 1;
        if fr < vals[0] {
            let expanded = combine(&centroid, &pts[6], -two);
            let fe = f(&expanded);
            evaluations += 1;
            if fe < fr {
                pts[6] = expanded;
                vals[6] = fe;
            } else {
                pts[6] = reflected;
                vals[6] = fr;
            }
            continue;
        }
        if fr < vals[5] {
            pts[6] = reflected;
            vals[6] = fr;
            continue;
        }
        let (target, ft) = if fr < vals[6] { (reflected, fr) } else { (pts[6], vals[6]) };
        let contracted = combine(&centroid, &target, half);
        let fc = f(&contracted);
        evaluations += 1;
        if fc < ft {
            pts[6] = contracted;
            vals[6] = fc;
            continue;
        }
        for k in 1..7 {
            pts[k] = combine(&pts[0], &pts[k], half);
            vals[k] = f(&pts[k]);
        }
        evaluations += 6;
    }
    let (best_k, _) = vals
        .iter()
        .enumerate()
        .fold((0, vals[0]), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
    Simplex { best: pts[best_k], value: vals[best_k], iterations: cfg.max_iters, evaluations, converged: false }
}

/// Fits the Möbius chart to `field` starting from `guess`.
pub fn fit<T: Real>(field: &Field<T>, guess: &MobiusParams<T>, cfg: &FitConfig<T>) -> Result<FitReport<T>> {
    let grid = *field.grid();
    let n = grid.n();
    if !(guess.rho > T::zero()) {
        return Err(Error::InvalidParameter(format!("guess rho must be positive, got {}", guess.rho)));
    }
    let full = Block { i0: 0, i1: n, j0: 0, j1: n };
    let mut start = to_vec(guess);
    let mut iterations = 0;
    let mut evaluations = 0;
    let step_for = |rho: T| {
        let a = T::lit(0.2);
        [a * rho, a * rho, a, a, a, a]
    };
    if let Some(w) = cfg.window {
        let half = w * guess.rho;
        let (u0, v0) = grid.locate(guess.z0 - Complex::new(half, half));
        let (u1, v1) = grid.locate(guess.z0 + Complex::new(half, half));
        let clamp = |x: T| x.max(T::zero()).min(T::from_usize_lossy(n - 1)).to_usize().expect("index");
        let block = Block {
            i0: clamp(u0.floor()),
            i1: clamp(u1.ceil()) + 1,
            j0: clamp(v0.floor()),
            j1: clamp(v1.ceil()) + 1,
        };
        if block.i1 - block.i0 >= 8 && block.j1 - block.j0 >= 8 {
            let run = nelder_mead(|v| defect_on(field, &from_vec(v), block), start, step_for(guess.rho), cfg);
            start = run.best;
            iterations += run.iterations;
            evaluations += run.evaluations;
        }
    }
    let rho = start[2].exp();
    let mut steps = step_for(rho);
    if cfg.window.is_some() {
        for s in steps.iter_mut() {
            *s *= T::lit(0.1);
        }
    }
    let run = nelder_mead(|v| defect_on(field, &from_vec(v), full), start, steps, cfg);
    iterations += run.iterations;
    evaluations += run.evaluations;
    if !run.converged {
        return Err(Error::FitNotConverged { iterations });
    }
    let params = from_vec(&run.best).canonical();
    Ok(FitReport {
        params,
        defect: run.value,
        rho_times_log: None,
        alpha_abs: params.alpha.abs(),
        iterations,
        evaluations,
    })
}

/// Defect against the Dirichlet excess `2D − 8π`; the ratio is `+∞` when the excess is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityRecord<T> {
    pub defect: T,
    pub dirichlet_excess: T,
    pub ratio: T,
    pub stability_l: T,
}

pub fn stability_check<T: Real>(field: &Field<T>, report: &FitReport<T>) -> StabilityRecord<T> {
    let d = parts(field).dirichlet;
    let excess = T::lit(2.0) * d - T::lit(8.0) * T::PI();
    let ratio = if excess > T::zero() { report.defect / excess } else { T::infinity() };
    StabilityRecord { defect: report.defect, dirichlet_excess: excess, ratio, stability_l: stability_scale(d) }
}
