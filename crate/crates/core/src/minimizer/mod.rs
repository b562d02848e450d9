//! Projected descent on the product of spheres.
//!
//! Each iteration moves every node along a tangent descent direction and
//! renormalizes. The step length is accepted only under the Armijo
//! condition on the discrete energy, so the recorded energies never
//! increase. Two accelerations are available and off by default: a
//! spectral `(μ − Δ)⁻¹` preconditioner, which removes the grid-scale
//! stiffness, and limited-memory quasi-Newton directions, which handle the
//! soft dilation and rotation modes that plain gradient steps crawl along.

mod precond;

use std::collections::VecDeque;
use std::io::Write;

use serde::Serialize;

pub use precond::SobolevSolver;

use crate::energy::{
    breakdown, degree, euclidean_gradient_of, node_weights, parts_of, project, EnergyBreakdown, EnergySpec,
    Quadrature,
};
use crate::error::{Error, Result};
use crate::field::{Director, Field};
use crate::reduce::pairwise_sum;
use crate::scalar::Real;

/// Degree of the sector the minimizer works in.
pub const TARGET_DEGREE: i64 = -1;

/// Anisotropy below which the Pohozaev residual is undefined.
pub const POHOZAEV_EPS: f64 = 1e-14;

/// Smallest trial step before the line search gives up.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Preconditioner<T> {
    /// Plain `L²` gradient.
    None,
    /// Gradient smoothed by `(shift − Δ)⁻¹`.
    Sobolev { shift: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Steepest descent; every line search starts from `initial_step`.
    Gradient,
    /// Steepest descent with line searches started from the secant step
    /// along the previous direction.
    BarzilaiBorwein,
    /// Limited-memory BFGS on the tangent gradients, seeded by the preconditioner.
    Lbfgs { memory: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// Natural boundary: every node moves.
    Free,
    /// Boundary nodes keep their initial values.
    Pinned,
    /// Every node moves; the boundary values are charged with the energy of
    /// a dipole continuation to the far-field value of the initial field.
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentConfig<T> {
    pub max_iters: usize,
    /// Stop when the weighted `L²` norm of the tangent gradient falls below this.
    pub grad_tol: T,
    pub armijo_c: T,
    pub backtrack: T,
    /// First trial step; `None` means `h²`, or `1` with the preconditioner.
    pub initial_step: Option<T>,
    pub degree_guard: bool,
    /// Stop when the objective drops by less than `energy_tol·|E|` over
    /// `stall_window` accepted steps; zero disables the test.
    pub energy_tol: T,
    pub stall_window: usize,
    pub preconditioner: Preconditioner<T>,
    pub method: Method,
    pub boundary: Boundary,
}

impl<T: Real> Default for DescentConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_tol: T::lit(1e-6),
            armijo_c: T::lit(1e-4),
            backtrack: T::lit(0.5),
            initial_step: None,
            degree_guard: true,
            energy_tol: T::zero(),
            stall_window: 20,
            preconditioner: Preconditioner::None,
            method: Method::Gradient,
            boundary: Boundary::Free,
        }
    }
}

impl<T: Real> DescentConfig<T> {
    /// Preconditioned quasi-Newton descent with the exterior boundary charge, the setting used for sweeps.
    pub fn accelerated(shift: T) -> Self {
        Self {
            max_iters: 400,
            energy_tol: T::lit(1e-8),
            preconditioner: Preconditioner::Sobolev { shift },
            method: Method::Lbfgs { memory: 8 },
            boundary: Boundary::Exterior,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v > T::zero() && v < T::one();
        if !unit(self.armijo_c) {
            return Err(Error::InvalidParameter(format!("armijo_c must lie in (0, 1), got {}", self.armijo_c)));
        }
        if !unit(self.backtrack) {
            return Err(Error::InvalidParameter(format!("backtrack must lie in (0, 1), got {}", self.backtrack)));
        }
        if !(self.grad_tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if !(self.energy_tol >= T::zero()) || self.stall_window == 0 {
            return Err(Error::InvalidParameter("energy_tol must be non-negative with a positive window".into()));
        }
        if let Some(t) = self.initial_step {
            if !(t > T::zero()) {
                return Err(Error::InvalidParameter(format!("initial_step must be positive, got {t}")));
            }
        }
        if let Preconditioner::Sobolev { shift } = self.preconditioner {
            if !(shift > T::zero()) {
                return Err(Error::InvalidParameter(format!("preconditioner shift must be positive, got {shift}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    GradTol,
    /// The objective stopped decreasing over the stall window or below rounding.
    EnergyTol,
    MaxIters,
    DegreeLost,
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow<T> {
    pub iter: usize,
    pub energy: T,
    pub grad_norm: T,
    pub step: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentReport<T> {
    pub iterations: usize,
    /// Energy before the first step and after every accepted step.
    pub energies: Vec<T>,
    #[serde(rename = "final")]
    pub final_energy: EnergyBreakdown<T>,
    pub pohozaev_residual: T,
    pub grad_norm: T,
    pub terminated_by: Termination,
    #[serde(skip)]
    pub trace: Vec<TraceRow<T>>,
}

impl<T: Real> DescentReport<T> {
    /// Writes the per-iteration trace as CSV.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,energy,grad_norm,step")?;
        for r in &self.trace {
            writeln!(out, "{},{},{},{}", r.iter, r.energy.as_f64(), r.grad_norm.as_f64(), r.step.as_f64())?;
        }
        Ok(())
    }
}

/// `|H̃ + 2A| / A`, zero exactly when the energy is stationary under dilations.
///
/// Returns `+∞` when the anisotropy is below [`POHOZAEV_EPS`].
pub fn pohozaev_residual<T: Real>(b: &EnergyBreakdown<T>) -> T {
    if b.anisotropy <= T::lit(POHOZAEV_EPS) {
        return T::infinity();
    }
    (b.dmi + T::lit(2.0) * b.anisotropy).abs() / b.anisotropy
}

/// Boundary charge `½ Σ c_k |m_k − m_∞|²` approximating the exterior energy.
///
/// A harmonic dipole tail satisfies `∂_r u = −u/r`, so its energy outside
/// the square is `½∮ (x·n)/|x|² u² ds`; `c_k` is that line weight at node `k`.
struct ExteriorCharge<T> {
    nodes: Vec<(usize, T)>,
    far: Director<T>,
}

impl<T: Real> ExteriorCharge<T> {
    fn new(field: &Field<T>) -> Self {
        let grid = field.grid();
        let n = grid.n();
        let h = grid.spacing();
        let r = grid.half_width;
        let mut coef = vec![T::zero(); n * n];
        let mut sum = Director::from_raw(T::zero(), T::zero(), T::zero());
        let sides = [(0usize, 0usize, 1usize, 0usize), (0, n - 1, 1, 0), (0, 0, 0, 1), (n - 1, 0, 0, 1)];
        for (i0, j0, di, dj) in sides {
            for k in 0..n {
                let (i, j) = (i0 + k * di, j0 + k * dj);
                let w = if k == 0 || k == n - 1 { h * T::lit(0.5) } else { h };
                coef[grid.index(i, j)] += w * r / grid.point(i, j).norm_sqr();
                sum = sum + field.at(i, j) * w;
            }
        }
        let far = Director::normalized(sum.x, sum.y, sum.z).unwrap_or_else(Director::e2);
        let nodes = coef.into_iter().enumerate().filter(|&(_, c)| c > T::zero()).collect();
        Self { nodes, far }
    }

    fn energy(&self, m: &[Director<T>]) -> T {
        let terms: Vec<T> = self.nodes.iter().map(|&(k, c)| c * (m[k] - self.far).norm_sqr()).collect();
        T::lit(0.5) * pairwise_sum(&terms)
    }
}

/// Reusable per-grid data: quadrature, weights, mask and preconditioner.
struct Workspace<T: Real> {
    quad: Quadrature<T>,
    weights: Vec<T>,
    movable: Vec<bool>,
    solver: Option<SobolevSolver<T>>,
    exterior: Option<ExteriorCharge<T>>,
    sigma: T,
}

impl<T: Real> Workspace<T> {
    fn new(field: &Field<T>, spec: EnergySpec<T>, cfg: &DescentConfig<T>) -> Self {
        let grid = *field.grid();
        let n = grid.n();
        let pinned = cfg.boundary == Boundary::Pinned;
        let movable = (0..n * n)
            .map(|k| {
                let (i, j) = (k % n, k / n);
                !(pinned && (i == 0 || j == 0 || i == n - 1 || j == n - 1))
            })
            .collect();
        let solver = match cfg.preconditioner {
            Preconditioner::None => None,
            Preconditioner::Sobolev { shift } => Some(SobolevSolver::new(n, grid.spacing(), shift, pinned)),
        };
        let exterior = (cfg.boundary == Boundary::Exterior).then(|| ExteriorCharge::new(field));
        Self { quad: Quadrature::square(grid), weights: node_weights(&grid), movable, solver, exterior, sigma: spec.sigma }
    }

    /// Minimized objective: the discrete energy plus the exterior charge, if any.
    fn energy(&self, m: &[Director<T>]) -> T {
        let e = parts_of(m, &self.quad).total(self.sigma);
        match &self.exterior {
            Some(x) => e + x.energy(m),
            None => e,
        }
    }

    /// `L²` tangent gradient, zero on pinned nodes.
    fn gradient(&self, m: &[Director<T>]) -> Vec<Director<T>> {
        let mut g = euclidean_gradient_of(m, &self.quad, self.sigma * self.sigma);
        if let Some(x) = &self.exterior {
            for &(k, c) in &x.nodes {
                g[k] = g[k] + (m[k] - x.far) * c;
            }
        }
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = if self.movable[k] { project(*gk, m[k]) * self.weights[k].recip() } else { Director::default() };
        }
        g
    }

    fn inner(&self, a: &[Director<T>], b: &[Director<T>]) -> T {
        let terms: Vec<T> = a.iter().zip(b).zip(&self.weights).map(|((x, y), &w)| w * x.dot(*y)).collect();
        pairwise_sum(&terms)
    }

    fn precondition(&self, r: &[Director<T>]) -> Vec<Director<T>> {
        match &self.solver {
            Some(s) => s.solve(r),
            None => r.to_vec(),
        }
    }

    /// Negated tangent projection of `p`, zero on pinned nodes.
    fn descent(&self, m: &[Director<T>], p: &[Director<T>]) -> Vec<Director<T>> {
        p.iter()
            .zip(m)
            .zip(&self.movable)
            .map(|((p, &mk), &free)| if free { -project(*p, mk) } else { Director::default() })
            .collect()
    }

    /// Preconditioned steepest-descent direction for the gradient `r`.
    fn direction(&self, m: &[Director<T>], r: &[Director<T>]) -> Vec<Director<T>> {
        self.descent(m, &self.precondition(r))
    }

    /// Two-loop recursion over the stored pairs, seeded with the scaled preconditioner.
    fn quasi_newton(&self, m: &[Director<T>], r: &[Director<T>], memory: &VecDeque<Pair<T>>) -> Vec<Director<T>> {
        let Some(last) = memory.back() else {
            return self.direction(m, r);
        };
        let mut q = r.to_vec();
        let mut alphas = Vec::with_capacity(memory.len());
        for pair in memory.iter().rev() {
            let a = pair.rho * self.inner(&pair.s, &q);
            axpy(&mut q, -a, &pair.y);
            alphas.push(a);
        }
        let mut z = self.precondition(&q);
        if self.solver.is_none() {
            // without a preconditioner the seed is the scalar secant scaling
            let gamma = self.inner(&last.s, &last.y) / self.inner(&last.y, &last.y);
            for v in z.iter_mut() {
                *v = *v * gamma;
            }
        }
        for (pair, a) in memory.iter().zip(alphas.into_iter().rev()) {
            let b = pair.rho * self.inner(&pair.y, &z);
            axpy(&mut z, a - b, &pair.s);
        }
        self.descent(m, &z)
    }

    fn tangent(&self, m: &[Director<T>], v: &mut [Director<T>]) {
        for ((vk, &mk), &free) in v.iter_mut().zip(m).zip(&self.movable) {
            *vk = if free { project(*vk, mk) } else { Director::default() };
        }
    }

    fn retract(&self, m: &[Director<T>], d: &[Director<T>], t: T) -> Vec<Director<T>> {
        m.iter().zip(d).map(|(&mk, &dk)| (mk + dk * t).renormalize()).collect()
    }

    /// Armijo backtracking from `t0`; returns the new state, its energy and the accepted step.
    fn line_search(
        &self,
        m: &[Director<T>],
        e0: T,
        d: &[Director<T>],
        slope: T,
        t0: T,
        cfg: &DescentConfig<T>,
    ) -> Result<(Vec<Director<T>>, T, T)> {
        let mut t = t0;
        let min_step = T::lit(MIN_STEP);
        while t >= min_step {
            let trial = self.retract(m, d, t);
            let e = self.energy(&trial);
            if e <= e0 + cfg.armijo_c * t * slope && e < e0 {
                return Ok((trial, e, t));
            }
            t *= cfg.backtrack;
        }
        Err(Error::LineSearchFailed { min_step: MIN_STEP })
    }

    fn default_step(&self, cfg: &DescentConfig<T>) -> T {
        cfg.initial_step.unwrap_or_else(|| match self.solver {
            Some(_) => T::one(),
            None => {
                let h = self.quad.spacing();
                h * h
            }
        })
    }
}

/// Curvature pair `(s, y)` with `rho = 1/⟨s, y⟩`.
struct Pair<T> {
    s: Vec<Director<T>>,
    y: Vec<Director<T>>,
    rho: T,
}

fn axpy<T: Real>(acc: &mut [Director<T>], a: T, x: &[Director<T>]) {
    for (v, &xk) in acc.iter_mut().zip(x) {
        *v = *v + xk * a;
    }
}

/// The predicted decrease of a unit step is lost in the rounding of the energy.
fn below_rounding<T: Real>(slope: T, e: T) -> bool {
    slope.abs() <= T::lit(16.0) * T::epsilon() * e.abs()
}

fn zero_gradient<T: Real>(r: &[Director<T>]) -> bool {
    r.iter().all(|v| v.x == T::zero() && v.y == T::zero() && v.z == T::zero())
}

/// One descent step from `field`. Returns the input unchanged at a critical point.
pub fn step<T: Real>(field: &Field<T>, spec: EnergySpec<T>, cfg: &DescentConfig<T>) -> Result<(Field<T>, T)> {
    cfg.validate()?;
    let ws = Workspace::new(field, spec, cfg);
    let m = field.values();
    let e0 = ws.energy(m);
    let r = ws.gradient(m);
    if zero_gradient(&r) {
        return Ok((field.clone(), e0));
    }
    let d = ws.direction(m, &r);
    let slope = ws.inner(&r, &d);
    let (next, e, _) = ws.line_search(m, e0, &d, slope, ws.default_step(cfg), cfg)?;
    Ok((Field::from_unit_unchecked(*field.grid(), next), e))
}

/// Descends from `init` until the gradient tolerance, the iteration cap or a
/// change of degree. Returns the final field with the report.
pub fn minimize<T: Real>(
    init: &Field<T>,
    spec: EnergySpec<T>,
    cfg: &DescentConfig<T>,
) -> Result<(Field<T>, DescentReport<T>)> {
    cfg.validate()?;
    let start_degree = degree(init).value;
    if start_degree != TARGET_DEGREE {
        return Err(Error::WrongSector { expected: TARGET_DEGREE, found: start_degree });
    }
    let grid = *init.grid();
    let ws = Workspace::new(init, spec, cfg);
    let mut m = init.values().to_vec();
    let mut e = ws.energy(&m);
    let mut energies = vec![e];
    let mut trace = Vec::new();
    let mut r = ws.gradient(&m);
    let mut grad_norm = ws.inner(&r, &r).sqrt();
    let mut t_next = ws.default_step(cfg);
    let mut memory: VecDeque<Pair<T>> = VecDeque::new();
    let mut terminated_by = Termination::MaxIters;
    let mut iterations = 0;
    let t_floor = T::lit(MIN_STEP);
    let t_cap = ws.default_step(cfg) * T::lit(1e6);
    while iterations < cfg.max_iters {
        if grad_norm <= cfg.grad_tol || zero_gradient(&r) {
            terminated_by = Termination::GradTol;
            break;
        }
        let (mut d, t0) = match cfg.method {
            Method::Lbfgs { .. } if !memory.is_empty() => (ws.quasi_newton(&m, &r, &memory), T::one()),
            _ => (ws.direction(&m, &r), t_next),
        };
        let mut slope = ws.inner(&r, &d);
        if !(slope < T::zero()) {
            memory.clear();
            d = ws.direction(&m, &r);
            slope = ws.inner(&r, &d);
        }
        let searched = match ws.line_search(&m, e, &d, slope, t0, cfg) {
            Err(_) if !memory.is_empty() => {
                memory.clear();
                d = ws.direction(&m, &r);
                slope = ws.inner(&r, &d);
                ws.line_search(&m, e, &d, slope, ws.default_step(cfg), cfg)
            }
            other => other,
        };
        let (next, e_next, t) = match searched {
            Ok(found) => found,
            Err(_) if below_rounding(slope, e) => {
                terminated_by = Termination::EnergyTol;
                break;
            }
            Err(err) => return Err(err),
        };
        if cfg.degree_guard && degree(&Field::from_unit_unchecked(grid, next.clone())).value != TARGET_DEGREE {
            terminated_by = Termination::DegreeLost;
            break;
        }
        let r_next = ws.gradient(&next);
        match cfg.method {
            Method::Gradient => t_next = ws.default_step(cfg),
            Method::BarzilaiBorwein => {
                let y: Vec<Director<T>> = r_next.iter().zip(&r).map(|(a, b)| *a - *b).collect();
                let curvature = ws.inner(&d, &y);
                t_next = if curvature > T::zero() {
                    (-t * slope / curvature).max(t_floor).min(t_cap)
                } else {
                    (t * T::lit(2.0)).min(t_cap)
                };
            }
            Method::Lbfgs { memory: cap } => {
                let mut s_vec: Vec<Director<T>> = next.iter().zip(&m).map(|(a, b)| *a - *b).collect();
                let mut y_vec: Vec<Director<T>> = r_next.iter().zip(&r).map(|(a, b)| *a - *b).collect();
                ws.tangent(&next, &mut s_vec);
                ws.tangent(&next, &mut y_vec);
                let sy = ws.inner(&s_vec, &y_vec);
                if sy > T::zero() && cap > 0 {
                    if memory.len() == cap {
                        memory.pop_front();
                    }
                    memory.push_back(Pair { s: s_vec, y: y_vec, rho: sy.recip() });
                }
            }
        }
        m = next;
        e = e_next;
        r = r_next;
        grad_norm = ws.inner(&r, &r).sqrt();
        iterations += 1;
        energies.push(e);
        trace.push(TraceRow { iter: iterations, energy: e, grad_norm, step: t });
        if cfg.energy_tol > T::zero() && energies.len() > cfg.stall_window {
            let before = energies[energies.len() - 1 - cfg.stall_window];
            if before - e <= cfg.energy_tol * e.abs() {
                terminated_by = Termination::EnergyTol;
                break;
            }
        }
    }
    if iterations == cfg.max_iters && grad_norm <= cfg.grad_tol {
        terminated_by = Termination::GradTol;
    }
    let field = Field::from_unit_unchecked(grid, m);
    let final_energy = breakdown(&field, spec);
    let report = DescentReport {
        iterations,
        energies,
        pohozaev_residual: pohozaev_residual(&final_energy),
        final_energy,
        grad_norm,
        terminated_by,
        trace,
    };
    Ok((field, report))
}
