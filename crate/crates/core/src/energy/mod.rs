//! Discrete energy, degree and gradient.
//!
//! All terms share one quadrature: nodal weights for `A` and edge-pair
//! weights for the difference terms (see [`stencil`]). The gradient is the
//! exact derivative of the same discrete sum, so descent methods and
//! finite-difference checks agree to rounding.

mod degree;
mod density;
mod quadrature;
mod stencil;

use rayon::prelude::*;
use serde::Serialize;

pub use degree::{degree, solid_angle, Degree, DEGREE_TOLERANCE};
pub use density::{nodal_density, positivity_violation, NodalDensity};
pub use quadrature::{rect_disc_area, Quadrature, Region};
pub use stencil::STENCIL;

use crate::analytic::stability_scale;
use crate::error::{Error, Result};
use crate::field::{Director, Field, GridSpec};
use crate::reduce::{install, sum_rows, sum_rows_n};
use crate::scalar::Real;

/// Coupling of the energy `E_σ = D + σ²(A + H̃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySpec<T> {
    pub sigma: T,
}

impl<T: Real> EnergySpec<T> {
    /// Accepts `0 < σ < 1/2`, the range where the energy is bounded below.
    pub fn new(sigma: T) -> Result<Self> {
        if sigma > T::zero() && sigma < T::lit(0.5) {
            Ok(Self { sigma })
        } else {
            Err(Error::InvalidParameter(format!("sigma must lie in (0, 1/2), got {sigma}")))
        }
    }

    #[inline]
    pub fn sigma2(&self) -> T {
        self.sigma * self.sigma
    }
}

/// The four quadratures of a field, including the curl form of the DMI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyParts<T> {
    pub dirichlet: T,
    pub anisotropy: T,
    pub dmi: T,
    pub dmi_curl: T,
}

impl<T: Real> EnergyParts<T> {
    pub fn total(&self, sigma: T) -> T {
        self.dirichlet + sigma * sigma * (self.anisotropy + self.dmi)
    }
}

pub(crate) fn parts_of<T: Real>(m: &[Director<T>], q: &Quadrature<T>) -> EnergyParts<T> {
    let n = q.grid().n();
    let [dirichlet, anisotropy, dmi, dmi_curl] = sum_rows_n::<T, 4, _>(n, |j| stencil::row_parts(m, q, j));
    EnergyParts { dirichlet, anisotropy, dmi, dmi_curl }
}

/// Every quadrature of `field` restricted to `region`.
pub fn parts_in<T: Real>(field: &Field<T>, region: Region<T>) -> EnergyParts<T> {
    parts_of(field.values(), &Quadrature::new(*field.grid(), region))
}

/// Every quadrature of `field` over the whole grid.
pub fn parts<T: Real>(field: &Field<T>) -> EnergyParts<T> {
    parts_in(field, Region::Square)
}

/// Exchange energy `½∫|∇m|²`.
pub fn dirichlet<T: Real>(field: &Field<T>) -> T {
    parts(field).dirichlet
}

/// Easy-plane anisotropy `∫m₃²`.
pub fn anisotropy<T: Real>(field: &Field<T>) -> T {
    parts(field).anisotropy
}

/// DMI in the form `2∫m₃(∂₁m₂ − ∂₂m₁)`.
pub fn dmi_tilde<T: Real>(field: &Field<T>) -> T {
    parts(field).dmi
}

/// DMI in the classical form `∫m·∇×m`.
pub fn dmi_curl<T: Real>(field: &Field<T>) -> T {
    parts(field).dmi_curl
}

/// Discrete boundary flux of `(−m₃m₂, m₃m₁)` over the grid square.
///
/// On the full square `dmi_curl = dmi_tilde + boundary_flux` holds up to
/// rounding, because the pair differences of the two forms telescope.
pub fn boundary_flux<T: Real>(field: &Field<T>) -> T {
    let grid = field.grid();
    let n = grid.n();
    let h = grid.spacing();
    let m = field.values();
    let trap = |k: usize| if k == 0 || k == n - 1 { h * T::lit(0.5) } else { h };
    let ends = |f: &dyn Fn(usize) -> T| {
        let mut acc = T::zero();
        for &(s, c) in STENCIL.iter() {
            let mut diff = T::zero();
            for k in 0..s {
                diff += f(n - 1 - k) - f(k);
            }
            acc += T::lit(c) / T::from_usize_lossy(s) * diff;
        }
        acc
    };
    let x_part = sum_rows(n, |j| {
        let f = |i: usize| {
            let v = m[j * n + i];
            v.y * v.z
        };
        -trap(j) * ends(&f)
    });
    let y_part = sum_rows(n, |i| {
        let g = |j: usize| {
            let v = m[j * n + i];
            v.x * v.z
        };
        trap(i) * ends(&g)
    });
    x_part + y_part
}

/// Energy of a field together with its degree and stability scale.
///
/// Serializes to a flat object; an infinite `stability_l` becomes `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown<T> {
    pub dirichlet: T,
    pub anisotropy: T,
    pub dmi: T,
    pub sigma: T,
    pub total: T,
    pub degree_raw: T,
    pub degree: i64,
    pub stability_l: T,
}

impl<T: Real> EnergyBreakdown<T> {
    /// `D + σ²(A + H̃)` from the stored parts.
    pub fn recomputed_total(&self) -> T {
        self.dirichlet + self.sigma * self.sigma * (self.anisotropy + self.dmi)
    }

    pub fn degree_gap(&self) -> T {
        Degree { raw: self.degree_raw, value: self.degree }.gap()
    }
}

/// Breakdown without the degree reliability check.
pub fn breakdown<T: Real>(field: &Field<T>, spec: EnergySpec<T>) -> EnergyBreakdown<T> {
    let p = parts(field);
    let q = degree(field);
    EnergyBreakdown {
        dirichlet: p.dirichlet,
        anisotropy: p.anisotropy,
        dmi: p.dmi,
        sigma: spec.sigma,
        total: p.total(spec.sigma),
        degree_raw: q.raw,
        degree: q.value,
        stability_l: stability_scale(p.dirichlet),
    }
}

/// Full breakdown; fails when the degree is not close to an integer.
pub fn total_energy<T: Real>(field: &Field<T>, spec: EnergySpec<T>) -> Result<EnergyBreakdown<T>> {
    let b = breakdown(field, spec);
    Degree { raw: b.degree_raw, value: b.degree }.checked()?;
    Ok(b)
}

/// Total energy evaluated through the convex sum-of-squares rewriting.
pub fn convex_form_total<T: Real>(field: &Field<T>, spec: EnergySpec<T>) -> T {
    let q = Quadrature::square(*field.grid());
    let s2 = spec.sigma2();
    sum_rows(field.grid().n(), |j| stencil::row_convex(field.values(), &q, s2, j))
}

pub(crate) fn euclidean_gradient_of<T: Real>(m: &[Director<T>], q: &Quadrature<T>, sigma2: T) -> Vec<Director<T>> {
    let n = q.grid().n();
    install(|| {
        (0..n * n)
            .into_par_iter()
            .map(|k| stencil::node_gradient(m, q, sigma2, k % n, k / n))
            .collect()
    })
}

#[inline]
pub(crate) fn project<T: Real>(g: Director<T>, m: Director<T>) -> Director<T> {
    g - m * g.dot(m)
}

/// Gradient of the discrete total energy with respect to the nodal values,
/// projected onto the tangent plane of the sphere at each node.
pub fn gradient<T: Real>(field: &Field<T>, spec: EnergySpec<T>) -> Vec<Director<T>> {
    let q = Quadrature::square(*field.grid());
    let m = field.values();
    let mut g = euclidean_gradient_of(m, &q, spec.sigma2());
    for (gk, &mk) in g.iter_mut().zip(m) {
        *gk = project(*gk, mk);
    }
    g
}

/// `½∫|∇v|²` of an arbitrary vector field given on a rectangular block of nodes.
pub fn block_dirichlet<T: Real>(values: &[Director<T>], width: usize, height: usize, h: T) -> T {
    stencil::block_dirichlet(values, width, height, h)
}

/// Nodal quadrature weights of the full grid, row-major.
pub fn node_weights<T: Real>(grid: &GridSpec<T>) -> Vec<T> {
    let q = Quadrature::square(*grid);
    let n = grid.n();
    (0..n * n).map(|k| q.node(k % n, k / n)).collect()
}
