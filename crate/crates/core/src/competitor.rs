//! Truncated Möbius competitors and the truncation constant `C₁`.
//!
//! The competitor keeps the base map `w_*` on `B_L`, blends it to the
//! constant `i` on the annulus `L ≤ |z| ≤ 2L` with a smooth cut-off, and is
//! then rotated by `α` and dilated by `ρ`. The constant far field makes the
//! anisotropy finite at the price of a Dirichlet excess `≈ C₁/L²`.

use num_complex::Complex;
use serde::Serialize;

use crate::energy::{breakdown, parts, EnergyBreakdown, EnergySpec};
use crate::error::{Error, Result};
use crate::field::{sample, stereographic, w_star, ComplexPair, Director, Field, GridSpec};
use crate::scalar::Real;

/// Quintic smoothstep cut-off: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn cutoff<T: Real>(r: T) -> T {
    if r <= T::one() {
        return T::one();
    }
    if r >= T::lit(2.0) {
        return T::zero();
    }
    let s = r - T::one();
    T::one() - s * s * s * (s * (T::lit(6.0) * s - T::lit(15.0)) + T::lit(10.0))
}

/// Derivative of [`cutoff`]; its minimum is `−15/8` at `r = 3/2`.
pub fn cutoff_slope<T: Real>(r: T) -> T {
    if r <= T::one() || r >= T::lit(2.0) {
        return T::zero();
    }
    let s = r - T::one();
    let t = s * (T::one() - s);
    -T::lit(30.0) * t * t
}

/// `w_*^L(z) = i − χ(|z|/L)·2i/(z + 1)`, exactly `w_*` on `B_L` and `i` outside `B_{2L}`.
pub fn truncated_w<T: Real>(z: Complex<T>, l: T) -> ComplexPair<T> {
    let r = z.norm() / l;
    if r <= T::one() {
        return w_star(z);
    }
    let i = Complex::new(T::zero(), T::one());
    if r >= T::lit(2.0) {
        return ComplexPair::finite(i);
    }
    let q = z + Complex::new(T::one(), T::zero());
    let chi = cutoff(r);
    ComplexPair { p: i * q - i * (T::lit(2.0) * chi), q }
}

/// Parameters `(α, ρ, L)` of the competitor `m_{α,ρ,L}(z) = Φ(w_*^L(e^{−iα}z/ρ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompetitorSpec<T> {
    pub alpha: T,
    pub rho: T,
    pub l_trunc: T,
}

/// Half-width of the smallest admissible grid, in units of `ρL`.
pub const COLLAR: f64 = 2.5;

impl<T: Real> CompetitorSpec<T> {
    pub fn new(alpha: T, rho: T, l_trunc: T) -> Result<Self> {
        if !(rho > T::zero() && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        if !(l_trunc > T::one() && l_trunc.is_finite()) {
            return Err(Error::InvalidParameter(format!("truncation radius must exceed 1, got {l_trunc}")));
        }
        Ok(Self { alpha, rho, l_trunc })
    }

    /// Radius outside which the field is constant.
    pub fn support_radius(&self) -> T {
        T::lit(2.0) * self.rho * self.l_trunc
    }

    /// Smallest grid half-width accepted by [`build_competitor`].
    pub fn required_half_width(&self) -> T {
        T::lit(COLLAR) * self.rho * self.l_trunc
    }

    pub fn eval(&self, z: Complex<T>) -> Director<T> {
        let zeta = z * Complex::from_polar(self.rho.recip(), -self.alpha);
        stereographic(truncated_w(zeta, self.l_trunc)).expect("truncated map never yields (0, 0)")
    }
}

/// Samples the competitor on `grid`.
pub fn build_competitor<T: Real>(spec: &CompetitorSpec<T>, grid: GridSpec<T>) -> Result<Field<T>> {
    let required = spec.required_half_width();
    if grid.half_width < required {
        return Err(Error::GridTooSmall { half_width: grid.half_width.as_f64(), required: required.as_f64() });
    }
    Ok(sample(|z| spec.eval(z), grid))
}

/// Measured quadratures of a competitor next to the leading-order model.
#[derive(Debug, Clone, Serialize)]
pub struct CompetitorMeasurement<T> {
    pub spec: CompetitorSpec<T>,
    pub grid: GridSpec<T>,
    pub dirichlet: T,
    pub anisotropy: T,
    pub dmi: T,
    pub model_dirichlet: T,
    pub model_anisotropy: T,
    pub model_dmi: T,
    /// Relative deviations; for a vanishing model term the absolute value.
    pub dev_dirichlet: T,
    pub dev_anisotropy: T,
    pub dev_dmi: T,
    pub energy: EnergyBreakdown<T>,
}

fn deviation<T: Real>(measured: T, model: T) -> T {
    if model.abs() > T::lit(1e-12) {
        (measured - model) / model.abs()
    } else {
        measured - model
    }
}

/// Builds the competitor and compares its energy terms with `4π`, `4πρ² ln L` and `−4πρ cos α`.
pub fn measure_vs_model<T: Real>(
    spec: &CompetitorSpec<T>,
    sigma: T,
    grid: GridSpec<T>,
) -> Result<CompetitorMeasurement<T>> {
    let energy_spec = EnergySpec::new(sigma)?;
    let field = build_competitor(spec, grid)?;
    let energy = breakdown(&field, energy_spec);
    let four_pi = T::lit(4.0) * T::PI();
    let model_dirichlet = four_pi;
    let model_anisotropy = four_pi * spec.rho * spec.rho * spec.l_trunc.ln();
    let model_dmi = -four_pi * spec.rho * spec.alpha.cos();
    Ok(CompetitorMeasurement {
        spec: *spec,
        grid,
        dirichlet: energy.dirichlet,
        anisotropy: energy.anisotropy,
        dmi: energy.dmi,
        model_dirichlet,
        model_anisotropy,
        model_dmi,
        dev_dirichlet: deviation(energy.dirichlet, model_dirichlet),
        dev_anisotropy: deviation(energy.anisotropy, model_anisotropy),
        dev_dmi: deviation(energy.dmi, model_dmi),
        energy,
    })
}

/// Grid used for each truncation radius when estimating `C₁` (`ρ = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C1GridPolicy<T> {
    /// Half-width in units of `L`.
    pub collar: T,
    /// Grid spacing.
    pub spacing: T,
}

impl<T: Real> Default for C1GridPolicy<T> {
    fn default() -> Self {
        Self { collar: T::lit(COLLAR), spacing: T::lit(0.1) }
    }
}

/// Fitted truncation constant with the data it came from.
#[derive(Debug, Clone, Serialize)]
pub struct C1Estimate<T> {
    pub c1_hat: T,
    /// Offset absorbing the `L`-independent quadrature bias.
    pub intercept: T,
    /// `(L, D − 4π)` pairs.
    pub pairs: Vec<(T, T)>,
    /// Relative deviation of each excess from the fitted line.
    pub residuals: Vec<T>,
}

/// Fits `excess = intercept + c1·x` with `x = 1/L²` by least squares.
pub fn fit_c1<T: Real>(pairs: &[(T, T)]) -> Result<C1Estimate<T>> {
    let mut ls: Vec<T> = pairs.iter().map(|p| p.0).collect();
    ls.sort_by(|a, b| a.partial_cmp(b).expect("finite L"));
    ls.dedup();
    if ls.len() < 3 {
        return Err(Error::FitIllConditioned(format!("need 3 distinct truncation radii, got {}", ls.len())));
    }
    if ls[ls.len() - 1] < T::lit(2.0) * ls[0] {
        return Err(Error::FitIllConditioned("truncation radii span less than one octave".into()));
    }
    let k = T::from_usize_lossy(pairs.len());
    let xs: Vec<T> = pairs.iter().map(|p| (p.0 * p.0).recip()).collect();
    let mx = xs.iter().copied().sum::<T>() / k;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / k;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: T = xs.iter().zip(pairs).map(|(&x, p)| (x - mx) * (p.1 - my)).sum();
    let c1_hat = sxy / sxx;
    let intercept = my - c1_hat * mx;
    if !(c1_hat > T::zero()) {
        return Err(Error::FitIllConditioned(format!("non-positive slope {c1_hat}")));
    }
    let residuals = xs
        .iter()
        .zip(pairs)
        .map(|(&x, p)| {
            let fit = intercept + c1_hat * x;
            (p.1 - fit) / fit.abs().max(T::min_positive_value())
        })
        .collect();
    Ok(C1Estimate { c1_hat, intercept, pairs: pairs.to_vec(), residuals })
}

/// Measures `D(m_{0,1,L}) − 4π` for each `L` and fits the `1/L²` coefficient.
pub fn estimate_c1<T: Real>(l_values: &[T], policy: C1GridPolicy<T>) -> Result<C1Estimate<T>> {
    let mut pairs = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let spec = CompetitorSpec::new(T::zero(), T::one(), l)?;
        let grid = GridSpec::with_max_spacing(policy.collar * l, policy.spacing)?;
        let field = build_competitor(&spec, grid)?;
        let excess = parts(&field).dirichlet - T::lit(4.0) * T::PI();
        pairs.push((l, excess));
    }
    fit_c1(&pairs)
}
