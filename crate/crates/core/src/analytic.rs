//! Closed-form values and small-σ predictions used as oracles and baselines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `H̃` of the Möbius map `m^{[α, β]}` restricted to the disc `B_R`.
pub fn dmi_mobius_ball<T: Real>(alpha: T, beta: T, radius: T) -> T {
    let four_pi = T::lit(4.0) * T::PI();
    let (s2b, c2b) = (T::lit(2.0) * beta).sin_cos();
    let r2 = radius * radius;
    let num = alpha.cos() * (c2b * c2b * r2 * r2 + s2b * (T::one() + s2b) * r2);
    let den = (T::one() + r2) * (T::one() + r2);
    -four_pi * num / den
}

/// `H̃` of `m^{[α, β]}` on the whole plane: `−4π cos α cos²(2β)`.
pub fn dmi_mobius_limit<T: Real>(alpha: T, beta: T) -> T {
    let c2b = (T::lit(2.0) * beta).cos();
    -T::lit(4.0) * T::PI() * alpha.cos() * c2b * c2b
}

/// `∫_{B_L} Φ₃(w_*)²` in closed form: `2π ln(1 + L²) − 2πL²/(1 + L²)`.
pub fn anisotropy_ball<T: Real>(l: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let l2 = l * l;
    two_pi * l2.ln_1p() - two_pi * l2 / (T::one() + l2)
}

/// Stability scale `(2D − 8π)^{−1/2}`; `+∞` when `D ≤ 4π`.
pub fn stability_scale<T: Real>(dirichlet: T) -> T {
    let excess = T::lit(2.0) * dirichlet - T::lit(8.0) * T::PI();
    if excess > T::zero() {
        excess.sqrt().recip()
    } else {
        T::infinity()
    }
}

/// Reduced model of the truncated competitor: truncation cost `C₁/L²`
/// plus the anisotropy and DMI contributions of a core of size `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompetitorModel<T> {
    pub c1: T,
    pub sigma: T,
}

/// Leading-order predictions for the minimizer at coupling `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPrediction<T> {
    pub sigma: T,
    pub e_min_upper: T,
    pub e_min_theorem: T,
    pub rho_pred: T,
    pub rho_l: T,
    pub l_sigma: T,
}

impl<T: Real> CompetitorModel<T> {
    /// Default truncation constant when no estimate is at hand.
    pub const DEFAULT_C1: f64 = 1.0;

    pub fn new(c1: T, sigma: T) -> Result<Self> {
        if !(c1 > T::zero() && c1.is_finite()) {
            return Err(Error::InvalidParameter(format!("c1 must be positive, got {c1}")));
        }
        if !(sigma > T::zero() && sigma < T::lit(0.5)) {
            return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1/2), got {sigma}")));
        }
        Ok(Self { c1, sigma })
    }

    /// Upper bound `4π + C₁/L² + 4πσ²(ρ² ln L − ρ cos α)`; needs `L > 1`.
    pub fn reduced_energy(&self, alpha: T, rho: T, l: T) -> Result<T> {
        if !(l > T::one()) {
            return Err(Error::InvalidParameter(format!("truncation radius must exceed 1, got {l}")));
        }
        if !(rho > T::zero()) {
            return Err(Error::InvalidParameter(format!("core size must be positive, got {rho}")));
        }
        let four_pi = T::lit(4.0) * T::PI();
        let s2 = self.sigma * self.sigma;
        Ok(four_pi + self.c1 / (l * l) + four_pi * s2 * (rho * rho * l.ln() - rho * alpha.cos()))
    }

    /// Main-order minimizers of the reduced model and the energy expansions.
    pub fn optimal_scales(&self) -> Result<AsymptoticPrediction<T>> {
        let s = self.sigma;
        if !(s > T::zero() && s < T::lit(0.5)) {
            return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1/2), got {s}")));
        }
        let pi = T::PI();
        let four_pi = T::lit(4.0) * pi;
        let s2 = s * s;
        let ln_inv = -s.ln();
        let ln_inv2 = T::lit(2.0) * ln_inv;
        let l_sigma = (T::lit(2.0) * self.c1 / pi).sqrt() * ln_inv / s;
        Ok(AsymptoticPrediction {
            sigma: s,
            e_min_upper: four_pi - pi * s2 / (ln_inv / s).ln(),
            e_min_theorem: four_pi - T::lit(2.0) * pi * s2 / (ln_inv2 * ln_inv2 / s2).ln(),
            rho_pred: ln_inv2.recip(),
            rho_l: (T::lit(2.0) * l_sigma.ln()).recip(),
            l_sigma,
        })
    }
}

/// Core size `1/(2 ln L)` minimizing the reduced model at fixed `L`.
pub fn rho_at<T: Real>(l: T) -> T {
    (T::lit(2.0) * l.ln()).recip()
}
