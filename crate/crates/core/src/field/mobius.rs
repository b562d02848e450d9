//! The five-parameter chart of the degree −1 Möbius group.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::director::Director;
use super::pair::{stereographic, w_star};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Chart coordinates `(z₀, ρ, φ, α, β)`: translation, dilation, corotation and
/// the two shape angles of the base map `R_{e₁,2β} Φ(w_*(e^{−iα} ·))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusParams<T> {
    pub z0: Complex<T>,
    pub rho: T,
    pub phi: T,
    pub alpha: T,
    pub beta: T,
}

/// Reduces an angle into `(−period/2, period/2]`.
pub fn wrap_angle<T: Real>(angle: T, period: T) -> T {
    let half = period / T::lit(2.0);
    let mut a = angle - period * (angle / period).round();
    if a <= -half {
        a += period;
    }
    if a > half {
        a -= period;
    }
    a
}

impl<T: Real> MobiusParams<T> {
    pub fn new(z0: Complex<T>, rho: T, phi: T, alpha: T, beta: T) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { z0, rho, phi, alpha, beta })
    }

    /// The centred base map `m^{[α, β]}` with unit scale.
    pub fn base(alpha: T, beta: T) -> Self {
        Self { z0: Complex::new(T::zero(), T::zero()), rho: T::one(), phi: T::zero(), alpha, beta }
    }

    /// Canonical representative of the chart redundancy.
    ///
    /// Uses `β ≡ β + π` and `(φ, β) ≡ (φ + π, π/2 − β)`, so β lands in
    /// `[−π/4, π/4]` and α, φ in `(−π, π]`. On the two fixed lines
    /// `β = ±π/4` the corotation is absorbed (it acts trivially for `+π/4`
    /// and as `α ↦ α + 2φ` for `−π/4`), so φ is reported as 0 there.
    pub fn canonical(self) -> Self {
        let pi = T::PI();
        let tau = T::TAU();
        let q = T::FRAC_PI_4();
        let mut beta = wrap_angle(self.beta, pi);
        let mut phi = self.phi;
        let mut alpha = self.alpha;
        if beta > q {
            beta = T::FRAC_PI_2() - beta;
            phi += pi;
        } else if beta < -q {
            beta = -T::FRAC_PI_2() - beta;
            phi += pi;
        }
        if beta == q {
            phi = T::zero();
        } else if beta == -q {
            alpha += T::lit(2.0) * phi;
            phi = T::zero();
        }
        Self {
            z0: self.z0,
            rho: self.rho,
            phi: wrap_angle(phi, tau),
            alpha: wrap_angle(alpha, tau),
            beta,
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Evaluates `𝔗_{z₀} 𝔇_ρ ℜ_φ m^{[α,β]}` at `z`.
    pub fn eval(&self, z: Complex<T>) -> Director<T> {
        mobius_field(self, z)
    }
}

/// `m^{[α,β]}(ζ) = R_{e₁,2β} Φ(w_*(e^{−iα} ζ))`, the rotation applied to the value.
pub fn base_field<T: Real>(alpha: T, beta: T, zeta: Complex<T>) -> Director<T> {
    let w = w_star(zeta * Complex::from_polar(T::one(), -alpha));
    let d = stereographic(w).expect("w_* never yields (0, 0)");
    d.rotate_e1(T::lit(2.0) * beta)
}

/// Chart evaluation: translate, dilate, then corotate the base map.
pub fn mobius_field<T: Real>(params: &MobiusParams<T>, at: Complex<T>) -> Director<T> {
    let u = (at - params.z0) / params.rho;
    let v = u * Complex::from_polar(T::one(), -params.phi);
    base_field(params.alpha, params.beta, v).rotate_e3(params.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::pair::w_alpha_beta;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn reference_values() {
        let p = MobiusParams::base(0.0, 0.0);
        assert!(p.eval(c(1.0, 0.0)).max_abs_diff(Director::from_raw(0.0, 0.0, -1.0)) < 1e-15);
        assert!(p.eval(c(-1.0, 0.0)).max_abs_diff(Director::from_raw(0.0, 0.0, 1.0)) < 1e-15);
        let p = MobiusParams::new(c(0.0, 0.0), 2.0, 0.0, 0.0, 0.0).unwrap();
        assert!(p.eval(c(2.0, 0.0)).max_abs_diff(Director::from_raw(0.0, 0.0, -1.0)) < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(MobiusParams::new(c(0.0, 0.0), 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn reciprocal_base_is_half_turn_corotation() {
        // Φ(1/w_*) = ℜ_π Φ(w_*)
        let rot = MobiusParams { phi: PI, ..MobiusParams::base(0.0, 0.0) };
        for &(x, y) in &[(0.3, 0.2), (-4.0, 1.0), (0.0, -7.5), (1.0, 0.0), (-1.0, 0.0)] {
            let z = c(x, y);
            let lhs = stereographic(w_star(z).reciprocal()).unwrap();
            assert!(lhs.max_abs_diff(rot.eval(z)) < 1e-12, "z = {z}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn chart_factorizes_through_corotation(
            x0 in -3.0f64..3.0, y0 in -3.0f64..3.0, rho in 0.1f64..5.0,
            phi in -7.0f64..7.0, alpha in -7.0f64..7.0, beta in -3.0f64..3.0,
            x in -10.0f64..10.0, y in -10.0f64..10.0,
        ) {
            let p = MobiusParams::new(c(x0, y0), rho, phi, alpha, beta).unwrap();
            let unrotated = MobiusParams { phi: 0.0, ..p };
            let z = c(x, y);
            let back = (z - p.z0) * Complex::from_polar(1.0, -phi) + p.z0;
            let expect = unrotated.eval(back).rotate_e3(phi);
            prop_assert!(p.eval(z).max_abs_diff(expect) < 1e-12);
        }

        #[test]
        fn base_map_agrees_with_pair_formula(
            alpha in -4.0f64..4.0, beta in -2.0f64..2.0, x in -6.0f64..6.0, y in -6.0f64..6.0,
        ) {
            let z = c(x, y);
            let via_pair = stereographic(w_alpha_beta(z, alpha, beta)).unwrap();
            prop_assert!(base_field(alpha, beta, z).max_abs_diff(via_pair) < 1e-12);
        }

        #[test]
        fn canonicalization_preserves_the_map_and_is_idempotent(
            x0 in -2.0f64..2.0, y0 in -2.0f64..2.0, rho in 0.2f64..3.0,
            phi in -10.0f64..10.0, alpha in -10.0f64..10.0, beta in -10.0f64..10.0,
            x in -5.0f64..5.0, y in -5.0f64..5.0,
        ) {
            let p = MobiusParams::new(c(x0, y0), rho, phi, alpha, beta).unwrap();
            let q = p.canonical();
            prop_assert_eq!(q, q.canonical());
            prop_assert!(q.beta >= -FRAC_PI_4 && q.beta <= FRAC_PI_4);
            prop_assert!(q.alpha > -PI && q.alpha <= PI);
            prop_assert!(q.phi > -PI && q.phi <= PI);
            let z = c(x, y);
            prop_assert!(p.eval(z).max_abs_diff(q.eval(z)) < 1e-9);
        }
    }

    #[test]
    fn fixed_lines_absorb_corotation() {
        let z = c(0.7, -1.3);
        let p = MobiusParams { phi: 1.1, ..MobiusParams::base(0.4, FRAC_PI_4) };
        assert!(p.eval(z).max_abs_diff(p.canonical().eval(z)) < 1e-12);
        assert_eq!(p.canonical().phi, 0.0);
        let p = MobiusParams { phi: 1.1, ..MobiusParams::base(0.4, -FRAC_PI_4) };
        assert!(p.eval(z).max_abs_diff(p.canonical().eval(z)) < 1e-12);
    }
}
