//! Homogeneous coordinates on the Riemann sphere and the closed-form maps
//! built from them.

use num_complex::Complex;

use super::director::Director;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `w = p / q` in homogeneous form, so that `w = ∞` is the finite pair `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPair<T> {
    pub p: Complex<T>,
    pub q: Complex<T>,
}

impl<T: Real> ComplexPair<T> {
    pub fn new(p: Complex<T>, q: Complex<T>) -> Result<Self> {
        if p.norm_sqr() + q.norm_sqr() > T::zero() {
            Ok(Self { p, q })
        } else {
            Err(Error::ZeroPair)
        }
    }

    pub fn finite(w: Complex<T>) -> Self {
        Self { p: w, q: Complex::new(T::one(), T::zero()) }
    }

    pub fn infinity() -> Self {
        Self { p: Complex::new(T::one(), T::zero()), q: Complex::new(T::zero(), T::zero()) }
    }

    /// Rescales so that max(|p|, |q|) = 1; leaves the represented point unchanged.
    pub fn balanced(self) -> Self {
        let s = self.p.norm().max(self.q.norm());
        if s > T::zero() && s.is_finite() {
            Self { p: self.p / s, q: self.q / s }
        } else {
            self
        }
    }

    /// The represented point, `None` at ∞.
    pub fn value(self) -> Option<Complex<T>> {
        if self.q.norm_sqr() == T::zero() {
            None
        } else {
            Some(self.p / self.q)
        }
    }

    /// Action of the matrix `[[a, b], [c, d]]`.
    pub fn transform(self, a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Self {
        Self { p: a * self.p + b * self.q, q: c * self.p + d * self.q }.balanced()
    }

    pub fn reciprocal(self) -> Self {
        Self { p: self.q, q: self.p }
    }
}

/// Inverse stereographic projection of `p / q` onto S², with `0 ↦ −e₃` and `∞ ↦ e₃`.
pub fn stereographic<T: Real>(w: ComplexPair<T>) -> Result<Director<T>> {
    let w = w.balanced();
    let a = w.p.norm_sqr();
    let b = w.q.norm_sqr();
    let s = a + b;
    if s <= T::zero() || !s.is_finite() {
        return Err(Error::ZeroPair);
    }
    let pq = w.p * w.q.conj();
    let two = T::lit(2.0);
    Ok(Director::from_raw(two * pq.re / s, two * pq.im / s, (a - b) / s))
}

/// The base bimeron map `w_*(z) = i (z − 1) / (z + 1)`: vortex at 1, pole at −1.
pub fn w_star<T: Real>(z: Complex<T>) -> ComplexPair<T> {
    let one = Complex::new(T::one(), T::zero());
    ComplexPair { p: Complex::<T>::i() * (z - one), q: z + one }
}

/// Möbius action of the rotation `R_{e₁, 2β}` on the Riemann sphere.
pub fn rotate_e1_pair<T: Real>(w: ComplexPair<T>, beta: T) -> ComplexPair<T> {
    let (s, c) = beta.sin_cos();
    let cc = Complex::new(c, T::zero());
    let is = Complex::new(T::zero(), s);
    w.transform(cc, is, is, cc)
}

/// `w^{[α, β]}(z)`: the β-rotated base map evaluated at `e^{−iα} z`.
pub fn w_alpha_beta<T: Real>(z: Complex<T>, alpha: T, beta: T) -> ComplexPair<T> {
    let zeta = z * Complex::from_polar(T::one(), -alpha);
    rotate_e1_pair(w_star(zeta), beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn stereographic_reference_points() {
        let d = stereographic(ComplexPair::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap()).unwrap();
        assert_eq!(d.to_array(), [0.0, 0.0, -1.0]);
        let d = stereographic(ComplexPair::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap()).unwrap();
        assert_eq!(d.to_array(), [1.0, 0.0, 0.0]);
        let d = stereographic(ComplexPair::<f64>::infinity()).unwrap();
        assert_eq!(d.to_array(), [0.0, 0.0, 1.0]);
        assert_eq!(ComplexPair::new(c(0.0, 0.0), c(0.0, 0.0)), Err(Error::ZeroPair));
    }

    #[test]
    fn stereographic_matches_affine_formula() {
        let z = c(0.3, -1.7);
        let r2 = z.norm_sqr();
        let d = stereographic(ComplexPair::finite(z)).unwrap();
        let expect = [2.0 * z.re / (1.0 + r2), 2.0 * z.im / (1.0 + r2), (r2 - 1.0) / (1.0 + r2)];
        for (a, b) in d.to_array().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn w_star_reference_points() {
        assert_eq!(w_star(c(1.0, 0.0)).value(), Some(c(0.0, 0.0)));
        let w = w_star(c(0.0, 0.0)).value().unwrap();
        assert!((w - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(w_star(c(-1.0, 0.0)).q, c(0.0, 0.0));
        assert_eq!(w_star(c(-1.0, 0.0)).value(), None);
        let d = stereographic(w_star(c(-1.0, 0.0))).unwrap();
        assert_eq!(d.to_array(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn stereographic_is_stable_near_the_pole_and_far_away() {
        for z in [c(-1.0, 0.0), c(-1.0 + 1e-300, 0.0), c(1e300, -1e300), c(-1.0, 1e-12)] {
            let d = stereographic(w_star(z)).unwrap();
            assert!(d.x.is_finite() && d.y.is_finite() && d.z.is_finite());
            assert!((d.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_beta_gives_rotated_identity() {
        for &(re, im, alpha) in &[(0.3, 0.8, 0.0), (-2.0, 0.1, 1.1), (5.0, -3.0, -2.5)] {
            let z = c(re, im);
            let w = w_alpha_beta(z, alpha, FRAC_PI_4).value().unwrap();
            let expect = Complex::from_polar(1.0, FRAC_PI_2 - alpha) * z;
            assert!((w - expect).norm() < 1e-12 * (1.0 + z.norm()));
        }
        let z = c(0.4, -0.9);
        let w = w_alpha_beta(z, FRAC_PI_2, FRAC_PI_4).value().unwrap();
        assert!((w - z).norm() < 1e-14);
        assert_eq!(w_alpha_beta(c(1.0, 0.0), 0.0, 0.0).value(), Some(c(0.0, 0.0)));
    }

    #[test]
    fn pair_rotation_matches_vector_rotation() {
        for &(re, im, beta) in &[(0.0, 0.0, 0.3), (1.5, -0.2, -0.7), (-0.4, 2.0, 1.9)] {
            let w = ComplexPair::finite(c(re, im));
            let lhs = stereographic(rotate_e1_pair(w, beta)).unwrap();
            let rhs = stereographic(w).unwrap().rotate_e1(2.0 * beta);
            assert!(lhs.max_abs_diff(rhs) < 1e-14);
        }
    }
}
