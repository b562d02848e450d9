//! Translations, dilations, corotations and the reflection `m ↦ −m`.

use num_complex::Complex;
use rayon::prelude::*;

use super::director::Director;
use super::sampled::Field;
use crate::reduce::install;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symmetry<T> {
    /// `𝔗_{x₀} m(x) = m(x − x₀)`
    Translation(Complex<T>),
    /// `𝔇_ρ m(x) = m(x / ρ)`
    Dilation(T),
    /// `ℜ_φ m(x) = R_{e₃,φ} m(e^{−iφ} x)`
    Corotation(T),
    /// `m ↦ −m`
    Reflection,
}

impl<T: Real> Symmetry<T> {
    /// Where the transformed field at `z` reads the original, and the
    /// rotation then applied to the value.
    fn pullback(&self, z: Complex<T>) -> (Complex<T>, T) {
        match *self {
            Symmetry::Translation(x0) => (z - x0, T::zero()),
            Symmetry::Dilation(rho) => (z / rho, T::zero()),
            Symmetry::Corotation(phi) => (z * Complex::from_polar(T::one(), -phi), phi),
            Symmetry::Reflection => (z, T::zero()),
        }
    }
}

/// Applies a symmetry to a sampled field on the same grid.
///
/// Source points that land on a node (up to 1e−9 in index units) are read
/// exactly; otherwise the field is bilinearly interpolated and renormalized.
pub fn apply_symmetry<T: Real>(field: &Field<T>, op: Symmetry<T>) -> Field<T> {
    let grid = *field.grid();
    if let Symmetry::Reflection = op {
        let values = field.values().iter().map(|&d| -d).collect();
        return Field::from_unit_unchecked(grid, values);
    }
    let n = grid.n();
    let snap = T::lit(1e-9);
    let last = T::from_usize_lossy(n - 1);
    let rows: Vec<Vec<Director<T>>> = install(|| {
        (0..n)
            .into_par_iter()
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let (src, angle) = op.pullback(grid.point(i, j));
                        let (u, v) = grid.locate(src);
                        let (ru, rv) = (u.round(), v.round());
                        let on_node = (u - ru).abs() < snap
                            && (v - rv).abs() < snap
                            && ru >= T::zero()
                            && rv >= T::zero()
                            && ru <= last
                            && rv <= last;
                        let value = if on_node {
                            field.at(ru.to_usize().unwrap(), rv.to_usize().unwrap())
                        } else {
                            field.interpolate(src)
                        };
                        if angle == T::zero() {
                            value
                        } else {
                            rotate_e3_exact(value, angle)
                        }
                    })
                    .collect()
            })
            .collect()
    });
    Field::from_unit_unchecked(grid, rows.concat())
}

/// Rotation about e₃ that is exact for multiples of π/2.
fn rotate_e3_exact<T: Real>(d: Director<T>, angle: T) -> Director<T> {
    let quarter = angle / T::FRAC_PI_2();
    let k = quarter.round();
    if (quarter - k).abs() < T::lit(1e-12) {
        match k.to_i64().unwrap_or(0).rem_euclid(4) {
            0 => d,
            1 => Director::from_raw(-d.y, d.x, d.z),
            2 => Director::from_raw(-d.x, -d.y, d.z),
            _ => Director::from_raw(d.y, -d.x, d.z),
        }
    } else {
        d.rotate_e3(angle).renormalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, GridSpec, MobiusParams};
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn smooth(g: GridSpec<f64>) -> Field<f64> {
        let p = MobiusParams::new(Complex::new(0.2, -0.1), 0.8, 0.3, 0.5, 0.1).unwrap();
        sample(|z| p.eval(z), g)
    }

    #[test]
    fn reflection_of_constant() {
        let g = GridSpec::new(1.0, 5).unwrap();
        let f = Field::constant(g, Director::e3());
        let r = apply_symmetry(&f, Symmetry::Reflection);
        assert!(r.values().iter().all(|d| *d == -Director::e3()));
    }

    #[test]
    fn full_turn_corotation_is_identity() {
        let g = GridSpec::new(3.0, 31).unwrap();
        let f = smooth(g);
        let r = apply_symmetry(&f, Symmetry::Corotation(TAU));
        assert_eq!(r, f);
    }

    #[test]
    fn quarter_turns_compose_to_identity() {
        let g = GridSpec::new(3.0, 31).unwrap();
        let f = smooth(g);
        let mut r = f.clone();
        for _ in 0..4 {
            r = apply_symmetry(&r, Symmetry::Corotation(FRAC_PI_2));
        }
        assert_eq!(r, f);
    }

    #[test]
    fn aligned_translation_round_trip_on_overlap() {
        let g = GridSpec::new(3.0, 31).unwrap();
        let h = g.spacing();
        let f = smooth(g);
        let shift = Complex::new(3.0 * h, -2.0 * h);
        let back = apply_symmetry(&apply_symmetry(&f, Symmetry::Translation(shift)), Symmetry::Translation(-shift));
        for j in 2..g.n() - 3 {
            for i in 3..g.n() - 4 {
                assert_eq!(back.at(i, j), f.at(i, j));
            }
        }
    }

    #[test]
    fn dilation_matches_analytic_resampling_to_interpolation_accuracy() {
        let g = GridSpec::new(4.0, 161).unwrap();
        let p = MobiusParams::new(Complex::new(0.0, 0.0), 1.0, 0.0, 0.0, 0.0).unwrap();
        let f = sample(|z| p.eval(z), g);
        let d = apply_symmetry(&f, Symmetry::Dilation(1.5));
        let exact = sample(|z| p.eval(z / 1.5), g);
        assert!(d.max_abs_diff(&exact) < 5e-3);
    }
}
