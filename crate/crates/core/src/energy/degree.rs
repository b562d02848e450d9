//! Topological degree from oriented spherical triangles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Director, Field};
use crate::reduce::sum_rows;
use crate::scalar::Real;

/// Largest distance from an integer at which a degree is trusted.
pub const DEGREE_TOLERANCE: f64 = 0.1;

/// Raw and rounded degree of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Degree<T> {
    pub raw: T,
    pub value: i64,
}

impl<T: Real> Degree<T> {
    pub fn gap(&self) -> T {
        (self.raw - T::from_i64(self.value).expect("integer degree")).abs()
    }

    pub fn is_reliable(&self) -> bool {
        self.gap() <= T::lit(DEGREE_TOLERANCE)
    }

    /// Fails with [`Error::UnreliableDegree`] when the raw value is too far from an integer.
    pub fn checked(self) -> Result<Self> {
        if self.is_reliable() {
            Ok(self)
        } else {
            Err(Error::UnreliableDegree { raw: self.raw.as_f64(), gap: self.gap().as_f64() })
        }
    }
}

/// Oriented solid angle of the spherical triangle `(a, b, c)`.
#[inline]
pub fn solid_angle<T: Real>(a: Director<T>, b: Director<T>, c: Director<T>) -> T {
    let num = a.dot(b.cross(c));
    let den = T::one() + a.dot(b) + b.dot(c) + c.dot(a);
    T::lit(2.0) * num.atan2(den)
}

/// Degree of the map, splitting every cell into two counter-clockwise triangles.
pub fn degree<T: Real>(field: &Field<T>) -> Degree<T> {
    let n = field.grid().n();
    let m = field.values();
    let total = sum_rows(n - 1, |j| {
        let mut acc = T::zero();
        for i in 0..n - 1 {
            let a = m[j * n + i];
            let b = m[j * n + i + 1];
            let c = m[(j + 1) * n + i + 1];
            let d = m[(j + 1) * n + i];
            acc += solid_angle(a, b, c) + solid_angle(a, c, d);
        }
        acc
    });
    let raw = total / (T::lit(4.0) * T::PI());
    let value = raw.round().to_i64().expect("finite degree");
    Degree { raw, value }
}
