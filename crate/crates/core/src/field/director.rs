use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Real;

/// A point of the unit sphere S², the value of a magnetization field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Director<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Director<T> {
    pub const fn from_raw(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// Normalizes `(x, y, z)` onto the sphere. Returns `None` for the zero vector.
    pub fn normalized(x: T, y: T, z: T) -> Option<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n > T::zero() && n.is_finite() {
            Some(Self::from_raw(x / n, y / n, z / n))
        } else {
            None
        }
    }

    pub fn e1() -> Self {
        Self::from_raw(T::one(), T::zero(), T::zero())
    }

    pub fn e2() -> Self {
        Self::from_raw(T::zero(), T::one(), T::zero())
    }

    pub fn e3() -> Self {
        Self::from_raw(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::from_raw(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sqr(self) -> T {
        self.dot(self)
    }

    pub fn renormalize(self) -> Self {
        Self::normalized(self.x, self.y, self.z).unwrap_or(self)
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::from_raw(a[0], a[1], a[2])
    }

    /// Rotation about e₁ by `angle`.
    pub fn rotate_e1(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_raw(self.x, c * self.y - s * self.z, s * self.y + c * self.z)
    }

    /// Rotation about e₃ by `angle`.
    pub fn rotate_e3(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_raw(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn max_abs_diff(self, o: Self) -> T {
        (self.x - o.x).abs().max((self.y - o.y).abs()).max((self.z - o.z).abs())
    }
}

impl<T: Real> Neg for Director<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_raw(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Add for Director<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::from_raw(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Director<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::from_raw(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Director<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::from_raw(self.x * s, self.y * s, self.z * s)
    }
}
