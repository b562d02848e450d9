use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform node-centred grid on the square `[−R, R]²` with `n` points per side.
///
/// Nodes are stored row-major: index `j * n + i` is the point
/// `(−R + i h, −R + j h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub half_width: T,
    pub points_per_side: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(half_width: T, points_per_side: usize) -> Result<Self> {
        if points_per_side < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points per side, got {points_per_side}"
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        Ok(Self { half_width, points_per_side })
    }

    /// Smallest odd grid of the given half-width whose spacing does not exceed `h_max`.
    pub fn with_max_spacing(half_width: T, h_max: T) -> Result<Self> {
        if !(h_max > T::zero()) {
            return Err(Error::InvalidGrid("spacing must be positive".into()));
        }
        let cells = (T::lit(2.0) * half_width / h_max - T::lit(1e-9)).ceil().to_usize().unwrap_or(2).max(2);
        let cells = cells + cells % 2;
        Self::new(half_width, cells + 1)
    }

    /// Like [`GridSpec::with_max_spacing`], with the cell count rounded up to
    /// an even number whose prime factors are at most 7, so that spectral
    /// transforms over the grid stay fast.
    pub fn with_max_spacing_smooth(half_width: T, h_max: T) -> Result<Self> {
        let base = Self::with_max_spacing(half_width, h_max)?;
        let mut cells = base.points_per_side - 1;
        while !is_smooth(cells) {
            cells += 2;
        }
        Self::new(half_width, cells + 1)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.points_per_side
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points_per_side * self.points_per_side
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_width / T::from_usize_lossy(self.points_per_side - 1)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + T::from_usize_lossy(i) * self.spacing()
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Complex<T> {
        Complex::new(self.coord(i), self.coord(j))
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.points_per_side + i
    }

    /// Fractional index coordinates of a point of the plane.
    pub fn locate(&self, z: Complex<T>) -> (T, T) {
        let h = self.spacing();
        ((z.re + self.half_width) / h, (z.im + self.half_width) / h)
    }

    pub fn cell_area(&self) -> T {
        let h = self.spacing();
        h * h
    }
}

fn is_smooth(mut k: usize) -> bool {
    for p in [2, 3, 5, 7] {
        while k % p == 0 {
            k /= p;
        }
    }
    k == 1
}
