use num_complex::Complex;
use rayon::prelude::*;

use super::director::Director;
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::reduce::install;
use crate::scalar::Real;

/// Tolerance on `||m| − 1|` accepted when adopting externally produced values.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// An S²-valued field sampled at the nodes of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: GridSpec<T>,
    values: Vec<Director<T>>,
}

impl<T: Real> Field<T> {
    /// Adopts row-major values, checking length and unit norm.
    pub fn from_values(grid: GridSpec<T>, values: Vec<Director<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let tol = T::lit(UNIT_NORM_TOL);
        if let Some(k) = values.iter().position(|d| (d.norm_sqr().sqrt() - T::one()).abs() > tol) {
            return Err(Error::InvalidParameter(format!("value {k} is not a unit vector")));
        }
        Ok(Self { grid, values })
    }

    /// Projects arbitrary non-zero vectors onto the sphere.
    pub fn from_vectors(grid: GridSpec<T>, values: Vec<Director<T>>) -> Result<Self> {
        let values = values
            .into_iter()
            .enumerate()
            .map(|(k, d)| {
                Director::normalized(d.x, d.y, d.z)
                    .ok_or_else(|| Error::InvalidParameter(format!("value {k} is zero")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(grid, values)
    }

    pub(crate) fn from_unit_unchecked(grid: GridSpec<T>, values: Vec<Director<T>>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec<T>, value: Director<T>) -> Self {
        Self { grid, values: vec![value.renormalize(); grid.len()] }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Director<T>] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Director<T> {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, j: usize) -> &[Director<T>] {
        let n = self.grid.n();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn into_values(self) -> Vec<Director<T>> {
        self.values
    }

    /// Largest deviation of `|m|` from one over all nodes.
    pub fn max_norm_defect(&self) -> T {
        self.values
            .iter()
            .map(|d| (d.norm_sqr().sqrt() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    /// Largest componentwise difference between two fields on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.max_abs_diff(*b))
            .fold(T::zero(), T::max)
    }

    /// Bilinear interpolation followed by renormalization; points outside the
    /// square are clamped to its boundary.
    pub fn interpolate(&self, z: Complex<T>) -> Director<T> {
        let n = self.grid.n();
        let last = T::from_usize_lossy(n - 1);
        let (u, v) = self.grid.locate(z);
        let u = u.max(T::zero()).min(last);
        let v = v.max(T::zero()).min(last);
        let i0 = u.floor().to_usize().unwrap_or(0).min(n - 2);
        let j0 = v.floor().to_usize().unwrap_or(0).min(n - 2);
        let fu = u - T::from_usize_lossy(i0);
        let fv = v - T::from_usize_lossy(j0);
        if fu == T::zero() && fv == T::zero() {
            return self.at(i0, j0);
        }
        let one = T::one();
        let a = self.at(i0, j0) * ((one - fu) * (one - fv));
        let b = self.at(i0 + 1, j0) * (fu * (one - fv));
        let c = self.at(i0, j0 + 1) * ((one - fu) * fv);
        let d = self.at(i0 + 1, j0 + 1) * (fu * fv);
        let s = a + b + c + d;
        Director::normalized(s.x, s.y, s.z).unwrap_or_else(|| self.at(i0, j0))
    }
}

/// Evaluates `map` at every node, renormalizing to correct rounding.
pub fn sample<T, F>(map: F, grid: GridSpec<T>) -> Field<T>
where
    T: Real,
    F: Fn(Complex<T>) -> Director<T> + Sync,
{
    let n = grid.n();
    let rows: Vec<Vec<Director<T>>> = install(|| {
        (0..n)
            .into_par_iter()
            .map(|j| (0..n).map(|i| map(grid.point(i, j)).renormalize()).collect())
            .collect()
    });
    Field::from_unit_unchecked(grid, rows.concat())
}
