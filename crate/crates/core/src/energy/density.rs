//! Nodal energy density and the pointwise lower bound it satisfies.

use crate::field::{Director, Field};
use crate::reduce::install;
use crate::scalar::Real;

use rayon::prelude::*;

/// Energy density at one node and the bound `(1−2σ)/2·|∇m|² + σ²(1−2σ)·m₃²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalDensity<T> {
    pub density: T,
    pub floor: T,
}

fn derivative<T: Real>(m: &[Director<T>], k: usize, idx: usize, stride: usize, n: usize, h: T) -> Director<T> {
    let two = T::lit(2.0);
    if idx == 0 {
        (m[k + stride] - m[k]) * h.recip()
    } else if idx == n - 1 {
        (m[k] - m[k - stride]) * h.recip()
    } else {
        (m[k + stride] - m[k - stride]) * (two * h).recip()
    }
}

/// Density `½|∇m|² + σ²m₃² + 2σ²m₃(∂₁m₂ − ∂₂m₁)` from nodal differences.
pub fn nodal_density<T: Real>(field: &Field<T>, sigma: T) -> Vec<NodalDensity<T>> {
    let grid = field.grid();
    let n = grid.n();
    let h = grid.spacing();
    let m = field.values();
    let s2 = sigma * sigma;
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    install(|| {
        (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % n, k / n);
                let dx = derivative(m, k, i, 1, n, h);
                let dy = derivative(m, k, j, n, n, h);
                let grad2 = dx.norm_sqr() + dy.norm_sqr();
                let m3 = m[k].z;
                let density = half * grad2 + s2 * m3 * m3 + two * s2 * m3 * (dx.y - dy.x);
                let floor = (T::one() - two * sigma) * (half * grad2 + s2 * m3 * m3);
                NodalDensity { density, floor }
            })
            .collect()
    })
}

/// Largest violation of the pointwise bound; non-positive when it holds everywhere.
pub fn positivity_violation<T: Real>(field: &Field<T>, sigma: T) -> T {
    nodal_density(field, sigma)
        .into_iter()
        .map(|d| d.floor - d.density)
        .fold(T::neg_infinity(), T::max)
}
