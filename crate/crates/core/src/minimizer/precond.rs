//! Spectral solver for `(μ − Δ_h) p = r` on the node grid.
//!
//! With free boundaries the five-point Neumann Laplacian is diagonalized by
//! the type-I cosine transform; with pinned boundaries only the interior is
//! solved, using the type-I sine transform. Both operators are symmetric in
//! the trapezoid inner product, so the preconditioned gradient stays a
//! descent direction.

use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{Dct1, DctPlanner, Dst1};

use crate::field::Director;
use crate::reduce::install;
use crate::scalar::Real;

enum Transform<T: Real> {
    Cosine(Arc<dyn Dct1<T>>),
    Sine(Arc<dyn Dst1<T>>),
}

impl<T: Real> Transform<T> {
    fn apply(&self, buf: &mut [T]) {
        match self {
            Transform::Cosine(t) => t.process_dct1(buf),
            Transform::Sine(t) => t.process_dst1(buf),
        }
    }
}

/// Shifted Laplacian inverse on an `n × n` node grid of spacing `h`.
pub struct SobolevSolver<T: Real> {
    n: usize,
    /// Side of the transformed block: `n` for free, `n − 2` for pinned.
    m: usize,
    offset: usize,
    transform: Transform<T>,
    /// `1 / (μ + λ_a + λ_b)` scaled by the transform normalization, row-major over the block.
    inverse: Vec<T>,
}

impl<T: Real> SobolevSolver<T> {
    pub fn new(n: usize, h: T, shift: T, pinned: bool) -> Self {
        let mut planner = DctPlanner::new();
        let (m, offset, transform) = if pinned {
            (n - 2, 1, Transform::Sine(planner.plan_dst1(n - 2)))
        } else {
            (n, 0, Transform::Cosine(planner.plan_dct1(n)))
        };
        let cells = T::from_usize_lossy(n - 1);
        let two = T::lit(2.0);
        let eig: Vec<T> = (0..m)
            .map(|k| {
                let mode = T::from_usize_lossy(k + offset);
                (two - two * (T::PI() * mode / cells).cos()) / (h * h)
            })
            .collect();
        // each 1-D transform applied twice multiplies by (n − 1)/2
        let norm = (two / cells) * (two / cells);
        let mut inverse = Vec::with_capacity(m * m);
        for b in 0..m {
            for a in 0..m {
                inverse.push(norm / (shift + eig[a] + eig[b]));
            }
        }
        Self { n, m, offset, transform, inverse }
    }

    fn transform_2d(&self, block: &mut [T], scratch: &mut [T]) {
        let m = self.m;
        install(|| block.par_chunks_mut(m).for_each(|row| self.transform.apply(row)));
        transpose(block, scratch, m);
        install(|| scratch.par_chunks_mut(m).for_each(|row| self.transform.apply(row)));
        transpose(scratch, block, m);
    }

    /// Solves componentwise; nodes outside the solved block get zero.
    pub fn solve(&self, rhs: &[Director<T>]) -> Vec<Director<T>> {
        let (n, m, o) = (self.n, self.m, self.offset);
        let mut out = vec![Director::from_raw(T::zero(), T::zero(), T::zero()); n * n];
        let mut block = vec![T::zero(); m * m];
        let mut scratch = vec![T::zero(); m * m];
        for comp in 0..3 {
            for b in 0..m {
                for a in 0..m {
                    block[b * m + a] = rhs[(b + o) * n + a + o].to_array()[comp];
                }
            }
            self.transform_2d(&mut block, &mut scratch);
            for (v, &s) in block.iter_mut().zip(&self.inverse) {
                *v *= s;
            }
            self.transform_2d(&mut block, &mut scratch);
            for b in 0..m {
                for a in 0..m {
                    let v = block[b * m + a];
                    let d = &mut out[(b + o) * n + a + o];
                    match comp {
                        0 => d.x = v,
                        1 => d.y = v,
                        _ => d.z = v,
                    }
                }
            }
        }
        out
    }
}

fn transpose<T: Copy>(src: &[T], dst: &mut [T], m: usize) {
    const TILE: usize = 32;
    for bj in (0..m).step_by(TILE) {
        for bi in (0..m).step_by(TILE) {
            for j in bj..(bj + TILE).min(m) {
                for i in bi..(bi + TILE).min(m) {
                    dst[i * m + j] = src[j * m + i];
                }
            }
        }
    }
}
