//! Edge-pair difference stencil shared by every energy term and the gradient.
//!
//! Each term is a weighted sum over node pairs `(a, b)` a distance `s·h`
//! apart along one axis. Mixing the spacings `s = 1, 2, 3` with the
//! Richardson weights below cancels the `h²` and `h⁴` error terms of the
//! plain midpoint rule, which matters because the physically relevant
//! energy differences are `O(σ²)` while the Dirichlet term is `O(1)`.

use crate::field::Director;
use crate::scalar::Real;

use super::quadrature::Quadrature;

/// `(spacing, weight)`; the weights sum to one.
pub const STENCIL: [(usize, f64); 3] = [(1, 1.5), (2, -0.6), (3, 0.1)];

/// Per-row partial sums `[D, A, H̃, H]` over the pairs whose first node lies
/// in row `j` and the nodes of row `j`.
pub(crate) fn row_parts<T: Real>(m: &[Director<T>], q: &Quadrature<T>, j: usize) -> [T; 4] {
    let n = q.grid().n();
    let h = q.spacing();
    let half = T::lit(0.5);
    let (mut d, mut a, mut ht, mut hc) = (T::zero(), T::zero(), T::zero(), T::zero());
    if q.row_is_empty(j) {
        return [d; 4];
    }
    let row = &m[j * n..(j + 1) * n];
    for &(s, c) in STENCIL.iter() {
        let c = T::lit(c);
        let l = h * T::from_usize_lossy(s);
        let inv_l = l.recip();
        let inv_l2 = inv_l * inv_l;
        for i in 0..n - s {
            let w = c * q.x_pair(i, j, s);
            if w == T::zero() {
                continue;
            }
            let (p, r) = (row[i], row[i + s]);
            let e = r - p;
            let mid = (p + r) * half;
            d += w * half * e.norm_sqr() * inv_l2;
            ht += w * (p.z + r.z) * e.y * inv_l;
            hc += w * (mid.z * e.y - mid.y * e.z) * inv_l;
        }
        if j + s < n {
            let next = &m[(j + s) * n..(j + s + 1) * n];
            for i in 0..n {
                let w = c * q.y_pair(i, j, s);
                if w == T::zero() {
                    continue;
                }
                let (p, r) = (row[i], next[i]);
                let e = r - p;
                let mid = (p + r) * half;
                d += w * half * e.norm_sqr() * inv_l2;
                ht -= w * (p.z + r.z) * e.x * inv_l;
                hc += w * (mid.x * e.z - mid.z * e.x) * inv_l;
            }
        }
    }
    for (i, v) in row.iter().enumerate() {
        let w = q.node(i, j);
        a += w * v.z * v.z;
    }
    [d, a, ht, hc]
}

/// Euclidean gradient of `D + σ²(A + H̃)` with respect to node `(i, j)`.
pub(crate) fn node_gradient<T: Real>(
    m: &[Director<T>],
    q: &Quadrature<T>,
    sigma2: T,
    i: usize,
    j: usize,
) -> Director<T> {
    let n = q.grid().n();
    let h = q.spacing();
    let k = j * n + i;
    let me = m[k];
    let mut g = Director::from_raw(T::zero(), T::zero(), T::zero());
    for &(s, c) in STENCIL.iter() {
        let c = T::lit(c);
        let l = h * T::from_usize_lossy(s);
        let inv_l = l.recip();
        let inv_l2 = inv_l * inv_l;
        if i >= s {
            let w = c * q.x_pair(i - s, j, s);
            let p = m[k - s];
            let f = sigma2 * w * inv_l;
            g = g + (me - p) * (w * inv_l2);
            g.z += f * (me.y - p.y);
            g.y += f * (p.z + me.z);
        }
        if i + s < n {
            let w = c * q.x_pair(i, j, s);
            let r = m[k + s];
            let f = sigma2 * w * inv_l;
            g = g - (r - me) * (w * inv_l2);
            g.z += f * (r.y - me.y);
            g.y -= f * (me.z + r.z);
        }
        if j >= s {
            let w = c * q.y_pair(i, j - s, s);
            let p = m[k - s * n];
            let f = sigma2 * w * inv_l;
            g = g + (me - p) * (w * inv_l2);
            g.z -= f * (me.x - p.x);
            g.x -= f * (p.z + me.z);
        }
        if j + s < n {
            let w = c * q.y_pair(i, j, s);
            let r = m[k + s * n];
            let f = sigma2 * w * inv_l;
            g = g - (r - me) * (w * inv_l2);
            g.z -= f * (r.x - me.x);
            g.x += f * (me.z + r.z);
        }
    }
    g.z += T::lit(2.0) * sigma2 * q.node(i, j) * me.z;
    g
}

/// Per-row partial of the convex rewriting
/// `½(∂₁m₂ + 2σ²m₃)² + ½(∂₂m₁ − 2σ²m₃)² + ½|∂₁m₁|² + …  + σ²(1 − 4σ²)m₃²`,
/// with `m₃` averaged over each pair.
pub(crate) fn row_convex<T: Real>(m: &[Director<T>], q: &Quadrature<T>, sigma2: T, j: usize) -> T {
    let n = q.grid().n();
    let h = q.spacing();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut acc = T::zero();
    if q.row_is_empty(j) {
        return acc;
    }
    let row = &m[j * n..(j + 1) * n];
    for &(s, c) in STENCIL.iter() {
        let c = T::lit(c);
        let inv_l = (h * T::from_usize_lossy(s)).recip();
        for i in 0..n - s {
            let w = c * q.x_pair(i, j, s);
            let (p, r) = (row[i], row[i + s]);
            let e = (r - p) * inv_l;
            let m3 = (p.z + r.z) * half;
            let sq = e.y + two * sigma2 * m3;
            acc += w * (half * (sq * sq + e.x * e.x + e.z * e.z) - two * sigma2 * sigma2 * m3 * m3);
        }
        if j + s < n {
            let next = &m[(j + s) * n..(j + s + 1) * n];
            for i in 0..n {
                let w = c * q.y_pair(i, j, s);
                let (p, r) = (row[i], next[i]);
                let e = (r - p) * inv_l;
                let m3 = (p.z + r.z) * half;
                let sq = e.x - two * sigma2 * m3;
                acc += w * (half * (sq * sq + e.y * e.y + e.z * e.z) - two * sigma2 * sigma2 * m3 * m3);
            }
        }
    }
    for (i, v) in row.iter().enumerate() {
        acc += sigma2 * q.node(i, j) * v.z * v.z;
    }
    acc
}

/// `½∫|∇v|²` for arbitrary vectors on a `width × height` block of nodes with
/// spacing `h`, with trapezoid weights on the block edges.
pub(crate) fn block_dirichlet<T: Real>(v: &[Director<T>], width: usize, height: usize, h: T) -> T {
    use crate::reduce::sum_rows;
    let half = T::lit(0.5);
    let trap = |k: usize, len: usize| if k == 0 || k + 1 == len { h * half } else { h };
    sum_rows(height, |j| {
        let row = &v[j * width..(j + 1) * width];
        let mut acc = T::zero();
        for &(s, c) in STENCIL.iter() {
            let c = T::lit(c);
            let l = h * T::from_usize_lossy(s);
            let inv_l2 = (l * l).recip();
            if s < width {
                let w = c * h * trap(j, height);
                for i in 0..width - s {
                    acc += w * half * (row[i + s] - row[i]).norm_sqr() * inv_l2;
                }
            }
            if j + s < height {
                let next = &v[(j + s) * width..(j + s + 1) * width];
                for i in 0..width {
                    let w = c * h * trap(i, width);
                    acc += w * half * (next[i] - row[i]).norm_sqr() * inv_l2;
                }
            }
        }
        acc
    })
}
