//! Quadrature weights for node and edge-midpoint samples.
//!
//! Every sample owns a rectangular dual cell; its weight is the area of that
//! cell intersected with the grid square and with the integration region.
//! On the full square this reproduces the trapezoid weights for nodes and
//! the midpoint weights for edge centres.

use num_complex::Complex;

use crate::field::GridSpec;
use crate::scalar::Real;

/// Integration region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region<T> {
    /// The whole grid square.
    Square,
    /// The disc `|z − center| ≤ radius` intersected with the square.
    Disc { center: Complex<T>, radius: T },
}

impl<T: Real> Region<T> {
    pub fn disc(radius: T) -> Self {
        Region::Disc { center: Complex::new(T::zero(), T::zero()), radius }
    }
}

/// Area of `[x0, x1] × [y0, y1] ∩ B_R(0)`.
pub fn rect_disc_area<T: Real>(x0: T, x1: T, y0: T, y1: T, radius: T) -> T {
    if x1 <= x0 || y1 <= y0 {
        return T::zero();
    }
    let corner = |x: T, y: T| quadrant_area(x, y, radius);
    corner(x1, y1) - corner(x0, y1) - corner(x1, y0) + corner(x0, y0)
}

/// Signed area of the rectangle spanned by the origin and `(x, y)` inside the disc.
fn quadrant_area<T: Real>(x: T, y: T, r: T) -> T {
    let sign = x.signum() * y.signum();
    let x = x.abs().min(r);
    let y = y.abs().min(r);
    if x == T::zero() || y == T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let sector = |t: T| half * (t * (r * r - t * t).max(T::zero()).sqrt() + r * r * (t / r).min(T::one()).asin());
    let area = if x * x + y * y <= r * r {
        x * y
    } else {
        let t = (r * r - y * y).max(T::zero()).sqrt();
        y * t + sector(x) - sector(t)
    };
    sign * area
}

/// Weights of one grid and region.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    grid: GridSpec<T>,
    region: Region<T>,
    h: T,
    /// Trapezoid factor of each index along one axis (h or h/2).
    edge: Vec<T>,
}

impl<T: Real> Quadrature<T> {
    pub fn new(grid: GridSpec<T>, region: Region<T>) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut edge = vec![h; n];
        edge[0] = h * T::lit(0.5);
        edge[n - 1] = h * T::lit(0.5);
        Self { grid, region, h, edge }
    }

    pub fn square(grid: GridSpec<T>) -> Self {
        Self::new(grid, Region::Square)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn region(&self) -> &Region<T> {
        &self.region
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.h
    }

    fn clipped(&self, x0: T, x1: T, y0: T, y1: T) -> T {
        let r = self.grid.half_width;
        let (x0, x1, y0, y1) = (x0.max(-r), x1.min(r), y0.max(-r), y1.min(r));
        match self.region {
            Region::Square => (x1 - x0).max(T::zero()) * (y1 - y0).max(T::zero()),
            Region::Disc { center, radius } => {
                let (x0, x1, y0, y1) = (x0 - center.re, x1 - center.re, y0 - center.im, y1 - center.im);
                let far_x = x0.abs().max(x1.abs());
                let far_y = y0.abs().max(y1.abs());
                if far_x * far_x + far_y * far_y <= radius * radius {
                    return (x1 - x0).max(T::zero()) * (y1 - y0).max(T::zero());
                }
                let near = |a: T, b: T| if a > T::zero() { a } else if b < T::zero() { -b } else { T::zero() };
                let (nx, ny) = (near(x0, x1), near(y0, y1));
                if nx * nx + ny * ny >= radius * radius {
                    return T::zero();
                }
                rect_disc_area(x0, x1, y0, y1, radius)
            }
        }
    }

    /// Weight of node `(i, j)`.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> T {
        match self.region {
            Region::Square => self.edge[i] * self.edge[j],
            Region::Disc { .. } => {
                let half = self.h * T::lit(0.5);
                let (x, y) = (self.grid.coord(i), self.grid.coord(j));
                self.clipped(x - half, x + half, y - half, y + half)
            }
        }
    }

    /// Weight of the midpoint between nodes `(i, j)` and `(i + s, j)`.
    #[inline]
    pub fn x_pair(&self, i: usize, j: usize, s: usize) -> T {
        match self.region {
            Region::Square => self.h * self.edge[j],
            Region::Disc { .. } => self.pair_rect(i, j, s, true),
        }
    }

    /// Weight of the midpoint between nodes `(i, j)` and `(i, j + s)`.
    #[inline]
    pub fn y_pair(&self, i: usize, j: usize, s: usize) -> T {
        match self.region {
            Region::Square => self.h * self.edge[i],
            Region::Disc { .. } => self.pair_rect(i, j, s, false),
        }
    }

    fn pair_rect(&self, i: usize, j: usize, s: usize, along_x: bool) -> T {
        let half = self.h * T::lit(0.5);
        let offset = self.h * T::from_usize_lossy(s) * T::lit(0.5);
        let (mut cx, mut cy) = (self.grid.coord(i), self.grid.coord(j));
        if along_x {
            cx += offset;
        } else {
            cy += offset;
        }
        self.clipped(cx - half, cx + half, cy - half, cy + half)
    }

    /// True when every weight touching row `j` vanishes, so it can be skipped.
    pub fn row_is_empty(&self, j: usize) -> bool {
        match self.region {
            Region::Square => false,
            Region::Disc { center, radius } => {
                let y = self.grid.coord(j);
                let reach = self.h * T::lit(2.5);
                (y - center.im).abs() > radius + reach
            }
        }
    }
}
