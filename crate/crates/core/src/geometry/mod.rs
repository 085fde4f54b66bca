//! Lattices, fields and the discrete operators used everywhere else.
//!
//! The plane is replaced by an origin-centred square `[−X, X]²` with an odd
//! number of nodes per axis, so the origin is always a node. Fields are
//! stored row-major: row index `j` runs along `x₂`, column index `i` along
//! `x₁`.

mod damping;
mod data;
mod ops;

pub use damping::{make_damping, smoothstep5, DampingKind, DampingProfile};
pub use data::{make_bump, make_disk, Bump, InitialData};
pub(crate) use ops::neighbours as ops_neighbours;
pub use ops::{
    dirichlet_form, gradient_centered, integrate, integrate_region, laplacian, laplacian_with,
    Boundary, Region,
};

use crate::error::{Error, Result};

/// Uniform square lattice centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    half_extent: f64,
    n: usize,
    dx: f64,
}

impl Grid2D {
    pub fn new(half_extent: f64, n: usize) -> Result<Self> {
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half_extent must be positive, got {half_extent}"
            )));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "node count per axis must be odd and >= 3, got {n}"
            )));
        }
        let dx = 2.0 * half_extent / (n - 1) as f64;
        Ok(Self { half_extent, n, dx })
    }

    /// Smallest odd lattice on `[−X, X]²` whose spacing does not exceed `dx`.
    pub fn with_spacing(half_extent: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {dx}")));
        }
        let half_cells = (half_extent / dx - 1e-9).ceil().max(1.0) as usize;
        Self::new(half_extent, 2 * half_cells + 1)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dx
    }

    /// Index of the origin along either axis.
    #[inline]
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Coordinate of node `i` along an axis. Exact at both ends and at the
    /// origin, and exactly antisymmetric: `coord(n−1−i) == −coord(i)`.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        let m = (self.n - 1) as f64;
        self.half_extent * ((2 * i) as f64 - m) / m
    }

    /// `(x₁, x₂)` of node `(row, col)`.
    #[inline]
    pub fn point(&self, row: usize, col: usize) -> (f64, f64) {
        (self.coord(col), self.coord(row))
    }

    #[inline]
    pub fn radius(&self, row: usize, col: usize) -> f64 {
        let (x, y) = self.point(row, col);
        x.hypot(y)
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    /// Squared distance to the origin in lattice units. Exact integer, so
    /// nodes related by the square's symmetry group compare equal.
    #[inline]
    pub fn radius2_units(&self, row: usize, col: usize) -> i64 {
        let c = self.center() as i64;
        let (a, b) = (row as i64 - c, col as i64 - c);
        a * a + b * b
    }

    /// Node index nearest to coordinate `x` (clamped to the lattice).
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x + self.half_extent) / self.dx).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// One real value per lattice node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..n {
            let y = grid.coord(row);
            for col in 0..n {
                values.push(f(grid.coord(col), y));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.index(row, col)]
    }

    /// Value at the node nearest to `(x₁, x₂)`.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        self.at(self.grid.nearest(y), self.grid.nearest(x))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest `|value|` over nodes with `|x| > radius`.
    pub fn max_abs_outside(&self, radius: f64) -> f64 {
        let g = &self.grid;
        let mut m: f64 = 0.0;
        for row in 0..g.n() {
            for col in 0..g.n() {
                if g.radius(row, col) > radius {
                    m = m.max(self.at(row, col).abs());
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = Grid2D::new(110.0, 881).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.coord(0), -110.0);
        assert_eq!(g.coord(880), 110.0);
        assert_eq!(g.coord(g.center()), 0.0);
        assert_eq!(g.cell_area(), 0.0625);

        let g = Grid2D::new(1.0 / 3.0, 7).unwrap();
        assert_eq!(g.coord(6), 1.0 / 3.0);
        for i in 0..7 {
            assert_eq!(g.coord(6 - i), -g.coord(i));
        }
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid2D::new(1.0, 4).is_err());
        assert!(Grid2D::new(1.0, 1).is_err());
        assert!(Grid2D::new(0.0, 5).is_err());
        assert!(Grid2D::new(f64::NAN, 5).is_err());
    }

    #[test]
    fn with_spacing_rounds_down() {
        let g = Grid2D::with_spacing(3.0, 1.0 / 16.0).unwrap();
        assert_eq!(g.n(), 97);
        assert_eq!(g.dx(), 1.0 / 16.0);
    }
}
