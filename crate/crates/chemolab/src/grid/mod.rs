//! Cell-centered finite-volume geometry on 1D intervals and 2D boxes.
//!
//! Cells are uniform and unknowns live at cell centers. Zero-flux
//! (reflecting) boundaries are built into every operator: a boundary face
//! simply carries no flux. That choice makes the flux-divergence operators
//! exactly conservative and the Laplacian symmetric negative semidefinite.

pub mod io;
mod ops;

pub use ops::{
    chemotaxis_flux_divergence, diffusion_flux_divergence, gradient_magnitude, integrate,
    laplacian_neumann,
};
pub(crate) use ops::{half_pow, transport_divergence};

use thiserror::Error;

/// Minimum cells per axis; coarser grids cannot resolve a flux divergence.
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {MIN_CELLS} cells per axis, got {0}")]
    TooCoarse(usize),
    #[error("extent must be positive and finite, got {0}")]
    BadExtent(f64),
    #[error("field has {got} values but the grid has {want} cells")]
    LengthMismatch { got: usize, want: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("negative base {value:e} with fractional exponent {exponent} at cell {cell}")]
    NegativeBase { value: f64, exponent: f64, cell: usize },
    #[error("binary field dump: {0}")]
    BadDump(String),
}

/// Uniform structured grid. 1D grids are stored as a single row of cells
/// with unit transverse extent, so `cell_measure` and `measure` are plain
/// lengths in that case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dims: u8,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    hx: f64,
    hy: f64,
}

impl Grid {
    /// 1D interval [0, extent] split into `cells` uniform cells.
    pub fn line(extent: f64, cells: usize) -> Result<Self, GridError> {
        check_axis(extent, cells)?;
        Ok(Grid {
            dims: 1,
            nx: cells,
            ny: 1,
            lx: extent,
            ly: 1.0,
            hx: extent / cells as f64,
            hy: 1.0,
        })
    }

    /// 2D box [0, ex] x [0, ey] with `cx` x `cy` uniform cells.
    pub fn rect(extents: (f64, f64), cells: (usize, usize)) -> Result<Self, GridError> {
        check_axis(extents.0, cells.0)?;
        check_axis(extents.1, cells.1)?;
        Ok(Grid {
            dims: 2,
            nx: cells.0,
            ny: cells.1,
            lx: extents.0,
            ly: extents.1,
            hx: extents.0 / cells.0 as f64,
            hy: extents.1 / cells.1 as f64,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims as usize
    }

    /// Cells per axis; `(nx, 1)` in 1D.
    pub fn cells(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn extents(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.hx, self.hy)
    }

    pub fn min_spacing(&self) -> f64 {
        if self.dims == 1 {
            self.hx
        } else {
            self.hx.min(self.hy)
        }
    }

    pub fn cell_measure(&self) -> f64 {
        self.hx * self.hy
    }

    /// Total measure of the domain (length in 1D, area in 2D).
    pub fn measure(&self) -> f64 {
        self.lx * self.ly
    }

    /// Row-major cell index.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Center coordinates of cell (i, j); the y coordinate is 0.5 in 1D.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx, (j as f64 + 0.5) * self.hy)
    }
}

fn check_axis(extent: f64, cells: usize) -> Result<(), GridError> {
    if cells < MIN_CELLS {
        return Err(GridError::TooCoarse(cells));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return Err(GridError::BadExtent(extent));
    }
    Ok(())
}

/// Scalar field of cell averages.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.num_cells()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Field::constant(grid, 0.0)
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.num_cells() {
            return Err(GridError::LengthMismatch {
                got: values.len(),
                want: grid.num_cells(),
            });
        }
        Ok(Field { grid, values })
    }

    /// Sample `f(x, y)` at cell centers.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.num_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                values.push(f(x, y));
            }
        }
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Compensated (Neumaier) sum; keeps quadrature and conservation checks at
/// machine accuracy independently of cell count.
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_grid_geometry() {
        let g = Grid::line(2.0, 8).expect("grid");
        assert_eq!(g.dims(), 1);
        assert_eq!(g.num_cells(), 8);
        assert_eq!(g.spacing().0, 0.25);
        assert_eq!(g.cell_measure(), 0.25);
        assert_eq!(g.measure(), 2.0);
        assert_eq!(g.center(0, 0).0, 0.125);
    }

    #[test]
    fn rect_grid_geometry() {
        let g = Grid::rect((1.0, 2.0), (4, 8)).expect("grid");
        assert_eq!(g.dims(), 2);
        assert_eq!(g.num_cells(), 32);
        assert_eq!(g.measure(), 2.0);
        assert_eq!(g.cell_measure(), 0.25 * 0.25);
        assert_eq!(g.idx(3, 1), 7);
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert_eq!(Grid::line(1.0, 3).unwrap_err(), GridError::TooCoarse(3));
        assert_eq!(Grid::line(0.0, 8).unwrap_err(), GridError::BadExtent(0.0));
        assert!(Grid::rect((1.0, -1.0), (4, 4)).is_err());
    }

    #[test]
    fn field_length_checked() {
        let g = Grid::line(1.0, 4).expect("grid");
        assert!(Field::from_values(g, vec![0.0; 4]).is_ok());
        assert_eq!(
            Field::from_values(g, vec![0.0; 5]).unwrap_err(),
            GridError::LengthMismatch { got: 5, want: 4 }
        );
    }
}
