//! Discretized (sigma, b) state on a uniform 1D or 2D grid.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Boundary {
    Periodic,
    Outflow,
}

/// Cell-averaged conserved unknowns on a uniform grid. For 1D fields the
/// second axis has a single cell and `b[1]` is unused (all zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphField {
    pub dim: usize,
    /// hypersurface dimension entering the energy density e = (sigma^2+n)/2;
    /// equals `dim` unless overridden, e.g. to evolve the x-profile of a
    /// y-invariant surface (n = 2) on a 1D grid
    pub n: usize,
    pub cells: [usize; 2],
    pub spacing: [f64; 2],
    pub boundary: Boundary,
    pub sigma: Vec<f64>,
    pub b: [Vec<f64>; 2],
}

impl GraphField {
    pub fn new(
        dim: usize,
        cells: [usize; 2],
        spacing: [f64; 2],
        boundary: Boundary,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidInput(format!("dim must be 1 or 2, got {dim}")));
        }
        let cells = if dim == 1 { [cells[0], 1] } else { cells };
        for axis in 0..dim {
            if cells[axis] < 8 {
                return Err(Error::InvalidInput(format!(
                    "axis {axis}: need at least 8 cells, got {}",
                    cells[axis]
                )));
            }
            if !(spacing[axis] > 0.0) || !spacing[axis].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "axis {axis}: spacing must be positive and finite"
                )));
            }
        }
        let total = cells[0] * cells[1];
        Ok(Self {
            dim,
            n: dim,
            cells,
            spacing,
            boundary,
            sigma: vec![0.0; total],
            b: [vec![0.0; total], vec![0.0; total]],
        })
    }

    /// Uniform 1D grid on [0, length) filled from cell-center samples.
    pub fn from_profile_1d(
        cells: usize,
        length: f64,
        boundary: Boundary,
        mut f: impl FnMut(f64) -> (f64, f64),
    ) -> Result<Self> {
        let mut field = Self::new(1, [cells, 1], [length / cells as f64, 1.0], boundary)?;
        for i in 0..cells {
            let x = (i as f64 + 0.5) * field.spacing[0];
            let (s, b) = f(x);
            field.sigma[i] = s;
            field.b[0][i] = b;
        }
        Ok(field)
    }

    /// Uniform 2D grid on [0, lx) x [0, ly) filled from cell-center samples.
    pub fn from_profile_2d(
        cells: [usize; 2],
        lengths: [f64; 2],
        boundary: Boundary,
        mut f: impl FnMut(f64, f64) -> (f64, f64, f64),
    ) -> Result<Self> {
        let spacing = [lengths[0] / cells[0] as f64, lengths[1] / cells[1] as f64];
        let mut field = Self::new(2, cells, spacing, boundary)?;
        for iy in 0..cells[1] {
            for ix in 0..cells[0] {
                let x = (ix as f64 + 0.5) * spacing[0];
                let y = (iy as f64 + 0.5) * spacing[1];
                let (s, b1, b2) = f(x, y);
                let k = field.index(ix, iy);
                field.sigma[k] = s;
                field.b[0][k] = b1;
                field.b[1][k] = b2;
            }
        }
        Ok(field)
    }

    /// Overrides the hypersurface dimension used by the energy density.
    pub fn with_graph_dimension(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.cells[0] + ix
    }

    pub fn total_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.spacing[0]
        } else {
            self.spacing[0] * self.spacing[1]
        }
    }

    /// Neighbor index along `axis` with offset +-1, honoring the boundary.
    #[inline]
    pub fn neighbor(&self, ix: usize, iy: usize, axis: usize, offset: isize) -> usize {
        let (pos, count) = if axis == 0 {
            (ix as isize + offset, self.cells[0] as isize)
        } else {
            (iy as isize + offset, self.cells[1] as isize)
        };
        let clamped = match self.boundary {
            Boundary::Periodic => pos.rem_euclid(count),
            Boundary::Outflow => pos.clamp(0, count - 1),
        } as usize;
        if axis == 0 {
            self.index(clamped, iy)
        } else {
            self.index(ix, clamped)
        }
    }

    pub fn max_b_norm_sq(&self) -> f64 {
        (0..self.total_cells())
            .map(|k| {
                let b1 = self.b[0][k];
                let b2 = if self.dim == 2 { self.b[1][k] } else { 0.0 };
                b1 * b1 + b2 * b2
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.iter().all(|v| v.is_finite())
            && self.b[0].iter().all(|v| v.is_finite())
            && (self.dim == 1 || self.b[1].iter().all(|v| v.is_finite()))
    }

    /// Grid sums of the conserved quantities, scaled by the cell volume.
    pub fn masses(&self) -> (f64, [f64; 2]) {
        let vol = self.cell_volume();
        let ms: f64 = self.sigma.iter().sum::<f64>() * vol;
        let mb1: f64 = self.b[0].iter().sum::<f64>() * vol;
        let mb2: f64 = if self.dim == 2 {
            self.b[1].iter().sum::<f64>() * vol
        } else {
            0.0
        };
        (ms, [mb1, mb2])
    }
}
