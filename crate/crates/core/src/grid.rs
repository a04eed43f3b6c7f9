//! Uniform tensor-product grids over configuration space and phase space.
//!
//! Vectors are stored as `[f64; MAX_DIM]`; components beyond the grid
//! dimension are kept at zero. Cell index flattening runs axis 0 fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 2;

/// Smallest admissible number of cells per axis.
pub const MIN_CELLS: usize = 4;

/// Point or vector in configuration or momentum space, zero padded.
pub type Vector = [f64; MAX_DIM];

/// One uniform axis with `cells` cells covering `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub cells: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Axis {
    pub fn new(cells: usize, lo: f64, hi: f64) -> Result<Self> {
        if cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "axis needs at least {MIN_CELLS} cells, got {cells}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidGrid(format!(
                "axis extent [{lo}, {hi}] must be finite with positive length"
            )));
        }
        Ok(Self { cells, lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.spacing()
    }

    /// Left face of cell `i`.
    pub fn face(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }
}

/// Uniform Cartesian grid in one or two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    axes: Vec<Axis>,
}

impl UniformGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                axes.len()
            )));
        }
        for a in &axes {
            Axis::new(a.cells, a.lo, a.hi)?;
        }
        Ok(Self { axes })
    }

    /// One dimensional grid shorthand.
    pub fn line(cells: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Axis::new(cells, lo, hi)?])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.cells).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, d: usize) -> f64 {
        self.axes[d].spacing()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Largest axis length, used as the reference length scale.
    pub fn scale(&self) -> f64 {
        self.axes.iter().map(Axis::length).fold(0.0, f64::max)
    }

    /// Stride of axis `d` in the flattened index.
    pub fn stride(&self, d: usize) -> usize {
        self.axes[..d].iter().map(|a| a.cells).product()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        let mut rem = flat;
        for (d, a) in self.axes.iter().enumerate() {
            out[d] = rem % a.cells;
            rem /= a.cells;
        }
        out
    }

    pub fn flat_index(&self, idx: [usize; MAX_DIM]) -> usize {
        let mut flat = 0;
        for d in (0..self.dim()).rev() {
            flat = flat * self.axes[d].cells + idx[d];
        }
        flat
    }

    pub fn center(&self, flat: usize) -> Vector {
        let idx = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for (d, a) in self.axes.iter().enumerate() {
            x[d] = a.center(idx[d]);
        }
        x
    }

    /// All cell centers in flat order.
    pub fn centers(&self) -> Vec<Vector> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// Neighbor of `flat` along axis `d` with periodic wrap; `step` is +1 or -1.
    pub fn periodic_neighbor(&self, flat: usize, d: usize, step: isize) -> usize {
        let n = self.axes[d].cells;
        let stride = self.stride(d);
        let i = (flat / stride) % n;
        let j = ((i as isize + step).rem_euclid(n as isize)) as usize;
        flat - i * stride + j * stride
    }

    /// Neighbor along axis `d` without wrap, `None` past the boundary.
    pub fn bounded_neighbor(&self, flat: usize, d: usize, step: isize) -> Option<usize> {
        let n = self.axes[d].cells as isize;
        let stride = self.stride(d);
        let i = ((flat / stride) % n as usize) as isize;
        let j = i + step;
        if j < 0 || j >= n {
            None
        } else {
            Some(((flat as isize) + (j - i) * stride as isize) as usize)
        }
    }

    pub(crate) fn ensure_same(&self, other: &Self, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(what.to_string()))
        }
    }
}

/// Phase-space grid: periodic configuration grid times a truncated momentum grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    space: UniformGrid,
    momentum: UniformGrid,
}

impl PhaseGrid {
    pub fn new(space: UniformGrid, momentum: UniformGrid) -> Result<Self> {
        if space.dim() != momentum.dim() {
            return Err(Error::InvalidGrid(format!(
                "space dimension {} differs from momentum dimension {}",
                space.dim(),
                momentum.dim()
            )));
        }
        Ok(Self { space, momentum })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &UniformGrid {
        &self.space
    }

    pub fn momentum(&self) -> &UniformGrid {
        &self.momentum
    }

    pub fn len(&self) -> usize {
        self.space.len() * self.momentum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Phase-space cell volume `dx dp`.
    pub fn cell_volume(&self) -> f64 {
        self.space.cell_volume() * self.momentum.cell_volume()
    }

    /// Flat index of spatial cell `s` and momentum cell `q`.
    pub fn index(&self, s: usize, q: usize) -> usize {
        s * self.momentum.len() + q
    }

    /// Largest momentum-axis length, used in relative tolerances.
    pub fn p_extent(&self) -> f64 {
        self.momentum.scale()
    }
}

pub(crate) fn norm(v: &Vector) -> f64 {
    v[0].hypot(v[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_empty_axes() {
        assert!(Axis::new(3, 0.0, 1.0).is_err());
        assert!(Axis::new(8, 1.0, 1.0).is_err());
        assert!(UniformGrid::new(vec![]).is_err());
    }

    #[test]
    fn flat_and_multi_index_round_trip() {
        let g = UniformGrid::new(vec![
            Axis::new(5, 0.0, 1.0).unwrap(),
            Axis::new(4, 0.0, 2.0).unwrap(),
        ])
        .unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(i)), i);
        }
        assert_eq!(g.periodic_neighbor(4, 0, 1), 0);
        assert_eq!(g.periodic_neighbor(0, 1, -1), 15);
        assert_eq!(g.bounded_neighbor(0, 1, -1), None);
        assert_eq!(g.bounded_neighbor(0, 1, 1), Some(5));
    }
}
