//! Gridded scalar, vector and phase-space fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, UniformGrid, Vector, MAX_DIM};
use crate::numerics::{axpy_slice, pairwise_sum, scale_slice, LinearState};

/// One real value per spatial cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &UniformGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &UniformGrid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: &UniformGrid, f: impl Fn(&Vector) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.center(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Midpoint-rule integral over the domain.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// L1 norm `sum |v| dx`.
    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        pairwise_sum(&abs) * self.grid.cell_volume()
    }

    pub(crate) fn check_finite(&self, quantity: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(cell) => Err(Error::NonFinite { quantity, cell }),
            None => Ok(()),
        }
    }

    /// Central-difference gradient with periodic wrap.
    pub fn gradient(&self) -> VectorField {
        let g = &self.grid;
        let mut out = VectorField::zeros(g);
        for i in 0..g.len() {
            let mut v = [0.0; MAX_DIM];
            for (d, vd) in v.iter_mut().enumerate().take(g.dim()) {
                let up = self.values[g.periodic_neighbor(i, d, 1)];
                let dn = self.values[g.periodic_neighbor(i, d, -1)];
                *vd = (up - dn) / (2.0 * g.spacing(d));
            }
            out.set(i, v);
        }
        out
    }
}

impl LinearState for ScalarField {
    fn axpy(&mut self, a: f64, other: &Self) {
        axpy_slice(&mut self.values, a, &other.values);
    }
    fn scale(&mut self, a: f64) {
        scale_slice(&mut self.values, a);
    }
}

/// One n-vector per spatial cell, stored as padded [`Vector`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    grid: UniformGrid,
    values: Vec<Vector>,
}

impl VectorField {
    pub fn zeros(grid: &UniformGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![[0.0; MAX_DIM]; grid.len()],
        }
    }

    pub fn constant(grid: &UniformGrid, value: Vector) -> Self {
        let mut v = value;
        for c in v.iter_mut().skip(grid.dim()) {
            *c = 0.0;
        }
        Self {
            grid: grid.clone(),
            values: vec![v; grid.len()],
        }
    }

    pub fn from_fn(grid: &UniformGrid, f: impl Fn(&Vector) -> Vector) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            out.set(i, f(&grid.center(i)));
        }
        out
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn get(&self, cell: usize) -> Vector {
        self.values[cell]
    }

    /// Stores `v`, zeroing components beyond the grid dimension.
    pub fn set(&mut self, cell: usize, mut v: Vector) {
        for c in v.iter_mut().skip(self.grid.dim()) {
            *c = 0.0;
        }
        self.values[cell] = v;
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// Component `d` of every cell.
    pub fn component(&self, d: usize) -> ScalarField {
        let vals = self.values.iter().map(|v| v[d]).collect();
        ScalarField {
            grid: self.grid.clone(),
            values: vals,
        }
    }

    pub fn from_components(grid: &UniformGrid, comps: &[ScalarField]) -> Result<Self> {
        if comps.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} components for a {}-dimensional grid",
                comps.len(),
                grid.dim()
            )));
        }
        let mut out = Self::zeros(grid);
        for (d, c) in comps.iter().enumerate() {
            grid.ensure_same(c.grid(), "vector component grid")?;
            for (i, v) in c.values().iter().enumerate() {
                out.values[i][d] = *v;
            }
        }
        Ok(out)
    }

    /// Domain integral of each component.
    pub fn integral(&self) -> Vector {
        let mut out = [0.0; MAX_DIM];
        for (d, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = self.component(d).integral();
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check_finite(&self, quantity: &'static str) -> Result<()> {
        match self
            .values
            .iter()
            .position(|v| !(v[0].is_finite() && v[1].is_finite()))
        {
            Some(cell) => Err(Error::NonFinite { quantity, cell }),
            None => Ok(()),
        }
    }

    /// Central-difference divergence with periodic wrap.
    pub fn divergence(&self) -> ScalarField {
        let g = &self.grid;
        let mut out = ScalarField::zeros(g);
        for i in 0..g.len() {
            let mut acc = 0.0;
            for d in 0..g.dim() {
                let up = self.values[g.periodic_neighbor(i, d, 1)][d];
                let dn = self.values[g.periodic_neighbor(i, d, -1)][d];
                acc += (up - dn) / (2.0 * g.spacing(d));
            }
            out.values[i] = acc;
        }
        out
    }
}

impl LinearState for VectorField {
    fn axpy(&mut self, a: f64, other: &Self) {
        for (y, x) in self.values.iter_mut().zip(&other.values) {
            y[0] += a * x[0];
            y[1] += a * x[1];
        }
    }
    fn scale(&mut self, a: f64) {
        for y in self.values.iter_mut() {
            y[0] *= a;
            y[1] *= a;
        }
    }
}

/// Phase-space density `g(x, p)` given as cell averages with respect to `dp dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionField {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &PhaseGrid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, p)` at phase-space cell centers.
    pub fn from_fn(grid: &PhaseGrid, f: impl Fn(&Vector, &Vector) -> f64) -> Self {
        let xs = grid.space().centers();
        let ps = grid.momentum().centers();
        let mut values = Vec::with_capacity(grid.len());
        for x in &xs {
            for p in &ps {
                values.push(f(x, p));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} phase cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, s: usize, q: usize) -> f64 {
        self.values[self.grid.index(s, q)]
    }

    /// Momentum-space slice at spatial cell `s`.
    pub fn fiber(&self, s: usize) -> &[f64] {
        let np = self.grid.momentum().len();
        &self.values[s * np..(s + 1) * np]
    }

    /// Total mass `sum g dx dp`.
    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// L1 distance `sum |g - h| dx dp`.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let diff: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(pairwise_sum(&diff) * self.grid.cell_volume())
    }

    /// Applies `f(x, p, value)` pointwise.
    pub fn map(&self, f: impl Fn(&Vector, &Vector, f64) -> f64) -> Self {
        let xs = self.grid.space().centers();
        let ps = self.grid.momentum().centers();
        let np = ps.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(&xs[i / np], &ps[i % np], *v))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub(crate) fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "distribution fields on different phase grids".into(),
            ))
        }
    }
}

impl LinearState for DistributionField {
    fn axpy(&mut self, a: f64, other: &Self) {
        axpy_slice(&mut self.values, a, &other.values);
    }
    fn scale(&mut self, a: f64) {
        scale_slice(&mut self.values, a);
    }
}
