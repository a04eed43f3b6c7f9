//! Packed symmetric tensors in one or two dimensions.
//!
//! A symmetric degree-`k` tensor in two dimensions is fixed by the `k + 1`
//! values `T[0..0 1..1]`, indexed here by the number `r` of indices equal to 1.
//! Each packed entry is the tensor component itself, so `T_{01} = T_{10}` is
//! stored once with its actual value. In one dimension only `r = 0` exists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{UniformGrid, Vector, MAX_DIM};
use crate::numerics::pairwise_sum;

/// Largest tensor degree carried by fields.
pub const MAX_DEGREE: usize = 3;

/// Number of independent components of a degree-`k` symmetric tensor.
pub fn n_components(dim: usize, degree: usize) -> usize {
    if dim == 1 {
        1
    } else {
        degree + 1
    }
}

/// Packed slot of a multi-index given in any order.
pub fn slot(indices: &[usize]) -> usize {
    indices.iter().filter(|&&i| i == 1).count()
}

/// Binomial coefficient for small arguments.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        Err(Error::DegreeTooHigh {
            degree,
            max: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

/// Symmetric tensor at a single point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensor {
    dim: usize,
    degree: usize,
    comps: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            comps: vec![0.0; n_components(dim, degree)],
        }
    }

    pub fn scalar(dim: usize, v: f64) -> Self {
        Self {
            dim,
            degree: 0,
            comps: vec![v],
        }
    }

    pub fn vector(dim: usize, v: &Vector) -> Self {
        Self {
            dim,
            degree: 1,
            comps: v[..dim].to_vec(),
        }
    }

    /// Builds from packed components `r = 0..=k`.
    pub fn from_packed(dim: usize, degree: usize, comps: Vec<f64>) -> Result<Self> {
        if comps.len() != n_components(dim, degree) {
            return Err(Error::InvalidParameter(format!(
                "degree {degree} tensor in {dim}D needs {} components, got {}",
                n_components(dim, degree),
                comps.len()
            )));
        }
        Ok(Self { dim, degree, comps })
    }

    /// `v (x) ... (x) v` with `k` factors.
    pub fn tensor_power(dim: usize, v: &Vector, degree: usize) -> Self {
        let comps = (0..n_components(dim, degree))
            .map(|r| v[0].powi((degree - r) as i32) * v[1].powi(r as i32))
            .collect();
        Self { dim, degree, comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn packed(&self) -> &[f64] {
        &self.comps
    }

    /// Component for any ordering of the indices.
    pub fn get(&self, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.degree);
        self.comps[slot(indices)]
    }

    pub fn to_vector(&self) -> Vector {
        let mut v = [0.0; MAX_DIM];
        v[..self.dim].copy_from_slice(&self.comps[..self.dim]);
        v
    }

    /// Symmetric product: `v` inserted into each of the `k + 1` slots, summed.
    pub fn sym_product(&self, v: &Vector) -> Self {
        let k = self.degree;
        let comps = (0..n_components(self.dim, k + 1))
            .map(|r| {
                let mut acc = 0.0;
                if r > 0 {
                    acc += r as f64 * v[1] * self.comps[r - 1];
                }
                if r < n_components(self.dim, k) {
                    acc += (k + 1 - r) as f64 * v[0] * self.comps[r];
                }
                acc
            })
            .collect();
        Self {
            dim: self.dim,
            degree: k + 1,
            comps,
        }
    }

    /// Full contraction with `s (x) ... (x) s`.
    pub fn contract_power(&self, s: &Vector) -> f64 {
        let k = self.degree;
        if self.dim == 1 {
            return self.comps[0] * s[0].powi(k as i32);
        }
        (0..=k)
            .map(|r| {
                binomial(k, r) * self.comps[r] * s[0].powi((k - r) as i32) * s[1].powi(r as i32)
            })
            .sum()
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (y, x) in self.comps.iter_mut().zip(&other.comps) {
            *y += a * x;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            comps: self.comps.iter().map(|c| a * c).collect(),
        }
    }

    /// Largest absolute entry over all index tuples.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Entrywise L1 norm over all `n^k` index tuples.
    pub fn l1(&self) -> f64 {
        if self.dim == 1 {
            return self.comps[0].abs();
        }
        self.comps
            .iter()
            .enumerate()
            .map(|(r, c)| binomial(self.degree, r) * c.abs())
            .sum()
    }
}

/// Degree-`k` symmetric tensor field on a spatial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensorField {
    grid: UniformGrid,
    degree: usize,
    ncomp: usize,
    data: Vec<f64>,
}

impl SymTensorField {
    pub fn zeros(grid: &UniformGrid, degree: usize) -> Result<Self> {
        check_degree(degree)?;
        let ncomp = n_components(grid.dim(), degree);
        Ok(Self {
            grid: grid.clone(),
            degree,
            ncomp,
            data: vec![0.0; ncomp * grid.len()],
        })
    }

    pub fn from_fn(
        grid: &UniformGrid,
        degree: usize,
        mut f: impl FnMut(usize) -> SymTensor,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, degree)?;
        for cell in 0..grid.len() {
            out.set_tensor(cell, &f(cell));
        }
        Ok(out)
    }

    pub fn from_scalar(s: &ScalarField) -> Self {
        Self {
            grid: s.grid().clone(),
            degree: 0,
            ncomp: 1,
            data: s.values().to_vec(),
        }
    }

    pub fn from_vector(v: &VectorField) -> Self {
        let n = v.dim();
        let data = v.values().iter().flat_map(|x| x[..n].to_vec()).collect();
        Self {
            grid: v.grid().clone(),
            degree: 1,
            ncomp: n,
            data,
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn n_components(&self) -> usize {
        self.ncomp
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Component at `cell` for any ordering of the indices.
    pub fn get(&self, cell: usize, indices: &[usize]) -> f64 {
        debug_assert_eq!(indices.len(), self.degree);
        self.data[cell * self.ncomp + slot(indices)]
    }

    /// Packed component `r` at `cell`.
    pub fn packed(&self, cell: usize, r: usize) -> f64 {
        self.data[cell * self.ncomp + r]
    }

    pub fn tensor_at(&self, cell: usize) -> SymTensor {
        SymTensor {
            dim: self.dim(),
            degree: self.degree,
            comps: self.data[cell * self.ncomp..(cell + 1) * self.ncomp].to_vec(),
        }
    }

    pub fn set_tensor(&mut self, cell: usize, t: &SymTensor) {
        debug_assert_eq!(t.degree, self.degree);
        self.data[cell * self.ncomp..(cell + 1) * self.ncomp].copy_from_slice(&t.comps);
    }

    pub fn to_scalar(&self) -> Result<ScalarField> {
        if self.degree != 0 {
            return Err(Error::InvalidParameter(
                "tensor field is not degree 0".into(),
            ));
        }
        ScalarField::from_values(&self.grid, self.data.clone())
    }

    pub fn to_vector(&self) -> Result<VectorField> {
        if self.degree != 1 {
            return Err(Error::InvalidParameter(
                "tensor field is not degree 1".into(),
            ));
        }
        let mut out = VectorField::zeros(&self.grid);
        for cell in 0..self.grid.len() {
            out.set(cell, self.tensor_at(cell).to_vector());
        }
        Ok(out)
    }

    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (y, x) in self.data.iter_mut().zip(&other.data) {
            *y += a * x;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for y in self.data.iter_mut() {
            *y *= a;
        }
    }

    /// `self - other`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Entrywise L1 norm `sum_x sum_{i1..ik} |T| dx`.
    pub fn l1_norm(&self) -> f64 {
        let terms: Vec<f64> = (0..self.grid.len())
            .map(|c| self.tensor_at(c).l1())
            .collect();
        pairwise_sum(&terms) * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Contracts the first index with `grad_x` using periodic central
    /// differences, lowering the degree by one.
    pub fn divergence(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::InvalidParameter(
                "divergence of a degree 0 field".into(),
            ));
        }
        let g = &self.grid;
        let mut out = Self::zeros(g, self.degree - 1)?;
        for cell in 0..g.len() {
            for r in 0..out.ncomp {
                let mut acc = 0.0;
                for d in 0..g.dim() {
                    // first index equal to d raises the count of ones by d
                    let src = r + d;
                    let up = self.packed(g.periodic_neighbor(cell, d, 1), src);
                    let dn = self.packed(g.periodic_neighbor(cell, d, -1), src);
                    acc += (up - dn) / (2.0 * g.spacing(d));
                }
                out.data[cell * out.ncomp + r] = acc;
            }
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        self.grid.ensure_same(&other.grid, "tensor field grid")?;
        if self.degree != other.degree {
            return Err(Error::InvalidParameter(format!(
                "degree {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }
}

/// Field version of [`SymTensor::sym_product`].
pub fn sym_tensor_product(a: &SymTensorField, v: &VectorField) -> Result<SymTensorField> {
    a.grid.ensure_same(v.grid(), "symmetric product operands")?;
    check_degree(a.degree + 1)?;
    let mut out = SymTensorField::zeros(&a.grid, a.degree + 1)?;
    for cell in 0..a.grid.len() {
        out.set_tensor(cell, &a.tensor_at(cell).sym_product(&v.get(cell)));
    }
    Ok(out)
}
