//! Initial potential from an initial momentum field: solve `grad phi = -P`.
//!
//! The solve is spectral on the periodic grid. The zero mode of `phi` is set
//! to zero, which fixes the additive constant to a zero spatial mean. A
//! uniform part of `P` is not the gradient of a periodic function; pass it as
//! the linear slope of the closure state instead (`slope = -mean(P)`).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::UniformGrid;

/// Relative tolerance on the spectral curl of the input momentum.
pub const CURL_TOL: f64 = 1e-8;

/// Relative tolerance on the spatial mean of the input momentum.
const MEAN_TOL: f64 = 1e-10;

/// In-place forward or inverse FFT over every axis (unnormalized).
fn fft_nd(grid: &UniformGrid, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let mut buf = Vec::new();
    for d in 0..grid.dim() {
        let n = grid.axis(d).cells;
        let stride = grid.stride(d);
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        buf.resize(n, Complex64::new(0.0, 0.0));
        for start in (0..grid.len()).filter(|i| (i / stride) % n == 0) {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = data[start + t * stride];
            }
            fft.process(&mut buf);
            for (t, b) in buf.iter().enumerate() {
                data[start + t * stride] = *b;
            }
        }
    }
}

/// Angular wavenumber of mode `m` along axis `d`; the Nyquist mode maps to zero.
fn wavenumber(grid: &UniformGrid, d: usize, m: usize) -> f64 {
    let n = grid.axis(d).cells;
    let signed = if 2 * m < n {
        m as f64
    } else if 2 * m == n {
        0.0
    } else {
        m as f64 - n as f64
    };
    TAU * signed / grid.axis(d).length()
}

fn spectrum(v: &VectorField, d: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = v
        .values()
        .iter()
        .map(|x| Complex64::new(x[d], 0.0))
        .collect();
    fft_nd(v.grid(), &mut out, false);
    out
}

fn wavevector(grid: &UniformGrid, cell: usize) -> [f64; 2] {
    let idx = grid.multi_index(cell);
    let mut k = [0.0; 2];
    for d in 0..grid.dim() {
        k[d] = wavenumber(grid, d, idx[d]);
    }
    k
}

/// Potential with `grad phi = -P` and zero mean, using the default curl tolerance.
pub fn init_phi_from_momentum(p: &VectorField) -> Result<ScalarField> {
    init_phi_from_momentum_with_tol(p, CURL_TOL)
}

/// As [`init_phi_from_momentum`] with a caller-chosen relative curl tolerance.
///
/// The spectral curl is compared against `tol * max|P| * 2 pi / L_min`.
pub fn init_phi_from_momentum_with_tol(p: &VectorField, tol: f64) -> Result<ScalarField> {
    let grid = p.grid();
    p.check_finite("initial momentum")?;
    let scale = p.max_abs();
    let n = grid.len() as f64;
    let mut mean = [0.0; 2];
    for (d, m) in mean.iter_mut().enumerate().take(grid.dim()) {
        *m = p.component(d).mean();
    }
    let mean_norm = crate::grid::norm(&mean);
    if mean_norm > MEAN_TOL * scale {
        return Err(Error::NonZeroMean { mean: mean_norm });
    }
    let spectra: Vec<Vec<Complex64>> = (0..grid.dim()).map(|d| spectrum(p, d)).collect();
    if grid.dim() == 2 {
        let mut curl: Vec<Complex64> = (0..grid.len())
            .map(|c| {
                let k = wavevector(grid, c);
                Complex64::new(0.0, 1.0) * (spectra[1][c] * k[0] - spectra[0][c] * k[1])
            })
            .collect();
        fft_nd(grid, &mut curl, true);
        let max_curl = curl.iter().fold(0.0_f64, |a, v| a.max(v.re.abs())) / n;
        let l_min = (0..2)
            .map(|d| grid.axis(d).length())
            .fold(f64::INFINITY, f64::min);
        if max_curl > tol * scale * TAU / l_min {
            return Err(Error::NotCurlFree { max_curl });
        }
    }
    let mut phi: Vec<Complex64> = (0..grid.len())
        .map(|c| {
            let k = wavevector(grid, c);
            let k2 = k[0] * k[0] + k[1] * k[1];
            if k2 == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let kp: Complex64 = (0..grid.dim()).map(|d| spectra[d][c] * k[d]).sum();
            Complex64::new(0.0, 1.0) * kp / k2
        })
        .collect();
    fft_nd(grid, &mut phi, true);
    ScalarField::from_values(grid, phi.iter().map(|v| v.re / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    #[test]
    fn zero_momentum_gives_zero_potential() {
        let g = UniformGrid::line(16, 0.0, TAU).unwrap();
        let phi = init_phi_from_momentum(&VectorField::zeros(&g)).unwrap();
        assert!(phi.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sine_momentum_gives_cosine_potential() {
        let g = UniformGrid::line(64, 0.0, TAU).unwrap();
        let p = VectorField::from_fn(&g, |x| [x[0].sin(), 0.0]);
        let phi = init_phi_from_momentum(&p).unwrap();
        for (i, v) in phi.values().iter().enumerate() {
            assert!((v - g.center(i)[0].cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let g = UniformGrid::line(16, 0.0, TAU).unwrap();
        let p = VectorField::from_fn(&g, |x| [1.0 + x[0].sin(), 0.0]);
        assert!(matches!(
            init_phi_from_momentum(&p),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn gradient_field_in_two_dimensions() {
        let ax = Axis::new(32, 0.0, TAU).unwrap();
        let g = UniformGrid::new(vec![ax, Axis::new(16, 0.0, TAU).unwrap()]).unwrap();
        // P = -grad(sin x cos 2y)
        let p = VectorField::from_fn(&g, |x| {
            [
                -x[0].cos() * (2.0 * x[1]).cos(),
                2.0 * x[0].sin() * (2.0 * x[1]).sin(),
            ]
        });
        let phi = init_phi_from_momentum(&p).unwrap();
        for (i, v) in phi.values().iter().enumerate() {
            let x = g.center(i);
            assert!((v - x[0].sin() * (2.0 * x[1]).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn rotational_field_is_rejected() {
        let ax = Axis::new(16, 0.0, TAU).unwrap();
        let g = UniformGrid::new(vec![ax, ax]).unwrap();
        let p = VectorField::from_fn(&g, |x| {
            [x[1] - std::f64::consts::PI, -(x[1] - std::f64::consts::PI)]
        });
        assert!(matches!(
            init_phi_from_momentum(&p),
            Err(Error::NotCurlFree { .. })
        ));
        let swirl = VectorField::from_fn(&g, |x| [x[1].sin(), -x[0].sin()]);
        assert!(matches!(
            init_phi_from_momentum(&swirl),
            Err(Error::NotCurlFree { .. })
        ));
    }
}
