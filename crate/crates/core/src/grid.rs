//! Periodic box discretization and the n-dimensional transform.
//!
//! The box `[-L/2, L/2)^d` is sampled at `x_j = -L/2 + j h`, `h = L/n`, in
//! row-major order (axis 0 varies slowest). The forward transform is
//! unnormalized and the inverse carries `1/M`, `M = n^d`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width, in cells, of the strip next to the boundary whose mass is monitored.
pub const BOUNDARY_CELLS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        let spec = Self {
            dim,
            points,
            length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                self.dim
            )));
        }
        if self.points < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 points per axis, got {}",
                self.points
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "side length must be positive, got {}",
                self.length
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Total number of grid points `n^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }
}

/// A validated grid together with transform plans and wavenumber tables.
#[derive(Clone)]
pub struct Grid {
    spec: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
    odd_wavenumbers: Vec<f64>,
    coords: Vec<f64>,
    k_squared: Vec<f64>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let h = spec.spacing();
        let wavenumbers: Vec<f64> = (0..n)
            .map(|m| {
                let signed = if m < n.div_ceil(2) {
                    m as f64
                } else {
                    m as f64 - n as f64
                };
                2.0 * PI * signed / spec.length
            })
            .collect();
        let mut odd_wavenumbers = wavenumbers.clone();
        if n.is_multiple_of(2) {
            odd_wavenumbers[n / 2] = 0.0;
        }
        let coords: Vec<f64> = (0..n).map(|j| -0.5 * spec.length + j as f64 * h).collect();
        let mut grid = Self {
            spec,
            forward,
            inverse,
            wavenumbers,
            odd_wavenumbers,
            coords,
            k_squared: Vec::new(),
        };
        grid.k_squared = (0..spec.len())
            .map(|i| {
                let mut k2 = 0.0;
                grid.for_axes(i, |_, m| k2 += grid.wavenumbers[m].powi(2));
                k2
            })
            .collect();
        Ok(grid)
    }

    pub fn from_parts(dim: usize, points: usize, length: f64) -> Result<Self> {
        Self::new(GridSpec::new(dim, points, length)?)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn points(&self) -> usize {
        self.spec.points
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spec.cell_volume()
    }

    /// Per-axis wavenumbers `2π m̃ / L` in transform order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Per-axis sample coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `|k|^2` at every flat spectral index.
    pub fn k_squared(&self) -> &[f64] {
        &self.k_squared
    }

    /// Calls `f(axis, index_along_axis)` for every axis of flat index `flat`.
    #[inline]
    pub fn for_axes<F: FnMut(usize, usize)>(&self, flat: usize, mut f: F) {
        let n = self.spec.points;
        let d = self.spec.dim;
        let mut rem = flat;
        for axis in (0..d).rev() {
            f(axis, rem % n);
            rem /= n;
        }
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        self.for_axes(flat, |a, m| idx[a] = m);
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.spec.dim)
            .fold(0, |acc, &m| acc * self.spec.points + m)
    }

    /// Physical position of grid point `flat`.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        self.for_axes(flat, |a, m| x[a] = self.coords[m]);
        x
    }

    /// Wavevector at flat spectral index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let mut k = [0.0; 3];
        self.for_axes(flat, |a, m| k[a] = self.wavenumbers[m]);
        k
    }

    /// Signed minimum-image offset of index difference `m` along an axis, in cells.
    pub fn signed_offset(&self, m: usize) -> isize {
        let n = self.spec.points;
        if m < n.div_ceil(2) {
            m as isize
        } else {
            m as isize - n as isize
        }
    }

    /// True when the point lies within [`BOUNDARY_CELLS`] cells of the box boundary.
    pub fn near_boundary(&self, flat: usize) -> bool {
        let n = self.spec.points;
        let mut near = false;
        self.for_axes(flat, |_, m| {
            if m <= BOUNDARY_CELLS || m >= n - BOUNDARY_CELLS {
                near = true;
            }
        });
        near
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        let n = self.spec.points;
        let d = self.spec.dim;
        for axis in 0..d {
            let stride = n.pow((d - 1 - axis) as u32);
            if stride == 1 {
                data.par_chunks_mut(n * 64).for_each(|chunk| {
                    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                    plan.process_with_scratch(chunk, &mut scratch);
                });
                continue;
            }
            // Each block of n*stride values holds `stride` interleaved lines;
            // transpose them to contiguous rows, transform, transpose back.
            data.par_chunks_mut(n * stride).for_each(|block| {
                let mut lines = vec![Complex64::default(); block.len()];
                for j in 0..n {
                    for s in 0..stride {
                        lines[s * n + j] = block[j * stride + s];
                    }
                }
                let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(&mut lines, &mut scratch);
                for j in 0..n {
                    for s in 0..stride {
                        block[j * stride + s] = lines[s * n + j];
                    }
                }
            });
        }
    }

    pub fn to_spectral(&self, field: &[Complex64]) -> Vec<Complex64> {
        let mut out = field.to_vec();
        self.forward(&mut out);
        out
    }

    pub fn to_physical(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut out = spectrum.to_vec();
        self.inverse(&mut out);
        out
    }

    /// Applies a real spectral multiplier `symbol(k)` to a physical field.
    pub fn apply_multiplier<F>(&self, field: &[Complex64], symbol: F) -> Vec<Complex64>
    where
        F: Fn(&[f64; 3], f64) -> Complex64 + Sync,
    {
        let mut spec = self.to_spectral(field);
        spec.par_iter_mut().enumerate().for_each(|(i, z)| {
            let k = self.wavevector(i);
            *z *= symbol(&k, self.k_squared[i]);
        });
        self.inverse(&mut spec);
        spec
    }

    /// Spectral mixed derivative `∂_{a1}∂_{a2}...` of a field given by its spectrum.
    pub fn derivative_from_spectrum(
        &self,
        spectrum: &[Complex64],
        axes: &[usize],
    ) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = spectrum
            .par_iter()
            .enumerate()
            .map(|(i, z)| {
                let k = self.derivative_wavevector(i);
                let mut factor = Complex64::new(1.0, 0.0);
                for &a in axes {
                    factor *= Complex64::new(0.0, k[a]);
                }
                z * factor
            })
            .collect();
        self.inverse(&mut out);
        out
    }

    /// Wavevector used for odd derivatives: the Nyquist component is zeroed
    /// so that real fields keep real first derivatives on even grids.
    pub fn derivative_wavevector(&self, flat: usize) -> [f64; 3] {
        let mut k = [0.0; 3];
        self.for_axes(flat, |a, m| k[a] = self.odd_wavenumbers[m]);
        k
    }

    /// Spectral gradient: one physical field per axis.
    pub fn gradient(&self, field: &[Complex64]) -> Vec<Vec<Complex64>> {
        let spec = self.to_spectral(field);
        (0..self.dim())
            .map(|a| self.derivative_from_spectrum(&spec, &[a]))
            .collect()
    }

    /// Spectral Hessian as a full `d x d` table (symmetric entries shared by value).
    pub fn hessian(&self, field: &[Complex64]) -> Vec<Vec<Vec<Complex64>>> {
        let spec = self.to_spectral(field);
        let d = self.dim();
        let mut table: Vec<Vec<Vec<Complex64>>> = vec![vec![Vec::new(); d]; d];
        for i in 0..d {
            for j in i..d {
                let entry = if i == j {
                    // Second derivative keeps the Nyquist mode: (ik)^2 = -k^2.
                    let mut out: Vec<Complex64> = spec
                        .iter()
                        .enumerate()
                        .map(|(f, z)| {
                            let k = self.wavevector(f)[i];
                            z * (-k * k)
                        })
                        .collect();
                    self.inverse(&mut out);
                    out
                } else {
                    self.derivative_from_spectrum(&spec, &[i, j])
                };
                if i != j {
                    table[j][i] = entry.clone();
                }
                table[i][j] = entry;
            }
        }
        table
    }

    pub fn laplacian(&self, field: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.to_spectral(field);
        spec.iter_mut()
            .zip(self.k_squared.iter())
            .for_each(|(z, &kk)| *z *= -kk);
        self.inverse(&mut spec);
        spec
    }
}
