//! Two-point (interaction) Morawetz action and torus convolution kernels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::functionals::field_densities;
use crate::grid::Grid;
use crate::morawetz::weight::{WeightKind, WeightSpec};
use crate::params::SystemParams;
use crate::reduce::pairwise_sum_by;

/// Minimum-image displacement (physical units) of grid offset `flat`.
pub(crate) fn offset_vector(grid: &Grid, flat: usize) -> [f64; 3] {
    let h = grid.spacing();
    let mut z = [0.0; 3];
    grid.for_axes(flat, |a, m| z[a] = grid.signed_offset(m) as f64 * h);
    z
}

/// Samples `f(z)` at every minimum-image offset and returns its transform.
pub(crate) fn kernel_spectrum<F: Fn(&[f64; 3]) -> f64>(grid: &Grid, f: F) -> Vec<Complex64> {
    let mut k: Vec<Complex64> = (0..grid.len())
        .map(|i| Complex64::new(f(&offset_vector(grid, i)), 0.0))
        .collect();
    grid.forward(&mut k);
    k
}

/// `h^{2d} Σ_x Σ_y a(x) K(x-y) b(y)` from transforms of `a`, `b` and `K`.
pub(crate) fn spectral_pairing(grid: &Grid, a: &[Complex64], kernel: &[Complex64], b: &[Complex64]) -> f64 {
    let hd = grid.cell_volume();
    hd * hd / grid.len() as f64
        * pairwise_sum_by(a.len(), |k| (a[k].conj() * kernel[k] * b[k]).re)
}

fn real_spectrum(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.forward(&mut out);
    out
}

/// Total momentum density `J = Σ_μ j_μ` (per axis) and total mass density `Σ_μ m_μ`.
pub(crate) fn total_densities(state: &FieldState, grid: &Grid) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = grid.dim();
    let mut j = vec![vec![0.0; grid.len()]; d];
    let mut m = vec![0.0; grid.len()];
    for u in &state.components {
        let dens = field_densities(grid, u);
        for (acc, v) in m.iter_mut().zip(dens.mass.iter()) {
            *acc += v;
        }
        for a in 0..d {
            for (acc, v) in j[a].iter_mut().zip(dens.momentum[a].iter()) {
                *acc += v;
            }
        }
    }
    (j, m)
}

/// Cached interaction evaluator for a fixed grid and ε.
pub struct InteractionAction {
    kernels: Vec<Vec<Complex64>>,
}

impl InteractionAction {
    pub fn new(grid: &Grid, w: &WeightSpec) -> Result<Self> {
        w.validate()?;
        if w.kind != WeightKind::RadialEps {
            return Err(Error::InvalidArgument(
                "interaction action needs the radial weight".into(),
            ));
        }
        let eps2 = w.epsilon * w.epsilon;
        let d = grid.dim();
        let kernels = (0..d)
            .map(|a| {
                kernel_spectrum(grid, |z| {
                    let r2: f64 = z[..d].iter().map(|v| v * v).sum();
                    z[a] / (r2 + eps2).sqrt()
                })
            })
            .collect();
        Ok(Self { kernels })
    }

    /// `2 Σ_{μι} ∫∫ j_μ(x)·∇φ_ε(x-y) m_ι(y) dx dy`.
    pub fn evaluate(&self, state: &FieldState, grid: &Grid) -> f64 {
        let (j, m) = total_densities(state, grid);
        let m_hat = real_spectrum(grid, &m);
        let mut total = 0.0;
        for (a, ja) in j.iter().enumerate() {
            let j_hat = real_spectrum(grid, ja);
            total += spectral_pairing(grid, &j_hat, &self.kernels[a], &m_hat);
        }
        2.0 * total
    }
}

pub fn interaction_action(
    state: &FieldState,
    grid: &Grid,
    _sys: &SystemParams,
    w: &WeightSpec,
) -> Result<f64> {
    Ok(InteractionAction::new(grid, w)?.evaluate(state, grid))
}
