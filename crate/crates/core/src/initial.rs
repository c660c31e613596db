//! Initial data generators.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::functionals::boundary_fraction;
use crate::grid::Grid;
use crate::params::SystemParams;

/// Diagnostics are trusted only while the boundary strip holds less than
/// this fraction of the total mass.
pub const BOUNDARY_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// `A exp(-|x-x0|^2 / (2σ^2)) exp(i v·x)` in every component.
    GaussianPacket,
    /// Sum of Gaussian bumps, each optionally restricted to one component.
    MultiBump,
    /// Random Fourier coefficients with a Gaussian envelope, localized by a
    /// Gaussian window in space.
    RandomSchwartz,
    /// Super-Gaussian spectral shell `exp(-((|k-v|-k1)/k0)^{2m})`, peak modulus `A`.
    BandLimited,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    #[serde(default)]
    pub component: Option<usize>,
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default)]
    pub velocity: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialParams {
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Per-component amplitude multipliers; missing entries count as 1.
    pub component_scale: Vec<f64>,
    pub bumps: Vec<Bump>,
    /// Spectral envelope width (random_schwartz) or cutoff `k0` (band_limited).
    pub spectral_width: f64,
    /// Super-Gaussian order `m` for band_limited.
    pub spectral_order: u32,
    /// Shell radius `k1` for band_limited: the envelope is centred on
    /// `|k - v| = k1` instead of `k = v`. Zero gives a single bump.
    pub spectral_radius: f64,
}

impl Default for InitialParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            width: 1.0,
            center: Vec::new(),
            velocity: Vec::new(),
            component_scale: Vec::new(),
            bumps: Vec::new(),
            spectral_width: 1.0,
            spectral_order: 1,
            spectral_radius: 0.0,
        }
    }
}

impl InitialParams {
    fn scale(&self, mu: usize) -> f64 {
        self.component_scale.get(mu).copied().unwrap_or(1.0)
    }
}

fn vec3(v: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, x) in out.iter_mut().zip(v.iter()) {
        *o = *x;
    }
    out
}

fn gaussian(grid: &Grid, amplitude: f64, width: f64, center: [f64; 3], velocity: [f64; 3]) -> Result<Vec<Complex64>> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "packet width must be positive, got {width}"
        )));
    }
    let d = grid.dim();
    Ok((0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for a in 0..d {
                r2 += (x[a] - center[a]).powi(2);
                phase += velocity[a] * x[a];
            }
            Complex64::from_polar(amplitude * (-r2 / (2.0 * width * width)).exp(), phase)
        })
        .collect())
}

fn normalize_peak(field: &mut [Complex64], peak: f64) {
    let max = field.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max > 0.0 {
        let s = peak / max;
        field.iter_mut().for_each(|z| *z *= s);
    } else {
        field.iter_mut().for_each(|z| *z = Complex64::default());
    }
}

/// Builds initial data at `t = 0`.
///
/// Fails with [`Error::BoundaryContamination`] when more than
/// [`BOUNDARY_THRESHOLD`] of the mass sits within 4h of the boundary.
pub fn make_initial(
    kind: InitialKind,
    params: &InitialParams,
    grid: &Grid,
    sys: &SystemParams,
    seed: u64,
) -> Result<FieldState> {
    let n = sys.components();
    let center = vec3(&params.center);
    let velocity = vec3(&params.velocity);
    let mut components = Vec::with_capacity(n);
    match kind {
        InitialKind::GaussianPacket => {
            let base = gaussian(grid, params.amplitude, params.width, center, velocity)?;
            for mu in 0..n {
                let s = params.scale(mu);
                components.push(base.iter().map(|z| z * s).collect());
            }
        }
        InitialKind::MultiBump => {
            for mu in 0..n {
                let mut acc = vec![Complex64::default(); grid.len()];
                for b in params.bumps.iter().filter(|b| b.component.is_none_or(|c| c == mu)) {
                    let g = gaussian(grid, b.amplitude, b.width, vec3(&b.center), vec3(&b.velocity))?;
                    acc.iter_mut().zip(g.iter()).for_each(|(a, x)| *a += x);
                }
                let s = params.scale(mu);
                acc.iter_mut().for_each(|z| *z *= s);
                components.push(acc);
            }
        }
        InitialKind::RandomSchwartz => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k0 = params.spectral_width;
            if !(k0.is_finite() && k0 > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "spectral width must be positive, got {k0}"
                )));
            }
            let window = gaussian(grid, 1.0, params.width, center, velocity)?;
            for mu in 0..n {
                let k2 = grid.k_squared();
                let mut spec: Vec<Complex64> = (0..grid.len())
                    .map(|i| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im) * (-k2[i] / (2.0 * k0 * k0)).exp()
                    })
                    .collect();
                grid.inverse(&mut spec);
                normalize_peak(&mut spec, 1.0);
                let mut field: Vec<Complex64> =
                    spec.iter().zip(window.iter()).map(|(a, w)| a * w).collect();
                normalize_peak(&mut field, params.amplitude * params.scale(mu));
                components.push(field);
            }
        }
        InitialKind::BandLimited => {
            let k0 = params.spectral_width;
            let m = params.spectral_order.max(1) as i32;
            let k1 = params.spectral_radius;
            if !(k0.is_finite() && k0 > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "spectral width must be positive, got {k0}"
                )));
            }
            if !(k1.is_finite() && k1 >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "spectral radius must be non-negative, got {k1}"
                )));
            }
            let d = grid.dim();
            let mut spec: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    let k = grid.wavevector(i);
                    let mut q2 = 0.0;
                    let mut shift = 0.0;
                    for a in 0..d {
                        q2 += (k[a] - velocity[a]).powi(2);
                        // Translate so the packet is centred at `center`.
                        shift += k[a] * (center[a] - grid.coords()[0]);
                    }
                    let q = q2.sqrt() - k1;
                    let envelope = (-(q * q / (k0 * k0)).powi(m)).exp();
                    Complex64::from_polar(envelope, -shift)
                })
                .collect();
            grid.inverse(&mut spec);
            for mu in 0..n {
                let mut field = spec.clone();
                normalize_peak(&mut field, params.amplitude * params.scale(mu));
                components.push(field);
            }
        }
    }
    let state = FieldState::new(0.0, components);
    let fraction = boundary_fraction(&state, grid);
    if fraction > BOUNDARY_THRESHOLD {
        return Err(Error::BoundaryContamination { fraction });
    }
    Ok(state)
}
