//! Static functionals of a state: norms, mass, energy, densities.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::Grid;
use crate::params::SystemParams;
use crate::reduce::{pairwise_sum, pairwise_sum_by};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Energy {
    pub kinetic_biharmonic: f64,
    pub kinetic_gradient: f64,
    pub potential: f64,
    pub total: f64,
}

/// Mass density `|f|^2` and momentum density `Im(f̄ ∇f)` of one component.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPair {
    pub mass: Vec<f64>,
    pub momentum: Vec<Vec<f64>>,
}

/// `h^d Σ_x |u|^2` for one field.
pub fn field_mass(grid: &Grid, field: &[Complex64]) -> f64 {
    grid.cell_volume() * pairwise_sum_by(field.len(), |i| field[i].norm_sqr())
}

pub fn mass(state: &FieldState, grid: &Grid) -> Vec<f64> {
    state
        .components
        .iter()
        .map(|c| field_mass(grid, c))
        .collect()
}

/// Same quantity as [`field_mass`] evaluated on the spectrum (Parseval).
pub fn spectral_mass(grid: &Grid, spectrum: &[Complex64]) -> f64 {
    grid.cell_volume() / grid.len() as f64
        * pairwise_sum_by(spectrum.len(), |i| spectrum[i].norm_sqr())
}

/// `(h^d/M) Σ_k w(k) |û_k|^2` for a radial spectral weight given as a function of `|k|^2`.
fn spectral_quadratic<F: Fn(f64) -> f64 + Sync>(grid: &Grid, spectrum: &[Complex64], w: F) -> f64 {
    let k2 = grid.k_squared();
    grid.cell_volume() / grid.len() as f64
        * pairwise_sum_by(spectrum.len(), |i| w(k2[i]) * spectrum[i].norm_sqr())
}

/// `|u_μ|^{p+1}` at every point of every component.
pub(crate) fn modulus_powers(state: &FieldState, exponent: f64) -> Vec<Vec<f64>> {
    state
        .components
        .par_iter()
        .map(|c| c.iter().map(|z| z.norm_sqr().powf(0.5 * exponent)).collect())
        .collect()
}

/// `Σ_{μν} γ_μν ∫ |u_μ|^{p+1} |u_ν|^{p+1}` pointwise integrand, i.e. without the `1/(p+1)`.
pub(crate) fn coupling_density(state: &FieldState, sys: &SystemParams) -> Vec<f64> {
    let powers = modulus_powers(state, sys.p() + 1.0);
    let n = sys.components();
    let gamma = sys.gamma();
    let len = powers.first().map_or(0, |v| v.len());
    (0..len)
        .into_par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    let g = gamma.get(mu, nu);
                    if g != 0.0 {
                        acc += g * powers[mu][x] * powers[nu][x];
                    }
                }
            }
            acc
        })
        .collect()
}

pub fn energy(state: &FieldState, grid: &Grid, sys: &SystemParams) -> Energy {
    let mut biharmonic = 0.0;
    let mut gradient = 0.0;
    for c in &state.components {
        let spec = grid.to_spectral(c);
        biharmonic += spectral_quadratic(grid, &spec, |k2| k2 * k2);
        if sys.kappa().value() != 0.0 {
            gradient += spectral_quadratic(grid, &spec, |k2| k2);
        }
    }
    gradient *= sys.kappa().value();
    let potential = if sys.is_linear() {
        0.0
    } else {
        let density = coupling_density(state, sys);
        grid.cell_volume() * pairwise_sum(&density) / (sys.p() + 1.0)
    };
    Energy {
        kinetic_biharmonic: biharmonic,
        kinetic_gradient: gradient,
        potential,
        total: biharmonic + gradient + potential,
    }
}

fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Lebesgue exponent must be >= 1, got {q}"
        )));
    }
    Ok(())
}

pub fn field_lq_norm(grid: &Grid, field: &[Complex64], q: f64) -> Result<f64> {
    check_exponent(q)?;
    if q.is_infinite() {
        return Ok(field.iter().fold(0.0f64, |m, z| m.max(z.norm())));
    }
    let sum = if q == 2.0 {
        pairwise_sum_by(field.len(), |i| field[i].norm_sqr())
    } else {
        pairwise_sum_by(field.len(), |i| field[i].norm_sqr().powf(0.5 * q))
    };
    Ok((grid.cell_volume() * sum).powf(1.0 / q))
}

/// `‖u_μ‖_{L^q}` per component; `q = f64::INFINITY` gives the max norm.
pub fn lq_norm(state: &FieldState, grid: &Grid, q: f64) -> Result<Vec<f64>> {
    state
        .components
        .iter()
        .map(|c| field_lq_norm(grid, c, q))
        .collect()
}

/// ℓ² combination of the component norms.
pub fn lq_norm_total(state: &FieldState, grid: &Grid, q: f64) -> Result<f64> {
    Ok(l2_combine(&lq_norm(state, grid, q)?))
}

pub fn l2_combine(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn field_h2_norm(grid: &Grid, field: &[Complex64]) -> f64 {
    let spec = grid.to_spectral(field);
    spectral_quadratic(grid, &spec, |k2| (1.0 + k2) * (1.0 + k2)).sqrt()
}

/// `‖u_μ‖_{H^2}` with `‖u‖² = Σ_k (1+|k|²)² |û_k|²` (physically normalized).
pub fn sobolev_h2_norm(state: &FieldState, grid: &Grid) -> Vec<f64> {
    state
        .components
        .iter()
        .map(|c| field_h2_norm(grid, c))
        .collect()
}

/// ℓ² combination over components of the H² norms.
pub fn h2_norm_total(state: &FieldState, grid: &Grid) -> f64 {
    l2_combine(&sobolev_h2_norm(state, grid))
}

/// H² distance between two states.
pub fn h2_distance(a: &FieldState, b: &FieldState, grid: &Grid) -> f64 {
    h2_norm_total(&a.difference(b), grid)
}

pub fn densities(state: &FieldState, grid: &Grid, mu: usize) -> Result<DensityPair> {
    let u = state.components.get(mu).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "component index {mu} out of range (state has {})",
            state.len()
        ))
    })?;
    Ok(field_densities(grid, u))
}

pub fn field_densities(grid: &Grid, u: &[Complex64]) -> DensityPair {
    let mass = u.iter().map(|z| z.norm_sqr()).collect();
    let momentum = grid
        .gradient(u)
        .into_iter()
        .map(|g| {
            u.iter()
                .zip(g.iter())
                .map(|(z, dz)| (z.conj() * dz).im)
                .collect()
        })
        .collect();
    DensityPair { mass, momentum }
}

/// Mass within 4h of the box boundary, summed over components.
pub fn boundary_mass(state: &FieldState, grid: &Grid) -> f64 {
    let hd = grid.cell_volume();
    state
        .components
        .iter()
        .map(|c| {
            hd * pairwise_sum_by(c.len(), |i| {
                if grid.near_boundary(i) {
                    c[i].norm_sqr()
                } else {
                    0.0
                }
            })
        })
        .sum()
}

/// Boundary mass divided by total mass (0 for a zero state).
pub fn boundary_fraction(state: &FieldState, grid: &Grid) -> f64 {
    let total: f64 = mass(state, grid).iter().sum();
    if total == 0.0 {
        0.0
    } else {
        boundary_mass(state, grid) / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Coupling, Kappa};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn plane_wave(grid: &Grid, amp: f64, k: [f64; 3]) -> Vec<Complex64> {
        (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                Complex64::from_polar(amp, k[0] * x[0] + k[1] * x[1] + k[2] * x[2])
            })
            .collect()
    }

    #[test]
    fn plane_wave_mass_is_amplitude_times_volume() {
        let g = Grid::from_parts(2, 16, 2.0 * PI).unwrap();
        let s = FieldState::new(0.0, vec![plane_wave(&g, 1.5, [1.0, 2.0, 0.0])]);
        assert_relative_eq!(mass(&s, &g)[0], 2.25 * 4.0 * PI * PI, max_relative = 1e-13);
    }

    #[test]
    fn second_component_zero() {
        let g = Grid::from_parts(1, 32, 10.0).unwrap();
        let s = FieldState::new(
            0.0,
            vec![plane_wave(&g, 1.0, [0.0; 3]), vec![Complex64::default(); 32]],
        );
        let m = mass(&s, &g);
        assert_relative_eq!(m[0], 10.0, max_relative = 1e-14);
        assert_eq!(m[1], 0.0);
    }

    #[test]
    fn plane_wave_energy_matches_closed_form() {
        // |A|^2 (|k|^4 + |k|^2) L^d + γ |A|^{2p+2} L^d / (p+1)
        let l = 2.0 * PI;
        let g = Grid::from_parts(1, 32, l).unwrap();
        let (a, k, p, gamma) = (0.8, 3.0, 2.0, 1.7);
        let s = FieldState::new(0.0, vec![plane_wave(&g, a, [k, 0.0, 0.0])]);
        let sys = SystemParams::single(p, Kappa::One, gamma).unwrap();
        let e = energy(&s, &g, &sys);
        let a2 = a * a;
        assert_relative_eq!(e.kinetic_biharmonic, a2 * k.powi(4) * l, max_relative = 1e-12);
        assert_relative_eq!(e.kinetic_gradient, a2 * k * k * l, max_relative = 1e-12);
        assert_relative_eq!(
            e.potential,
            gamma * a.powf(2.0 * p + 2.0) * l / (p + 1.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            e.total,
            e.kinetic_biharmonic + e.kinetic_gradient + e.potential,
            max_relative = 1e-15
        );
    }

    #[test]
    fn zero_field_and_kappa_zero() {
        let g = Grid::from_parts(2, 16, 5.0).unwrap();
        let sys = SystemParams::single(1.0, Kappa::One, 1.0).unwrap();
        let z = FieldState::zeros(&g, 1);
        assert_eq!(energy(&z, &g, &sys), Energy::default());
        let s = FieldState::new(0.0, vec![plane_wave(&g, 1.0, [0.0, 2.0 * PI / 5.0, 0.0])]);
        let sys0 = SystemParams::single(1.0, Kappa::Zero, 1.0).unwrap();
        assert_eq!(energy(&s, &g, &sys0).kinetic_gradient, 0.0);
    }

    #[test]
    fn lq_norms_of_constant_modulus() {
        let g = Grid::from_parts(3, 8, 2.0).unwrap();
        let s = FieldState::new(0.0, vec![plane_wave(&g, 0.7, [PI, 0.0, -PI])]);
        for q in [1.0, 2.0, 3.5, 6.0] {
            assert_relative_eq!(
                lq_norm(&s, &g, q).unwrap()[0],
                0.7 * 8f64.powf(1.0 / q),
                max_relative = 1e-13
            );
        }
        assert_relative_eq!(lq_norm(&s, &g, f64::INFINITY).unwrap()[0], 0.7, max_relative = 1e-14);
        assert!(lq_norm(&s, &g, 0.5).is_err());
        assert!(lq_norm(&s, &g, f64::NAN).is_err());
    }

    #[test]
    fn h2_norm_of_plane_wave() {
        let l = 2.0 * PI;
        let g = Grid::from_parts(2, 16, l).unwrap();
        let k = [2.0, -1.0, 0.0];
        let s = FieldState::new(0.0, vec![plane_wave(&g, 1.3, k)]);
        let k2 = 5.0;
        assert_relative_eq!(
            sobolev_h2_norm(&s, &g)[0],
            1.3 * l * (1.0 + k2),
            max_relative = 1e-12
        );
        let c = FieldState::new(0.0, vec![plane_wave(&g, 1.3, [0.0; 3])]);
        assert_relative_eq!(sobolev_h2_norm(&c, &g)[0], 1.3 * l, max_relative = 1e-13);
        assert_eq!(sobolev_h2_norm(&FieldState::zeros(&g, 1), &g)[0], 0.0);
    }

    #[test]
    fn plane_wave_densities() {
        let g = Grid::from_parts(2, 16, 2.0 * PI).unwrap();
        let k = [1.0, 3.0, 0.0];
        let s = FieldState::new(0.0, vec![plane_wave(&g, 0.5, k)]);
        let d = densities(&s, &g, 0).unwrap();
        for i in 0..g.len() {
            assert_relative_eq!(d.mass[i], 0.25, max_relative = 1e-13);
            assert_relative_eq!(d.momentum[0][i], 0.25, max_relative = 1e-11);
            assert_relative_eq!(d.momentum[1][i], 0.75, max_relative = 1e-11);
        }
        assert!(densities(&s, &g, 1).is_err());
    }

    #[test]
    fn real_field_has_no_momentum() {
        let g = Grid::from_parts(1, 64, 20.0).unwrap();
        let u: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((-g.position(i)[0].powi(2)).exp(), 0.0))
            .collect();
        let d = field_densities(&g, &u);
        assert!(d.momentum[0].iter().all(|j| j.abs() < 1e-15));
    }

    #[test]
    fn potential_is_symmetric_under_component_permutation() {
        let g = Grid::from_parts(1, 32, 10.0).unwrap();
        let bump = |c: f64, a: f64| -> Vec<Complex64> {
            (0..32)
                .map(|i| Complex64::new(a * (-(g.position(i)[0] - c).powi(2)).exp(), 0.0))
                .collect()
        };
        let s = FieldState::new(0.0, vec![bump(0.0, 1.0), bump(1.0, 0.5), bump(-1.0, 2.0)]);
        let beta = Coupling::from_rows(&[
            vec![1.0, 0.2, 0.3],
            vec![0.2, 2.0, 0.4],
            vec![0.3, 0.4, 3.0],
        ])
        .unwrap();
        let sys = SystemParams::new(1.5, Kappa::One, beta, Coupling::constant(3, 0.1)).unwrap();
        let perm = [2, 0, 1];
        let ps = FieldState::new(0.0, perm.iter().map(|&i| s.components[i].clone()).collect());
        let psys = sys.permuted(&perm).unwrap();
        assert_relative_eq!(
            energy(&s, &g, &sys).potential,
            energy(&ps, &g, &psys).potential,
            max_relative = 1e-13
        );
    }
}
