//! Morawetz weights and their derivatives sampled on the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `φ(x) = |x|^2 / 2`.
    Quadratic,
    /// `φ_ε(x) = sqrt(|x|^2 + ε^2)`.
    RadialEps,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub epsilon: f64,
    /// Derivatives are set to zero within this many cells of the box boundary.
    pub window: usize,
}

impl WeightSpec {
    pub fn quadratic() -> Self {
        Self {
            kind: WeightKind::Quadratic,
            epsilon: 0.0,
            window: 0,
        }
    }

    pub fn radial(epsilon: f64) -> Self {
        Self {
            kind: WeightKind::RadialEps,
            epsilon,
            window: 0,
        }
    }

    /// Radial weight with the default regularization `ε = 2h`.
    pub fn radial_default(grid: &Grid) -> Self {
        Self::radial(2.0 * grid.spacing())
    }

    pub fn with_window(mut self, cells: usize) -> Self {
        self.window = cells;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == WeightKind::RadialEps && !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radial weight needs epsilon > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Finite Laurent polynomial `Σ c_a s^a` in `s = sqrt(r^2 + ε^2)`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Laurent {
    terms: Vec<(i32, f64)>,
}

impl Laurent {
    pub(crate) fn monomial(power: i32, coef: f64) -> Self {
        Self {
            terms: vec![(power, coef)],
        }
    }

    fn push(&mut self, power: i32, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.terms.iter_mut().find(|(p, _)| *p == power) {
            Some(t) => t.1 += coef,
            None => self.terms.push((power, coef)),
        }
    }

    pub(crate) fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|&(a, c)| c * s.powi(a)).sum()
    }

    /// `(1/s) d/ds`, so that `∇F = G(s) x` and `∂_r F = r G`.
    pub(crate) fn radial_factor(&self) -> Self {
        let mut out = Self { terms: Vec::new() };
        for &(a, c) in &self.terms {
            out.push(a - 2, c * f64::from(a));
        }
        out
    }

    /// Laplacian in `d` dimensions:
    /// `Δ s^a = a(a+d-2) s^{a-2} - a(a-2) ε^2 s^{a-4}`.
    pub(crate) fn laplacian(&self, dim: usize, eps2: f64) -> Self {
        let d = dim as f64;
        let mut out = Self { terms: Vec::new() };
        for &(a, c) in &self.terms {
            let af = f64::from(a);
            out.push(a - 2, c * af * (af + d - 2.0));
            out.push(a - 4, -c * af * (af - 2.0) * eps2);
        }
        out
    }
}

/// Radial profile data for `F(s)`: `∇F = G x`, `D^2 F = G I + H x x^T`.
pub(crate) struct RadialHessian {
    pub g: Laurent,
    pub h: Laurent,
}

impl RadialHessian {
    pub(crate) fn of(f: &Laurent) -> Self {
        let g = f.radial_factor();
        let h = g.radial_factor();
        Self { g, h }
    }
}

/// All weight derivatives needed by the Morawetz identity, one value per grid point.
///
/// Matrices are stored as `d x d` tables of fields.
#[derive(Clone, Debug)]
pub struct WeightDerivatives {
    pub gradient: Vec<Vec<f64>>,
    pub laplacian: Vec<f64>,
    pub bilaplacian: Vec<f64>,
    pub trilaplacian: Vec<f64>,
    pub hessian: Vec<Vec<Vec<f64>>>,
    pub hessian_laplacian: Vec<Vec<Vec<f64>>>,
}

fn outside_window(grid: &Grid, flat: usize, window: usize) -> bool {
    if window == 0 {
        return true;
    }
    let n = grid.points();
    let mut inside = true;
    grid.for_axes(flat, |_, m| {
        if m < window || m >= n - window {
            inside = false;
        }
    });
    inside
}

pub fn weight_derivatives(w: &WeightSpec, grid: &Grid) -> Result<WeightDerivatives> {
    w.validate()?;
    let d = grid.dim();
    let len = grid.len();
    let mut out = WeightDerivatives {
        gradient: vec![vec![0.0; len]; d],
        laplacian: vec![0.0; len],
        bilaplacian: vec![0.0; len],
        trilaplacian: vec![0.0; len],
        hessian: vec![vec![vec![0.0; len]; d]; d],
        hessian_laplacian: vec![vec![vec![0.0; len]; d]; d],
    };
    match w.kind {
        WeightKind::Quadratic => {
            for i in 0..len {
                if !outside_window(grid, i, w.window) {
                    continue;
                }
                let x = grid.position(i);
                for a in 0..d {
                    out.gradient[a][i] = x[a];
                    out.hessian[a][a][i] = 1.0;
                }
                out.laplacian[i] = d as f64;
            }
        }
        WeightKind::RadialEps => {
            let eps2 = w.epsilon * w.epsilon;
            let phi = Laurent::monomial(1, 1.0);
            let lap = phi.laplacian(d, eps2);
            let bilap = lap.laplacian(d, eps2);
            let trilap = bilap.laplacian(d, eps2);
            let hess = RadialHessian::of(&phi);
            let hess_lap = RadialHessian::of(&lap);
            for i in 0..len {
                if !outside_window(grid, i, w.window) {
                    continue;
                }
                let x = grid.position(i);
                let r2: f64 = x[..d].iter().map(|v| v * v).sum();
                let s = (r2 + eps2).sqrt();
                let (g, h) = (hess.g.eval(s), hess.h.eval(s));
                let (gl, hl) = (hess_lap.g.eval(s), hess_lap.h.eval(s));
                for a in 0..d {
                    out.gradient[a][i] = g * x[a];
                    for b in 0..d {
                        let delta = if a == b { 1.0 } else { 0.0 };
                        out.hessian[a][b][i] = g * delta + h * x[a] * x[b];
                        out.hessian_laplacian[a][b][i] = gl * delta + hl * x[a] * x[b];
                    }
                }
                out.laplacian[i] = lap.eval(s);
                out.bilaplacian[i] = bilap.eval(s);
                out.trilaplacian[i] = trilap.eval(s);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Radial Laplacian by central differences in r, for checking the Laurent rule.
    fn fd_laplacian(f: impl Fn(f64) -> f64, r: f64, d: usize) -> f64 {
        let h = 1e-4;
        let f2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        let f1 = (f(r + h) - f(r - h)) / (2.0 * h);
        f2 + (d as f64 - 1.0) / r * f1
    }

    #[test]
    fn laurent_laplacian_matches_finite_differences() {
        let eps = 0.7;
        for d in 1..=3 {
            let phi = Laurent::monomial(1, 1.0);
            let lap = phi.laplacian(d, eps * eps);
            let bilap = lap.laplacian(d, eps * eps);
            for &r in &[0.3, 1.0, 2.5] {
                let s = |r: f64| (r * r + eps * eps).sqrt();
                let direct = fd_laplacian(&s, r, d);
                assert_relative_eq!(lap.eval(s(r)), direct, epsilon = 1e-6, max_relative = 1e-6);
                let direct2 = fd_laplacian(|r| lap.eval(s(r)), r, d);
                assert_relative_eq!(bilap.eval(s(r)), direct2, epsilon = 1e-6, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn quadratic_weight_is_exact() {
        let g = Grid::from_parts(2, 16, 8.0).unwrap();
        let wd = weight_derivatives(&WeightSpec::quadratic(), &g).unwrap();
        assert!(wd.laplacian.iter().all(|&v| v == 2.0));
        assert!(wd.bilaplacian.iter().all(|&v| v == 0.0));
        assert_eq!(wd.gradient[1][5], g.position(5)[1]);
        assert_eq!(wd.hessian[0][1][7], 0.0);
        assert_eq!(wd.hessian[1][1][7], 1.0);
    }

    #[test]
    fn small_epsilon_recovers_radial_laplacian() {
        // Point at r = 1 on the first axis.
        let g = Grid::from_parts(3, 16, 16.0).unwrap();
        let idx = g.flat_index(&[9, 8, 8]);
        assert_eq!(g.position(idx)[0], 1.0);
        let wd = weight_derivatives(&WeightSpec::radial(1e-3), &g).unwrap();
        assert!((wd.laplacian[idx] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn radial_hessian_is_convex_and_laplacian_positive() {
        let g = Grid::from_parts(3, 16, 12.0).unwrap();
        let wd = weight_derivatives(&WeightSpec::radial_default(&g), &g).unwrap();
        for i in 0..g.len() {
            assert!(wd.laplacian[i] > 0.0);
            // Gershgorin is not enough here; test the quadratic form on axes and diagonals.
            for v in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, -1.0, 1.0]] {
                let mut q = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        q += v[a] * wd.hessian[a][b][i] * v[b];
                    }
                }
                assert!(q >= -1e-14);
            }
        }
    }

    #[test]
    fn window_zeroes_edges() {
        let g = Grid::from_parts(1, 32, 10.0).unwrap();
        let wd = weight_derivatives(&WeightSpec::quadratic().with_window(3), &g).unwrap();
        assert_eq!(wd.gradient[0][2], 0.0);
        assert_eq!(wd.laplacian[29], 0.0);
        assert_eq!(wd.laplacian[3], 1.0);
    }

    #[test]
    fn radial_needs_positive_epsilon() {
        let g = Grid::from_parts(1, 32, 10.0).unwrap();
        assert!(weight_derivatives(&WeightSpec::radial(0.0), &g).is_err());
    }
}
