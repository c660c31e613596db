//! Randomized pointwise audit of the convexity hypotheses on the weight.
//!
//! For `φ_ε = s = sqrt(r²+ε²)` and any `f ∈ ℂ^d`, with `f_r` the component
//! along `x̂` and `f⊥ = f - f_r x̂`:
//!
//! * convexity: `f·D²φ_ε·f̄ ≥ (1/s) |f⊥|²`, the regularized form of
//!   `f·D²|x|·f̄ = |f⊥|²/|x|`;
//! * transverse bound: `f·D²Δφ_ε·f̄ ≤ -(d-1)/s³ |f⊥|² + g''(r) |f_r|²` with
//!   `g = Δφ_ε`, the regularized form of
//!   `∇u·D²Δ|x|·∇ū = -(d-1)/|x|³ (|∇⊥u|² - 2|∂_r u|²)`.
//!
//! Only the transverse part carries a sign; the radial coefficient `g''` is
//! positive and is reported, not bounded.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::grid::Grid;
use crate::morawetz::weight::{weight_derivatives, Laurent, RadialHessian, WeightKind, WeightSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub trials: usize,
    /// Minimum of `f·D²φ·f̄ - (1/s)|f⊥|²`, normalized by `|f|²/s`.
    pub convexity_slack: f64,
    /// Minimum of `-(d-1)/s³|f⊥|² + g''|f_r|² - f·D²Δφ·f̄`, normalized by `|f|²/s³`.
    /// `None` for the quadratic weight, where `D²Δφ = 0`.
    pub transverse_slack: Option<f64>,
    /// Smallest eigenvalue of `D²φ` over all grid points.
    pub min_hessian_eigenvalue: f64,
    pub min_laplacian: f64,
    /// Largest positive radial coefficient `g''` seen; the radial part of the
    /// `D²Δφ` form is not one-signed.
    pub max_radial_coefficient: f64,
    /// Relative gap between regularized and exact `|x|` coefficients at
    /// `r ≥ 4ε`, for `ε` and `2ε`.
    pub epsilon_drift: [f64; 2],
    pub tolerance: f64,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.convexity_slack >= -self.tolerance
            && self.transverse_slack.is_none_or(|s| s >= -self.tolerance)
            && self.min_hessian_eigenvalue >= -self.tolerance
            && self.min_laplacian > 0.0
    }
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> [Complex64; 3] {
    let mut f = [Complex64::default(); 3];
    for z in f.iter_mut().take(d) {
        *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    f
}

fn quadratic_form(m: &[Vec<Vec<f64>>], x: usize, f: &[Complex64; 3], d: usize) -> f64 {
    let mut acc = 0.0;
    for a in 0..d {
        for b in 0..d {
            acc += m[a][b][x] * (f[a] * f[b].conj()).re;
        }
    }
    acc
}

/// Smallest eigenvalue of a symmetric `d x d` matrix with `d ≤ 3`.
fn min_eigenvalue(m: [[f64; 3]; 3], d: usize) -> f64 {
    match d {
        1 => m[0][0],
        2 => {
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            0.5 * tr - (0.25 * tr * tr - det).max(0.0).sqrt()
        }
        _ => {
            // Closed-form symmetric 3x3 eigenvalues.
            let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
            let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
            if p1 == 0.0 {
                return m[0][0].min(m[1][1]).min(m[2][2]);
            }
            let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let mut b = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
                }
            }
            let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
                - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
            let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
            q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
        }
    }
}

/// Drift of the transverse coefficients `1/s` and `(d-1)/s³` from `1/r`, `(d-1)/r³`.
fn epsilon_drift(grid: &Grid, eps: f64) -> f64 {
    let d = grid.dim();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let x = grid.position(i);
        let r = x[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 4.0 * eps {
            continue;
        }
        let s = (r * r + eps * eps).sqrt();
        worst = worst.max((r / s - 1.0).abs()).max(((r / s).powi(3) - 1.0).abs());
    }
    worst
}

pub fn weight_condition_check(w: &WeightSpec, grid: &Grid, trials: usize, seed: u64) -> Result<ConditionReport> {
    let wd = weight_derivatives(w, grid)?;
    let d = grid.dim();
    let len = grid.len();
    let tolerance = 1e-12;
    let mut min_eig = f64::INFINITY;
    let mut min_lap = f64::INFINITY;
    for x in 0..len {
        let mut m = [[0.0; 3]; 3];
        for a in 0..d {
            for b in 0..d {
                m[a][b] = wd.hessian[a][b][x];
            }
        }
        min_eig = min_eig.min(min_eigenvalue(m, d));
        min_lap = min_lap.min(wd.laplacian[x]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut convexity: f64 = f64::INFINITY;
    let mut transverse: f64 = f64::INFINITY;
    let mut max_radial: f64 = f64::NEG_INFINITY;
    let eps2 = w.epsilon * w.epsilon;
    let lap = Laurent::monomial(1, 1.0).laplacian(d, eps2);
    let lap_hess = RadialHessian::of(&lap);
    for _ in 0..trials {
        let x = rng.random_range(0..len);
        let f = random_vector(&mut rng, d);
        let pos = grid.position(x);
        let r2: f64 = pos[..d].iter().map(|v| v * v).sum();
        let f2: f64 = f[..d].iter().map(|z| z.norm_sqr()).sum();
        let (fr2, fperp2) = if r2 > 0.0 {
            let r = r2.sqrt();
            let mut fr = Complex64::default();
            for a in 0..d {
                fr += f[a] * (pos[a] / r);
            }
            let fr2 = fr.norm_sqr();
            (fr2, (f2 - fr2).max(0.0))
        } else {
            (0.0, f2)
        };
        match w.kind {
            WeightKind::Quadratic => {
                let lhs = quadratic_form(&wd.hessian, x, &f, d);
                convexity = convexity.min((lhs - f2) / f2);
            }
            WeightKind::RadialEps => {
                let s = (r2 + eps2).sqrt();
                let lhs = quadratic_form(&wd.hessian, x, &f, d);
                convexity = convexity.min((lhs - fperp2 / s) * s / f2);
                // g'' = d²/dr² of g(s(r)) = G + r² H in the Laurent notation.
                let g2 = lap_hess.g.eval(s) + r2 * lap_hess.h.eval(s);
                max_radial = max_radial.max(g2);
                let form = quadratic_form(&wd.hessian_laplacian, x, &f, d);
                let bound = -((d as f64) - 1.0) / s.powi(3) * fperp2 + g2 * fr2;
                transverse = transverse.min((bound - form) * s.powi(3) / f2);
            }
        }
    }
    let (transverse_slack, drift) = match w.kind {
        WeightKind::Quadratic => (None, [0.0, 0.0]),
        WeightKind::RadialEps => (
            Some(transverse),
            [epsilon_drift(grid, w.epsilon), epsilon_drift(grid, 2.0 * w.epsilon)],
        ),
    };
    Ok(ConditionReport {
        trials,
        convexity_slack: convexity,
        transverse_slack,
        min_hessian_eigenvalue: min_eig,
        min_laplacian: min_lap,
        max_radial_coefficient: if max_radial.is_finite() { max_radial } else { 0.0 },
        epsilon_drift: drift,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_weight_passes_in_three_dimensions() {
        let g = Grid::from_parts(3, 16, 12.0).unwrap();
        let w = WeightSpec::radial(4.0 * g.spacing());
        let r = weight_condition_check(&w, &g, 2000, 3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.convexity_slack > -1e-12);
        assert!(r.transverse_slack.unwrap() > -1e-12);
        assert!(r.max_radial_coefficient > 0.0);
        assert!(r.epsilon_drift[1] >= r.epsilon_drift[0]);
    }

    #[test]
    fn quadratic_weight_is_trivially_convex() {
        let g = Grid::from_parts(2, 16, 12.0).unwrap();
        let r = weight_condition_check(&WeightSpec::quadratic(), &g, 100, 0).unwrap();
        assert!(r.passed());
        assert_eq!(r.min_hessian_eigenvalue, 1.0);
        assert!(r.transverse_slack.is_none());
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        assert!((min_eigenvalue(m, 3) - 1.0).abs() < 1e-12);
        assert!((min_eigenvalue(m, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_direction_has_no_transverse_part() {
        // f parallel to x: the convexity bound's right side is 0 and the slack is ε²/s² ≥ 0.
        let g = Grid::from_parts(2, 16, 8.0).unwrap();
        let w = WeightSpec::radial(0.5);
        let wd = weight_derivatives(&w, &g).unwrap();
        let x = g.flat_index(&[11, 8]);
        let f = [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()];
        assert!(quadratic_form(&wd.hessian, x, &f, 2) > 0.0);
    }
}
