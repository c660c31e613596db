//! The Morawetz action `M(t) = 2 Σ_μ ∫ j_μ·∇φ` and the right-hand side of its
//! time derivative, plus finite-difference verification along a trajectory.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::functionals::coupling_density;
use crate::grid::Grid;
use crate::morawetz::weight::{weight_derivatives, WeightDerivatives, WeightKind, WeightSpec};
use crate::params::SystemParams;
use crate::reduce::pairwise_sum_by;

/// The four groups of the identity, in order:
/// 0: `∫ m(-Δ³φ + κΔ²φ) + 2Δ²φ|∇u|²`,
/// 1: `4∫ ∇u·(D²Δφ - κD²φ)·∇ū`,
/// 2: `-8 Re ∫ Σ ∂_i∂_j u ∂_j∂_k φ ∂_k∂_i ū`,
/// 3: `-(2p/(p+1)) Σ γ_μν ∫ |u_μ|^{p+1}|u_ν|^{p+1} Δφ`.
pub type RhsTerms = [f64; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorawetzReport {
    pub t: f64,
    pub action: f64,
    pub rhs_terms: RhsTerms,
    pub fd_derivative: f64,
    pub residual: f64,
}

impl MorawetzReport {
    pub fn rhs_total(&self) -> f64 {
        self.rhs_terms.iter().sum()
    }
}

/// Evaluator with the weight derivatives sampled once.
pub struct Morawetz<'a> {
    grid: &'a Grid,
    sys: &'a SystemParams,
    kind: WeightKind,
    weight: WeightDerivatives,
    rhs_sign: f64,
}

impl<'a> Morawetz<'a> {
    pub fn new(grid: &'a Grid, sys: &'a SystemParams, w: &WeightSpec) -> Result<Self> {
        Ok(Self {
            grid,
            sys,
            kind: w.kind,
            weight: weight_derivatives(w, grid)?,
            rhs_sign: 1.0,
        })
    }

    /// Negative control: flips the sign of every RHS group so that
    /// verification is expected to fail.
    pub fn negate_rhs(mut self) -> Self {
        self.rhs_sign = -self.rhs_sign;
        self
    }

    pub fn weight(&self) -> &WeightDerivatives {
        &self.weight
    }

    pub fn action(&self, state: &FieldState) -> f64 {
        let d = self.grid.dim();
        let wd = &self.weight;
        let mut total = 0.0;
        for u in &state.components {
            let grad = self.grid.gradient(u);
            total += pairwise_sum_by(u.len(), |x| {
                let mut acc = 0.0;
                for a in 0..d {
                    acc += (u[x].conj() * grad[a][x]).im * wd.gradient[a][x];
                }
                acc
            });
        }
        2.0 * self.grid.cell_volume() * total
    }

    pub fn rhs(&self, state: &FieldState) -> RhsTerms {
        let d = self.grid.dim();
        let hd = self.grid.cell_volume();
        let kappa = self.sys.kappa().value();
        let wd = &self.weight;
        let radial = self.kind == WeightKind::RadialEps;
        let mut terms = [0.0; 4];
        for u in &state.components {
            let grad = self.grid.gradient(u);
            let hess = self.grid.hessian(u);
            let grad_sq = |x: usize| -> f64 { (0..d).map(|a| grad[a][x].norm_sqr()).sum() };
            if radial {
                terms[0] += pairwise_sum_by(u.len(), |x| {
                    u[x].norm_sqr() * (-wd.trilaplacian[x] + kappa * wd.bilaplacian[x])
                        + 2.0 * wd.bilaplacian[x] * grad_sq(x)
                });
            }
            terms[1] += pairwise_sum_by(u.len(), |x| {
                let mut acc = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        let w = wd.hessian_laplacian[a][b][x] - kappa * wd.hessian[a][b][x];
                        if w != 0.0 {
                            acc += w * (grad[a][x] * grad[b][x].conj()).re;
                        }
                    }
                }
                acc
            });
            terms[2] += pairwise_sum_by(u.len(), |x| {
                let mut acc = Complex64::default();
                for i in 0..d {
                    for j in 0..d {
                        for k in 0..d {
                            let w = wd.hessian[j][k][x];
                            if w != 0.0 {
                                acc += hess[i][j][x] * w * hess[k][i][x].conj();
                            }
                        }
                    }
                }
                acc.re
            });
        }
        terms[0] *= hd;
        terms[1] *= 4.0 * hd;
        terms[2] *= -8.0 * hd;
        if !self.sys.is_linear() {
            let p = self.sys.p();
            let density = coupling_density(state, self.sys);
            terms[3] = -(2.0 * p / (p + 1.0))
                * hd
                * pairwise_sum_by(density.len(), |x| density[x] * wd.laplacian[x]);
        }
        terms.map(|v| self.rhs_sign * v)
    }
}

pub fn action_m(state: &FieldState, grid: &Grid, sys: &SystemParams, w: &WeightSpec) -> Result<f64> {
    Ok(Morawetz::new(grid, sys, w)?.action(state))
}

pub fn morawetz_rhs(
    state: &FieldState,
    grid: &Grid,
    sys: &SystemParams,
    w: &WeightSpec,
) -> Result<RhsTerms> {
    Ok(Morawetz::new(grid, sys, w)?.rhs(state))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentitySummary {
    pub reports: Vec<MorawetzReport>,
    pub max_residual: f64,
    /// Largest `|Σ rhs|` seen, used to scale the residual.
    pub rhs_scale: f64,
}

impl IdentitySummary {
    /// `max|residual| / max|Σ rhs|`, or the raw residual when the RHS vanishes.
    pub fn relative_residual(&self) -> f64 {
        if self.rhs_scale > 0.0 {
            self.max_residual / self.rhs_scale
        } else {
            self.max_residual
        }
    }
}

/// Streaming verifier: feed equally spaced samples in order; each interior
/// sample yields one [`MorawetzReport`]. Only three samples are held at a time.
pub struct IdentityMonitor<'a> {
    eval: Morawetz<'a>,
    window: Vec<(f64, f64, RhsTerms)>,
    spacing: Option<f64>,
    count: usize,
    summary: IdentitySummary,
}

impl<'a> IdentityMonitor<'a> {
    pub fn new(eval: Morawetz<'a>) -> Self {
        Self {
            eval,
            window: Vec::with_capacity(3),
            spacing: None,
            count: 0,
            summary: IdentitySummary::default(),
        }
    }

    pub fn push(&mut self, state: &FieldState) -> Result<()> {
        if let Some(&(t_prev, _, _)) = self.window.last() {
            let step = state.t - t_prev;
            match self.spacing {
                None => {
                    if step == 0.0 || !step.is_finite() {
                        return Err(Error::IrregularSampling {
                            index: self.count,
                            spacing: step,
                            expected: f64::NAN,
                        });
                    }
                    self.spacing = Some(step);
                }
                Some(expected) => {
                    if (step - expected).abs() > 1e-9 * expected.abs() {
                        return Err(Error::IrregularSampling {
                            index: self.count,
                            spacing: step,
                            expected,
                        });
                    }
                }
            }
        }
        let entry = (state.t, self.eval.action(state), self.eval.rhs(state));
        if self.window.len() == 3 {
            self.window.remove(0);
        }
        self.window.push(entry);
        self.count += 1;
        if self.window.len() == 3 {
            let (t0, a0, _) = self.window[0];
            let (t1, a1, rhs) = self.window[1];
            let (t2, a2, _) = self.window[2];
            let fd = (a2 - a0) / (t2 - t0);
            let report = MorawetzReport {
                t: t1,
                action: a1,
                rhs_terms: rhs,
                fd_derivative: fd,
                residual: fd - rhs.iter().sum::<f64>(),
            };
            self.summary.max_residual = self.summary.max_residual.max(report.residual.abs());
            self.summary.rhs_scale = self.summary.rhs_scale.max(report.rhs_total().abs());
            self.summary.reports.push(report);
        }
        Ok(())
    }

    pub fn finish(self) -> Result<IdentitySummary> {
        if self.count < 3 {
            return Err(Error::TooFewSamples {
                needed: 3,
                got: self.count,
            });
        }
        Ok(self.summary)
    }
}

/// Centered-difference check of the identity on stored samples.
pub fn verify_identity(
    samples: &[FieldState],
    grid: &Grid,
    sys: &SystemParams,
    w: &WeightSpec,
) -> Result<IdentitySummary> {
    let mut monitor = IdentityMonitor::new(Morawetz::new(grid, sys, w)?);
    for s in samples {
        monitor.push(s)?;
    }
    monitor.finish()
}

/// Observed convergence orders `log2(e_i / e_{i+1})` for errors measured at
/// successively halved step sizes.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::{make_initial, InitialKind, InitialParams};
    use crate::params::Kappa;
    use crate::propagator::free_evolve;
    use approx::assert_relative_eq;

    fn moving_packet(grid: &Grid, sys: &SystemParams, v: Vec<f64>) -> FieldState {
        let p = InitialParams {
            amplitude: 0.7,
            width: 1.2,
            center: vec![0.5, -0.3],
            velocity: v,
            ..Default::default()
        };
        make_initial(InitialKind::GaussianPacket, &p, grid, sys, 0).unwrap()
    }

    #[test]
    fn zero_and_real_fields_have_no_action() {
        let g = Grid::from_parts(2, 32, 24.0).unwrap();
        let sys = SystemParams::single(1.0, Kappa::One, 1.0).unwrap();
        let zero = FieldState::zeros(&g, 1);
        let w = WeightSpec::radial_default(&g);
        assert_eq!(action_m(&zero, &g, &sys, &w).unwrap(), 0.0);
        assert_eq!(morawetz_rhs(&zero, &g, &sys, &w).unwrap(), [0.0; 4]);
        let real = moving_packet(&g, &sys, vec![]);
        assert!(action_m(&real, &g, &sys, &w).unwrap().abs() < 1e-13);
    }

    #[test]
    fn action_matches_velocity_moment() {
        // For A e^{-|x-c|²/2σ²} e^{iv·x}, j = v|u|², so M = 2 ∫ |u|² v·x.
        let g = Grid::from_parts(2, 64, 24.0).unwrap();
        let sys = SystemParams::single(1.0, Kappa::One, 1.0).unwrap();
        let s = moving_packet(&g, &sys, vec![0.4, -0.9]);
        let m = action_m(&s, &g, &sys, &WeightSpec::quadratic()).unwrap();
        let mass = 0.49 * std::f64::consts::PI * 1.44;
        let expected = 2.0 * mass * (0.4 * 0.5 + 0.9 * 0.3);
        assert_relative_eq!(m, expected, max_relative = 1e-10);
    }

    #[test]
    fn quadratic_groups_reduce_to_closed_forms() {
        let g = Grid::from_parts(2, 64, 24.0).unwrap();
        let sys = SystemParams::single(2.0, Kappa::One, 1.3).unwrap();
        let s = moving_packet(&g, &sys, vec![0.4, -0.9]);
        let t = morawetz_rhs(&s, &g, &sys, &WeightSpec::quadratic()).unwrap();
        let u = &s.components[0];
        let hd = g.cell_volume();
        let grad = g.gradient(u);
        let hess = g.hessian(u);
        let grad2: f64 = (0..g.len()).map(|x| grad[0][x].norm_sqr() + grad[1][x].norm_sqr()).sum();
        let hess2: f64 = (0..g.len())
            .map(|x| (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| hess[i][j][x].norm_sqr()).sum::<f64>())
            .sum();
        let pot: f64 = u.iter().map(|z| 1.3 * z.norm_sqr().powi(3)).sum();
        assert_eq!(t[0], 0.0);
        assert_relative_eq!(t[1], -4.0 * hd * grad2, max_relative = 1e-10);
        assert_relative_eq!(t[2], -8.0 * hd * hess2, max_relative = 1e-10);
        assert_relative_eq!(t[3], -(2.0 * 2.0 * 2.0 / 3.0) * hd * pot, max_relative = 1e-10);
        assert!(t.iter().all(|&v| v <= 0.0));
    }

    #[test]
    fn free_virial_identity_holds() {
        let g = Grid::from_parts(2, 64, 40.0).unwrap();
        let sys = SystemParams::single(1.0, Kappa::One, 0.0).unwrap();
        let s0 = moving_packet(&g, &sys, vec![0.3, 0.1]);
        let samples: Vec<FieldState> = (0..5).map(|i| free_evolve(&s0, &g, &sys, 0.01 * i as f64)).collect();
        let summary = verify_identity(&samples, &g, &sys, &WeightSpec::quadratic()).unwrap();
        assert_eq!(summary.reports.len(), 3);
        assert!(summary.relative_residual() < 1e-9, "{summary:?}");
        let bad = {
            let mut m = IdentityMonitor::new(Morawetz::new(&g, &sys, &WeightSpec::quadratic()).unwrap().negate_rhs());
            for s in &samples {
                m.push(s).unwrap();
            }
            m.finish().unwrap()
        };
        assert!(bad.relative_residual() > 1.0);
    }

    #[test]
    fn rejects_irregular_or_short_input() {
        let g = Grid::from_parts(1, 64, 40.0).unwrap();
        let sys = SystemParams::single(1.0, Kappa::One, 0.0).unwrap();
        let s0 = FieldState::zeros(&g, 1);
        let mk = |t: f64| FieldState { t, ..s0.clone() };
        let w = WeightSpec::quadratic();
        assert!(matches!(
            verify_identity(&[mk(0.0), mk(0.1), mk(0.3)], &g, &sys, &w),
            Err(Error::IrregularSampling { index: 2, .. })
        ));
        assert!(matches!(
            verify_identity(&[mk(0.0), mk(0.1)], &g, &sys, &w),
            Err(Error::TooFewSamples { .. })
        ));
        let ok = verify_identity(&[mk(0.0), mk(0.1), mk(0.2)], &g, &sys, &w).unwrap();
        assert_eq!(ok.max_residual, 0.0);
    }
}
