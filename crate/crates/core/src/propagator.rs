//! Free bi-harmonic group, exact nonlinear phase flow and their Strang composition.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::Grid;
use crate::params::SystemParams;

/// Dispersion symbol `σ(k) = |k|^4 + κ|k|^2` at every grid point.
#[derive(Clone, Debug)]
pub struct MultiplierTable {
    sigma: Vec<f64>,
}

impl MultiplierTable {
    pub fn new(grid: &Grid, sys: &SystemParams) -> Self {
        let kappa = sys.kappa().value();
        let sigma = grid
            .k_squared()
            .iter()
            .map(|&k2| k2 * k2 + kappa * k2)
            .collect();
        Self { sigma }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `e^{itσ(k)}` per grid point.
    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.sigma
            .par_iter()
            .map(|&s| Complex64::from_polar(1.0, t * s))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub steps: usize,
    /// `+1` forward, `-1` backward.
    pub direction: i8,
    pub record_every: usize,
}

impl StepPlan {
    pub fn new(dt: f64, steps: usize, direction: i8, record_every: usize) -> Result<Self> {
        let plan = Self {
            dt,
            steps,
            direction,
            record_every,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Plan covering `horizon` (sign gives the direction) with step close to `dt`.
    /// The step is shrunk so that `dt * steps` equals `|horizon|` up to round-off.
    pub fn from_horizon(horizon: f64, dt: f64, record_every: usize) -> Result<Self> {
        if !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be finite, got {horizon}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let span = horizon.abs();
        let steps = (span / dt).round() as usize;
        let direction = if horizon < 0.0 { -1 } else { 1 };
        if steps == 0 {
            return Self::new(dt, 0, direction, record_every);
        }
        Self::new(span / steps as f64, steps, direction, record_every)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.direction != 1 && self.direction != -1 {
            return Err(Error::InvalidArgument(format!(
                "direction must be +1 or -1, got {}",
                self.direction
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn signed_dt(&self) -> f64 {
        self.dt * f64::from(self.direction)
    }

    pub fn horizon(&self) -> f64 {
        self.signed_dt() * self.steps as f64
    }
}

fn apply_free(grid: &Grid, state: &mut FieldState, phases: &[Complex64]) {
    for c in state.components.iter_mut() {
        grid.forward(c);
        c.par_iter_mut()
            .zip(phases.par_iter())
            .for_each(|(z, w)| *z *= w);
        grid.inverse(c);
    }
}

fn apply_phase(state: &mut FieldState, sys: &SystemParams, tau: f64) {
    if tau == 0.0 || sys.is_linear() {
        return;
    }
    let p = sys.p();
    let n = sys.components();
    let gamma = sys.gamma();
    let powers: Vec<Vec<f64>> = state
        .components
        .par_iter()
        .map(|c| c.iter().map(|z| z.norm_sqr().powf(0.5 * (p + 1.0))).collect())
        .collect();
    for (mu, c) in state.components.iter_mut().enumerate() {
        let row: Vec<f64> = (0..n).map(|nu| gamma.get(mu, nu)).collect();
        if row.iter().all(|&g| g == 0.0) {
            continue;
        }
        c.par_iter_mut().enumerate().for_each(|(x, z)| {
            let r2 = z.norm_sqr();
            if r2 == 0.0 {
                return;
            }
            let mut phi = 0.0;
            for (nu, &g) in row.iter().enumerate() {
                if g != 0.0 {
                    phi += g * powers[nu][x];
                }
            }
            phi *= r2.powf(0.5 * (p - 1.0));
            *z *= Complex64::from_polar(1.0, tau * phi);
        });
    }
}

/// Exact free flow: `û_μ(k) ← e^{itσ(k)} û_μ(k)`; the state time advances by `t`.
pub fn free_evolve(state: &FieldState, grid: &Grid, sys: &SystemParams, t: f64) -> FieldState {
    let mut out = state.clone();
    if t != 0.0 {
        let phases = MultiplierTable::new(grid, sys).phases(t);
        apply_free(grid, &mut out, &phases);
    }
    out.t = state.t + t;
    out
}

/// Exact flow of `i∂_t u_μ + Φ_μ u_μ = 0` over `τ`, with
/// `Φ_μ = Σ_ν γ_μν |u_ν|^{p+1} |u_μ|^{p-1}`.
pub fn nonlinear_phase_step(state: &FieldState, sys: &SystemParams, tau: f64) -> FieldState {
    let mut out = state.clone();
    apply_phase(&mut out, sys, tau);
    out
}

/// Reusable stepper holding the dispersion symbol and the phase table of the
/// last step size used.
pub struct Stepper<'a> {
    grid: &'a Grid,
    sys: &'a SystemParams,
    table: MultiplierTable,
    cached: Option<(f64, Vec<Complex64>)>,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &'a Grid, sys: &'a SystemParams) -> Self {
        Self {
            grid,
            sys,
            table: MultiplierTable::new(grid, sys),
            cached: None,
        }
    }

    fn phases(&mut self, dt: f64) -> &[Complex64] {
        let stale = self.cached.as_ref().is_none_or(|(t, _)| *t != dt);
        if stale {
            self.cached = Some((dt, self.table.phases(dt)));
        }
        &self.cached.as_ref().expect("cache filled").1
    }

    /// One Strang step `N(dt/2) F(dt) N(dt/2)` in place. Negative `dt` runs backwards.
    pub fn step(&mut self, state: &mut FieldState, dt: f64) {
        let grid = self.grid;
        let sys = self.sys;
        apply_phase(state, sys, 0.5 * dt);
        let phases = self.phases(dt);
        apply_free(grid, state, phases);
        apply_phase(state, sys, 0.5 * dt);
        state.t += dt;
    }

    /// Free flow over `t` in place.
    pub fn free(&mut self, state: &mut FieldState, t: f64) {
        let grid = self.grid;
        let phases = self.phases(t);
        apply_free(grid, state, phases);
        state.t += t;
    }
}

pub fn strang_step(state: &FieldState, grid: &Grid, sys: &SystemParams, dt: f64) -> FieldState {
    let mut out = state.clone();
    Stepper::new(grid, sys).step(&mut out, dt);
    out
}

/// Runs `plan.steps` Strang steps. The observer sees the state after every
/// `record_every`-th step, starting with the input at step 0; an observer
/// error stops the run.
///
/// With all couplings zero the flow is evaluated in closed form from the
/// input at each recorded time, so no round-off accumulates across steps.
pub fn integrate<F>(
    state: &FieldState,
    grid: &Grid,
    sys: &SystemParams,
    plan: &StepPlan,
    mut observer: F,
) -> Result<FieldState>
where
    F: FnMut(usize, &FieldState) -> Result<()>,
{
    plan.validate()?;
    state.check_shape(grid, sys.components())?;
    let t0 = state.t;
    let dt = plan.signed_dt();
    let mut current = state.clone();
    observer(0, &current)?;
    if sys.is_linear() {
        let table = MultiplierTable::new(grid, sys);
        let at = |s: usize| {
            let mut out = state.clone();
            apply_free(grid, &mut out, &table.phases(dt * s as f64));
            out.t = t0 + dt * s as f64;
            out
        };
        for s in (plan.record_every..=plan.steps).step_by(plan.record_every) {
            current = at(s);
            observer(s, &current)?;
        }
        if !plan.steps.is_multiple_of(plan.record_every) {
            current = at(plan.steps);
        }
        return Ok(current);
    }
    let mut stepper = Stepper::new(grid, sys);
    for s in 1..=plan.steps {
        stepper.step(&mut current, dt);
        current.t = t0 + dt * s as f64;
        if !current.is_finite() {
            return Err(Error::BlowUp { t: current.t });
        }
        if s % plan.record_every == 0 {
            observer(s, &current)?;
        }
    }
    Ok(current)
}
