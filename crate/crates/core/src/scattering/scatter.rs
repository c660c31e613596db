//! Scattering-state extraction, wave operators and discrete space-time norms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::functionals::{boundary_fraction, h2_distance, h2_norm_total};
use crate::grid::Grid;
use crate::initial::BOUNDARY_THRESHOLD;
use crate::params::SystemParams;
use crate::propagator::{free_evolve, integrate, StepPlan};
use crate::reduce::pairwise_sum_by;
use crate::scattering::exponents::{admissible_pair, Exponent};

/// Cauchy differences below this (relative to the profile norm) count as round-off.
pub const CAUCHY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterReport {
    pub times: Vec<f64>,
    /// Indices of input checkpoints dropped for boundary contamination.
    pub excluded: Vec<usize>,
    /// Pullbacks `v(t_i) = e^{-it_i(Δ²-κΔ)} u(t_i)`.
    pub profiles: Vec<FieldState>,
    /// `c[i][j] = ‖v(t_i) - v(t_j)‖_{H²}`.
    pub cauchy: Vec<Vec<f64>>,
    /// `u₀⁺ = v(t_last)`.
    pub asymptotic_state: FieldState,
    /// `‖u(t_i) - e^{it_i(Δ²-κΔ)} u₀⁺‖_{H²}`.
    pub scattering_error: Vec<f64>,
    /// Largest `‖v(t_i)‖_{H²}`.
    pub profile_norm: f64,
}

impl ScatterReport {
    /// `c(t_{i+1}, t_i)` for consecutive checkpoints.
    pub fn successive(&self) -> Vec<f64> {
        (1..self.times.len()).map(|i| self.cauchy[i][i - 1]).collect()
    }

    pub fn max_cauchy(&self) -> f64 {
        self.cauchy
            .iter()
            .flat_map(|r| r.iter())
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Every Cauchy entry is at the round-off floor (free flow, zero data).
    /// The floor is relative to the profile norm once that exceeds 1.
    pub fn at_floor(&self) -> bool {
        self.max_cauchy() <= CAUCHY_FLOOR * self.profile_norm.max(1.0)
    }

    pub fn strictly_decreasing(&self) -> bool {
        let s = self.successive();
        s.len() >= 2 && s.windows(2).all(|w| w[1] < w[0])
    }

    pub fn success(&self) -> bool {
        self.strictly_decreasing() || self.at_floor()
    }
}

/// Pulls each checkpoint back by the free group and measures Cauchy convergence.
/// Checkpoints with boundary mass above the threshold are dropped with a warning.
pub fn extract_scattering_state(
    checkpoints: &[FieldState],
    grid: &Grid,
    sys: &SystemParams,
) -> Result<ScatterReport> {
    let mut excluded = Vec::new();
    let mut clean = Vec::new();
    for (i, c) in checkpoints.iter().enumerate() {
        c.check_shape(grid, sys.components())?;
        let frac = boundary_fraction(c, grid);
        if frac > BOUNDARY_THRESHOLD {
            log::warn!("checkpoint {i} at t={} dropped: boundary fraction {frac:.3e}", c.t);
            excluded.push(i);
        } else {
            clean.push(c);
        }
    }
    if clean.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: clean.len(),
        });
    }
    let profiles: Vec<FieldState> = clean
        .iter()
        .map(|u| free_evolve(u, grid, sys, -u.t))
        .collect();
    let n = profiles.len();
    let mut cauchy = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let c = h2_distance(&profiles[i], &profiles[j], grid);
            cauchy[i][j] = c;
            cauchy[j][i] = c;
        }
    }
    let asymptotic_state = profiles[n - 1].clone();
    let profiles_norm = profiles
        .iter()
        .map(|v| h2_norm_total(v, grid))
        .fold(0.0, f64::max);
    let scattering_error = clean
        .iter()
        .map(|u| h2_distance(u, &free_evolve(&asymptotic_state, grid, sys, u.t), grid))
        .collect();
    Ok(ScatterReport {
        times: clean.iter().map(|u| u.t).collect(),
        excluded,
        cauchy,
        asymptotic_state,
        scattering_error,
        profiles,
        profile_norm: profiles_norm,
    })
}

/// Approximate wave operator: evolves `u₀⁺` freely to `T`, then integrates the
/// full equation back to `t = 0`.
pub fn wave_operator(
    asymptotic: &FieldState,
    horizon: f64,
    dt: f64,
    grid: &Grid,
    sys: &SystemParams,
) -> Result<FieldState> {
    asymptotic.check_shape(grid, sys.components())?;
    let mut start = free_evolve(asymptotic, grid, sys, horizon);
    start.t = horizon;
    let plan = StepPlan::from_horizon(-horizon, dt, usize::MAX)?;
    let mut out = integrate(&start, grid, sys, &plan, |_, _| Ok(()))?;
    out.t = 0.0;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrip {
    pub initial: FieldState,
    pub reextracted: FieldState,
    /// `‖re-extracted - u₀⁺‖_{H²}`.
    pub discrepancy: f64,
    pub relative: f64,
}

/// Builds `u(0)` by [`wave_operator`] from `T`, integrates it forward to
/// `extract_at`, pulls back by the free group and compares with `u₀⁺`.
///
/// With `extract_at == horizon` the comparison only measures how well the
/// integrator retraces its own steps; a larger `extract_at` also measures how
/// well `u₀⁺` describes the solution beyond `T`.
pub fn wave_operator_round_trip(
    asymptotic: &FieldState,
    horizon: f64,
    extract_at: f64,
    dt: f64,
    grid: &Grid,
    sys: &SystemParams,
) -> Result<RoundTrip> {
    let initial = wave_operator(asymptotic, horizon, dt, grid, sys)?;
    let plan = StepPlan::from_horizon(extract_at, dt, usize::MAX)?;
    let end = integrate(&initial, grid, sys, &plan, |_, _| Ok(()))?;
    let mut reextracted = free_evolve(&end, grid, sys, -end.t);
    reextracted.t = 0.0;
    let discrepancy = h2_distance(&reextracted, asymptotic, grid);
    let norm = h2_norm_total(asymptotic, grid);
    Ok(RoundTrip {
        initial,
        reextracted,
        discrepancy,
        relative: if norm > 0.0 { discrepancy / norm } else { discrepancy },
    })
}

/// `‖w‖_{W^{2,r}}`: `L^r` norms of all derivatives of order ≤ 2 of every
/// component, combined as an `ℓ^r` sum (max for `r = ∞`).
pub fn w2r_norm(state: &FieldState, grid: &Grid, r: f64) -> f64 {
    let hd = grid.cell_volume();
    let d = grid.dim();
    let mut pieces: Vec<Vec<Complex64>> = Vec::new();
    for u in &state.components {
        pieces.push(u.clone());
        pieces.extend(grid.gradient(u));
        let hess = grid.hessian(u);
        for i in 0..d {
            for j in 0..d {
                pieces.push(hess[i][j].clone());
            }
        }
    }
    if r.is_infinite() {
        return pieces
            .iter()
            .flat_map(|f| f.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
    }
    let total: f64 = pieces
        .iter()
        .map(|f| hd * pairwise_sum_by(f.len(), |x| f[x].norm().powf(r)))
        .sum();
    total.powf(1.0 / r)
}

/// Streaming trapezoid quadrature of `∫ ‖w(t)‖^q_{W^{2,r}} dt`.
pub struct SpacetimeNorm<'a> {
    grid: &'a Grid,
    q: f64,
    r: f64,
    last: Option<(f64, f64)>,
    integral: f64,
    /// `(t, running norm)` after each sample.
    pub history: Vec<(f64, f64)>,
}

impl<'a> SpacetimeNorm<'a> {
    pub fn new(grid: &'a Grid, q: Exponent, r: Exponent) -> Result<Self> {
        if !admissible_pair(q, r, grid.dim()) {
            return Err(Error::InvalidArgument(format!(
                "({q}, {r}) is not admissible in dimension {}",
                grid.dim()
            )));
        }
        Ok(Self {
            grid,
            q: q.to_f64(),
            r: r.to_f64(),
            last: None,
            integral: 0.0,
            history: Vec::new(),
        })
    }

    pub fn push(&mut self, state: &FieldState) {
        let v = w2r_norm(state, self.grid, self.r);
        if self.q.is_infinite() {
            self.integral = self.integral.max(v);
        } else {
            let f = v.powf(self.q);
            if let Some((t0, f0)) = self.last {
                self.integral += 0.5 * (state.t - t0) * (f0 + f);
            }
            self.last = Some((state.t, f));
        }
        let value = self.value();
        self.history.push((state.t, value));
    }

    pub fn value(&self) -> f64 {
        if self.q.is_infinite() {
            self.integral
        } else {
            self.integral.powf(1.0 / self.q)
        }
    }
}

pub fn spacetime_norm(trajectory: &[FieldState], grid: &Grid, q: Exponent, r: Exponent) -> Result<f64> {
    let mut acc = SpacetimeNorm::new(grid, q, r)?;
    for s in trajectory {
        acc.push(s);
    }
    Ok(acc.value())
}
