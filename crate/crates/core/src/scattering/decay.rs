//! `L^q` decay of the nonlinear solution against the matched free evolution.

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::functionals::{boundary_fraction, lq_norm_total};
use crate::grid::Grid;
use crate::initial::BOUNDARY_THRESHOLD;
use crate::params::SystemParams;
use crate::propagator::free_evolve;

#[derive(Clone, Debug, PartialEq)]
pub struct DecaySeries {
    pub q_list: Vec<f64>,
    pub times: Vec<f64>,
    /// `norms[i][j]`: `‖u(t_j)‖_{L^{q_i}}` (ℓ² over components).
    pub norms: Vec<Vec<f64>>,
    pub free_norms: Vec<Vec<f64>>,
    pub boundary_fraction: Vec<f64>,
    /// Number of leading samples recorded before the boundary fraction first
    /// exceeded the validity threshold.
    pub valid_len: usize,
    /// Least-squares slope of `log‖u‖` against `log t` over the tail of the
    /// valid window, per `q`; `None` when the tail has fewer than 2 points.
    pub tail_slopes: Vec<Option<f64>>,
    pub free_tail_slopes: Vec<Option<f64>>,
}

impl DecaySeries {
    /// `‖u(t_0)‖ / min_{valid} ‖u(t)‖` for exponent index `i`.
    pub fn decay_factor(&self, i: usize) -> f64 {
        let s = &self.norms[i][..self.valid_len];
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            s[0] / min
        } else {
            f64::INFINITY
        }
    }

    /// `max |‖u‖/‖u_free‖ - 1|` over the valid window.
    pub fn max_free_deviation(&self, i: usize) -> f64 {
        (0..self.valid_len)
            .filter(|&j| self.free_norms[i][j] > 0.0)
            .map(|j| (self.norms[i][j] / self.free_norms[i][j] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Strictly decreasing over the valid window.
    pub fn strictly_decreasing(&self, i: usize) -> bool {
        self.norms[i][..self.valid_len].windows(2).all(|w| w[1] < w[0])
    }
}

fn check_q_list(q_list: &[f64]) -> Result<()> {
    if q_list.is_empty() {
        return Err(Error::InvalidArgument("empty exponent list".into()));
    }
    for &q in q_list {
        if !(q > 2.0 && q.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "decay exponents must lie in (2, inf); got {q} (the L2 norm is conserved)"
            )));
        }
    }
    Ok(())
}

/// Least-squares slope of `log y` on `log t` over the last half of the positive-time samples.
pub fn tail_slope(times: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values.iter())
        .filter(|(t, v)| **t > 0.0 && **v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    let tail = &pts[pts.len() / 2..];
    if tail.len() < 2 {
        return None;
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Streaming monitor. The free comparison starts from the first sample pushed.
pub struct DecayMonitor<'a> {
    grid: &'a Grid,
    sys: &'a SystemParams,
    initial: Option<FieldState>,
    series: DecaySeries,
    contaminated: bool,
}

impl<'a> DecayMonitor<'a> {
    pub fn new(grid: &'a Grid, sys: &'a SystemParams, q_list: &[f64]) -> Result<Self> {
        check_q_list(q_list)?;
        let nq = q_list.len();
        Ok(Self {
            grid,
            sys,
            initial: None,
            series: DecaySeries {
                q_list: q_list.to_vec(),
                times: Vec::new(),
                norms: vec![Vec::new(); nq],
                free_norms: vec![Vec::new(); nq],
                boundary_fraction: Vec::new(),
                valid_len: 0,
                tail_slopes: Vec::new(),
                free_tail_slopes: Vec::new(),
            },
            contaminated: false,
        })
    }

    pub fn push(&mut self, state: &FieldState) -> Result<()> {
        let initial = self.initial.get_or_insert_with(|| state.clone());
        let free = free_evolve(initial, self.grid, self.sys, state.t - initial.t);
        let s = &mut self.series;
        s.times.push(state.t);
        for (i, &q) in s.q_list.iter().enumerate() {
            s.norms[i].push(lq_norm_total(state, self.grid, q)?);
            s.free_norms[i].push(lq_norm_total(&free, self.grid, q)?);
        }
        let frac = boundary_fraction(state, self.grid);
        s.boundary_fraction.push(frac);
        if frac > BOUNDARY_THRESHOLD {
            self.contaminated = true;
        }
        if !self.contaminated {
            s.valid_len = s.times.len();
        }
        Ok(())
    }

    pub fn finish(mut self) -> DecaySeries {
        let s = &mut self.series;
        let v = s.valid_len;
        s.tail_slopes = s.norms.iter().map(|n| tail_slope(&s.times[..v], &n[..v])).collect();
        s.free_tail_slopes = s
            .free_norms
            .iter()
            .map(|n| tail_slope(&s.times[..v], &n[..v]))
            .collect();
        self.series
    }
}

pub fn decay_series(
    trajectory: &[FieldState],
    grid: &Grid,
    sys: &SystemParams,
    q_list: &[f64],
) -> Result<DecaySeries> {
    let mut m = DecayMonitor::new(grid, sys, q_list)?;
    for s in trajectory {
        m.push(s)?;
    }
    Ok(m.finish())
}
