//! Localized Gagliardo–Nirenberg ratio with a moving-cube mass supremum.

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::functionals::h2_norm_total;
use crate::grid::Grid;
use crate::reduce::pairwise_sum_by;

/// Cube side used by default, in physical units.
pub const UNIT_CUBE: f64 = 1.0;

/// Periodic moving-window sums of `values` over cubes of `width` cells
/// (one result per lower corner).
pub fn cube_sums(grid: &Grid, values: &[f64], width: usize) -> Vec<f64> {
    let n = grid.points();
    let d = grid.dim();
    let mut cur = values.to_vec();
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let mut next = vec![0.0; cur.len()];
        for (i, out) in next.iter_mut().enumerate() {
            let m = (i / stride) % n;
            let base = i - m * stride;
            let mut acc = 0.0;
            for o in 0..width {
                acc += cur[base + ((m + o) % n) * stride];
            }
            *out = acc;
        }
        cur = next;
    }
    cur
}

/// `sup_x ∫_{Q_x} Σ_μ |u_μ|²` over cubes of physical side `side`.
pub fn max_cube_mass(state: &FieldState, grid: &Grid, side: f64) -> Result<f64> {
    let length = grid.spec().length;
    if !(side > 0.0 && side <= length) {
        return Err(Error::InvalidArgument(format!(
            "cube side {side} must lie in (0, {length}]"
        )));
    }
    let width = ((side / grid.spacing()).round() as usize).max(1);
    let mut density = vec![0.0; grid.len()];
    for u in &state.components {
        for (acc, z) in density.iter_mut().zip(u.iter()) {
            *acc += z.norm_sqr();
        }
    }
    let sums = cube_sums(grid, &density, width);
    Ok(grid.cell_volume() * sums.iter().cloned().fold(0.0, f64::max))
}

/// `‖u‖^{q}_{L^{q}} / [(sup_x ‖u‖²_{L²(Q_x)})^{2/d}·‖u‖²_{H²}]` with `q = (2d+4)/d`.
///
/// The cube term enters as the `4/d` power of the `L²` norm, i.e. the `2/d`
/// power of the cube mass.
pub fn gn_localized_ratio(state: &FieldState, grid: &Grid, side: f64) -> Result<f64> {
    let d = grid.dim() as f64;
    let q = (2.0 * d + 4.0) / d;
    let cube = max_cube_mass(state, grid, side)?;
    let h2 = h2_norm_total(state, grid);
    if cube == 0.0 || h2 == 0.0 {
        return Ok(0.0);
    }
    let len = grid.len();
    let lhs = grid.cell_volume()
        * pairwise_sum_by(len, |x| {
            let m: f64 = state.components.iter().map(|u| u[x].norm_sqr()).sum();
            m.powf(0.5 * q)
        });
    Ok(lhs / (cube.powf(2.0 / d) * h2 * h2))
}
