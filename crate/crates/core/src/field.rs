use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Snapshot of all components at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub components: Vec<Vec<Complex64>>,
}

impl FieldState {
    pub fn zeros(grid: &Grid, components: usize) -> Self {
        Self {
            t: 0.0,
            components: vec![vec![Complex64::default(); grid.len()]; components],
        }
    }

    pub fn new(t: f64, components: Vec<Vec<Complex64>>) -> Self {
        Self { t, components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn check_shape(&self, grid: &Grid, components: usize) -> Result<()> {
        if self.components.len() != components {
            return Err(Error::Shape(format!(
                "state has {} components, system has {components}",
                self.components.len()
            )));
        }
        if let Some((i, c)) = self
            .components
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != grid.len())
        {
            return Err(Error::Shape(format!(
                "component {i} has {} values, grid has {}",
                c.len(),
                grid.len()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Multiplies component `mu` by `e^{iθ}`.
    pub fn rotate_phase(&mut self, mu: usize, theta: f64) {
        let w = Complex64::from_polar(1.0, theta);
        self.components[mu].iter_mut().for_each(|z| *z *= w);
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            t: self.t,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|z| z * factor).collect())
                .collect(),
        }
    }

    /// Componentwise difference `self - other`, keeping `self.t`.
    pub fn difference(&self, other: &Self) -> Self {
        Self {
            t: self.t,
            components: self
                .components
                .iter()
                .zip(other.components.iter())
                .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x - y).collect())
                .collect(),
        }
    }
}
