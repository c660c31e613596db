use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square coupling matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    size: usize,
    entries: Vec<f64>,
}

impl Coupling {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            entries: vec![0.0; size * size],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidParams(format!(
                    "coupling row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { size, entries })
    }

    /// Same value in every entry.
    pub fn constant(size: usize, value: f64) -> Self {
        Self {
            size,
            entries: vec![value; size * size],
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut c = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            c.set(i, i, *v);
        }
        c
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.size + j] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    /// Simultaneously permutes rows and columns: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                out.set(i, j, self.get(perm[i], perm[j]));
            }
        }
        out
    }
}

/// Dispersion switch: `0` drops the second-order term, `1` keeps `-Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kappa {
    Zero,
    One,
}

impl Kappa {
    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            0 => Ok(Kappa::Zero),
            1 => Ok(Kappa::One),
            other => Err(Error::InvalidParams(format!(
                "kappa must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Kappa::Zero => 0.0,
            Kappa::One => 1.0,
        }
    }
}

/// Physical parameters of the coupled system.
///
/// The nonlinearity acting on component μ is
/// `F_μ = Σ_ν γ_μν |u_ν|^{p+1} |u_μ|^{p-1} u_μ` with `γ = β + N λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    components: usize,
    p: f64,
    kappa: Kappa,
    beta: Coupling,
    lambda: Coupling,
    gamma: Coupling,
}

impl SystemParams {
    pub fn new(p: f64, kappa: Kappa, beta: Coupling, lambda: Coupling) -> Result<Self> {
        let n = beta.size();
        if n == 0 {
            return Err(Error::InvalidParams("need at least one component".into()));
        }
        if lambda.size() != n {
            return Err(Error::InvalidParams(format!(
                "beta is {n}x{n} but lambda is {0}x{0}",
                lambda.size()
            )));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParams(format!("p must be positive, got {p}")));
        }
        if n > 1 && p < 1.0 {
            return Err(Error::InvalidParams(format!(
                "coupled systems require p >= 1, got {p}"
            )));
        }
        for (name, c) in [("beta", &beta), ("lambda", &lambda)] {
            for i in 0..n {
                for j in 0..n {
                    let v = c.get(i, j);
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::InvalidParams(format!(
                            "{name}[{i}][{j}] = {v} must be finite and nonnegative"
                        )));
                    }
                }
            }
            if !c.is_symmetric() {
                return Err(Error::InvalidParams(format!("{name} must be symmetric")));
            }
        }
        let mut gamma = Coupling::zeros(n);
        for i in 0..n {
            for j in 0..n {
                gamma.set(i, j, beta.get(i, j) + n as f64 * lambda.get(i, j));
            }
        }
        Ok(Self {
            components: n,
            p,
            kappa,
            beta,
            lambda,
            gamma,
        })
    }

    /// Single equation `i u_t + (Δ² - κΔ) u + g |u|^{2p} u = 0`.
    pub fn single(p: f64, kappa: Kappa, strength: f64) -> Result<Self> {
        Self::new(p, kappa, Coupling::constant(1, strength), Coupling::zeros(1))
    }

    /// Parameters given directly by γ (β = γ, λ = 0).
    pub fn from_gamma(p: f64, kappa: Kappa, gamma: Coupling) -> Result<Self> {
        let n = gamma.size();
        Self::new(p, kappa, gamma, Coupling::zeros(n))
    }

    /// Rejects components with neither self-coupling set. Linear (all-zero)
    /// systems are accepted since they serve as controls.
    pub fn require_self_coupling(&self) -> Result<()> {
        for m in 0..self.components {
            if self.beta.get(m, m) == 0.0 && self.lambda.get(m, m) == 0.0 {
                return Err(Error::InvalidParams(format!(
                    "component {m} has beta[{m}][{m}] = lambda[{m}][{m}] = 0"
                )));
            }
        }
        Ok(())
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn beta(&self) -> &Coupling {
        &self.beta
    }

    pub fn lambda(&self) -> &Coupling {
        &self.lambda
    }

    pub fn gamma(&self) -> &Coupling {
        &self.gamma
    }

    pub fn is_linear(&self) -> bool {
        self.gamma.is_zero()
    }

    /// Copy of these parameters with the nonlinearity switched off.
    pub fn linearized(&self) -> Self {
        let n = self.components;
        Self {
            components: n,
            p: self.p,
            kappa: self.kappa,
            beta: Coupling::zeros(n),
            lambda: Coupling::zeros(n),
            gamma: Coupling::zeros(n),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(
            self.p,
            self.kappa,
            self.beta.permuted(perm),
            self.lambda.permuted(perm),
        )
    }
}
