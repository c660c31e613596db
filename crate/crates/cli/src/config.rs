//! TOML run configuration.

use std::path::{Path, PathBuf};

use q4nl::initial::{InitialKind, InitialParams};
use q4nl::morawetz::{WeightKind, WeightSpec};
use q4nl::{Coupling, Grid, Kappa, StepPlan, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub system: SystemConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub scattering: ScatteringConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "N")]
    pub components: usize,
    pub p: f64,
    pub kappa: i64,
    pub beta: Vec<Vec<f64>>,
    /// Off-diagonal coupling; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: InitialParams,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::GaussianPacket,
            seed: 0,
            params: InitialParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    pub kind: WeightKind,
    /// `ε` in grid cells, for the radial weight.
    pub epsilon_cells: f64,
    pub window_cells: usize,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            kind: WeightKind::Quadratic,
            epsilon_cells: 2.0,
            window_cells: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub q_list: Vec<f64>,
    pub weight: WeightConfig,
    /// Adds the interaction action column (radial weight with `epsilon_cells`).
    pub interaction: bool,
    /// `verify` passes when the largest residual divided by the largest
    /// `|rhs|` at the finest step is below this.
    pub tolerance: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            q_list: vec![4.0],
            weight: WeightConfig::default(),
            interaction: false,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringConfig {
    pub checkpoint_times: Vec<f64>,
    /// Wave-operator horizon; `time.t_end` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wave_horizon: Option<f64>,
    /// Re-extraction time for the round trip; twice the horizon when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extract_at: Option<f64>,
    pub round_trip_tolerance: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self {
            checkpoint_times: Vec::new(),
            wave_horizon: None,
            extract_at: None,
            round_trip_tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Checkpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Checkpoint],
        }
    }
}

/// Everything a command needs, built from a checked config.
#[derive(Clone, Debug)]
pub struct Validated {
    pub grid: Grid,
    pub sys: SystemParams,
    pub weight: WeightSpec,
    /// Radial weight used for the interaction action.
    pub interaction_weight: WeightSpec,
    pub plan: StepPlan,
}

fn positive(path: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn matrix(path: &str, rows: &[Vec<f64>], size: usize) -> CliResult<Coupling> {
    if rows.len() != size {
        return Err(CliError::config(path, format!("expected {size} rows, got {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != size {
            return Err(CliError::config(
                format!("{path}[{i}]"),
                format!("expected {size} entries, got {}", row.len()),
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::config(
                    format!("{path}[{i}][{j}]"),
                    format!("couplings must be finite and non-negative, got {v}"),
                ));
            }
            if rows[j][i] != v {
                return Err(CliError::config(
                    format!("{path}[{i}][{j}]"),
                    format!("matrix must be symmetric: {v} vs {path}[{j}][{i}] = {}", rows[j][i]),
                ));
            }
        }
    }
    Coupling::from_rows(rows).map_err(|e| CliError::config(path, e.to_string()))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| {
            let path = e.span().map_or_else(String::new, |s| format!("byte {}..{}", s.start, s.end));
            CliError::config(if path.is_empty() { "<root>".into() } else { path }, e.message().to_string())
        })
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::config("<root>", e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn steps(&self) -> usize {
        (self.time.t_end / self.time.dt).round() as usize
    }

    /// Checks every field and builds the numerical objects.
    pub fn validate(&self) -> CliResult<Validated> {
        let g = &self.grid;
        if !(1..=3).contains(&g.d) {
            return Err(CliError::config("grid.d", format!("must be 1, 2 or 3, got {}", g.d)));
        }
        if g.n < 8 || !g.n.is_multiple_of(2) {
            return Err(CliError::config("grid.n", format!("must be even and at least 8, got {}", g.n)));
        }
        positive("grid.L", g.length)?;
        let grid = Grid::from_parts(g.d, g.n, g.length).map_err(|e| CliError::config("grid", e.to_string()))?;

        let s = &self.system;
        if s.components == 0 {
            return Err(CliError::config("system.N", "need at least one component"));
        }
        positive("system.p", s.p)?;
        let kappa = Kappa::from_int(s.kappa).map_err(|e| CliError::config("system.kappa", e.to_string()))?;
        let beta = matrix("system.beta", &s.beta, s.components)?;
        let lambda = match &s.lambda {
            Some(rows) => matrix("system.lambda", rows, s.components)?,
            None => Coupling::zeros(s.components),
        };
        let sys = SystemParams::new(s.p, kappa, beta, lambda).map_err(|e| CliError::config("system", e.to_string()))?;

        let t = &self.time;
        positive("time.dt", t.dt)?;
        if !(t.t_end.is_finite() && t.t_end >= 0.0) {
            return Err(CliError::config("time.t_end", format!("must be finite and non-negative, got {}", t.t_end)));
        }
        if t.record_every == 0 {
            return Err(CliError::config("time.record_every", "must be at least 1"));
        }
        let plan = StepPlan::new(t.dt, self.steps(), 1, t.record_every)
            .map_err(|e| CliError::config("time", e.to_string()))?;

        self.validate_initial(g.d, s.components)?;

        let dg = &self.diagnostics;
        for (i, &q) in dg.q_list.iter().enumerate() {
            if !(q.is_finite() && q > 2.0) {
                return Err(CliError::config(
                    format!("diagnostics.q_list[{i}]"),
                    format!("exponents must lie in (2, inf), got {q}"),
                ));
            }
        }
        positive("diagnostics.weight.epsilon_cells", dg.weight.epsilon_cells)?;
        positive("diagnostics.tolerance", dg.tolerance)?;
        let eps = dg.weight.epsilon_cells * grid.spacing();
        let weight = match dg.weight.kind {
            WeightKind::Quadratic => WeightSpec::quadratic(),
            WeightKind::RadialEps => WeightSpec::radial(eps),
        }
        .with_window(dg.weight.window_cells);
        let interaction_weight = WeightSpec::radial(eps).with_window(dg.weight.window_cells);

        let sc = &self.scattering;
        for (i, &tc) in sc.checkpoint_times.iter().enumerate() {
            positive(&format!("scattering.checkpoint_times[{i}]"), tc)?;
            if i > 0 && tc <= sc.checkpoint_times[i - 1] {
                return Err(CliError::config(
                    format!("scattering.checkpoint_times[{i}]"),
                    "times must be strictly increasing",
                ));
            }
        }
        if let Some(h) = sc.wave_horizon {
            positive("scattering.wave_horizon", h)?;
        }
        if let Some(x) = sc.extract_at {
            positive("scattering.extract_at", x)?;
        }
        positive("scattering.round_trip_tolerance", sc.round_trip_tolerance)?;

        Ok(Validated {
            grid,
            sys,
            weight,
            interaction_weight,
            plan,
        })
    }

    fn validate_initial(&self, d: usize, components: usize) -> CliResult<()> {
        let p = &self.initial.params;
        let finite = |path: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(path, format!("must be finite, got {v}")))
            }
        };
        let vector = |path: &str, v: &[f64]| -> CliResult<()> {
            if v.len() > d {
                return Err(CliError::config(path, format!("has {} entries for d = {d}", v.len())));
            }
            for (i, x) in v.iter().enumerate() {
                finite(&format!("{path}[{i}]"), *x)?;
            }
            Ok(())
        };
        finite("initial.params.amplitude", p.amplitude)?;
        positive("initial.params.width", p.width)?;
        vector("initial.params.center", &p.center)?;
        vector("initial.params.velocity", &p.velocity)?;
        for (i, s) in p.component_scale.iter().enumerate() {
            finite(&format!("initial.params.component_scale[{i}]"), *s)?;
        }
        positive("initial.params.spectral_width", p.spectral_width)?;
        if p.spectral_order == 0 {
            return Err(CliError::config("initial.params.spectral_order", "must be at least 1"));
        }
        if !(p.spectral_radius.is_finite() && p.spectral_radius >= 0.0) {
            return Err(CliError::config(
                "initial.params.spectral_radius",
                format!("must be finite and non-negative, got {}", p.spectral_radius),
            ));
        }
        if self.initial.kind == InitialKind::MultiBump && p.bumps.is_empty() {
            return Err(CliError::config("initial.params.bumps", "multi_bump needs at least one bump"));
        }
        for (i, b) in p.bumps.iter().enumerate() {
            let base = format!("initial.params.bumps[{i}]");
            if let Some(c) = b.component {
                if c >= components {
                    return Err(CliError::config(
                        format!("{base}.component"),
                        format!("component {c} out of range for N = {components}"),
                    ));
                }
            }
            finite(&format!("{base}.amplitude"), b.amplitude)?;
            positive(&format!("{base}.width"), b.width)?;
            vector(&format!("{base}.center"), &b.center)?;
            vector(&format!("{base}.velocity"), &b.velocity)?;
        }
        Ok(())
    }
}
