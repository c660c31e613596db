//! CSV time series.
//!
//! Columns, in order: `t`, `mass_1..mass_N`, `energy_total`,
//! `energy_biharmonic`, `energy_gradient`, `energy_potential`, `h2_1..h2_N`,
//! `lq_<q>` per exponent, `boundary_mass`, `morawetz_action`, and
//! `interaction_action` when enabled. Values use shortest round-trip
//! exponent notation.

use std::io::Write;

use q4nl::functionals::{boundary_mass, energy, lq_norm_total, mass, sobolev_h2_norm};
use q4nl::morawetz::{InteractionAction, Morawetz, WeightSpec};
use q4nl::{FieldState, Grid, Result, SystemParams};

pub fn header(components: usize, q_list: &[f64], interaction: bool) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=components).map(|i| format!("mass_{i}")));
    for name in ["energy_total", "energy_biharmonic", "energy_gradient", "energy_potential"] {
        h.push(name.to_string());
    }
    h.extend((1..=components).map(|i| format!("h2_{i}")));
    h.extend(q_list.iter().map(|q| format!("lq_{q}")));
    h.push("boundary_mass".into());
    h.push("morawetz_action".into());
    if interaction {
        h.push("interaction_action".into());
    }
    h
}

pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}

/// Computes one row of diagnostics per state.
pub struct SeriesRow<'a> {
    grid: &'a Grid,
    sys: &'a SystemParams,
    q_list: Vec<f64>,
    morawetz: Morawetz<'a>,
    interaction: Option<InteractionAction>,
}

impl<'a> SeriesRow<'a> {
    pub fn new(
        grid: &'a Grid,
        sys: &'a SystemParams,
        q_list: &[f64],
        weight: &WeightSpec,
        interaction: Option<&WeightSpec>,
    ) -> Result<Self> {
        Ok(Self {
            grid,
            sys,
            q_list: q_list.to_vec(),
            morawetz: Morawetz::new(grid, sys, weight)?,
            interaction: interaction.map(|w| InteractionAction::new(grid, w)).transpose()?,
        })
    }

    pub fn header(&self) -> Vec<String> {
        header(self.sys.components(), &self.q_list, self.interaction.is_some())
    }

    pub fn values(&self, s: &FieldState) -> Result<Vec<f64>> {
        let g = self.grid;
        let e = energy(s, g, self.sys);
        let mut row = vec![s.t];
        row.extend(mass(s, g));
        row.extend([e.total, e.kinetic_biharmonic, e.kinetic_gradient, e.potential]);
        row.extend(sobolev_h2_norm(s, g));
        for &q in &self.q_list {
            row.push(lq_norm_total(s, g, q)?);
        }
        row.push(boundary_mass(s, g));
        row.push(self.morawetz.action(s));
        if let Some(ia) = &self.interaction {
            row.push(ia.evaluate(s, g));
        }
        Ok(row)
    }
}

pub fn write_header<W: Write>(w: &mut csv::Writer<W>, header: &[String]) -> csv::Result<()> {
    w.write_record(header)
}

pub fn write_row<W: Write>(w: &mut csv::Writer<W>, row: &[f64]) -> csv::Result<()> {
    w.write_record(row.iter().map(|&v| format_value(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_schema() {
        assert_eq!(
            header(2, &[4.0, 2.5], true).join(","),
            "t,mass_1,mass_2,energy_total,energy_biharmonic,energy_gradient,energy_potential,\
             h2_1,h2_2,lq_4,lq_2.5,boundary_mass,morawetz_action,interaction_action"
        );
        assert!(!header(1, &[], false).contains(&"interaction_action".to_string()));
    }

    #[test]
    fn values_round_trip_through_text() {
        for v in [0.0, -1.5e-300, 1.0 / 3.0, 6.02e23] {
            assert_eq!(format_value(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
