//! Subcommand implementations. Each returns a printable report; a report that
//! did not pass maps to exit code 3.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use q4nl::initial::make_initial;
use q4nl::morawetz::{observed_orders, IdentityMonitor, IdentitySummary, Morawetz};
use q4nl::scattering::{
    admissible_pair, check_exponents, extract_scattering_state, pair_from_p, wave_operator_round_trip, Exponent,
};
use q4nl::{integrate, Error, FieldState, StepPlan};

use crate::checkpoint;
use crate::config::{OutputFormat, RunConfig, Validated};
use crate::error::{CliError, CliResult};
use crate::series::{format_value, write_header, write_row, SeriesRow};

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    pub passed: bool,
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    /// Sets `t_end = steps · dt`.
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(dt) = self.dt {
            c.time.dt = dt;
        }
        if let Some(s) = self.steps {
            c.time.t_end = s as f64 * c.time.dt;
        }
        if let Some(seed) = self.seed {
            c.initial.seed = seed;
        }
    }
}

fn prepare_output(cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = cfg.output.directory.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let copy = dir.join("config.toml");
    fs::write(&copy, cfg.to_toml()?).map_err(|e| CliError::io(&copy, e))?;
    Ok(dir)
}

fn initial_state(cfg: &RunConfig, v: &Validated) -> CliResult<FieldState> {
    Ok(make_initial(cfg.initial.kind, &cfg.initial.params, &v.grid, &v.sys, cfg.initial.seed)?)
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

fn wants(cfg: &RunConfig, f: OutputFormat) -> bool {
    cfg.output.formats.contains(&f)
}

/// Evolves the configured initial data to `t_end`, writing `series.csv`,
/// checkpoints at the configured times and `final.q4nl`.
pub fn simulate(cfg: &RunConfig) -> CliResult<Report> {
    let v = cfg.validate()?;
    let dir = prepare_output(cfg)?;
    let s0 = initial_state(cfg, &v)?;
    let rows = SeriesRow::new(
        &v.grid,
        &v.sys,
        &cfg.diagnostics.q_list,
        &v.weight,
        cfg.diagnostics.interaction.then_some(&v.interaction_weight),
    )?;
    let csv_path = dir.join("series.csv");
    let (tx, rx) = mpsc::sync_channel::<Vec<f64>>(256);
    let writer = if wants(cfg, OutputFormat::Csv) {
        let mut w = csv_writer(&csv_path)?;
        write_header(&mut w, &rows.header()).map_err(|e| csv_error(&csv_path, e))?;
        Some(thread::spawn(move || -> csv::Result<usize> {
            let mut count = 0;
            for row in rx {
                write_row(&mut w, &row)?;
                count += 1;
            }
            w.flush()?;
            Ok(count)
        }))
    } else {
        drop(rx);
        None
    };

    let half_step = 0.5 * v.plan.dt;
    let targets = &cfg.scattering.checkpoint_times;
    let mut next = 0;
    let mut written = Vec::new();
    let first = mass_energy(&s0, &v);
    let mut last = first;
    let result = integrate(&s0, &v.grid, &v.sys, &v.plan, |_, s| {
        if writer.is_some() {
            tx.send(rows.values(s)?)
                .map_err(|_| Error::Io(std::io::Error::other("series writer stopped")))?;
        }
        last = mass_energy(s, &v);
        while next < targets.len() && s.t >= targets[next] - half_step {
            if wants(cfg, OutputFormat::Checkpoint) {
                let path = dir.join(format!("checkpoint_{next:03}.q4nl"));
                checkpoint::save(&path, s, &v.grid, &v.sys)?;
                written.push(path);
            }
            next += 1;
        }
        Ok(())
    });
    drop(tx);
    let count = match writer {
        Some(h) => h
            .join()
            .map_err(|_| CliError::Usage("series writer panicked".into()))?
            .map_err(|e| csv_error(&csv_path, e))?,
        None => 0,
    };
    let end = result?;
    if next < targets.len() {
        log::warn!("{} checkpoint time(s) lie beyond t_end = {}", targets.len() - next, cfg.time.t_end);
    }
    if wants(cfg, OutputFormat::Checkpoint) {
        let path = dir.join("final.q4nl");
        checkpoint::save(&path, &end, &v.grid, &v.sys)?;
        written.push(path);
    }

    let (m0, e0) = first;
    let (m1, e1) = last;
    let mut text = String::new();
    writeln!(text, "simulate: {} steps of dt={} to t={}", v.plan.steps, v.plan.dt, end.t).unwrap();
    writeln!(text, "rows={count} csv={}", csv_path.display()).unwrap();
    writeln!(text, "checkpoints={}", written.len()).unwrap();
    writeln!(text, "relative_mass_drift={}", format_value(relative(m1, m0))).unwrap();
    writeln!(text, "relative_energy_drift={}", format_value(relative(e1, e0))).unwrap();
    Ok(Report { text, passed: true })
}

fn mass_energy(s: &FieldState, v: &Validated) -> (f64, f64) {
    let m: f64 = q4nl::functionals::mass(s, &v.grid).iter().sum();
    (m, q4nl::functionals::energy(s, &v.grid, &v.sys).total)
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn identity_run(cfg: &RunConfig, v: &Validated, dt: f64, negate: bool) -> CliResult<IdentitySummary> {
    let steps = (cfg.time.t_end / dt).round() as usize;
    if steps < 2 {
        return Err(CliError::config("time.t_end", format!("need at least 2 steps of {dt}")));
    }
    let plan = StepPlan::new(dt, steps, 1, 1).map_err(|e| CliError::config("time.dt", e.to_string()))?;
    let mut eval = Morawetz::new(&v.grid, &v.sys, &v.weight)?;
    if negate {
        eval = eval.negate_rhs();
    }
    let mut monitor = IdentityMonitor::new(eval);
    let s0 = initial_state(cfg, v)?;
    integrate(&s0, &v.grid, &v.sys, &plan, |_, s| monitor.push(s))?;
    Ok(monitor.finish()?)
}

/// Morawetz identity check at `dt`, `dt/2`, `dt/4`. Passes when the relative
/// residual at `dt/4` is below `diagnostics.tolerance`. `negate_rhs` flips the
/// sign of the right-hand side (negative control).
pub fn verify(cfg: &RunConfig, negate_rhs: bool) -> CliResult<Report> {
    let v = cfg.validate()?;
    let dir = prepare_output(cfg)?;
    let dts = [cfg.time.dt, cfg.time.dt / 2.0, cfg.time.dt / 4.0];
    let path = dir.join("verify_residuals.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "dt", "t", "action", "rhs_i", "rhs_ii", "rhs_iii", "rhs_iv", "fd_derivative", "residual",
    ])
    .map_err(|e| csv_error(&path, e))?;
    let mut text = String::new();
    let mut maxima = Vec::new();
    let mut finest = 0.0;
    for &dt in &dts {
        let summary = identity_run(cfg, &v, dt, negate_rhs)?;
        for r in &summary.reports {
            let mut row = vec![dt, r.t, r.action];
            row.extend(r.rhs_terms);
            row.extend([r.fd_derivative, r.residual]);
            write_row(&mut w, &row).map_err(|e| csv_error(&path, e))?;
        }
        finest = summary.relative_residual();
        writeln!(
            text,
            "dt={dt:e} max_residual={:e} rhs_scale={:e} relative={finest:e}",
            summary.max_residual, summary.rhs_scale
        )
        .unwrap();
        maxima.push(summary.max_residual);
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    let orders = observed_orders(&maxima);
    writeln!(text, "orders={}", orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(",")).unwrap();
    let passed = finest <= cfg.diagnostics.tolerance;
    writeln!(
        text,
        "verify: {} (relative residual {finest:e} vs tolerance {:e})",
        if passed { "PASS" } else { "FAIL" },
        cfg.diagnostics.tolerance
    )
    .unwrap();
    Ok(Report { text, passed })
}

/// Integrates to each checkpoint time, pulls back and reports Cauchy differences.
pub fn scatter(cfg: &RunConfig) -> CliResult<Report> {
    let v = cfg.validate()?;
    let times = &cfg.scattering.checkpoint_times;
    if times.len() < 3 {
        return Err(CliError::config("scattering.checkpoint_times", "need at least 3 times"));
    }
    let dir = prepare_output(cfg)?;
    let mut cur = initial_state(cfg, &v)?;
    let mut cps = Vec::new();
    for &t in times {
        let plan = StepPlan::from_horizon(t - cur.t, cfg.time.dt, usize::MAX)?;
        cur = integrate(&cur, &v.grid, &v.sys, &plan, |_, _| Ok(()))?;
        cps.push(cur.clone());
    }
    let r = extract_scattering_state(&cps, &v.grid, &v.sys)?;
    let path = dir.join("scatter_report.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["t", "cauchy_prev", "scattering_error"]).map_err(|e| csv_error(&path, e))?;
    for (i, &t) in r.times.iter().enumerate() {
        let prev = if i == 0 { String::new() } else { format_value(r.cauchy[i][i - 1]) };
        w.write_record([format_value(t), prev, format_value(r.scattering_error[i])])
            .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    if wants(cfg, OutputFormat::Checkpoint) {
        checkpoint::save(&dir.join("asymptotic_state.q4nl"), &r.asymptotic_state, &v.grid, &v.sys)?;
    }
    let passed = r.success();
    let mut text = String::new();
    writeln!(text, "excluded={:?}", r.excluded).unwrap();
    writeln!(
        text,
        "successive={}",
        r.successive().iter().map(|c| format_value(*c)).collect::<Vec<_>>().join(",")
    )
    .unwrap();
    writeln!(text, "max_cauchy={}", format_value(r.max_cauchy())).unwrap();
    writeln!(text, "strictly_decreasing={}", r.strictly_decreasing()).unwrap();
    writeln!(text, "at_floor={}", r.at_floor()).unwrap();
    writeln!(text, "scatter: {}", if passed { "PASS" } else { "FAIL" }).unwrap();
    Ok(Report { text, passed })
}

/// Treats the configured initial data as `u₀⁺`, builds `u(0)` from the
/// wave horizon and re-extracts at `extract_at`.
pub fn waveop(cfg: &RunConfig) -> CliResult<Report> {
    let v = cfg.validate()?;
    let dir = prepare_output(cfg)?;
    let u_plus = initial_state(cfg, &v)?;
    let horizon = cfg.scattering.wave_horizon.unwrap_or(cfg.time.t_end);
    if horizon <= 0.0 {
        return Err(CliError::config("scattering.wave_horizon", "horizon must be positive"));
    }
    let extract_at = cfg.scattering.extract_at.unwrap_or(2.0 * horizon);
    let trip = wave_operator_round_trip(&u_plus, horizon, extract_at, cfg.time.dt, &v.grid, &v.sys)?;
    if wants(cfg, OutputFormat::Checkpoint) {
        checkpoint::save(&dir.join("wave_operator_initial.q4nl"), &trip.initial, &v.grid, &v.sys)?;
    }
    let tol = cfg.scattering.round_trip_tolerance;
    let passed = trip.discrepancy <= tol;
    let mut text = String::new();
    writeln!(text, "horizon={horizon} extract_at={extract_at}").unwrap();
    writeln!(text, "h2_discrepancy={}", format_value(trip.discrepancy)).unwrap();
    writeln!(text, "relative={}", format_value(trip.relative)).unwrap();
    writeln!(text, "waveop: {} (tolerance {tol:e})", if passed { "PASS" } else { "FAIL" }).unwrap();
    Ok(Report { text, passed })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckArgs {
    pub d: Option<usize>,
    pub p: Option<String>,
    pub components: usize,
    pub q: Option<String>,
    pub r: Option<String>,
    /// Dimension for the admissibility test; defaults to `d`.
    pub n: Option<usize>,
}

fn parse_exponent(name: &str, s: &str) -> CliResult<Exponent> {
    s.parse().map_err(|e: Error| CliError::Usage(format!("--{name}: {e}")))
}

/// `key=value` lines: exponent flags for `(d, p, N)`, the pair derived from
/// `p`, and the admissibility of `(q, r, n)`.
pub fn check(a: &CheckArgs) -> CliResult<Report> {
    let mut text = String::new();
    match (a.d, &a.p) {
        (Some(d), Some(p)) => {
            let p = match parse_exponent("p", p)? {
                Exponent::Finite(v) => v,
                Exponent::Infinite => return Err(CliError::Usage("--p must be finite".into())),
            };
            let pf = *p.numer() as f64 / *p.denom() as f64;
            text.push_str(&check_exponents(d, pf, a.components.max(1)).to_key_values());
            match pair_from_p(p, d) {
                Ok((q, r)) => writeln!(text, "pair_q={q}\npair_r={r}").unwrap(),
                Err(_) => writeln!(text, "pair=none").unwrap(),
            }
        }
        (None, None) => {}
        _ => return Err(CliError::Usage("--d and --p go together".into())),
    }
    match (&a.q, &a.r) {
        (Some(q), Some(r)) => {
            let n = a.n.or(a.d).ok_or_else(|| CliError::Usage("admissibility needs --n or --d".into()))?;
            let ok = admissible_pair(parse_exponent("q", q)?, parse_exponent("r", r)?, n);
            writeln!(text, "admissible={ok}").unwrap();
        }
        (None, None) => {}
        _ => return Err(CliError::Usage("--q and --r go together".into())),
    }
    if text.is_empty() {
        return Err(CliError::Usage("nothing to check: give --d/--p and/or --q/--r".into()));
    }
    Ok(Report { text, passed: true })
}
