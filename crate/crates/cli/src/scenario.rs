//! Named experiments: each builds the fields for one figure or validation
//! table and writes them to the output directory.

use std::path::PathBuf;

use stationary_light::analytic::{
    initial_split, nonadiabatic_spectral_evolve, probe_from_polariton, ColdAdiabatic, SpectralField,
};
use stationary_light::domain::{
    gaussian_profile, CouplingSchedule, MediumParams, PolaritonField, SimulationGrid, TwoComponent,
};
use stationary_light::fourier::{beta, coeff_a, coeff_d, quadrature_oracle};
use stationary_light::observables::{amplitude_moments, compute_metrics, density_metrics, variance_growth_rate};
use stationary_light::solver::{
    evolve_cold_numeric, evolve_mb_harmonics, evolve_thermal_numeric, MbState, SolverOptions, SolverReport,
};
use stationary_light::spectral::SpectralOps;
use stationary_light::C64;
use thiserror::Error;

use crate::config::{ScenarioConfig, ScenarioName};
use crate::output::{self, OutputError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid setup: {0}")]
    Setup(String),
    #[error("{context}: {source}")]
    Solver {
        context: &'static str,
        source: stationary_light::Error,
    },
    #[error("cannot write output: {0}")]
    Io(#[from] OutputError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Setup(_) => 2,
            RunError::Solver { .. } => 3,
            RunError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    /// Data files, in the order they were written.
    pub files: Vec<PathBuf>,
    pub metrics: Vec<(String, f64)>,
    pub provenance: PathBuf,
}

trait Context<T> {
    fn ctx(self, context: &'static str) -> Result<T, RunError>;
}

impl<T> Context<T> for stationary_light::Result<T> {
    fn ctx(self, context: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Solver { context, source })
    }
}

/// `(t, values)` per time slice.
type Slices = Vec<(f64, Vec<f64>)>;

struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

/// Emitted fields plus scalar metrics and solver settings.
#[derive(Default)]
struct Products {
    heatmaps: Vec<(&'static str, Slices)>,
    tables: Vec<Table>,
    metrics: Vec<(String, f64)>,
    settings: Vec<(String, String)>,
}

impl Products {
    fn metric(&mut self, k: &str, v: f64) {
        self.metrics.push((k.to_string(), v));
    }

    fn setting(&mut self, k: &str, v: impl ToString) {
        self.settings.push((k.to_string(), v.to_string()));
    }
}

struct Setup {
    cfg: ScenarioConfig,
    grid: SimulationGrid,
    schedule: CouplingSchedule,
    psi0: Vec<C64>,
    times: Vec<f64>,
}

impl Setup {
    fn new(cfg: &ScenarioConfig) -> Result<Self, RunError> {
        let setup = |e: stationary_light::Error| RunError::Setup(e.to_string());
        let grid = SimulationGrid::new(cfg.z_min, cfg.z_max, cfg.nz, cfg.t_max).map_err(setup)?;
        let schedule =
            CouplingSchedule::from_intensities(cfg.kappa_plus_sq, cfg.kappa_minus_sq, cfg.phi).map_err(setup)?;
        let psi0 = gaussian_profile(&grid, C64::new(1.0, 0.0), cfg.pulse_length, cfg.z0).map_err(setup)?;
        let n = cfg.snapshots;
        let times = (0..n).map(|k| cfg.t_max * k as f64 / (n - 1) as f64).collect();
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            schedule,
            psi0,
            times,
        })
    }

    fn medium(&self) -> Result<MediumParams, RunError> {
        MediumParams::envelope(self.cfg.gamma_bc, self.cfg.l_a).ctx("medium parameters")
    }

    fn options(&self) -> SolverOptions {
        SolverOptions::default().with_snapshots(self.times.clone())
    }

    /// `|E+|² + |E-|²` in units of the stored peak `|E0|² = cos²θ0`.
    fn energy_density(&self, field: &PolaritonField) -> Result<Vec<f64>, RunError> {
        let probe = probe_from_polariton(field, &self.schedule, field.time).ctx("probe retrieval")?;
        let c0 = self.schedule.cos2_theta0();
        Ok(probe.density().iter().map(|d| d / c0).collect())
    }

    fn density_slices(&self, fields: &[PolaritonField]) -> Result<Vec<(f64, Vec<f64>)>, RunError> {
        fields.iter().map(|f| Ok((f.time, self.energy_density(f)?))).collect()
    }

    fn analytic_fields(&self) -> Result<Vec<PolaritonField>, RunError> {
        let sol =
            ColdAdiabatic::new(&self.psi0, &self.grid, &self.schedule, self.cfg.gamma_bc).ctx("cold closed form")?;
        self.times.iter().map(|&t| sol.at(t).ctx("cold closed form")).collect()
    }

    fn solver_settings(&self, out: &mut Products, label: &str, report: &SolverReport) {
        let o = self.options();
        out.setting(&format!("{label}.scheme"), format!("{:?}", o.scheme));
        out.setting(&format!("{label}.cfl"), o.cfl);
        out.setting(&format!("{label}.steps"), report.steps);
        out.setting(&format!("{label}.dt"), output::num(report.dt));
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn peak(a: &[f64]) -> f64 {
    a.iter().copied().fold(0.0, f64::max)
}

/// Largest deviation of any slice after `t_sat` from the slice at `t_sat`,
/// relative to its peak.
fn stationarity(slices: &[(f64, Vec<f64>)], t_sat: f64) -> Option<f64> {
    let start = slices.iter().position(|(t, _)| *t >= t_sat)?;
    let reference = &slices[start].1;
    let scale = peak(reference);
    Some(
        slices[start..]
            .iter()
            .map(|(_, v)| max_abs_diff(v, reference) / scale)
            .fold(0.0, f64::max),
    )
}

fn fig2_cold(s: &Setup, out: &mut Products) -> Result<(), RunError> {
    let analytic = s.density_slices(&s.analytic_fields()?)?;
    let init = initial_split(&s.psi0, &s.schedule).ctx("initial split")?;
    let report =
        evolve_cold_numeric(&init, &s.schedule, &s.medium()?, &s.grid, s.cfg.t_max, &s.options()).ctx("cold solver")?;
    let numeric = s.density_slices(&report.snapshots)?;
    let err = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| max_abs_diff(&a.1, &n.1) / peak(&a.1))
        .fold(0.0, f64::max);
    out.metric("numeric_vs_analytic_max_rel", err);
    // tanh(3) = 0.995: the coupling has saturated
    if let Some(dev) = stationarity(&numeric, 3.0 * s.schedule.switching_time()) {
        out.metric("stationarity_after_saturation", dev);
    }
    if let Some(last) = report.snapshots.last() {
        out.metric("final_peak", peak(&s.energy_density(last)?));
    }
    s.solver_settings(out, "cold", &report);
    out.heatmaps.push(("energy_density_analytic.csv", analytic));
    out.heatmaps.push(("energy_density_numeric.csv", numeric));
    Ok(())
}

fn thermal_run(s: &Setup, out: &mut Products) -> Result<SolverReport, RunError> {
    let init = initial_split(&s.psi0, &s.schedule).ctx("initial split")?;
    let report = evolve_thermal_numeric(&init, &s.schedule, &s.medium()?, &s.grid, s.cfg.t_max, &s.options())
        .ctx("thermal solver")?;
    s.solver_settings(out, "thermal", &report);
    Ok(report)
}

fn fig2_thermal(s: &Setup, out: &mut Products) -> Result<(), RunError> {
    let report = thermal_run(s, out)?;
    let slices = s.density_slices(&report.snapshots)?;
    let mut history = Vec::new();
    for (t, d) in &slices {
        let m = density_metrics(d, &s.grid, 0.0).ctx("metrics")?;
        // the probe is dark while the coupling is still off
        if m.variance.is_some() {
            history.push((*t, m));
        }
    }
    out.metric(
        "density_variance_rate",
        variance_growth_rate(&history, &s.schedule).ctx("variance regression")?,
    );
    if let Some((_, m)) = history.last() {
        out.metric("final_peak", m.peak_value);
        out.metric("final_centroid", m.centroid.unwrap_or(f64::NAN));
    }
    out.heatmaps.push(("energy_density.csv", slices));
    Ok(())
}

fn fig3_quasi_cold(s: &Setup, out: &mut Products) -> Result<(), RunError> {
    let fields = s.analytic_fields()?;
    if s.schedule.forward_dominant() {
        out.metric("beta", beta(&s.schedule).ctx("beta")?);
    }
    if let Some(last) = fields.last() {
        let m = compute_metrics(last, &s.grid, s.cfg.z0).ctx("metrics")?;
        out.metric("final_forward_fraction", m.forward_fraction);
        out.metric("final_backward_fraction", m.backward_fraction);
    }
    let modulus = |pick: fn(&PolaritonField) -> &[C64]| -> Vec<(f64, Vec<f64>)> {
        fields
            .iter()
            .map(|f| (f.time, pick(f).iter().map(|v| v.norm()).collect()))
            .collect()
    };
    out.heatmaps.push(("psi_plus.csv", modulus(|f| f.plus())));
    out.heatmaps.push(("psi_minus.csv", modulus(|f| f.minus())));
    Ok(())
}

fn fig4_compare(s: &Setup, out: &mut Products) -> Result<(), RunError> {
    let cold = s.density_slices(&s.analytic_fields()?)?;
    let report = thermal_run(s, out)?;
    let thermal = s.density_slices(&report.snapshots)?;
    for (label, slices) in [("cold", &cold), ("thermal", &thermal)] {
        if let Some((_, d)) = slices.last() {
            let m = density_metrics(d, &s.grid, s.cfg.z0).ctx("metrics")?;
            out.metric(&format!("{label}_final_centroid"), m.centroid.unwrap_or(f64::NAN));
            out.metric(&format!("{label}_final_forward_fraction"), m.forward_fraction);
            out.metric(&format!("{label}_final_peak"), m.peak_value);
        }
    }
    out.heatmaps.push(("energy_density_cold.csv", cold));
    out.heatmaps.push(("energy_density_thermal.csv", thermal));
    Ok(())
}

fn nonadiabatic(s: &Setup, out: &mut Products) -> Result<(), RunError> {
    let ops = SpectralOps::new(&s.grid);
    let init = initial_split(&s.psi0, &s.schedule).ctx("initial split")?;
    let spectrum = SpectralField::from_field(&init, &ops).ctx("spectrum")?;
    let fields = s
        .times
        .iter()
        .map(|&t| {
            nonadiabatic_spectral_evolve(&spectrum, &s.schedule, s.cfg.l_a, t)
                .and_then(|f| f.to_field(&ops, t))
                .ctx("spectral propagator")
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dz = s.grid.dz();
    let n0 = init.norm(dz);
    if let Some(last) = fields.last() {
        out.metric("final_norm_ratio", last.norm(dz) / n0);
        let (_, v0) = amplitude_moments(&init.psi_plus, &s.grid).ctx("moments")?;
        let (_, v1) = amplitude_moments(&last.psi_plus, &s.grid).ctx("moments")?;
        out.metric("psi_plus_amplitude_variance_growth", v1 - v0);
        let r = s.schedule.displacement(last.time).ctx("displacement")?;
        out.metric("two_l_a_r", 2.0 * s.cfg.l_a * r);
    }
    let modulus = |pick: fn(&PolaritonField) -> &[C64]| -> Vec<(f64, Vec<f64>)> {
        fields
            .iter()
            .map(|f| (f.time, pick(f).iter().map(|v| v.norm()).collect()))
            .collect()
    };
    out.heatmaps.push(("psi_plus.csv", modulus(|f| f.plus())));
    out.heatmaps.push(("psi_minus.csv", modulus(|f| f.minus())));
    Ok(())
}

pub const MB_GAMMAS: [f64; 4] = [10.0, 30.0, 100.0, 300.0];
pub const MB_TRUNCATIONS: [usize; 4] = [1, 2, 4, 8];

fn mb_convergence(s: &Setup, out: &mut Products) -> Result<(), RunError> {
    let t = s.cfg.t_max;
    let reference = ColdAdiabatic::new(&s.psi0, &s.grid, &s.schedule, s.cfg.gamma_bc)
        .and_then(|sol| sol.at(t))
        .and_then(|f| probe_from_polariton(&f, &s.schedule, t))
        .ctx("cold closed form")?;
    let flat = |p: &dyn TwoComponent| -> Vec<C64> { p.plus().iter().chain(p.minus()).copied().collect() };
    let expected = flat(&reference);
    let denom: f64 = expected.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut rows = Vec::new();
    for &gamma in &MB_GAMMAS {
        let medium =
            MediumParams::with_absorption_length(gamma, s.cfg.gamma_bc, s.cfg.l_a, &s.schedule).ctx("oracle medium")?;
        for &n in &MB_TRUNCATIONS {
            let init = MbState::from_stored_polariton(&s.psi0, n).ctx("oracle state")?;
            let report =
                evolve_mb_harmonics(&init, &s.schedule, &medium, &s.grid, t, &[]).ctx("Maxwell-Bloch oracle")?;
            let got = flat(&report.final_state.probe());
            let err = got
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / denom;
            rows.push(vec![gamma, n as f64, err, report.steps as f64]);
        }
    }
    if let Some(row) = rows.iter().find(|r| r[0] == 100.0 && r[1] == 8.0) {
        out.metric("rel_l2_error_gamma100_n8", row[2]);
    }
    out.setting("oracle.gammas", format!("{MB_GAMMAS:?}"));
    out.setting("oracle.truncations", format!("{MB_TRUNCATIONS:?}"));
    out.tables.push(Table {
        name: "mb_convergence.csv",
        header: vec!["gamma_ba_ts", "truncation", "rel_l2_error", "steps"],
        rows,
    });
    Ok(())
}

/// The coefficient table's y grid: 0, 0.05, ..., 0.95 and 0.99.
pub fn coeff_grid() -> Vec<f64> {
    let mut ys: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
    ys.push(0.99);
    ys
}

fn coeff_table(out: &mut Products) -> Result<(), RunError> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for y in coeff_grid() {
        let (a0, a1) = coeff_a(y).ctx("closed-form coefficients")?;
        let (d0, d1) = coeff_d(y).ctx("closed-form coefficients")?;
        let mut row = vec![y, a0, a1, d0, d1];
        for (closed, n, power) in [(a0, 0, 1), (a1, 1, 1), (d0, 0, 2), (d1, 1, 2)] {
            let delta = closed - quadrature_oracle(n, y, power).ctx("quadrature oracle")?;
            worst = worst.max(delta.abs());
            row.push(delta);
        }
        rows.push(row);
    }
    out.metric("max_oracle_delta", worst);
    out.tables.push(Table {
        name: "coefficients.csv",
        header: vec![
            "y", "a0", "a1", "d0", "d1", "a0_delta", "a1_delta", "d0_delta", "d1_delta",
        ],
        rows,
    });
    Ok(())
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunArtifacts, RunError> {
    let mut out = Products::default();
    let setup = Setup::new(cfg)?;
    match cfg.scenario {
        ScenarioName::Fig2Cold => fig2_cold(&setup, &mut out)?,
        ScenarioName::Fig2Thermal => fig2_thermal(&setup, &mut out)?,
        ScenarioName::Fig3QuasiCold => fig3_quasi_cold(&setup, &mut out)?,
        ScenarioName::Fig4Compare => fig4_compare(&setup, &mut out)?,
        ScenarioName::NonadiabaticStanding | ScenarioName::NonadiabaticTraveling => nonadiabatic(&setup, &mut out)?,
        ScenarioName::MbConvergence => mb_convergence(&setup, &mut out)?,
        ScenarioName::CoeffTable => coeff_table(&mut out)?,
    }

    let dir = &cfg.out_dir;
    output::ensure_dir(dir)?;
    let z = setup.grid.positions();
    let mut files = Vec::new();
    for (name, slices) in &out.heatmaps {
        files.push(output::write_heatmap(dir, name, &z, slices)?);
    }
    for t in &out.tables {
        files.push(output::write_table(dir, t.name, &t.header, &t.rows)?);
    }
    files.push(output::write_metrics(dir, &out.metrics)?);
    let provenance = output::write_provenance(dir, cfg, &out.settings)?;
    Ok(RunArtifacts {
        out_dir: dir.clone(),
        files,
        metrics: out.metrics,
        provenance,
    })
}
