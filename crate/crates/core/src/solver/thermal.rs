//! Thermal-gas limit: advection–diffusion of the sum normal mode with the
//! difference mode slaved to its gradient.

use super::{
    all_finite, check_run, rk4_amplification, rk4_step, step_plan, wants_snapshot, Derivatives, SolverOptions,
    SolverReport, SpatialScheme,
};
use crate::domain::{CouplingSchedule, MediumParams, PolaritonField, SimulationGrid};
use crate::error::{invalid, Error, Result};
use crate::C64;

/// `Ψ_S = κ+* Ψ+ + κ-* Ψ-`.
pub fn sum_mode(field: &PolaritonField, schedule: &CouplingSchedule) -> Vec<C64> {
    let kp = schedule.kappa_plus().conj();
    let km = schedule.kappa_minus().conj();
    field
        .psi_plus
        .iter()
        .zip(&field.psi_minus)
        .map(|(a, b)| kp * a + km * b)
        .collect()
}

/// `Ψ_D = -2 κ+ κ- l_a ∂zΨ_S`, with a spectral derivative.
pub fn difference_mode(
    psi_s: &[C64],
    schedule: &CouplingSchedule,
    l_a: f64,
    grid: &SimulationGrid,
) -> Result<Vec<C64>> {
    if psi_s.len() != grid.n_z() {
        return Err(Error::LengthMismatch {
            expected: grid.n_z(),
            actual: psi_s.len(),
        });
    }
    let coef = -2.0 * schedule.kappa_plus() * schedule.kappa_minus() * l_a;
    let d = Derivatives::new(grid).spectral(psi_s);
    Ok(d.into_iter().map(|v| coef * v).collect())
}

fn reconstruct(psi_s: &[C64], psi_d: &[C64], schedule: &CouplingSchedule, time: f64) -> PolaritonField {
    let kp = schedule.kappa_plus();
    let km = schedule.kappa_minus();
    PolaritonField {
        psi_plus: psi_s.iter().zip(psi_d).map(|(s, d)| kp * s + km.conj() * d).collect(),
        psi_minus: psi_s.iter().zip(psi_d).map(|(s, d)| km * s - kp.conj() * d).collect(),
        time,
    }
}

/// Integrates `∂tΨ_S = -(|κ+|²-|κ-|²) v_g ∂zΨ_S + 4|κ+|²|κ-|² l_a v_g ∂zzΨ_S
/// - Γ_bc sin²θ Ψ_S` and rebuilds `Ψ±` from the normal modes.
pub fn evolve_thermal_numeric(
    init: &PolaritonField,
    schedule: &CouplingSchedule,
    medium: &MediumParams,
    grid: &SimulationGrid,
    t_end: f64,
    options: &SolverOptions,
) -> Result<SolverReport> {
    check_run(init.len(), grid, t_end, options)?;
    if medium.delta_p != 0.0 {
        return Err(invalid(
            "delta_p",
            "the thermal-gas equations assume zero probe detuning",
        ));
    }
    let n = grid.n_z();
    let dz = grid.dz();
    let deriv = Derivatives::new(grid);
    let p = schedule.kappa_plus_sq();
    let m = schedule.kappa_minus_sq();
    let drift = p - m;
    let diffusion = 4.0 * p * m * medium.l_a;
    let gamma = medium.gamma_bc;
    let sponge = options.sponge.map(|s| s.profile(grid)).transpose()?;
    let v0 = schedule.v_g0();

    let rhs = |t: f64, y: &[C64]| -> Vec<C64> {
        let v = schedule.group_velocity(t).unwrap_or(0.0);
        let sin2 = schedule.sin2_theta(t).unwrap_or(1.0);
        // One transform pair for both spatial terms.
        let transport = match options.scheme {
            SpatialScheme::Spectral => {
                let nyq = deriv.ops().nyquist_index();
                deriv.ops().apply(y, |j, q| {
                    let first = if Some(j) == nyq { 0.0 } else { q };
                    C64::new(-diffusion * v * q * q, -drift * v * first)
                })
            }
            SpatialScheme::Upwind2 => {
                let (dy, d2y) = (deriv.upwind(y, drift), deriv.central_second(y));
                (0..n).map(|i| -drift * v * dy[i] + diffusion * v * d2y[i]).collect()
            }
        };
        (0..n)
            .map(|i| {
                let damp = gamma * sin2 + sponge.as_ref().map_or(0.0, |s| s[i]);
                transport[i] - damp * y[i]
            })
            .collect()
    };

    let mut limits = Vec::new();
    if drift.abs() > 0.0 {
        limits.push(dz / (drift.abs() * v0));
    }
    if diffusion > 0.0 {
        limits.push(dz * dz / (2.0 * diffusion * v0));
    }
    let dt_max = options.cfl * limits.into_iter().fold(dz / v0, f64::min);

    // Guard: every Fourier mode must sit inside the RK4 stability region at
    // the largest step and the saturated group velocity.
    let check_stability = |h: f64| -> Result<()> {
        let i = C64::new(0.0, 1.0);
        for &q in deriv.ops().wavenumbers() {
            let (first, second) = match options.scheme {
                SpatialScheme::Spectral => (i * q, C64::new(-q * q, 0.0)),
                SpatialScheme::Upwind2 => {
                    let e = C64::from_polar(1.0, -q * dz * drift.signum());
                    let up = drift.signum() * (3.0 - 4.0 * e + e * e) / (2.0 * dz);
                    (up, C64::new((2.0 * (q * dz).cos() - 2.0) / (dz * dz), 0.0))
                }
            };
            let lambda = -drift * v0 * first + diffusion * v0 * second - gamma;
            let amp = rk4_amplification(lambda * h);
            if amp > 1.0 + 1e-12 {
                return Err(Error::Unstable(format!(
                    "diffusion step {h} outside the RK4 stability region at q = {q} (|R| = {amp})"
                )));
            }
        }
        Ok(())
    };

    let norm = |s: &[C64]| -> f64 {
        let d = difference_mode(s, schedule, medium.l_a, grid).expect("grid-sized state");
        s.iter().chain(&d).map(|v| v.norm_sqr()).sum::<f64>() * dz
    };
    let to_field = |s: &[C64], t: f64| {
        let d = difference_mode(s, schedule, medium.l_a, grid).expect("grid-sized state");
        reconstruct(s, &d, schedule, t)
    };

    let mut y = sum_mode(init, schedule);
    let mut report = SolverReport {
        final_field: init.clone(),
        steps: 0,
        dt: 0.0,
        max_cfl: 0.0,
        norm_history: vec![norm(&y)],
        snapshots: Vec::new(),
    };
    for _ in 0..wants_snapshot(options, 0.0) {
        report.snapshots.push(to_field(&y, 0.0));
    }
    for (start, end, steps) in step_plan(t_end, dt_max, &options.snapshot_times) {
        let h = (end - start) / steps as f64;
        check_stability(h)?;
        for s in 0..steps {
            let t = start + s as f64 * h;
            report.max_cfl = report
                .max_cfl
                .max(drift.abs() * schedule.group_velocity(t + h)? * h / dz);
            rk4_step(&mut y, t, h, &rhs);
            report.steps += 1;
            if !all_finite(&y) {
                return Err(Error::NonFinite {
                    what: "sum normal mode",
                    step: report.steps,
                    time: t + h,
                });
            }
            report.norm_history.push(norm(&y));
        }
        report.dt = report.dt.max(h);
        for _ in 0..wants_snapshot(options, end) {
            report.snapshots.push(to_field(&y, end));
        }
    }
    report.final_field = to_field(&y, t_end);
    Ok(report)
}
