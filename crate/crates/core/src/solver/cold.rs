//! Method-of-lines integrator for the cold-atom polariton equations in the
//! low group velocity limit.

use super::{
    all_finite, check_run, rk4_step, step_plan, wants_snapshot, Derivatives, SolverOptions, SolverReport, SpatialScheme,
};
use crate::domain::{CouplingSchedule, MediumParams, PolaritonField, SimulationGrid};
use crate::error::{Error, Result};
use crate::C64;

/// Matrix `A` of `∂tΨ = -Γ_bc Ψ - v_g A ∂zΨ` for `Ψ = (Ψ+, Ψ-)`. The
/// diagonal uses the dominant intensity fraction `max(|κ+|², |κ-|²)`.
pub fn advection_matrix(schedule: &CouplingSchedule) -> [[C64; 2]; 2] {
    let pmax = schedule.kappa_plus_sq().max(schedule.kappa_minus_sq());
    let k = schedule.cross();
    [[C64::new(pmax, 0.0), -k], [k.conj(), C64::new(-pmax, 0.0)]]
}

/// `(+β v_g, -β v_g)`: the eigen-speeds of the cold system.
pub fn characteristic_speeds(schedule: &CouplingSchedule, t: f64) -> Result<(f64, f64)> {
    let v = schedule.group_velocity(t)?;
    let beta = splitting(schedule);
    Ok((beta * v, -beta * v))
}

/// `√(max(p,m)² - pm)`; equals `β` in either branch.
fn splitting(schedule: &CouplingSchedule) -> f64 {
    let p = schedule.kappa_plus_sq();
    let m = schedule.kappa_minus_sq();
    let pmax = p.max(m);
    (pmax * pmax - p * m).max(0.0).sqrt()
}

pub fn evolve_cold_numeric(
    init: &PolaritonField,
    schedule: &CouplingSchedule,
    medium: &MediumParams,
    grid: &SimulationGrid,
    t_end: f64,
    options: &SolverOptions,
) -> Result<SolverReport> {
    check_run(init.len(), grid, t_end, options)?;
    let n = grid.n_z();
    let dz = grid.dz();
    let deriv = Derivatives::new(grid);
    let a = advection_matrix(schedule);
    let pmax = a[0][0].re;
    let beta = splitting(schedule);
    let gamma = medium.gamma_bc;
    let sponge = options.sponge.map(|s| s.profile(grid)).transpose()?;

    // Flux splitting for the upwind scheme: A² = β² I, so A± = (A ± β)/2
    // carry the right- and left-moving characteristics.
    let half = |sign: f64| {
        let mut m = a;
        m[0][0] += sign * beta;
        m[1][1] += sign * beta;
        m.map(|row| row.map(|v| v * 0.5))
    };
    let (a_right, a_left) = (half(1.0), half(-1.0));

    let rhs = |t: f64, y: &[C64]| -> Vec<C64> {
        let v = schedule.group_velocity(t).unwrap_or(0.0);
        let (psi_p, psi_m) = y.split_at(n);
        let mut out = vec![C64::new(0.0, 0.0); 2 * n];
        match options.scheme {
            SpatialScheme::Spectral => {
                let dp = deriv.spectral(psi_p);
                let dm = deriv.spectral(psi_m);
                for i in 0..n {
                    out[i] = -v * (a[0][0] * dp[i] + a[0][1] * dm[i]);
                    out[n + i] = -v * (a[1][0] * dp[i] + a[1][1] * dm[i]);
                }
            }
            SpatialScheme::Upwind2 => {
                let (bp, bm) = (deriv.upwind(psi_p, 1.0), deriv.upwind(psi_m, 1.0));
                let (fp, fm) = (deriv.upwind(psi_p, -1.0), deriv.upwind(psi_m, -1.0));
                for i in 0..n {
                    out[i] = -v
                        * (a_right[0][0] * bp[i] + a_right[0][1] * bm[i] + a_left[0][0] * fp[i] + a_left[0][1] * fm[i]);
                    out[n + i] = -v
                        * (a_right[1][0] * bp[i] + a_right[1][1] * bm[i] + a_left[1][0] * fp[i] + a_left[1][1] * fm[i]);
                }
            }
        }
        for i in 0..n {
            let damp = gamma + sponge.as_ref().map_or(0.0, |s| s[i]);
            out[i] -= damp * psi_p[i];
            out[n + i] -= damp * psi_m[i];
        }
        out
    };

    let speed0 = pmax * schedule.v_g0();
    let dt_max = options.cfl * dz / speed0;
    let mut y: Vec<C64> = init.psi_plus.iter().chain(&init.psi_minus).copied().collect();
    let norm = |y: &[C64]| y.iter().map(|v| v.norm_sqr()).sum::<f64>() * dz;

    let mut report = SolverReport {
        final_field: init.clone(),
        steps: 0,
        dt: 0.0,
        max_cfl: 0.0,
        norm_history: vec![norm(&y)],
        snapshots: Vec::new(),
    };
    let to_field = |y: &[C64], t: f64| PolaritonField {
        psi_plus: y[..n].to_vec(),
        psi_minus: y[n..].to_vec(),
        time: t,
    };
    for _ in 0..wants_snapshot(options, 0.0) {
        report.snapshots.push(to_field(&y, 0.0));
    }

    for (start, end, steps) in step_plan(t_end, dt_max, &options.snapshot_times) {
        let h = (end - start) / steps as f64;
        for s in 0..steps {
            let t = start + s as f64 * h;
            let cfl = pmax * schedule.group_velocity(t + h)? * h / dz;
            if cfl > options.cfl * (1.0 + 1e-12) {
                return Err(Error::Unstable(format!("Courant number {cfl} exceeds {}", options.cfl)));
            }
            report.max_cfl = report.max_cfl.max(cfl);
            rk4_step(&mut y, t, h, &rhs);
            report.steps += 1;
            if !all_finite(&y) {
                return Err(Error::NonFinite {
                    what: "polariton field",
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{cold_adiabatic_evolve, initial_split};
    use crate::domain::gaussian_profile;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn medium() -> MediumParams {
        MediumParams::envelope(C64::new(0.0, 0.0), 0.1).unwrap()
    }

    fn rel_l2(a: &PolaritonField, b: &PolaritonField) -> f64 {
        let num: f64 = a
            .psi_plus
            .iter()
            .zip(&b.psi_plus)
            .chain(a.psi_minus.iter().zip(&b.psi_minus))
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        (num / b.norm(1.0)).sqrt()
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = SimulationGrid::new(-10.0, 10.0, 64, 1.0).unwrap();
        let s = CouplingSchedule::from_intensities(0.55, 0.45, 0.0).unwrap();
        let r = evolve_cold_numeric(
            &PolaritonField::zeros(64, 0.0),
            &s,
            &medium(),
            &g,
            1.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(r
            .final_field
            .psi_plus
            .iter()
            .chain(&r.final_field.psi_minus)
            .all(|v| v.norm() == 0.0));
        assert_eq!(r.norm_history.len(), r.steps + 1);
    }

    #[test]
    fn speeds_examples() {
        let t = 50.0;
        assert_eq!(
            characteristic_speeds(&CouplingSchedule::standing_wave(), t).unwrap(),
            (0.0, 0.0)
        );
        let (a, b) = characteristic_speeds(&CouplingSchedule::traveling_wave(), t).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b, -1.0, epsilon = 1e-12);
        let (a, _) = characteristic_speeds(&CouplingSchedule::from_intensities(0.55, 0.45, 0.0).unwrap(), t).unwrap();
        assert_relative_eq!(a, 0.234521, epsilon = 5e-7);
    }

    #[test]
    fn quasi_standing_matches_analytic_with_both_schemes() {
        let g = SimulationGrid::new(-10.0, 10.0, 256, 4.0).unwrap();
        let psi = gaussian_profile(&g, C64::new(1.0, 0.0), 1.0, 0.0).unwrap();
        let s = CouplingSchedule::from_intensities(0.55, 0.45, 0.3).unwrap();
        let exact = cold_adiabatic_evolve(&psi, &g, &s, C64::new(0.0, 0.0), 4.0).unwrap();
        let init = initial_split(&psi, &s).unwrap();
        let spectral = evolve_cold_numeric(&init, &s, &medium(), &g, 4.0, &SolverOptions::default()).unwrap();
        assert!(rel_l2(&spectral.final_field, &exact) < 1e-8);
        let opts = SolverOptions {
            scheme: SpatialScheme::Upwind2,
            ..SolverOptions::default()
        };
        let upwind = evolve_cold_numeric(&init, &s, &medium(), &g, 4.0, &opts).unwrap();
        assert!(rel_l2(&upwind.final_field, &exact) < 1e-2);
    }

    #[test]
    fn upwind_converges_at_second_order() {
        let s = CouplingSchedule::from_intensities(0.8, 0.2, 0.0).unwrap();
        let opts = SolverOptions {
            scheme: SpatialScheme::Upwind2,
            ..SolverOptions::default()
        };
        let err = |n: usize| {
            let g = SimulationGrid::new(-10.0, 10.0, n, 3.0).unwrap();
            let psi = gaussian_profile(&g, C64::new(1.0, 0.0), 1.0, 0.0).unwrap();
            let exact = cold_adiabatic_evolve(&psi, &g, &s, C64::new(0.0, 0.0), 3.0).unwrap();
            let r = evolve_cold_numeric(&initial_split(&psi, &s).unwrap(), &s, &medium(), &g, 3.0, &opts).unwrap();
            rel_l2(&r.final_field, &exact)
        };
        let order = (err(128) / err(256)).log2();
        assert!(order > 1.7, "observed order {order}");
    }

    #[test]
    fn snapshots_and_decay() {
        let g = SimulationGrid::new(-10.0, 10.0, 128, 2.0).unwrap();
        let psi = gaussian_profile(&g, C64::new(1.0, 0.0), 1.0, 0.0).unwrap();
        let s = CouplingSchedule::standing_wave();
        let m = MediumParams::envelope(C64::new(0.3, -1.0), 0.0).unwrap();
        let opts = SolverOptions::default().with_snapshots(vec![0.0, 0.7, 2.0]);
        let r = evolve_cold_numeric(&initial_split(&psi, &s).unwrap(), &s, &m, &g, 2.0, &opts).unwrap();
        assert_eq!(r.snapshots.len(), 3);
        assert_relative_eq!(r.snapshots[1].time, 0.7);
        let f = (-C64::new(0.3, -1.0) * 2.0).exp();
        let peak = r.final_field.psi_plus[64];
        assert_relative_eq!((peak - f * std::f64::consts::FRAC_1_SQRT_2).norm(), 0.0, epsilon = 1e-4);
        assert!(r.max_cfl <= 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn speeds_match_matrix_eigenvalues(p in 0.0f64..1.0, phi in -3.2f64..3.2) {
            let s = CouplingSchedule::from_intensities(p, 1.0 - p, phi).unwrap();
            let a = advection_matrix(&s);
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let disc = (tr * tr / 4.0 - det).sqrt();
            let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
            let (c1, c2) = characteristic_speeds(&s, 100.0).unwrap();
            let hi = if l1.re >= l2.re { l1 } else { l2 };
            let lo = if l1.re >= l2.re { l2 } else { l1 };
            prop_assert!((hi - c1).norm() < 1e-12 && (lo - c2).norm() < 1e-12);
        }

        #[test]
        fn norm_bounded_by_initial(p in 0.5f64..1.0) {
            let g = SimulationGrid::new(-12.0, 12.0, 128, 3.0).unwrap();
            let psi = gaussian_profile(&g, C64::new(1.0, 0.0), 1.0, 0.0).unwrap();
            let s = CouplingSchedule::from_intensities(p, 1.0 - p, 0.0).unwrap();
            let r = evolve_cold_numeric(&initial_split(&psi, &s).unwrap(), &s, &medium(), &g, 3.0, &SolverOptions::default()).unwrap();
            let n0 = r.norm_history[0];
            prop_assert!(r.norm_history.iter().all(|n| *n <= n0 * (1.0 + 1e-9)));
        }
    }
}
