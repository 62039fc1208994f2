//! Weak-probe Maxwell–Bloch equations projected onto spatial harmonics of
//! the coupling-field grating.
//!
//! Coherences are stored collectively, `S = √N σ`. With `G = g_p √N` and the
//! coupling field `Ω (κ+ e^{ikz} + κ- e^{-ikz})` the harmonics obey
//!
//! ```text
//! ∂t S_ba[m] = i(G E±·δ_{m,±1} + Ω(κ+ S_bc[m-1] + κ- S_bc[m+1])) - Γ_ba S_ba[m]
//! ∂t S_bc[m] = iΩ(κ+* S_ba[m+1] + κ-* S_ba[m-1]) - Γ_bc S_bc[m]
//! (∂t ± c∂z) E± = iG S_ba[±1]
//! ```
//!
//! A truncation `N` keeps the odd `σ_ba` harmonics `|m| ≤ 2N-1` and the even
//! `σ_bc` harmonics `|m| ≤ 2N-2`; `N = 1` retains only `σ_bc^(0)`.

use crate::domain::{CouplingSchedule, MediumParams, ProbeField, SimulationGrid};
use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralOps;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct MbState {
    pub time: f64,
    pub e_plus: Vec<C64>,
    pub e_minus: Vec<C64>,
    truncation: usize,
    /// `σ_ba^(m)` for `m = -(2N-1), -(2N-3), …, 2N-1`.
    sigma_ba: Vec<Vec<C64>>,
    /// `σ_bc^(m)` for `m = -(2N-2), …, 2N-2`.
    sigma_bc: Vec<Vec<C64>>,
}

impl MbState {
    /// All-zero state on `n` samples.
    pub fn zeros(truncation: usize, n: usize) -> Result<Self> {
        if truncation < 1 {
            return Err(invalid("truncation", "need at least one retained harmonic pair"));
        }
        let zero = vec![C64::new(0.0, 0.0); n];
        Ok(Self {
            time: 0.0,
            e_plus: zero.clone(),
            e_minus: zero.clone(),
            truncation,
            sigma_ba: vec![zero.clone(); 2 * truncation],
            sigma_bc: vec![zero; 2 * truncation - 1],
        })
    }

    /// Stored excitation `S_bc^(0) = -Ψ`, no probe light and no optical
    /// coherence: the state at the instant the coupling field is switched on.
    pub fn from_stored_polariton(psi0: &[C64], truncation: usize) -> Result<Self> {
        let mut s = Self::zeros(truncation, psi0.len())?;
        s.sigma_bc[truncation - 1] = psi0.iter().map(|v| -v).collect();
        Ok(s)
    }

    /// Probe light entering an unexcited medium.
    pub fn from_probe(probe: &ProbeField, truncation: usize) -> Result<Self> {
        let mut s = Self::zeros(truncation, probe.len())?;
        s.e_plus = probe.e_plus.clone();
        s.e_minus = probe.e_minus.clone();
        Ok(s)
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.e_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_plus.is_empty()
    }

    pub fn ba_indices(&self) -> impl Iterator<Item = i64> {
        let top = 2 * self.truncation as i64 - 1;
        (-top..=top).step_by(2)
    }

    pub fn bc_indices(&self) -> impl Iterator<Item = i64> {
        let top = 2 * self.truncation as i64 - 2;
        (-top..=top).step_by(2)
    }

    fn ba_slot(&self, m: i64) -> Option<usize> {
        let top = 2 * self.truncation as i64 - 1;
        (m.rem_euclid(2) == 1 && m.abs() <= top).then(|| ((m + top) / 2) as usize)
    }

    fn bc_slot(&self, m: i64) -> Option<usize> {
        let top = 2 * self.truncation as i64 - 2;
        (m.rem_euclid(2) == 0 && m.abs() <= top).then(|| ((m + top) / 2) as usize)
    }

    /// `S_ba^(m)`; `None` outside the retained band.
    pub fn sigma_ba(&self, m: i64) -> Option<&[C64]> {
        self.ba_slot(m).map(|i| self.sigma_ba[i].as_slice())
    }

    /// `S_bc^(m)`; `None` outside the retained band.
    pub fn sigma_bc(&self, m: i64) -> Option<&[C64]> {
        self.bc_slot(m).map(|i| self.sigma_bc[i].as_slice())
    }

    pub fn sigma_ba_mut(&mut self, m: i64) -> Option<&mut Vec<C64>> {
        self.ba_slot(m).map(|i| &mut self.sigma_ba[i])
    }

    pub fn sigma_bc_mut(&mut self, m: i64) -> Option<&mut Vec<C64>> {
        self.bc_slot(m).map(|i| &mut self.sigma_bc[i])
    }

    pub fn probe(&self) -> ProbeField {
        ProbeField {
            e_plus: self.e_plus.clone(),
            e_minus: self.e_minus.clone(),
        }
    }

    fn flatten(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.len() * (2 + self.sigma_ba.len() + self.sigma_bc.len()));
        out.extend_from_slice(&self.e_plus);
        out.extend_from_slice(&self.e_minus);
        self.sigma_ba.iter().for_each(|v| out.extend_from_slice(v));
        self.sigma_bc.iter().for_each(|v| out.extend_from_slice(v));
        out
    }

    fn unflatten(&mut self, y: &[C64], time: f64) {
        let n = self.len();
        let mut chunks = y.chunks_exact(n);
        self.e_plus.copy_from_slice(chunks.next().expect("layout"));
        self.e_minus.copy_from_slice(chunks.next().expect("layout"));
        for v in self.sigma_ba.iter_mut().chain(self.sigma_bc.iter_mut()) {
            v.copy_from_slice(chunks.next().expect("layout"));
        }
        self.time = time;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbReport {
    pub final_state: MbState,
    /// States at the requested snapshot times.
    pub snapshots: Vec<MbState>,
    pub steps: usize,
    pub dt: f64,
}

/// Largest step used by the oracle: resolves the fastest Rabi oscillation
/// `√(G² + 2Ω_max²)` and keeps `c q_max dt` inside the RK4 stability region.
pub fn mb_time_step(schedule: &CouplingSchedule, medium: &MediumParams, grid: &SimulationGrid) -> f64 {
    let g = medium.collective_coupling;
    let c2 = schedule.cos2_theta0();
    let omega_sq = g * g * c2 / (1.0 - c2);
    let q_max = SpectralOps::new(grid).max_wavenumber();
    let rabi = 0.25 / (g * g + 2.0 * omega_sq).sqrt();
    rabi.min(2.0 / (schedule.light_speed() * q_max))
}

/// Integrates the truncated harmonic system from `init` to `t_end`.
///
/// Relaxation (`-Γ_ba`, `-Γ_bc`) is integrated exactly; propagation and the
/// Rabi couplings use a Lawson-type RK4 on top of it.
pub fn evolve_mb_harmonics(
    init: &MbState,
    schedule: &CouplingSchedule,
    medium: &MediumParams,
    grid: &SimulationGrid,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<MbReport> {
    medium.validate()?;
    if init.len() != grid.n_z() {
        return Err(Error::LengthMismatch {
            expected: grid.n_z(),
            actual: init.len(),
        });
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", format!("must be positive, got {t_end}")));
    }
    if medium.collective_coupling <= 0.0 {
        return Err(invalid(
            "collective_coupling",
            "the Maxwell-Bloch model needs g_p sqrt(N) > 0",
        ));
    }
    let n = grid.n_z();
    let big_n = init.truncation();
    let n_ba = 2 * big_n;
    let n_bc = 2 * big_n - 1;
    let ops = SpectralOps::new(grid);
    let g = medium.collective_coupling;
    let c = schedule.light_speed();
    let kp = schedule.kappa_plus();
    let km = schedule.kappa_minus();
    let gamma_ba = medium.gamma_ba_complex();
    let gamma_bc = medium.gamma_bc;
    let i = C64::new(0.0, 1.0);

    let e_off = 0;
    let ba_off = 2 * n;
    let bc_off = ba_off + n_ba * n;
    let ba = |slot: usize| ba_off + slot * n;
    let bc = |slot: usize| bc_off + slot * n;
    // Slot of σ_ba^(m) is (m + 2N - 1)/2 and of σ_bc^(m) is (m + 2N - 2)/2,
    // so σ_bc[m ∓ 1] sits at ba-slot (j - 1) or j, and σ_ba[m ± 1] at
    // bc-slot j + 1 or j.
    let explicit = |t: f64, y: &[C64]| -> Vec<C64> {
        let omega = schedule.rabi_frequency(t, g).unwrap_or(0.0);
        let mut out = vec![C64::new(0.0, 0.0); y.len()];
        let de_p = ops.derivative(&y[e_off..e_off + n]);
        let de_m = ops.derivative(&y[e_off + n..e_off + 2 * n]);
        let s_plus = ba(big_n);
        let s_minus = ba(big_n - 1);
        for x in 0..n {
            out[x] = -c * de_p[x] + i * g * y[s_plus + x];
            out[n + x] = c * de_m[x] + i * g * y[s_minus + x];
        }
        for j in 0..n_ba {
            let dst = ba(j);
            let lower = (j >= 1 && j - 1 < n_bc).then(|| bc(j - 1));
            let upper = (j < n_bc).then(|| bc(j));
            for x in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                if let Some(o) = lower {
                    acc += kp * y[o + x];
                }
                if let Some(o) = upper {
                    acc += km * y[o + x];
                }
                out[dst + x] = i * omega * acc;
            }
        }
        out[s_plus..s_plus + n]
            .iter_mut()
            .zip(&y[e_off..e_off + n])
            .for_each(|(o, e)| *o += i * g * e);
        out[s_minus..s_minus + n]
            .iter_mut()
            .zip(&y[e_off + n..e_off + 2 * n])
            .for_each(|(o, e)| *o += i * g * e);
        let kpc = kp.conj();
        let kmc = km.conj();
        for j in 0..n_bc {
            let dst = bc(j);
            let up = ba(j + 1);
            let down = ba(j);
            for x in 0..n {
                out[dst + x] = i * omega * (kpc * y[up + x] + kmc * y[down + x]);
            }
        }
        out
    };

    let decay = |h: f64, v: &mut [C64]| {
        let fa = (-gamma_ba * h).exp();
        let fc = (-gamma_bc * h).exp();
        v[ba_off..bc_off].iter_mut().for_each(|x| *x *= fa);
        v[bc_off..].iter_mut().for_each(|x| *x *= fc);
    };
    let axpy = |a: &[C64], s: f64, b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };

    let dt_max = mb_time_step(schedule, medium, grid);
    let mut state = init.clone();
    state.time = 0.0;
    let mut y = state.flatten();
    let mut report = MbReport {
        final_state: init.clone(),
        snapshots: Vec::new(),
        steps: 0,
        dt: 0.0,
    };
    for _ in 0..snapshot_times.iter().filter(|&&s| s == 0.0).count() {
        report.snapshots.push(state.clone());
    }
    let snapshot_set = snapshot_times.to_vec();
    for (start, end, steps) in super::step_plan(t_end, dt_max, &snapshot_set) {
        let h = (end - start) / steps as f64;
        for s in 0..steps {
            let t = start + s as f64 * h;
            let k1 = explicit(t, &y);
            let mut stage = axpy(&y, 0.5 * h, &k1);
            decay(0.5 * h, &mut stage);
            let mut k2 = explicit(t + 0.5 * h, &stage);
            let mut y_half = y.clone();
            decay(0.5 * h, &mut y_half);
            let mut k3 = explicit(t + 0.5 * h, &axpy(&y_half, 0.5 * h, &k2));
            decay(0.5 * h, &mut k3);
            let mut y_full = y.clone();
            decay(h, &mut y_full);
            let k4 = explicit(t + h, &axpy(&y_full, h, &k3));
            let mut k1 = k1;
            decay(h, &mut k1);
            decay(0.5 * h, &mut k2);
            for x in 0..y.len() {
                y[x] = y_full[x] + h / 6.0 * (k1[x] + 2.0 * (k2[x] + k3[x]) + k4[x]);
            }
            report.steps += 1;
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "Maxwell-Bloch state",
                    step: report.steps,
                    time: t + h,
                });
            }
        }
        report.dt = report.dt.max(h);
        let count = snapshot_times
            .iter()
            .filter(|&&s| (s - end).abs() <= 1e-12 * end.max(1.0))
            .count();
        if count > 0 {
            state.unflatten(&y, end);
            for _ in 0..count {
                report.snapshots.push(state.clone());
            }
        }
    }
    state.unflatten(&y, t_end);
    report.final_state = state;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gaussian_profile, TwoComponent};
    use crate::observables::density_metrics;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_layout() {
        let s = MbState::zeros(1, 8).unwrap();
        assert_eq!(s.ba_indices().collect::<Vec<_>>(), vec![-1, 1]);
        assert_eq!(s.bc_indices().collect::<Vec<_>>(), vec![0]);
        let s = MbState::zeros(3, 8).unwrap();
        assert_eq!(s.ba_indices().collect::<Vec<_>>(), vec![-5, -3, -1, 1, 3, 5]);
        assert_eq!(s.bc_indices().collect::<Vec<_>>(), vec![-4, -2, 0, 2, 4]);
        assert!(s.sigma_ba(7).is_none() && s.sigma_ba(2).is_none());
        assert!(s.sigma_bc(-6).is_none() && s.sigma_bc(1).is_none());
        assert!(MbState::zeros(0, 8).is_err());
        let psi = vec![C64::new(2.0, 0.0); 8];
        let s = MbState::from_stored_polariton(&psi, 2).unwrap();
        assert_eq!(s.sigma_bc(0).unwrap()[3], C64::new(-2.0, 0.0));
        assert!(s.sigma_bc(2).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = SimulationGrid::new(-10.0, 10.0, 32, 1.0).unwrap();
        let sched = CouplingSchedule::standing_wave();
        let m = MediumParams::with_absorption_length(10.0, C64::new(0.0, 0.0), 0.1, &sched).unwrap();
        let r = evolve_mb_harmonics(&MbState::zeros(2, 32).unwrap(), &sched, &m, &g, 0.5, &[0.25]).unwrap();
        assert_eq!(r.snapshots.len(), 1);
        assert!(r.final_state.flatten().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dark_state_is_stationary_without_propagation() {
        // Uniform stored excitation, constant coupling, no relaxation of the
        // spin: the dark state E = cosθ Ψ, S_bc = -sinθ Ψ is an exact
        // stationary solution of the truncated traveling-wave system.
        let g = SimulationGrid::new(-10.0, 10.0, 16, 1.0).unwrap();
        let sched = CouplingSchedule::traveling_wave().with_kind(crate::domain::ScheduleKind::Constant);
        let m = MediumParams::with_absorption_length(50.0, C64::new(0.0, 0.0), 0.1, &sched).unwrap();
        let c2 = sched.cos2_theta0();
        let mut s = MbState::zeros(1, 16).unwrap();
        s.e_plus = vec![C64::new(c2.sqrt(), 0.0); 16];
        *s.sigma_bc_mut(0).unwrap() = vec![C64::new(-(1.0 - c2).sqrt(), 0.0); 16];
        let r = evolve_mb_harmonics(&s, &sched, &m, &g, 1.0, &[]).unwrap();
        for (a, b) in r.final_state.flatten().iter().zip(s.flatten()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn traveling_wave_group_velocity() {
        let g = SimulationGrid::new(-10.0, 10.0, 128, 10.0).unwrap();
        let sched = CouplingSchedule::traveling_wave();
        let m = MediumParams::with_absorption_length(100.0, C64::new(0.0, 0.0), 0.1, &sched).unwrap();
        let psi = gaussian_profile(&g, C64::new(1.0, 0.0), 1.0, -6.0).unwrap();
        let init = MbState::from_stored_polariton(&psi, 1).unwrap();
        let (t1, t2) = (4.0, 9.0);
        let r = evolve_mb_harmonics(&init, &sched, &m, &g, t2, &[t1, t2]).unwrap();
        let centroid = |s: &MbState| {
            density_metrics(&s.probe().density(), &g, 0.0)
                .unwrap()
                .centroid
                .unwrap()
        };
        let moved = centroid(&r.snapshots[1]) - centroid(&r.snapshots[0]);
        let expected = sched.displacement(t2).unwrap() - sched.displacement(t1).unwrap();
        assert_relative_eq!(moved, expected, max_relative = 0.02);
    }
}
