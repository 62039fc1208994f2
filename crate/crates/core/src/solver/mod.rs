//! Numerical integrators for the polariton equations and the
//! truncated-harmonic Maxwell–Bloch model.

mod cold;
mod maxwell_bloch;
mod thermal;

pub use cold::{advection_matrix, characteristic_speeds, evolve_cold_numeric};
pub use maxwell_bloch::{evolve_mb_harmonics, mb_time_step, MbReport, MbState};
pub use thermal::{difference_mode, evolve_thermal_numeric, sum_mode};

use crate::domain::{PolaritonField, SimulationGrid};
use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralOps;
use crate::C64;

/// Spatial discretisation of `∂z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpatialScheme {
    /// Discrete-Fourier derivatives.
    #[default]
    Spectral,
    /// Second-order upwind finite differences (central for diffusion).
    Upwind2,
}

/// Absorbing layer at both ends of the domain: damping rate
/// `strength · (depth / width)²` inside a band of the given width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sponge {
    pub width: f64,
    pub strength: f64,
}

impl Sponge {
    pub(crate) fn profile(&self, grid: &SimulationGrid) -> Result<Vec<f64>> {
        if !(self.width > 0.0 && 2.0 * self.width < grid.length()) {
            return Err(invalid(
                "sponge.width",
                "must be positive and narrower than half the domain",
            ));
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(invalid("sponge.strength", "must be non-negative"));
        }
        Ok(grid
            .positions()
            .into_iter()
            .map(|z| {
                let depth = (grid.z_min() + self.width - z)
                    .max(z - (grid.z_max() - self.width))
                    .max(0.0);
                self.strength * (depth / self.width).powi(2)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Courant number bound for the advection step.
    pub cfl: f64,
    pub scheme: SpatialScheme,
    /// Times at which to record the field; the stepper lands on each exactly.
    pub snapshot_times: Vec<f64>,
    pub sponge: Option<Sponge>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            scheme: SpatialScheme::Spectral,
            snapshot_times: Vec::new(),
            sponge: None,
        }
    }
}

impl SolverOptions {
    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if self.snapshot_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("snapshot_times", "must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub final_field: PolaritonField,
    pub steps: usize,
    /// Largest time step taken.
    pub dt: f64,
    /// Largest Courant number `speed · dt / dz` encountered.
    pub max_cfl: f64,
    /// `∫(|Ψ+|² + |Ψ-|²) dz` at the start and after every step.
    pub norm_history: Vec<f64>,
    /// Fields at the requested snapshot times, in ascending time order.
    pub snapshots: Vec<PolaritonField>,
}

/// Segment boundaries for a run to `t_end` that lands on every snapshot
/// time, each segment split into equal steps no longer than `dt_max`.
pub(crate) fn step_plan(t_end: f64, dt_max: f64, snapshot_times: &[f64]) -> Vec<(f64, f64, usize)> {
    let mut marks: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_end)
        .collect();
    marks.push(t_end);
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mut plan = Vec::with_capacity(marks.len());
    let mut start = 0.0;
    for end in marks {
        let n = ((end - start) / dt_max).ceil().max(1.0) as usize;
        plan.push((start, end, n));
        start = end;
    }
    plan
}

pub(crate) fn check_run(init_len: usize, grid: &SimulationGrid, t_end: f64, options: &SolverOptions) -> Result<()> {
    if init_len != grid.n_z() {
        return Err(Error::LengthMismatch {
            expected: grid.n_z(),
            actual: init_len,
        });
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", format!("must be positive, got {t_end}")));
    }
    options.validate()
}

pub(crate) fn wants_snapshot(options: &SolverOptions, t: f64) -> usize {
    options
        .snapshot_times
        .iter()
        .filter(|&&s| (s - t).abs() <= 1e-12 * t.max(1.0))
        .count()
}

pub(crate) fn all_finite(v: &[C64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// `∂z` on a periodic grid with the chosen scheme. For `Upwind2`, `wind`
/// selects the upwind side (`> 0`: information travels towards `+z`).
pub(crate) struct Derivatives {
    ops: SpectralOps,
    dz: f64,
}

impl Derivatives {
    pub(crate) fn new(grid: &SimulationGrid) -> Self {
        Self {
            ops: SpectralOps::new(grid),
            dz: grid.dz(),
        }
    }

    pub(crate) fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub(crate) fn spectral(&self, f: &[C64]) -> Vec<C64> {
        self.ops.derivative(f)
    }

    pub(crate) fn upwind(&self, f: &[C64], wind: f64) -> Vec<C64> {
        let n = f.len();
        let inv = 1.0 / (2.0 * self.dz);
        (0..n)
            .map(|i| {
                if wind >= 0.0 {
                    (3.0 * f[i] - 4.0 * f[(i + n - 1) % n] + f[(i + n - 2) % n]) * inv
                } else {
                    (-3.0 * f[i] + 4.0 * f[(i + 1) % n] - f[(i + 2) % n]) * inv
                }
            })
            .collect()
    }

    pub(crate) fn central_second(&self, f: &[C64]) -> Vec<C64> {
        let n = f.len();
        let inv = 1.0 / (self.dz * self.dz);
        (0..n)
            .map(|i| (f[(i + 1) % n] - 2.0 * f[i] + f[(i + n - 1) % n]) * inv)
            .collect()
    }
}

/// Classical RK4 for `y' = f(t, y)` on a flat complex state.
pub(crate) fn rk4_step<F>(y: &mut [C64], t: f64, h: f64, mut f: F)
where
    F: FnMut(f64, &[C64]) -> Vec<C64>,
{
    let k1 = f(t, y);
    let tmp: Vec<C64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = f(t + 0.5 * h, &tmp);
    let tmp: Vec<C64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = f(t + 0.5 * h, &tmp);
    let tmp: Vec<C64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = f(t + h, &tmp);
    for (i, v) in y.iter_mut().enumerate() {
        *v += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Amplification factor of classical RK4 for `y' = λ y` at `z = λ h`.
pub(crate) fn rk4_amplification(z: C64) -> f64 {
    (1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0).norm()
}
