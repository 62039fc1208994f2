//! Grids, coupling-field schedules, medium parameters and field containers.

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Threshold on `1 - y` below which a coupling field counts as a pure
/// standing wave.
pub const STANDING_WAVE_TOLERANCE: f64 = 1e-9;

/// Uniform periodic grid on `[z_min, z_max)` with a simulation horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationGrid {
    z_min: f64,
    z_max: f64,
    n_z: usize,
    t_max: f64,
}

impl SimulationGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(z_min: f64, z_max: f64, n_z: usize, t_max: f64) -> Result<Self> {
        if !(z_min.is_finite() && z_max.is_finite()) || z_max <= z_min {
            return Err(invalid("z_max", format!("need z_max > z_min, got [{z_min}, {z_max}]")));
        }
        if n_z < Self::MIN_POINTS {
            return Err(invalid(
                "n_z",
                format!("need at least {} points, got {n_z}", Self::MIN_POINTS),
            ));
        }
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(invalid(
                "t_max",
                format!("must be finite and non-negative, got {t_max}"),
            ));
        }
        Ok(Self {
            z_min,
            z_max,
            n_z,
            t_max,
        })
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn length(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn dz(&self) -> f64 {
        self.length() / self.n_z as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_z).map(|i| self.z(i)).collect()
    }

    /// Same spatial grid with a different horizon.
    pub fn with_t_max(&self, t_max: f64) -> Result<Self> {
        Self::new(self.z_min, self.z_max, self.n_z, t_max)
    }

    /// Index of the sample mirrored about the domain centre. On a symmetric
    /// domain this maps `z_i` to `-z_i` exactly.
    pub fn mirror_index(&self, i: usize) -> usize {
        (self.n_z - i) % self.n_z
    }
}

impl Default for SimulationGrid {
    /// `z ∈ [-10, 10)`, 2048 points, ten switching times.
    fn default() -> Self {
        Self {
            z_min: -10.0,
            z_max: 10.0,
            n_z: 2048,
            t_max: 10.0,
        }
    }
}

/// How the total coupling Rabi frequency is switched on at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `cos²θ(t) = cos²θ₀ tanh(t / T_s)`.
    TanhSwitch,
    /// `cos²θ(t) = cos²θ₀` for all `t ≥ 0`.
    Constant,
}

/// Everything about the control field: the forward/backward amplitude
/// ratios `κ±` and the time dependence of the mixing angle.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSchedule {
    kappa_plus: C64,
    kappa_minus: C64,
    cos2_theta0: f64,
    switching_time: f64,
    v_g0: f64,
    kind: ScheduleKind,
}

impl CouplingSchedule {
    pub const DEFAULT_COS2_THETA0: f64 = 0.01;

    /// Builds a schedule from complex ratios, normalising them so that
    /// `|κ+|² + |κ-|² = 1`. Defaults: tanh switching with `T_s = 1`,
    /// `cos²θ₀ = 0.01` and `v_g0 = 1`.
    pub fn new(kappa_plus: C64, kappa_minus: C64) -> Result<Self> {
        if !(kappa_plus.is_finite() && kappa_minus.is_finite()) {
            return Err(invalid("kappa", "coupling ratios must be finite"));
        }
        let norm = (kappa_plus.norm_sqr() + kappa_minus.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(invalid("kappa", "at least one coupling component must be non-zero"));
        }
        Ok(Self {
            kappa_plus: kappa_plus / norm,
            kappa_minus: kappa_minus / norm,
            cos2_theta0: Self::DEFAULT_COS2_THETA0,
            switching_time: 1.0,
            v_g0: 1.0,
            kind: ScheduleKind::TanhSwitch,
        })
    }

    /// Builds a schedule from the intensity fractions `|κ±|²` and the
    /// relative phase `φ` defined by `κ+ κ-* = |κ+||κ-| e^{iφ}`.
    pub fn from_intensities(kappa_plus_sq: f64, kappa_minus_sq: f64, phi: f64) -> Result<Self> {
        if !(kappa_plus_sq >= 0.0 && kappa_minus_sq >= 0.0) {
            return Err(invalid("kappa_sq", "intensity fractions must be non-negative"));
        }
        Self::new(
            C64::from_polar(kappa_plus_sq.sqrt(), phi),
            C64::new(kappa_minus_sq.sqrt(), 0.0),
        )
    }

    pub fn standing_wave() -> Self {
        Self::from_intensities(0.5, 0.5, 0.0).expect("valid standing wave")
    }

    pub fn traveling_wave() -> Self {
        Self::from_intensities(1.0, 0.0, 0.0).expect("valid traveling wave")
    }

    pub fn with_kind(mut self, kind: ScheduleKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_switching_time(mut self, switching_time: f64) -> Result<Self> {
        if !(switching_time.is_finite() && switching_time > 0.0) {
            return Err(invalid(
                "switching_time",
                format!("must be positive, got {switching_time}"),
            ));
        }
        self.switching_time = switching_time;
        Ok(self)
    }

    pub fn with_cos2_theta0(mut self, cos2_theta0: f64) -> Result<Self> {
        if !(cos2_theta0 > 0.0 && cos2_theta0 < 1.0) {
            return Err(invalid("cos2_theta0", format!("must lie in (0, 1), got {cos2_theta0}")));
        }
        self.cos2_theta0 = cos2_theta0;
        Ok(self)
    }

    pub fn with_group_velocity(mut self, v_g0: f64) -> Result<Self> {
        if !(v_g0.is_finite() && v_g0 > 0.0) {
            return Err(invalid("v_g0", format!("must be positive, got {v_g0}")));
        }
        self.v_g0 = v_g0;
        Ok(self)
    }

    /// Same switching, with the coupling ratios exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            kappa_plus: self.kappa_minus,
            kappa_minus: self.kappa_plus,
            ..self.clone()
        }
    }

    pub fn kappa_plus(&self) -> C64 {
        self.kappa_plus
    }

    pub fn kappa_minus(&self) -> C64 {
        self.kappa_minus
    }

    pub fn kappa_plus_sq(&self) -> f64 {
        self.kappa_plus.norm_sqr()
    }

    pub fn kappa_minus_sq(&self) -> f64 {
        self.kappa_minus.norm_sqr()
    }

    /// `κ+ κ-*`.
    pub fn cross(&self) -> C64 {
        self.kappa_plus * self.kappa_minus.conj()
    }

    /// Relative phase `φ`; zero when either component vanishes.
    pub fn phi(&self) -> f64 {
        let cross = self.cross();
        if cross.norm() == 0.0 {
            0.0
        } else {
            cross.arg()
        }
    }

    /// Modulation depth `y = 2|κ+||κ-|`.
    pub fn y(&self) -> f64 {
        (2.0 * self.kappa_plus.norm() * self.kappa_minus.norm()).min(1.0)
    }

    pub fn is_standing_wave(&self) -> bool {
        1.0 - self.y() < STANDING_WAVE_TOLERANCE
    }

    /// `|κ+| ≥ |κ-|`: the forward component dominates.
    pub fn forward_dominant(&self) -> bool {
        self.kappa_plus_sq() >= self.kappa_minus_sq()
    }

    pub fn cos2_theta0(&self) -> f64 {
        self.cos2_theta0
    }

    pub fn switching_time(&self) -> f64 {
        self.switching_time
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Saturated group velocity `v_g0 = c cos²θ₀`.
    pub fn v_g0(&self) -> f64 {
        self.v_g0
    }

    /// Vacuum light speed implied by `v_g0` and `cos²θ₀`.
    pub fn light_speed(&self) -> f64 {
        self.v_g0 / self.cos2_theta0
    }

    fn switch_factor(&self, t: f64) -> f64 {
        match self.kind {
            ScheduleKind::TanhSwitch => (t / self.switching_time).tanh(),
            ScheduleKind::Constant => 1.0,
        }
    }

    /// `cos²θ(t)`.
    pub fn cos2_theta(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.cos2_theta0 * self.switch_factor(t))
    }

    pub fn sin2_theta(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.cos2_theta(t)?)
    }

    /// Group velocity `v_g(t) = c cos²θ(t)`.
    pub fn group_velocity(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.v_g0 * self.switch_factor(t))
    }

    /// `r(t) = ∫₀ᵗ c cos²θ(t') dt'`, in closed form.
    pub fn displacement(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self.kind {
            ScheduleKind::TanhSwitch => self.v_g0 * self.switching_time * ln_cosh(t / self.switching_time),
            ScheduleKind::Constant => self.v_g0 * t,
        })
    }

    /// Total coupling Rabi frequency `Ω(t)` for a collective coupling
    /// `g_p √N`, from `tan θ = g_p √N / Ω`.
    pub fn rabi_frequency(&self, t: f64, collective_coupling: f64) -> Result<f64> {
        let c2 = self.cos2_theta(t)?;
        Ok(collective_coupling * (c2 / (1.0 - c2)).sqrt())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// `ln cosh x` without overflow for large `|x|`.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - core::f64::consts::LN_2
}

/// Decay and coupling constants of the atomic medium.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumParams {
    /// Optical dephasing rate `γ_ba`.
    pub gamma_ba: f64,
    /// `Γ_bc = γ_bc - iΔ`.
    pub gamma_bc: C64,
    /// `Γ_ca = γ_ca - iδ_c`; carried but unused by the weak-probe models.
    pub gamma_ca: C64,
    /// One-photon probe detuning `δ_p`, entering `Γ_ba = γ_ba - iδ_p`.
    pub delta_p: f64,
    /// Resonant absorption length without EIT, in units of `L_p`.
    pub l_a: f64,
    /// Collective coupling `g_p √N`.
    pub collective_coupling: f64,
}

impl MediumParams {
    pub fn new(gamma_ba: f64, gamma_bc: C64, l_a: f64, collective_coupling: f64) -> Result<Self> {
        let medium = Self {
            gamma_ba,
            gamma_bc,
            gamma_ca: C64::new(0.0, 0.0),
            delta_p: 0.0,
            l_a,
            collective_coupling,
        };
        medium.validate()?;
        Ok(medium)
    }

    /// Medium with a prescribed absorption length: picks `g_p √N` so that
    /// `l_a = c γ_ba / (g_p² N)` with `c` taken from the schedule.
    pub fn with_absorption_length(gamma_ba: f64, gamma_bc: C64, l_a: f64, schedule: &CouplingSchedule) -> Result<Self> {
        if l_a.is_nan() || l_a <= 0.0 {
            return Err(invalid(
                "l_a",
                "a positive absorption length is needed to fix g_p sqrt(N)",
            ));
        }
        let coupling = (schedule.light_speed() * gamma_ba / l_a).sqrt();
        Self::new(gamma_ba, gamma_bc, l_a, coupling)
    }

    /// Medium for the envelope models, which only see `Γ_bc` and `l_a`.
    pub fn envelope(gamma_bc: C64, l_a: f64) -> Result<Self> {
        Self::new(1.0, gamma_bc, l_a, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_ba > 0.0 && self.gamma_ba.is_finite()) {
            return Err(invalid("gamma_ba", format!("must be positive, got {}", self.gamma_ba)));
        }
        if !(self.l_a >= 0.0 && self.l_a.is_finite()) {
            return Err(invalid("l_a", format!("must be non-negative, got {}", self.l_a)));
        }
        if !(self.gamma_bc.re >= 0.0 && self.gamma_bc.is_finite()) {
            return Err(invalid(
                "gamma_bc",
                format!("real part must be non-negative, got {}", self.gamma_bc),
            ));
        }
        if !(self.collective_coupling >= 0.0 && self.collective_coupling.is_finite()) {
            return Err(invalid("collective_coupling", "must be non-negative"));
        }
        Ok(())
    }

    /// `Γ_ba = γ_ba - iδ_p`.
    pub fn gamma_ba_complex(&self) -> C64 {
        C64::new(self.gamma_ba, -self.delta_p)
    }
}

/// Samples of a pair of counter-propagating envelopes.
pub trait TwoComponent {
    fn plus(&self) -> &[C64];
    fn minus(&self) -> &[C64];

    /// Pointwise `|·+|² + |·-|²`.
    fn density(&self) -> Vec<f64> {
        self.plus()
            .iter()
            .zip(self.minus())
            .map(|(p, m)| p.norm_sqr() + m.norm_sqr())
            .collect()
    }
}

/// Dark-state polariton components `Ψ±` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonField {
    pub psi_plus: Vec<C64>,
    pub psi_minus: Vec<C64>,
    pub time: f64,
}

impl PolaritonField {
    pub fn new(psi_plus: Vec<C64>, psi_minus: Vec<C64>, time: f64) -> Result<Self> {
        if psi_plus.len() != psi_minus.len() {
            return Err(Error::LengthMismatch {
                expected: psi_plus.len(),
                actual: psi_minus.len(),
            });
        }
        if !psi_plus.iter().chain(&psi_minus).all(|v| v.is_finite()) {
            return Err(invalid("field", "samples must be finite"));
        }
        Ok(Self {
            psi_plus,
            psi_minus,
            time,
        })
    }

    pub fn zeros(n: usize, time: f64) -> Self {
        Self {
            psi_plus: vec![C64::new(0.0, 0.0); n],
            psi_minus: vec![C64::new(0.0, 0.0); n],
            time,
        }
    }

    pub fn len(&self) -> usize {
        self.psi_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_plus.is_empty()
    }

    /// `∫ (|Ψ+|² + |Ψ-|²) dz` on a periodic grid of spacing `dz`.
    pub fn norm(&self, dz: f64) -> f64 {
        self.density().iter().sum::<f64>() * dz
    }
}

impl TwoComponent for PolaritonField {
    fn plus(&self) -> &[C64] {
        &self.psi_plus
    }
    fn minus(&self) -> &[C64] {
        &self.psi_minus
    }
}

/// Forward and backward probe envelopes `E_p±`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeField {
    pub e_plus: Vec<C64>,
    pub e_minus: Vec<C64>,
}

impl ProbeField {
    pub fn new(e_plus: Vec<C64>, e_minus: Vec<C64>) -> Result<Self> {
        if e_plus.len() != e_minus.len() {
            return Err(Error::LengthMismatch {
                expected: e_plus.len(),
                actual: e_minus.len(),
            });
        }
        if !e_plus.iter().chain(&e_minus).all(|v| v.is_finite()) {
            return Err(invalid("probe", "samples must be finite"));
        }
        Ok(Self { e_plus, e_minus })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            e_plus: vec![C64::new(0.0, 0.0); n],
            e_minus: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.e_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_plus.is_empty()
    }
}

impl TwoComponent for ProbeField {
    fn plus(&self) -> &[C64] {
        &self.e_plus
    }
    fn minus(&self) -> &[C64] {
        &self.e_minus
    }
}

/// `Ψ₀ exp(-((z - z0)/L_p)²)` sampled on the grid.
pub fn gaussian_profile(grid: &SimulationGrid, amplitude: C64, pulse_length: f64, z0: f64) -> Result<Vec<C64>> {
    if !(pulse_length > 0.0 && pulse_length.is_finite()) {
        return Err(invalid("pulse_length", format!("must be positive, got {pulse_length}")));
    }
    Ok((0..grid.n_z())
        .map(|i| {
            let u = (grid.z(i) - z0) / pulse_length;
            amplitude * (-u * u).exp()
        })
        .collect())
}
