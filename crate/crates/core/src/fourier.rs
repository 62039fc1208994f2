//! Fourier coefficients of `1/(1 + y cos x)` and its square, and the
//! dispersion parameters of the non-adiabatic polariton equations.

use std::f64::consts::PI;

use crate::domain::{CouplingSchedule, STANDING_WAVE_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Leading Fourier coefficients for one modulation depth `y`.
///
/// `a_n = (1/π) ∫ cos(nx) / (1 + y cos x) dx` and `d_n` the same with the
/// squared denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierCoefficients {
    pub y: f64,
    pub a0: f64,
    pub a1: f64,
    pub d0: f64,
    pub d1: f64,
    /// `a1 / a0`
    pub s: f64,
    /// `d0 / a0`
    pub s_prime: f64,
    /// `d1 / a0`
    pub s_dprime: f64,
}

impl FourierCoefficients {
    pub fn new(y: f64) -> Result<Self> {
        let (a0, a1) = coeff_a(y)?;
        let (d0, d1) = coeff_d(y)?;
        Ok(Self {
            y,
            a0,
            a1,
            d0,
            d1,
            s: ratio_s(y),
            s_prime: d0 / a0,
            s_dprime: d1 / a0,
        })
    }
}

fn check_y(y: f64) -> Result<()> {
    if (0.0..1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::ModulationOutOfRange(y))
    }
}

/// `s = (√(1-y²) - 1)/y`, continued by 0 at `y = 0`.
fn ratio_s(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        // Same value as (√(1-y²) - 1)/y without the cancellation near y = 0.
        -y / (1.0 + (1.0 - y * y).sqrt())
    }
}

/// `(a0, a1)`.
pub fn coeff_a(y: f64) -> Result<(f64, f64)> {
    check_y(y)?;
    let root = (1.0 - y * y).sqrt();
    let a0 = 2.0 / root;
    Ok((a0, ratio_s(y) * a0))
}

/// `(d0, d1)`.
pub fn coeff_d(y: f64) -> Result<(f64, f64)> {
    check_y(y)?;
    let d0 = 2.0 / (1.0 - y * y).powf(1.5);
    Ok((d0, -y * d0))
}

/// Largest `y` the quadrature oracle accepts.
pub const ORACLE_MAX_Y: f64 = 1.0 - 1e-6;

const ORACLE_MAX_POINTS: usize = 1 << 22;

/// `(1/π) ∫_{-π}^{π} cos(nx) / (1 + y cos x)^power dx` by the periodic
/// trapezoid rule, doubling the point count until two successive values
/// agree to `1e-12` (relative to `max(1, |value|)`).
pub fn quadrature_oracle(n: u32, y: f64, power: u32) -> Result<f64> {
    if !(0.0..=ORACLE_MAX_Y).contains(&y) {
        return Err(invalid("y", format!("oracle needs 0 <= y <= 1 - 1e-6, got {y}")));
    }
    if !(power == 1 || power == 2) {
        return Err(invalid("power", format!("must be 1 or 2, got {power}")));
    }
    let f = |x: f64| (n as f64 * x).cos() / (1.0 + y * x.cos()).powi(power as i32);
    let trapezoid = |m: usize| {
        let h = 2.0 * PI / m as f64;
        (0..m).map(|k| f(-PI + k as f64 * h)).sum::<f64>() * h / PI
    };
    let mut m = 16;
    let mut prev = trapezoid(m);
    let mut evaluations = m;
    while m < ORACLE_MAX_POINTS {
        m *= 2;
        let next = trapezoid(m);
        evaluations += m;
        if (next - prev).abs() < 1e-12 * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { n, y, evaluations })
}

fn check_forward(schedule: &CouplingSchedule) -> Result<(f64, f64)> {
    let p = schedule.kappa_plus_sq();
    let m = schedule.kappa_minus_sq();
    if p < m {
        return Err(Error::WeakForwardCoupling { plus: p, minus: m });
    }
    Ok((p, m))
}

/// Splitting factor `β = √(|κ+|²(|κ+|² - |κ-|²))`.
pub fn beta(schedule: &CouplingSchedule) -> Result<f64> {
    let (p, m) = check_forward(schedule)?;
    Ok((p * (p - m)).max(0.0).sqrt())
}

/// Dispersion parameters at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEntry {
    pub q: f64,
    pub b: C64,
    pub d: C64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
}

/// `q`-independent part of the dispersion relation.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionParams {
    pub xi: f64,
    pub beta: f64,
    kappa_plus_sq: f64,
    kappa_minus_sq: f64,
    cross: C64,
}

impl DispersionParams {
    pub fn new(schedule: &CouplingSchedule, l_a: f64) -> Result<Self> {
        let (p, m) = check_forward(schedule)?;
        if !(l_a >= 0.0 && l_a.is_finite()) {
            return Err(invalid("l_a", format!("must be non-negative, got {l_a}")));
        }
        let y = schedule.y();
        let xi = if l_a == 0.0 {
            0.0
        } else if 1.0 - y < STANDING_WAVE_TOLERANCE {
            // ξ diverges; callers use the standing-wave limit instead.
            return Err(Error::ModulationOutOfRange(y));
        } else {
            p * l_a / (1.0 - y * y).sqrt()
        };
        Ok(Self {
            xi,
            beta: (p * (p - m)).max(0.0).sqrt(),
            kappa_plus_sq: p,
            kappa_minus_sq: m,
            cross: schedule.cross(),
        })
    }

    /// `b`, `d` (principal root) and `λ±` at wavenumber `q`.
    pub fn at(&self, q: f64) -> DispersionEntry {
        let p = self.kappa_plus_sq;
        let m = self.kappa_minus_sq;
        let qxi = q * self.xi;
        let b = self.cross * C64::new(1.0, -qxi);
        let d = C64::new(p * (p - m) - p * m * qxi * qxi, 0.0).sqrt();
        let shift = C64::new(0.0, p * qxi);
        DispersionEntry {
            q,
            b,
            d,
            lambda_plus: shift + d,
            lambda_minus: shift - d,
        }
    }

    /// Entries along `qs`, flipping the sign of `d` where needed so that `d`
    /// (and hence `λ±`) varies continuously from one sample to the next.
    pub fn table(&self, qs: &[f64]) -> Vec<DispersionEntry> {
        let mut out: Vec<DispersionEntry> = Vec::with_capacity(qs.len());
        for &q in qs {
            let mut e = self.at(q);
            if let Some(prev) = out.last() {
                if (e.d + prev.d).norm() < (e.d - prev.d).norm() {
                    e.d = -e.d;
                    std::mem::swap(&mut e.lambda_plus, &mut e.lambda_minus);
                }
            }
            out.push(e);
        }
        out
    }
}

/// Dispersion parameters of the non-adiabatic equations at one `q`.
pub fn dispersion_params(schedule: &CouplingSchedule, l_a: f64, q: f64) -> Result<DispersionEntry> {
    Ok(DispersionParams::new(schedule, l_a)?.at(q))
}
