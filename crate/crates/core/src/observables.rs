//! Scalar diagnostics of pulse profiles.

use crate::domain::{CouplingSchedule, SimulationGrid, TwoComponent};
use crate::error::{invalid, Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMetrics {
    /// `∫ density dz`.
    pub total_norm: f64,
    /// Density-weighted mean position; `None` for an empty pulse.
    pub centroid: Option<f64>,
    /// Density-weighted variance about the centroid; `None` for an empty pulse.
    pub variance: Option<f64>,
    pub peak_value: f64,
    pub peak_position: f64,
    /// Share of the norm at `z > split_at`.
    pub forward_fraction: f64,
    /// Share of the norm at `z < split_at`.
    pub backward_fraction: f64,
}

/// Metrics of `|·+|² + |·-|²`.
pub fn compute_metrics<F: TwoComponent + ?Sized>(
    field: &F,
    grid: &SimulationGrid,
    split_at: f64,
) -> Result<PulseMetrics> {
    density_metrics(&field.density(), grid, split_at)
}

/// Metrics of an arbitrary non-negative density sampled on the grid.
/// Samples exactly at `split_at` count half to each side.
pub fn density_metrics(density: &[f64], grid: &SimulationGrid, split_at: f64) -> Result<PulseMetrics> {
    if density.is_empty() {
        return Err(invalid("field", "cannot compute metrics of an empty field"));
    }
    if density.len() != grid.n_z() {
        return Err(Error::LengthMismatch {
            expected: grid.n_z(),
            actual: density.len(),
        });
    }
    let dz = grid.dz();
    let z = grid.positions();
    let total: f64 = density.iter().sum::<f64>() * dz;

    let (peak_idx, peak_value) =
        density.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, v)| if v > best.1 { (i, v) } else { best },
        );

    if total <= 0.0 {
        return Ok(PulseMetrics {
            total_norm: 0.0,
            centroid: None,
            variance: None,
            peak_value,
            peak_position: z[peak_idx],
            forward_fraction: 0.0,
            backward_fraction: 0.0,
        });
    }

    let mean = density.iter().zip(&z).map(|(w, z)| w * z).sum::<f64>() * dz / total;
    let variance = density.iter().zip(&z).map(|(w, z)| w * (z - mean).powi(2)).sum::<f64>() * dz / total;
    let forward: f64 = density
        .iter()
        .zip(&z)
        .map(|(w, &z)| {
            if z > split_at {
                *w
            } else if z == split_at {
                0.5 * w
            } else {
                0.0
            }
        })
        .sum::<f64>()
        * dz
        / total;
    Ok(PulseMetrics {
        total_norm: total,
        centroid: Some(mean),
        variance: Some(variance.max(0.0)),
        peak_value,
        peak_position: z[peak_idx],
        forward_fraction: forward,
        backward_fraction: 1.0 - forward,
    })
}

/// Mean and variance of `|f|` treated as a distribution over `z`. For a
/// Gaussian amplitude `exp(-z²/(2σ²))` this returns `σ²`.
pub fn amplitude_moments(values: &[C64], grid: &SimulationGrid) -> Result<(f64, f64)> {
    let w: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let m = density_metrics(&w, grid, 0.0)?;
    match (m.centroid, m.variance) {
        (Some(c), Some(v)) => Ok((c, v)),
        _ => Err(invalid("field", "amplitude vanishes identically")),
    }
}

/// Least-squares slope of variance against the displacement `r(t)`.
pub fn variance_growth_rate(history: &[(f64, PulseMetrics)], schedule: &CouplingSchedule) -> Result<f64> {
    if history.len() < 3 {
        return Err(Error::DegenerateRegression("need at least three samples"));
    }
    let mut pts = Vec::with_capacity(history.len());
    for (t, m) in history {
        let v = m
            .variance
            .ok_or(Error::DegenerateRegression("a sample has undefined variance"))?;
        pts.push((schedule.displacement(*t)?, v));
    }
    linear_slope(&pts)
}

pub(crate) fn linear_slope(pts: &[(f64, f64)]) -> Result<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) * n {
        return Err(Error::DegenerateRegression("displacement is constant across samples"));
    }
    Ok(sxy / sxx)
}
