//! Discrete-Fourier helpers on a periodic grid: transforms, derivatives and
//! band-limited shifts.
//!
//! Convention: `f(z_j) = Σ_m F_m e^{i q_m (z_j - z_min)}` with `F = fft(f)/n`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::domain::SimulationGrid;
use crate::C64;

#[derive(Clone)]
pub struct SpectralOps {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    q: Vec<f64>,
}

impl std::fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOps").field("n", &self.n).finish()
    }
}

impl SpectralOps {
    pub fn new(grid: &SimulationGrid) -> Self {
        let n = grid.n_z();
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            q: wavenumbers(n, grid.length()),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Angular wavenumbers in FFT order. The Nyquist entry (even `n`) is
    /// stored as `+π n / L`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.q
    }

    pub fn nyquist_index(&self) -> Option<usize> {
        self.n.is_multiple_of(2).then_some(self.n / 2)
    }

    pub fn max_wavenumber(&self) -> f64 {
        self.q.iter().fold(0.0, |m, q| m.max(q.abs()))
    }

    /// Fourier amplitudes, normalised by `1/n`.
    pub fn forward(&self, f: &[C64]) -> Vec<C64> {
        let mut buf = f.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    pub fn inverse(&self, spectrum: &[C64]) -> Vec<C64> {
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        buf
    }

    /// Applies a diagonal Fourier multiplier.
    pub fn apply(&self, f: &[C64], symbol: impl Fn(usize, f64) -> C64) -> Vec<C64> {
        let mut spectrum = self.forward(f);
        for (j, v) in spectrum.iter_mut().enumerate() {
            *v *= symbol(j, self.q[j]);
        }
        self.inverse(&spectrum)
    }

    /// `∂z f`; the Nyquist mode is dropped so real data stays real.
    pub fn derivative(&self, f: &[C64]) -> Vec<C64> {
        let nyq = self.nyquist_index();
        self.apply(f, |j, q| {
            if Some(j) == nyq {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, q)
            }
        })
    }

    /// `∂zz f`.
    pub fn second_derivative(&self, f: &[C64]) -> Vec<C64> {
        self.apply(f, |_, q| C64::new(-q * q, 0.0))
    }

    /// Band-limited `f(z - s)`. The Nyquist mode is treated as the real
    /// cosine it represents.
    pub fn shift(&self, f: &[C64], s: f64) -> Vec<C64> {
        let nyq = self.nyquist_index();
        self.apply(f, |j, q| {
            if Some(j) == nyq {
                C64::new((q * s).cos(), 0.0)
            } else {
                C64::from_polar(1.0, -q * s)
            }
        })
    }
}

pub fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let dq = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            m * dq
        })
        .collect()
}
