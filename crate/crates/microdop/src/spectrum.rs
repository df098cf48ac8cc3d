//! Doppler grids and spectrum estimates shared by every estimator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CVector;

/// Discrete grid of angular Doppler frequencies (rad/s), sorted ascending,
/// inside the unambiguous span `[-pi/pri, +pi/pri)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerGrid {
    /// Grid frequencies in rad/s, strictly ascending.
    pub frequencies: Vec<f64>,
    /// Pulse repetition interval the grid is defined against, in seconds.
    pub pri: f64,
}

impl DopplerGrid {
    /// Grid with explicit frequencies. Must be strictly ascending and inside
    /// the unambiguous span.
    pub fn new(frequencies: Vec<f64>, pri: f64) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::Config("doppler grid must be non-empty".into()));
        }
        if !(pri > 0.0) {
            return Err(Error::Config("pri must be positive".into()));
        }
        let half = std::f64::consts::PI / pri;
        for w in frequencies.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config(
                    "doppler grid frequencies must be strictly ascending".into(),
                ));
            }
        }
        for &f in &frequencies {
            if !f.is_finite() {
                return Err(Error::NonFinite("doppler grid"));
            }
            if f < -half || f >= half + 1e-12 * half {
                return Err(Error::Config(format!(
                    "grid frequency {f} outside unambiguous span ±{half}"
                )));
            }
        }
        Ok(Self { frequencies, pri })
    }

    /// Canonical `n`-point DFT grid: frequencies `2*pi*k / (n*pri)` for
    /// integer `k` in `[-n/2, n/2)`, sorted ascending. A pure tone whose
    /// Doppler is on this grid is exactly representable by one bin.
    pub fn canonical(n: usize, pri: f64) -> Self {
        assert!(n >= 1 && pri > 0.0);
        let step = 2.0 * std::f64::consts::PI / (n as f64 * pri);
        let half = (n / 2) as isize;
        let frequencies = (0..n)
            .map(|i| (i as isize - half) as f64 * step)
            .collect();
        Self { frequencies, pri }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Grid spacing (rad/s). Uniform for canonical grids; for irregular
    /// grids this is the minimum spacing.
    pub fn spacing(&self) -> f64 {
        self.frequencies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Half of the unambiguous Doppler span, `pi/pri`.
    pub fn unambiguous_halfspan(&self) -> f64 {
        std::f64::consts::PI / self.pri
    }

    /// Index of the grid point closest to `freq` (lowest index on ties).
    pub fn nearest_bin(&self, freq: f64) -> usize {
        let mut best = 0;
        let mut best_err = f64::INFINITY;
        for (i, &f) in self.frequencies.iter().enumerate() {
            let err = (f - freq).abs();
            if err < best_err {
                best_err = err;
                best = i;
            }
        }
        best
    }

    /// True when this grid equals the canonical `n_time`-point grid for the
    /// same PRI (up to floating-point round-off).
    pub fn is_canonical_for(&self, n_time: usize) -> bool {
        if self.len() != n_time {
            return false;
        }
        let reference = DopplerGrid::canonical(n_time, self.pri);
        let tol = 1e-9 * reference.spacing();
        self.frequencies
            .iter()
            .zip(reference.frequencies.iter())
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Which estimator produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Fft,
    Cs,
    Iaa,
}

impl std::fmt::Display for SpectrumMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectrumMethod::Fft => write!(f, "fft"),
            SpectrumMethod::Cs => write!(f, "cs"),
            SpectrumMethod::Iaa => write!(f, "iaa"),
        }
    }
}

/// Per-run solver bookkeeping attached to a [`SpectrumEstimate`].
///
/// `objective_history` holds the l1-regularized objective per iteration for
/// the CS solver, and the relative power-vector change per iteration for
/// IAA. `power_history` is IAA-only (one power-vector snapshot per
/// iteration) and is what the convergence CSV export writes.
#[derive(Debug, Clone, Default)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub residual_norm: f64,
    /// Final l1 penalty weight (CS continuation ends here).
    pub lambda_final: Option<f64>,
    /// Whether a least-squares debias polish ran on the detected support.
    pub debiased: bool,
    pub objective_history: Vec<f64>,
    pub power_history: Vec<Vec<f64>>,
}

/// Complex amplitude estimate on a Doppler grid.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub grid: DopplerGrid,
    /// Complex amplitude per grid point (same length as the grid).
    pub amplitudes: CVector,
    pub method: SpectrumMethod,
    /// Number of slow-time samples behind the estimate; sets the resolution
    /// cell `2*pi/(n_samples*pri)` used by the peak metrics.
    pub n_samples: usize,
    pub diagnostics: SolverDiagnostics,
    /// Peak metrics, filled by `metrics::extract_peaks*` when requested.
    pub metrics: Option<crate::metrics::PeakReport>,
}

impl SpectrumEstimate {
    pub fn new(
        grid: DopplerGrid,
        amplitudes: CVector,
        method: SpectrumMethod,
        n_samples: usize,
    ) -> Self {
        debug_assert_eq!(grid.len(), amplitudes.len());
        Self {
            grid,
            amplitudes,
            method,
            n_samples,
            diagnostics: SolverDiagnostics::default(),
            metrics: None,
        }
    }

    /// Power per bin, `|s_k|^2`.
    pub fn power(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Power per bin in dB (floored at -300 dB to keep zeros finite).
    pub fn power_db(&self) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|c| 10.0 * (c.norm_sqr()).log10().max(-300.0))
            .collect()
    }

    /// Index of the strongest bin (lowest index on ties).
    pub fn peak_bin(&self) -> usize {
        let mut best = 0;
        let mut best_pow = -1.0;
        for (i, c) in self.amplitudes.iter().enumerate() {
            let p = c.norm_sqr();
            if p > best_pow {
                best_pow = p;
                best = i;
            }
        }
        best
    }

    /// Total power in bins whose frequency lies within `band` of `center`.
    pub fn band_power(&self, center: f64, band: f64) -> f64 {
        self.grid
            .frequencies
            .iter()
            .zip(self.amplitudes.iter())
            .filter(|(f, _)| (**f - center).abs() <= band)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    /// Amplitude at the bin nearest to `freq`.
    pub fn amplitude_at(&self, freq: f64) -> Complex64 {
        self.amplitudes[self.grid.nearest_bin(freq)]
    }
}
