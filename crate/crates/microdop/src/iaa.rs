//! Single-snapshot Iterative Adaptive Approach Doppler estimator.
//!
//! IAA iterates between the spectral power estimates `P_k = |s_k|^2` and the
//! model covariance `R = A P A^H`, updating each amplitude by the weighted
//! least squares
//!
//! ```text
//! s_k = a(f_k)^H R^-1 y / (a(f_k)^H R^-1 a(f_k))
//! ```
//!
//! It needs exactly one uniformly sampled slow-time snapshot (the estimator
//! consumes a [`SlowTimeVector`], never a measurement plan), making it the
//! short-dwell alternative to CS when pulse transmission cannot be
//! randomized.

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dft_matrix, CMatrix, CVector};
use crate::signal::SlowTimeVector;
use crate::spectrum::{DopplerGrid, SolverDiagnostics, SpectrumEstimate, SpectrumMethod};

/// IAA iteration parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct IaaConfig {
    /// Doppler search grid (typically much denser than the pulse count).
    pub grid: DopplerGrid,
    /// Iteration cap (the estimator normally converges well within it).
    pub max_iters: usize,
    /// Convergence threshold on the relative l2 change of the power vector.
    pub tolerance: f64,
    /// Relative diagonal loading on `R` (times `trace(R)/P`).
    pub loading: f64,
}

impl IaaConfig {
    pub fn new(grid: DopplerGrid) -> Self {
        Self {
            grid,
            max_iters: 15,
            tolerance: 1e-4,
            loading: 1e-6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.loading < 0.0 {
            return Err(Error::Config("loading must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Serializable subset of [`IaaConfig`] used by pipeline stage configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IaaParams {
    pub max_iters: usize,
    pub tolerance: f64,
    pub loading: f64,
}

impl Default for IaaParams {
    fn default() -> Self {
        Self {
            max_iters: 15,
            tolerance: 1e-4,
            loading: 1e-6,
        }
    }
}

/// Steering matrix `A`: `P x K`, column `k` the unit-modulus slow-time
/// signature of grid frequency `f_k` with `||a(f_k)||^2 = P`.
#[derive(Debug, Clone)]
pub struct SteeringMatrix {
    matrix: CMatrix,
}

impl SteeringMatrix {
    pub fn new(n_pulses: usize, grid: &DopplerGrid) -> Self {
        Self {
            matrix: dft_matrix(n_pulses, grid),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Steering vector for grid point `k`.
    pub fn column(&self, k: usize) -> CVector {
        self.matrix.column(k).clone_owned()
    }
}

/// Rank-1 clutter+noise downdate `Q(f_k) = R - P_k a(f_k) a(f_k)^H`.
///
/// By the matrix-inversion lemma the WLS amplitude computed with `Q^-1`
/// equals the one computed with `R^-1`, which is exactly why Algorithm-style
/// IAA can use the full `R` for every bin.
pub fn clutter_noise_matrix(r: &CMatrix, p_k: f64, a_k: &CVector) -> CMatrix {
    r - (a_k * a_k.adjoint()).scale(p_k)
}

/// WLS amplitude update for every grid point given a fixed covariance:
/// `s_k = a_k^H R^-1 y / (a_k^H R^-1 a_k)`. With `R = I` this reduces to
/// the normalized matched filter `a_k^H y / P`.
pub(crate) fn wls_amplitudes(r: &CMatrix, steering: &CMatrix, y: &CVector) -> Result<CVector> {
    let chol = Cholesky::new(r.clone()).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let w = chol.solve(steering); // R^-1 A
    let k_grid = steering.ncols();
    let mut s = CVector::zeros(k_grid);
    for k in 0..k_grid {
        let a_k = steering.column(k);
        let w_k = w.column(k);
        let numerator: Complex64 = w_k.iter().zip(y.iter()).map(|(wi, yi)| wi.conj() * yi).sum();
        let denominator: Complex64 = a_k
            .iter()
            .zip(w_k.iter())
            .map(|(ai, wi)| ai.conj() * wi)
            .sum();
        let den = denominator.re.max(f64::MIN_POSITIVE);
        s[k] = numerator / den;
    }
    Ok(s)
}

/// Single-snapshot IAA spectrum of a uniform pulse train.
///
/// Initializes from the normalized matched-filter periodogram
/// `P_k = |a_k^H y|^2 / P^2`, then iterates the WLS update with
/// `R = A P A^H` (diagonally loaded) until the power vector settles or the
/// iteration cap is reached (non-convergence is flagged, not an error).
pub fn iaa_spectrum(y: &SlowTimeVector, cfg: &IaaConfig) -> Result<SpectrumEstimate> {
    cfg.validate()?;
    let p_len = y.len();
    if p_len < 2 {
        return Err(Error::Dimension(
            "iaa_spectrum needs at least 2 pulses".into(),
        ));
    }
    if (cfg.grid.pri - y.pri()).abs() > 1e-12 * y.pri() {
        return Err(Error::Config(format!(
            "grid pri {} does not match signal pri {}",
            cfg.grid.pri,
            y.pri()
        )));
    }
    let half = y.config.unambiguous_halfspan();
    if cfg
        .grid
        .frequencies
        .iter()
        .any(|&f| f < -half || f >= half)
    {
        return Err(Error::Config(
            "iaa grid extends beyond the unambiguous span".into(),
        ));
    }

    let k_grid = cfg.grid.len();
    let steering = SteeringMatrix::new(p_len, &cfg.grid);
    let a = steering.matrix();

    let mut diagnostics = SolverDiagnostics::default();

    if y.samples.norm() == 0.0 {
        diagnostics.converged = true;
        diagnostics.iterations = 1;
        diagnostics.power_history.push(vec![0.0; k_grid]);
        let mut est = SpectrumEstimate::new(
            cfg.grid.clone(),
            CVector::zeros(k_grid),
            SpectrumMethod::Iaa,
            p_len,
        );
        est.diagnostics = diagnostics;
        return Ok(est);
    }

    // Matched-filter periodogram initialization.
    let mf = a.adjoint() * &y.samples;
    let mut power: Vec<f64> = mf
        .iter()
        .map(|c| c.norm_sqr() / (p_len as f64 * p_len as f64))
        .collect();
    let mut amplitudes = CVector::from_fn(k_grid, |k, _| mf[k] / p_len as f64);

    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        iterations = it;
        // R = A diag(P) A^H + loading * trace(R)/P * I.
        let mut r = CMatrix::zeros(p_len, p_len);
        for k in 0..k_grid {
            if power[k] == 0.0 {
                continue;
            }
            let col = a.column(k);
            for i in 0..p_len {
                let ci = col[i] * power[k];
                for j in 0..p_len {
                    r[(i, j)] += ci * col[j].conj();
                }
            }
        }
        let trace_over_p = r.trace().re / p_len as f64;
        let load = (cfg.loading * trace_over_p).max(f64::MIN_POSITIVE);
        for i in 0..p_len {
            r[(i, i)] += Complex64::new(load, 0.0);
        }

        amplitudes = wls_amplitudes(&r, a, &y.samples)?;
        let new_power: Vec<f64> = amplitudes.iter().map(|c| c.norm_sqr()).collect();

        let delta = power
            .iter()
            .zip(new_power.iter())
            .map(|(old, new)| (old - new) * (old - new))
            .sum::<f64>()
            .sqrt();
        let scale = power.iter().map(|p| p * p).sum::<f64>().sqrt().max(1e-300);
        let rel_change = delta / scale;

        power = new_power;
        diagnostics.power_history.push(power.clone());
        diagnostics.objective_history.push(rel_change);
        if rel_change < cfg.tolerance {
            converged = true;
            break;
        }
    }

    diagnostics.iterations = iterations;
    diagnostics.converged = converged;
    diagnostics.final_objective = diagnostics.objective_history.last().copied().unwrap_or(0.0);
    diagnostics.residual_norm = (&y.samples - a * &amplitudes).norm();

    let mut est = SpectrumEstimate::new(cfg.grid.clone(), amplitudes, SpectrumMethod::Iaa, p_len);
    est.diagnostics = diagnostics;
    Ok(est)
}
