//! Sparse Doppler recovery from `K << N` selected pulses by l1 minimization.
//!
//! The measurement is `y = psi * x` with `psi` either a random row
//! subsample (random pulse selection, the operational mode) or a complex
//! Gaussian matrix (kept for property tests). Recovery solves
//!
//! ```text
//! min ||s||_1            s.t. theta * s = y             (basis pursuit)
//! min ||s||_1            s.t. ||y - theta*s||^2 <= eps  (BPDN, constrained)
//! min lambda*||s||_1 + ||y - theta*s||^2                (BPDN, Lagrangian)
//! ```
//!
//! with `theta = psi * xi` and `xi` the Doppler synthesis dictionary. The
//! solver is a monotone accelerated proximal-gradient iteration with
//! complex soft-thresholding; the equality and constrained modes run it
//! under decreasing-`lambda` continuation with warm starts. Convergence is
//! certificate-checkable: at a Lagrangian optimum
//! `||theta^H (y - theta*s)||_inf <= lambda/2`, with equality on the
//! support.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dft_matrix, operator_norm, solve_hermitian, CMatrix, CVector};
use crate::spectrum::{DopplerGrid, SolverDiagnostics, SpectrumEstimate, SpectrumMethod};

/// Measurement matrix family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementKind {
    /// Select `n_meas` of the `n_full` pulses uniformly at random without
    /// replacement.
    RowSubsample,
    /// Dense complex Gaussian matrix with variance `1/n_meas` entries.
    ComplexGaussian,
}

/// Deterministic measurement plan: a pure function of
/// `(kind, seed, n_full, n_meas)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    pub n_full: usize,
    pub n_meas: usize,
    pub kind: MeasurementKind,
    /// Selected pulse indices, strictly increasing (row-subsample only).
    pub selected_indices: Vec<usize>,
    pub seed: u64,
}

impl MeasurementPlan {
    /// Random pulse selection: `n_meas` distinct indices out of `n_full`.
    pub fn row_subsample(n_full: usize, n_meas: usize, seed: u64) -> Result<Self> {
        Self::validate_counts(n_full, n_meas)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut selected: Vec<usize> = sample(&mut rng, n_full, n_meas).into_iter().collect();
        selected.sort_unstable();
        Ok(Self {
            n_full,
            n_meas,
            kind: MeasurementKind::RowSubsample,
            selected_indices: selected,
            seed,
        })
    }

    /// Dense complex Gaussian plan (property tests).
    pub fn complex_gaussian(n_full: usize, n_meas: usize, seed: u64) -> Result<Self> {
        Self::validate_counts(n_full, n_meas)?;
        Ok(Self {
            n_full,
            n_meas,
            kind: MeasurementKind::ComplexGaussian,
            selected_indices: Vec::new(),
            seed,
        })
    }

    fn validate_counts(n_full: usize, n_meas: usize) -> Result<()> {
        if n_meas == 0 || n_meas > n_full {
            return Err(Error::Config(format!(
                "measurement count {n_meas} out of range 1..={n_full}"
            )));
        }
        Ok(())
    }

    /// The explicit `n_meas x n_full` measurement matrix.
    pub fn matrix(&self) -> CMatrix {
        match self.kind {
            MeasurementKind::RowSubsample => CMatrix::from_fn(self.n_meas, self.n_full, |i, j| {
                if self.selected_indices[i] == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            MeasurementKind::ComplexGaussian => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let scale = 1.0 / (2.0 * self.n_meas as f64).sqrt();
                CMatrix::from_fn(self.n_meas, self.n_full, |_, _| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(scale * re, scale * im)
                })
            }
        }
    }

    /// Apply the measurement to a full-length vector.
    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.n_full {
            return Err(Error::Dimension(format!(
                "plan expects length {}, got {}",
                self.n_full,
                x.len()
            )));
        }
        match self.kind {
            MeasurementKind::RowSubsample => Ok(CVector::from_fn(self.n_meas, |i, _| {
                x[self.selected_indices[i]]
            })),
            MeasurementKind::ComplexGaussian => Ok(self.matrix() * x),
        }
    }
}

/// Which l1 problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsMode {
    /// `min ||s||_1 s.t. theta*s = y`, via lambda-continuation to zero plus
    /// a least-squares polish on the detected support.
    BasisPursuit,
    /// `min ||s||_1 s.t. ||y - theta*s||^2 <= epsilon`: continuation stops
    /// once the residual constraint holds.
    BpdnConstrained { epsilon: f64 },
    /// `min lambda*||s||_1 + ||y - theta*s||^2`; `None` uses
    /// `0.05 * ||theta^H y||_inf`.
    BpdnLagrangian { lambda: Option<f64> },
}

/// Step-size policy for the proximal gradient iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepPolicy {
    /// `1 / (2*||theta||^2)` from a power iteration (safe default).
    Lipschitz,
    /// Fixed step size (caller guarantees stability).
    Fixed(f64),
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsSolverConfig {
    pub mode: CsMode,
    /// Iteration cap per continuation stage.
    pub max_iters: usize,
    /// Relative-change stopping tolerance on the iterate.
    pub tolerance: f64,
    pub step: StepPolicy,
}

impl Default for CsSolverConfig {
    fn default() -> Self {
        Self {
            mode: CsMode::BpdnLagrangian { lambda: None },
            max_iters: 1000,
            tolerance: 1e-10,
            step: StepPolicy::Lipschitz,
        }
    }
}

impl CsSolverConfig {
    pub fn basis_pursuit() -> Self {
        Self {
            mode: CsMode::BasisPursuit,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        match self.mode {
            CsMode::BpdnConstrained { epsilon } if epsilon < 0.0 => {
                Err(Error::Config("epsilon must be nonnegative".into()))
            }
            CsMode::BpdnLagrangian {
                lambda: Some(lambda),
            } if lambda <= 0.0 => Err(Error::Config("lambda must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// Reconstruction matrix `theta = psi * xi`: the measurement applied to the
/// Doppler dictionary. For a row subsample this is literally the selected
/// rows of the dictionary.
pub fn build_reconstruction_matrix(plan: &MeasurementPlan, grid: &DopplerGrid) -> Result<CMatrix> {
    if grid.is_empty() {
        return Err(Error::Config("empty doppler grid".into()));
    }
    match plan.kind {
        MeasurementKind::RowSubsample => {
            let tau = grid.pri;
            Ok(CMatrix::from_fn(plan.n_meas, grid.len(), |i, k| {
                let p = plan.selected_indices[i] as f64;
                Complex64::from_polar(1.0, -grid.frequencies[k] * p * tau)
            }))
        }
        MeasurementKind::ComplexGaussian => Ok(plan.matrix() * dft_matrix(plan.n_full, grid)),
    }
}

/// Maximum normalized inner product between distinct columns of `theta`.
pub fn coherence(theta: &CMatrix) -> Result<f64> {
    let n = theta.ncols();
    if n < 2 {
        return Ok(0.0);
    }
    let norms: Vec<f64> = (0..n).map(|j| theta.column(j).norm()).collect();
    if norms.iter().any(|&v| v == 0.0) {
        return Err(Error::Config("coherence: zero column".into()));
    }
    let gram = theta.adjoint() * theta;
    let mut mu = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            mu = mu.max(gram[(i, j)].norm() / (norms[i] * norms[j]));
        }
    }
    Ok(mu)
}

fn objective(y: &CVector, theta: &CMatrix, s: &CVector, lambda: f64) -> f64 {
    let residual = y - theta * s;
    lambda * s.iter().map(|c| c.norm()).sum::<f64>() + residual.norm_squared()
}

fn soft_threshold(z: &CVector, tau: f64) -> CVector {
    CVector::from_fn(z.len(), |i, _| {
        let mag = z[i].norm();
        if mag <= tau {
            Complex64::new(0.0, 0.0)
        } else {
            z[i] * ((mag - tau) / mag)
        }
    })
}

struct StageResult {
    s: CVector,
    converged: bool,
    iterations: usize,
}

/// Monotone accelerated proximal-gradient stage at fixed `lambda`.
/// Appends the (non-increasing) objective per iteration to `history`.
fn mfista_stage(
    y: &CVector,
    theta: &CMatrix,
    lambda: f64,
    step: f64,
    s0: CVector,
    max_iters: usize,
    tolerance: f64,
    history: &mut Vec<f64>,
) -> StageResult {
    let mut x_prev = s0;
    let mut extrapolated = x_prev.clone();
    let mut t_k = 1.0f64;
    let mut obj_prev = objective(y, theta, &x_prev, lambda);
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iters {
        iterations = it;
        let grad = theta.adjoint() * ((theta * &extrapolated) - y) * Complex64::new(2.0, 0.0);
        let z = soft_threshold(
            &(&extrapolated - grad * Complex64::new(step, 0.0)),
            step * lambda,
        );
        let obj_z = objective(y, theta, &z, lambda);

        // Monotone safeguard: never let the accelerated step increase the
        // objective.
        let (x_new, obj_new, accepted) = if obj_z <= obj_prev {
            (z.clone(), obj_z, true)
        } else {
            (x_prev.clone(), obj_prev, false)
        };

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
        extrapolated = &x_new
            + (&z - &x_new) * Complex64::new(t_k / t_next, 0.0)
            + (&x_new - &x_prev) * Complex64::new((t_k - 1.0) / t_next, 0.0);
        t_k = t_next;

        let delta = (&x_new - &x_prev).norm();
        let scale = x_new.norm().max(1e-30);
        history.push(obj_new);
        let done = accepted && delta <= tolerance * scale;
        x_prev = x_new;
        obj_prev = obj_new;
        if done {
            converged = true;
            break;
        }
    }
    StageResult {
        s: x_prev,
        converged,
        iterations,
    }
}

/// Least-squares polish on the detected support (equality mode only).
fn debias_on_support(y: &CVector, theta: &CMatrix, s: &mut CVector) -> bool {
    let max_amp = s.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if max_amp == 0.0 {
        return false;
    }
    let support: Vec<usize> = (0..s.len())
        .filter(|&i| s[i].norm() > 1e-4 * max_amp)
        .collect();
    if support.is_empty() || support.len() > theta.nrows() {
        return false;
    }
    let mut theta_s = CMatrix::zeros(theta.nrows(), support.len());
    for (col, &i) in support.iter().enumerate() {
        theta_s.set_column(col, &theta.column(i));
    }
    let gram = theta_s.adjoint() * &theta_s;
    let rhs = theta_s.adjoint() * y;
    let loading = 1e-12 * gram.trace().re / support.len() as f64;
    match solve_hermitian(&gram, &rhs, loading) {
        Ok(coeffs) => {
            s.fill(Complex64::new(0.0, 0.0));
            for (col, &i) in support.iter().enumerate() {
                s[i] = coeffs[col];
            }
            true
        }
        Err(_) => false,
    }
}

/// Solve the configured l1 problem for the measurement `y` on the given
/// grid. Non-convergence is reported in the diagnostics, not as an error.
pub fn solve_l1(
    y: &CVector,
    theta: &CMatrix,
    grid: &DopplerGrid,
    cfg: &CsSolverConfig,
) -> Result<SpectrumEstimate> {
    cfg.validate()?;
    if y.len() != theta.nrows() {
        return Err(Error::Dimension(format!(
            "y has {} entries but theta has {} rows",
            y.len(),
            theta.nrows()
        )));
    }
    if theta.ncols() != grid.len() {
        return Err(Error::Dimension(format!(
            "theta has {} columns but grid has {} points",
            theta.ncols(),
            grid.len()
        )));
    }

    let correlation_scale = (theta.adjoint() * y).map(|c| c.norm()).max();
    let mut diagnostics = SolverDiagnostics::default();

    // Zero measurement: the minimizer is exactly zero.
    if y.norm() == 0.0 || correlation_scale == 0.0 {
        diagnostics.converged = true;
        let mut est = SpectrumEstimate::new(
            grid.clone(),
            CVector::zeros(grid.len()),
            SpectrumMethod::Cs,
            grid.len(),
        );
        est.diagnostics = diagnostics;
        return Ok(est);
    }

    let step = match cfg.step {
        StepPolicy::Fixed(step) => step,
        StepPolicy::Lipschitz => {
            let norm = operator_norm(theta);
            1.0 / (2.0 * norm * norm)
        }
    };

    let mut history = Vec::new();
    let mut s = CVector::zeros(grid.len());
    let mut converged;
    let mut iterations = 0usize;
    let mut lambda_final;
    let mut debiased = false;

    match cfg.mode {
        CsMode::BpdnLagrangian { lambda } => {
            let lambda = lambda.unwrap_or(0.05 * correlation_scale);
            let run = mfista_stage(
                y,
                theta,
                lambda,
                step,
                s,
                cfg.max_iters,
                cfg.tolerance,
                &mut history,
            );
            s = run.s;
            converged = run.converged;
            iterations = run.iterations;
            lambda_final = lambda;
        }
        CsMode::BasisPursuit | CsMode::BpdnConstrained { .. } => {
            let epsilon = match cfg.mode {
                CsMode::BpdnConstrained { epsilon } => Some(epsilon),
                _ => None,
            };
            let lambda0 = 0.1 * correlation_scale;
            let mut lambda = lambda0;
            converged = false;
            loop {
                let run = mfista_stage(
                    y,
                    theta,
                    lambda,
                    step,
                    s,
                    cfg.max_iters,
                    cfg.tolerance,
                    &mut history,
                );
                s = run.s;
                iterations += run.iterations;
                lambda_final = lambda;
                let residual2 = (y - theta * &s).norm_squared();
                match epsilon {
                    Some(eps) => {
                        if residual2 <= eps {
                            converged = run.converged;
                            break;
                        }
                    }
                    None => {
                        if lambda <= 1e-8 * lambda0 {
                            converged = run.converged && residual2 <= 1e-10 * y.norm_squared();
                            break;
                        }
                    }
                }
                if lambda <= 1e-8 * lambda0 {
                    break; // constrained mode ran out of continuation
                }
                lambda /= 8.0;
            }
            if matches!(cfg.mode, CsMode::BasisPursuit) {
                debiased = debias_on_support(y, theta, &mut s);
            }
        }
    }

    let residual_norm = (y - theta * &s).norm();
    diagnostics.iterations = iterations;
    diagnostics.converged = converged;
    diagnostics.final_objective = history.last().copied().unwrap_or(0.0);
    diagnostics.residual_norm = residual_norm;
    diagnostics.lambda_final = Some(lambda_final);
    diagnostics.debiased = debiased;
    diagnostics.objective_history = history;

    let mut est = SpectrumEstimate::new(grid.clone(), s, SpectrumMethod::Cs, grid.len());
    est.diagnostics = diagnostics;
    Ok(est)
}

/// Convenience wrapper: measure a slow-time echo with `plan` and recover
/// its spectrum on `grid`.
pub fn recover_spectrum(
    x: &crate::signal::SlowTimeVector,
    plan: &MeasurementPlan,
    grid: &DopplerGrid,
    cfg: &CsSolverConfig,
) -> Result<SpectrumEstimate> {
    let y = plan.apply(&x.samples)?;
    let theta = build_reconstruction_matrix(plan, grid)?;
    solve_l1(&y, &theta, grid, cfg)
}

/// KKT certificate of a Lagrangian BPDN solution: at an optimum the dual
/// correlation `theta^H (y - theta*s)` has infinity norm at most
/// `lambda/2`, with equality on the support of `s`.
#[derive(Debug, Clone, Serialize)]
pub struct KktCertificate {
    pub lambda_half: f64,
    /// `||theta^H (y - theta*s)||_inf`.
    pub gradient_inf_norm: f64,
    /// Range of `|theta^H r|` over the support of `s` (NaN when empty).
    pub support_gradient_min: f64,
    pub support_gradient_max: f64,
    /// `gradient_inf_norm <= lambda/2 * (1 + tol)`.
    pub satisfied: bool,
}

/// Evaluate the KKT certificate with relative slack `tol`.
pub fn kkt_certificate(
    y: &CVector,
    theta: &CMatrix,
    s: &CVector,
    lambda: f64,
    tol: f64,
) -> KktCertificate {
    let correlation = theta.adjoint() * (y - theta * s);
    let gradient_inf_norm = correlation.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let max_amp = s.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let mut support_min = f64::NAN;
    let mut support_max = f64::NAN;
    for i in 0..s.len() {
        if max_amp > 0.0 && s[i].norm() > 1e-6 * max_amp {
            let g = correlation[i].norm();
            support_min = if support_min.is_nan() {
                g
            } else {
                support_min.min(g)
            };
            support_max = if support_max.is_nan() {
                g
            } else {
                support_max.max(g)
            };
        }
    }
    let lambda_half = lambda / 2.0;
    KktCertificate {
        lambda_half,
        gradient_inf_norm,
        support_gradient_min: support_min,
        support_gradient_max: support_max,
        satisfied: gradient_inf_norm <= lambda_half * (1.0 + tol),
    }
}

/// Synthesize the time-domain signal `xi * s` from a spectrum on the
/// canonical grid.
pub fn reconstruct_time(est: &SpectrumEstimate, n_time: usize) -> Result<CVector> {
    if !est.grid.is_canonical_for(n_time) {
        return Err(Error::Unsupported(
            "reconstruct_time requires the canonical grid for n_time".into(),
        ));
    }
    let xi = dft_matrix(n_time, &est.grid);
    Ok(xi * &est.amplitudes)
}
