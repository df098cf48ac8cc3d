//! Complex linear-algebra and transform kernels shared by every estimator.
//!
//! Everything here is domain-free: Hermitian eigen-decomposition (the SVD of
//! a PSD Hermitian matrix), loaded Hermitian solves, Doppler dictionary
//! construction and the windowed FFT baseline. All functions are pure.

mod window;

pub use window::WindowKind;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::SlowTimeVector;
use crate::spectrum::{DopplerGrid, SpectrumEstimate, SpectrumMethod};

/// Dense complex matrix in row-major semantic order.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = DVector<Complex64>;

/// Relative tolerance for the Hermitian-symmetry precondition.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Error if any entry of `m` is NaN or infinite.
pub fn check_finite_matrix(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Error if any entry of `v` is NaN or infinite.
pub fn check_finite_vector(v: &CVector, what: &'static str) -> Result<()> {
    if v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn require_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let norm = m.norm();
    if norm == 0.0 {
        return Ok(());
    }
    let asym = (m - m.adjoint()).norm() / norm;
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            tolerance: HERMITIAN_TOL,
        });
    }
    Ok(())
}

/// SVD of a Hermitian matrix via its eigen-decomposition.
///
/// Returns `(u, s, v)` with `s` sorted descending and
/// `u * diag(s) * v^H == m`. For a PSD input (the only case the processing
/// chain produces) `v == u` and `s` are the eigenvalues; for an indefinite
/// Hermitian input the sign is carried by `v` so the reconstruction stays
/// exact while `s` stays nonnegative.
pub fn hermitian_svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    check_finite_matrix(m, "hermitian_svd input")?;
    require_hermitian(m)?;
    // Symmetrize so round-off in the input cannot leak into the eigensolver.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let n = m.nrows();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap()
    });

    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (col, &idx) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[idx];
        s.push(lambda.abs());
        let vec = eig.eigenvectors.column(idx);
        u.set_column(col, &vec);
        if lambda < 0.0 {
            v.set_column(col, &(-vec));
        } else {
            v.set_column(col, &vec);
        }
    }
    Ok((u, s, v))
}

/// Eigen-decomposition of a Hermitian matrix: `(eigenvalues descending,
/// eigenvectors as columns)`. Thin wrapper used by the subspace filters.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_finite_matrix(m, "hermitian_eigen input")?;
    require_hermitian(m)?;
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &idx) in order.iter().enumerate() {
        values.push(eig.eigenvalues[idx]);
        vectors.set_column(col, &eig.eigenvectors.column(idx));
    }
    Ok((values, vectors))
}

/// Solve `(m + loading*I) x = b` for Hermitian PSD `m`.
///
/// One step of iterative refinement keeps the residual below
/// `1e-8 * ||b||` on well-conditioned systems. Fails with a condition
/// estimate when the loaded matrix is not positive definite.
pub fn solve_hermitian(m: &CMatrix, b: &CVector, loading: f64) -> Result<CVector> {
    check_finite_matrix(m, "solve_hermitian matrix")?;
    check_finite_vector(b, "solve_hermitian rhs")?;
    require_hermitian(m)?;
    if m.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but rhs has length {}",
            m.nrows(),
            m.ncols(),
            b.len()
        )));
    }
    if loading < 0.0 {
        return Err(Error::Config("loading must be nonnegative".into()));
    }
    let mut a = (m + m.adjoint()).scale(0.5);
    for i in 0..a.nrows() {
        a[(i, i)] += Complex64::new(loading, 0.0);
    }
    let chol = match nalgebra::Cholesky::new(a.clone()) {
        Some(c) => c,
        None => {
            let (values, _) = hermitian_eigen(&a)?;
            let max = values.first().copied().unwrap_or(0.0);
            let min = values.last().copied().unwrap_or(0.0);
            let condition = if min.abs() > 0.0 {
                max / min
            } else {
                f64::INFINITY
            };
            return Err(Error::Singular { condition });
        }
    };
    let mut x = chol.solve(b);
    let r = b - &a * &x;
    x += chol.solve(&r);
    Ok(x)
}

/// Doppler synthesis dictionary: column `k` is the slow-time signature of
/// grid frequency `w_k`, entry `(p, k) = exp(-j * w_k * p * pri)`.
///
/// Synthesizing `x = dict * s` with a one-hot `s` reproduces a pure tone at
/// the selected grid frequency. On the canonical `n_time`-point grid the
/// columns are mutually orthogonal with `dict^H * dict = n_time * I`.
pub fn dft_matrix(n_time: usize, grid: &DopplerGrid) -> CMatrix {
    assert!(n_time >= 1, "n_time must be at least 1");
    assert!(!grid.is_empty(), "grid must be non-empty");
    let tau = grid.pri;
    CMatrix::from_fn(n_time, grid.len(), |p, k| {
        Complex64::from_polar(1.0, -grid.frequencies[k] * p as f64 * tau)
    })
}

/// Largest singular value of `m` via power iteration on `m^H m`.
pub fn operator_norm(m: &CMatrix) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut v = CVector::from_element(n, Complex64::new(1.0, 0.0));
    v /= Complex64::new(v.norm(), 0.0);
    let mut sigma2 = 0.0;
    for _ in 0..50 {
        let w = m.adjoint() * (m * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w / Complex64::new(norm, 0.0);
        if (next - sigma2).abs() <= 1e-12 * next {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    sigma2.sqrt()
}

/// Windowed, zero-padded matched-filter spectrum on the canonical
/// `n_fft`-point grid.
///
/// The value at grid frequency `w` is `sum_p conj(e^{-j w p pri}) x_w(p)`
/// where `x_w` is the windowed input, so a full-scale on-grid tone with a
/// rectangular window peaks at `len(x) * amplitude`.
pub fn fft_spectrum(
    x: &SlowTimeVector,
    window: WindowKind,
    n_fft: usize,
) -> Result<SpectrumEstimate> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Dimension("fft_spectrum: empty input".into()));
    }
    if n_fft < n {
        return Err(Error::Dimension(format!(
            "n_fft {} is smaller than input length {}",
            n_fft, n
        )));
    }
    let coeffs = window.coefficients(n);
    let mut buf: Vec<Complex64> = (0..n_fft)
        .map(|p| {
            if p < n {
                x.samples[p] * coeffs[p]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);

    // FFT bin m holds sum_p x(p) e^{-j 2 pi m p / n}; the canonical grid
    // frequency 2 pi k / (n pri) (signed k) corresponds to bin (-k) mod n.
    let grid = DopplerGrid::canonical(n_fft, x.pri());
    let half = (n_fft / 2) as isize;
    let amplitudes = CVector::from_fn(n_fft, |i, _| {
        let k = i as isize - half;
        let bin = ((n_fft as isize - k) % n_fft as isize) as usize % n_fft;
        buf[bin]
    });
    Ok(SpectrumEstimate::new(
        grid,
        amplitudes,
        SpectrumMethod::Fft,
        n,
    ))
}
