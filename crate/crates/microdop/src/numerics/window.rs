//! Slow-time taper windows.

use serde::{Deserialize, Serialize};

/// Taper applied across the pulse (slow-time) dimension before a Doppler FFT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    Rectangular,
    Hann,
    Hamming,
    /// Taylor window with `nbar` near-in sidelobes held at `-sll_db` dB.
    Taylor { nbar: usize, sll_db: f64 },
}

impl WindowKind {
    /// Window coefficients of length `n` (symmetric windows, peak ~1).
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        match *self {
            WindowKind::Rectangular => vec![1.0; n],
            WindowKind::Hann => cosine_window(n, 0.5, 0.5),
            WindowKind::Hamming => cosine_window(n, 0.54, 0.46),
            WindowKind::Taylor { nbar, sll_db } => taylor(n, nbar, sll_db),
        }
    }
}

fn cosine_window(n: usize, a0: f64, a1: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| a0 - a1 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Taylor window, normalized to unit peak.
///
/// `nbar` near-in sidelobes are held approximately `sll_db` below the
/// mainlobe. Standard one-parameter Taylor synthesis; matches
/// `scipy.signal.windows.taylor(n, nbar, sll, norm=True)`.
fn taylor(n: usize, nbar: usize, sll_db: f64) -> Vec<f64> {
    use std::f64::consts::PI;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 || nbar < 1 {
        return vec![1.0; n];
    }
    let b = 10f64.powf(sll_db / 20.0);
    let a = b.acosh() / PI;
    let nbar_f = nbar as f64;
    let sigma2 = nbar_f * nbar_f / (a * a + (nbar_f - 0.5) * (nbar_f - 0.5));

    // F_m coefficients of the cosine series.
    let mut fm = vec![0.0f64; nbar.saturating_sub(1)];
    for (mi, f) in fm.iter_mut().enumerate() {
        let m = (mi + 1) as f64;
        let mut numerator = if (mi + 1) % 2 == 0 { -0.5 } else { 0.5 };
        for k in 1..nbar {
            let kf = k as f64;
            numerator *= 1.0 - m * m / (sigma2 * (a * a + (kf - 0.5) * (kf - 0.5)));
        }
        let mut denominator = 1.0;
        for k in 1..nbar {
            if k == mi + 1 {
                continue;
            }
            let kf = k as f64;
            denominator *= 1.0 - m * m / (kf * kf);
        }
        *f = numerator / denominator;
    }

    let nf = n as f64;
    let value = |x: f64| -> f64 {
        let mut w = 1.0;
        for (mi, f) in fm.iter().enumerate() {
            let m = (mi + 1) as f64;
            w += 2.0 * f * (2.0 * PI * m * (x - nf / 2.0 + 0.5) / nf).cos();
        }
        w
    };
    let peak = value((nf - 1.0) / 2.0);
    (0..n).map(|i| value(i as f64) / peak).collect()
}
