//! Quantitative evaluation of spectra: peak extraction, truth matching,
//! sidelobe level, support-recovery scoring and clutter suppression.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::SpectrumEstimate;

/// Ceiling applied to the clutter-suppression ratio when the residual
/// clutter power underflows (a zeroed DC bin would otherwise be +inf dB).
pub const SUPPRESSION_DB_CEILING: f64 = 120.0;

/// Peak-extraction parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeakConfig {
    /// Reported peaks closer than this many grid bins are merged (the
    /// stronger one wins; ties go to the lower frequency).
    pub min_separation_bins: usize,
    /// Report threshold relative to the strongest bin, in dB (negative).
    pub threshold_db: f64,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            min_separation_bins: 1,
            threshold_db: -60.0,
        }
    }
}

/// One extracted spectral peak.
#[derive(Debug, Clone, Serialize)]
pub struct Peak {
    pub frequency: f64,
    pub bin: usize,
    /// Amplitude in dB, `20*log10(|s|)`.
    pub amplitude_db: f64,
    /// Interpolated -3 dB width in rad/s; `None` when the peak does not
    /// fall below half power on both sides (merged or at the grid edge).
    pub half_power_width: Option<f64>,
}

/// Nearest-peak assignment for one ground-truth Doppler line.
#[derive(Debug, Clone, Serialize)]
pub struct TruthMatch {
    pub truth_frequency: f64,
    pub truth_amplitude_db: f64,
    /// Index into `PeakReport::peaks`, if any peak was available.
    pub peak_index: Option<usize>,
    pub frequency_error: Option<f64>,
    /// Estimated minus truth amplitude, in dB (includes any coherent-gain
    /// scale inherent to the estimator).
    pub amplitude_error_db: Option<f64>,
}

/// Extracted peaks, truth matching and the highest sidelobe.
#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    /// Peaks sorted by amplitude descending.
    pub peaks: Vec<Peak>,
    /// Per-truth-line matching (injective), sorted by truth amplitude
    /// descending.
    pub matches: Vec<TruthMatch>,
    /// Highest local maximum outside ±1 resolution cell of any reference
    /// peak, in dB relative to the main peak. `None` when nothing remains.
    pub highest_sidelobe_db: Option<f64>,
}

impl PeakReport {
    /// Number of reported peaks.
    pub fn resolved(&self) -> usize {
        self.peaks.len()
    }

    /// RMS of the matched frequency errors (only over matched lines).
    pub fn frequency_rmse(&self) -> Option<f64> {
        let errs: Vec<f64> = self
            .matches
            .iter()
            .filter_map(|m| m.frequency_error)
            .collect();
        if errs.is_empty() {
            return None;
        }
        Some((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt())
    }
}

fn local_maxima(power: &[f64]) -> Vec<usize> {
    let n = power.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0];
    }
    let mut maxima = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || power[i] > power[i - 1];
        let right_ok = i == n - 1 || power[i] >= power[i + 1];
        if left_ok && right_ok && power[i] > 0.0 {
            maxima.push(i);
        }
    }
    maxima
}

/// Resolution cell of the estimate in grid bins: `2*pi/(n_samples*pri)`
/// converted to bins, at least 1.
fn resolution_cell_bins(est: &SpectrumEstimate) -> usize {
    let cell = 2.0 * std::f64::consts::PI / (est.n_samples as f64 * est.grid.pri);
    let bins = (cell / est.grid.spacing()).round() as usize;
    bins.max(1)
}

fn half_power_width(power: &[f64], freqs: &[f64], peak: usize) -> Option<f64> {
    let half = power[peak] / 2.0;
    let n = power.len();

    let left = {
        let mut i = peak;
        loop {
            if i == 0 {
                break None;
            }
            if power[i - 1] <= half {
                let frac = (power[i] - half) / (power[i] - power[i - 1]);
                break Some(freqs[i] - frac * (freqs[i] - freqs[i - 1]));
            }
            if power[i - 1] > power[i] {
                break None; // rises again before crossing: merged peak
            }
            i -= 1;
        }
    };
    let right = {
        let mut i = peak;
        loop {
            if i == n - 1 {
                break None;
            }
            if power[i + 1] <= half {
                let frac = (power[i] - half) / (power[i] - power[i + 1]);
                break Some(freqs[i] + frac * (freqs[i + 1] - freqs[i]));
            }
            if power[i + 1] > power[i] {
                break None;
            }
            i += 1;
        }
    };
    match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    }
}

/// Extract local maxima above threshold, merged within the configured
/// separation, sorted by amplitude descending (ties break toward the lower
/// frequency). No truth matching; the sidelobe reference is the reported
/// peak set itself.
pub fn extract_peaks(est: &SpectrumEstimate, cfg: &PeakConfig) -> PeakReport {
    build_report(est, None, cfg)
}

/// [`extract_peaks`] plus injective nearest-peak matching against the
/// ground-truth Doppler lines `(frequency, amplitude)`. The sidelobe
/// exclusion zones are centred on the matched peaks.
pub fn extract_peaks_with_truth(
    est: &SpectrumEstimate,
    truth: &[(f64, Complex64)],
    cfg: &PeakConfig,
) -> PeakReport {
    build_report(est, Some(truth), cfg)
}

fn build_report(
    est: &SpectrumEstimate,
    truth: Option<&[(f64, Complex64)]>,
    cfg: &PeakConfig,
) -> PeakReport {
    let power = est.power();
    let freqs = &est.grid.frequencies;
    let maxima = local_maxima(&power);
    let max_power = power.iter().cloned().fold(0.0f64, f64::max);
    if max_power == 0.0 {
        return PeakReport {
            peaks: Vec::new(),
            matches: Vec::new(),
            highest_sidelobe_db: None,
        };
    }
    let floor = max_power * 10f64.powf(cfg.threshold_db / 10.0);

    // Candidates above threshold, strongest first, lower frequency on ties.
    let mut candidates: Vec<usize> = maxima.iter().cloned().filter(|&i| power[i] >= floor).collect();
    candidates.sort_by(|&a, &b| {
        power[b]
            .partial_cmp(&power[a])
            .unwrap()
            .then(freqs[a].partial_cmp(&freqs[b]).unwrap())
    });
    let mut kept: Vec<usize> = Vec::new();
    let sep = cfg.min_separation_bins;
    for &i in &candidates {
        if kept.iter().all(|&j| i.abs_diff(j) > sep) {
            kept.push(i);
        }
    }

    let peaks: Vec<Peak> = kept
        .iter()
        .map(|&i| Peak {
            frequency: freqs[i],
            bin: i,
            amplitude_db: 10.0 * power[i].log10(),
            half_power_width: half_power_width(&power, freqs, i),
        })
        .collect();

    // Injective matching: strongest truth line first, nearest unused peak.
    let mut matches = Vec::new();
    if let Some(lines) = truth {
        let mut order: Vec<usize> = (0..lines.len()).collect();
        order.sort_by(|&a, &b| lines[b].1.norm().partial_cmp(&lines[a].1.norm()).unwrap());
        let mut used = vec![false; peaks.len()];
        for idx in order {
            let (tf, ta) = lines[idx];
            let mut best: Option<(usize, f64)> = None;
            for (pi, p) in peaks.iter().enumerate() {
                if used[pi] {
                    continue;
                }
                let err = (p.frequency - tf).abs();
                if best.map_or(true, |(_, e)| err < e) {
                    best = Some((pi, err));
                }
            }
            let truth_db = 20.0 * ta.norm().log10();
            match best {
                Some((pi, err)) => {
                    used[pi] = true;
                    matches.push(TruthMatch {
                        truth_frequency: tf,
                        truth_amplitude_db: truth_db,
                        peak_index: Some(pi),
                        frequency_error: Some(err),
                        amplitude_error_db: Some(peaks[pi].amplitude_db - truth_db),
                    });
                }
                None => matches.push(TruthMatch {
                    truth_frequency: tf,
                    truth_amplitude_db: truth_db,
                    peak_index: None,
                    frequency_error: None,
                    amplitude_error_db: None,
                }),
            }
        }
    }

    // Sidelobe: highest local max outside ±1 resolution cell of the
    // reference peaks (matched peaks when truth was given).
    let cell = resolution_cell_bins(est);
    let reference_bins: Vec<usize> = if truth.is_some() {
        matches
            .iter()
            .filter_map(|m| m.peak_index.map(|pi| peaks[pi].bin))
            .collect()
    } else {
        peaks.iter().map(|p| p.bin).collect()
    };
    let main_power = reference_bins
        .iter()
        .map(|&b| power[b])
        .fold(0.0f64, f64::max)
        .max(if reference_bins.is_empty() { max_power } else { 0.0 });
    let highest_sidelobe_db = maxima
        .iter()
        .filter(|&&i| reference_bins.iter().all(|&b| i.abs_diff(b) > cell))
        .map(|&i| power[i])
        .fold(None::<f64>, |acc, p| Some(acc.map_or(p, |a| a.max(p))))
        .map(|p| 10.0 * (p / main_power).log10());

    PeakReport {
        peaks,
        matches,
        highest_sidelobe_db,
    }
}

/// Support-recovery verdict for an estimate against on-grid truth lines.
#[derive(Debug, Clone, Serialize)]
pub struct SupportScore {
    /// True iff the thresholded support equals the truth support exactly
    /// (threshold = 1% of the maximum amplitude).
    pub exact: bool,
    /// Symmetric-difference cardinality between the two supports.
    pub hamming: usize,
    /// RMS complex-amplitude error over the truth bins.
    pub amplitude_rmse: f64,
}

/// Score exact support recovery. Truth lines must be on-grid; each is
/// attributed to its nearest bin.
pub fn support_recovery_score(
    est: &SpectrumEstimate,
    truth: &[(f64, Complex64)],
) -> SupportScore {
    let max_amp = est.amplitudes.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let threshold = 0.01 * max_amp;
    let mut est_support: Vec<usize> = est
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() >= threshold && max_amp > 0.0)
        .map(|(i, _)| i)
        .collect();
    est_support.sort_unstable();

    let mut truth_support: Vec<usize> = truth
        .iter()
        .map(|&(f, _)| est.grid.nearest_bin(f))
        .collect();
    truth_support.sort_unstable();
    truth_support.dedup();

    let hamming = {
        let in_est_only = est_support
            .iter()
            .filter(|i| !truth_support.contains(i))
            .count();
        let in_truth_only = truth_support
            .iter()
            .filter(|i| !est_support.contains(i))
            .count();
        in_est_only + in_truth_only
    };
    let mut sq = 0.0;
    for &(f, a) in truth {
        let err = est.amplitudes[est.grid.nearest_bin(f)] - a;
        sq += err.norm_sqr();
    }
    let amplitude_rmse = if truth.is_empty() {
        0.0
    } else {
        (sq / truth.len() as f64).sqrt()
    };
    SupportScore {
        exact: hamming == 0 && !truth_support.is_empty(),
        hamming,
        amplitude_rmse,
    }
}

/// Clutter-band power ratio before/after, in dB (positive = suppressed),
/// clamped at [`SUPPRESSION_DB_CEILING`]. The band is `|f| <= band_halfwidth`
/// and always includes the DC bin.
pub fn clutter_suppression_db(
    before: &SpectrumEstimate,
    after: &SpectrumEstimate,
    band_halfwidth: f64,
) -> Result<f64> {
    if before.grid.len() != after.grid.len()
        || before
            .grid
            .frequencies
            .iter()
            .zip(after.grid.frequencies.iter())
            .any(|(a, b)| (a - b).abs() > 1e-9 * before.grid.spacing())
    {
        return Err(Error::Dimension(
            "clutter_suppression_db: spectra are on different grids".into(),
        ));
    }
    let band = band_halfwidth.max(0.4 * before.grid.spacing());
    let p_before = before.band_power(0.0, band);
    let p_after = after.band_power(0.0, band);
    if p_before == 0.0 && p_after == 0.0 {
        return Ok(0.0);
    }
    if p_after <= p_before * 10f64.powf(-SUPPRESSION_DB_CEILING / 10.0) {
        return Ok(SUPPRESSION_DB_CEILING);
    }
    Ok(10.0 * (p_before / p_after).log10())
}
