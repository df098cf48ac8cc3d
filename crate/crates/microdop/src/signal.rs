//! Slow-time echo synthesis for scenes of micro-Doppler targets plus clutter
//! and noise.
//!
//! Fast time is collapsed to the matched-filter peak of a single range gate:
//! a target contributes `alpha * exp(-j*(body + offset)*p*pri)` per pulse
//! for each of its Doppler lines. The synthesized vector carries a
//! ground-truth record that the metrics and acceptance checks consume.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{check_finite_vector, CVector};

/// Pulse-train (waveform/CPI) parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrainConfig {
    /// Number of pulses P in the coherent processing interval.
    pub n_pulses: usize,
    /// Pulse repetition interval in seconds.
    pub pri: f64,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Range-gate extent in seconds; targets are binned into gates of this
    /// width by their delay.
    pub gate_width: f64,
}

impl PulseTrainConfig {
    pub fn new(n_pulses: usize, pri: f64, carrier_hz: f64) -> Self {
        assert!(n_pulses >= 1, "need at least one pulse");
        assert!(pri > 0.0, "pri must be positive");
        Self {
            n_pulses,
            pri,
            carrier_hz,
            gate_width: 1e-6,
        }
    }

    /// Coherent processing interval, `P * pri`, in seconds.
    pub fn cpi(&self) -> f64 {
        self.n_pulses as f64 * self.pri
    }

    /// Half of the unambiguous angular Doppler span, `pi/pri` (rad/s).
    pub fn unambiguous_halfspan(&self) -> f64 {
        std::f64::consts::PI / self.pri
    }

    /// Wavelength in metres.
    pub fn wavelength(&self) -> f64 {
        299_792_458.0 / self.carrier_hz
    }
}

/// One micro-Doppler sideband: an offset from the body Doppler and an
/// amplitude relative to the body line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroComponent {
    /// Offset from the body Doppler, rad/s.
    pub offset: f64,
    /// Amplitude relative to the body line.
    pub relative_amplitude: f64,
}

/// A scatterer with a body Doppler line and optional micro-Doppler
/// sidebands (constant-frequency over the CPI).
#[derive(Debug, Clone, PartialEq)]
pub struct MicroDopplerTarget {
    /// Complex amplitude, proportional to the RCS.
    pub amplitude: Complex64,
    /// Two-way delay in seconds (selects the range gate).
    pub delay: f64,
    /// Body Doppler, rad/s.
    pub body_doppler: f64,
    /// Micro-Doppler sidebands; empty for a point target.
    pub micro_components: Vec<MicroComponent>,
    /// Azimuth in radians; only the MIMO synthesis uses it.
    pub azimuth: f64,
}

impl MicroDopplerTarget {
    /// Point target: single body-Doppler line, no sidebands.
    pub fn tone(amplitude: Complex64, delay: f64, body_doppler: f64) -> Self {
        Self {
            amplitude,
            delay,
            body_doppler,
            micro_components: Vec::new(),
            azimuth: 0.0,
        }
    }

    /// Target with symmetric micro-Doppler sidebands at `±offset`.
    pub fn with_sidebands(
        amplitude: Complex64,
        delay: f64,
        body_doppler: f64,
        offset: f64,
        relative_amplitude: f64,
    ) -> Self {
        Self {
            amplitude,
            delay,
            body_doppler,
            micro_components: vec![
                MicroComponent {
                    offset: -offset,
                    relative_amplitude,
                },
                MicroComponent {
                    offset,
                    relative_amplitude,
                },
            ],
            azimuth: 0.0,
        }
    }

    /// All Doppler lines of this target as `(frequency, complex amplitude)`,
    /// body line first.
    pub fn doppler_lines(&self) -> Vec<(f64, Complex64)> {
        let mut lines = vec![(self.body_doppler, self.amplitude)];
        for c in &self.micro_components {
            lines.push((
                self.body_doppler + c.offset,
                self.amplitude * c.relative_amplitude,
            ));
        }
        lines
    }
}

/// Ground clutter entering through the elevation sidelobes.
///
/// `spectral_width == 0` gives a deterministic constant (DC when
/// `doppler_center == 0`) phasor of the stated power; a positive width
/// spreads the clutter over a narrow Gaussian Doppler band synthesized from
/// seeded random phasors.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterModel {
    /// Mean clutter power (per sample).
    pub power: f64,
    /// Doppler center, rad/s (0 = DC).
    pub doppler_center: f64,
    /// Gaussian spectral width (standard deviation), rad/s.
    pub spectral_width: f64,
    /// Seed for the global phase / phasor realization.
    pub seed: u64,
}

impl ClutterModel {
    pub fn none() -> Self {
        Self {
            power: 0.0,
            doppler_center: 0.0,
            spectral_width: 0.0,
            seed: 0,
        }
    }

    /// Pure-DC clutter of the given power.
    pub fn dc(power: f64, seed: u64) -> Self {
        Self {
            power,
            doppler_center: 0.0,
            spectral_width: 0.0,
            seed,
        }
    }

    /// Realize the clutter sequence over `n` pulses. Pure function of the
    /// model (including its seed).
    pub fn realize(&self, n: usize, pri: f64) -> CVector {
        if self.power <= 0.0 {
            return CVector::zeros(n);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        if self.spectral_width == 0.0 {
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let amp = Complex64::from_polar(self.power.sqrt(), phase);
            return CVector::from_fn(n, |p, _| {
                amp * Complex64::from_polar(1.0, -self.doppler_center * p as f64 * pri)
            });
        }
        // Narrowband spread: superposition of random phasors with Gaussian
        // Doppler offsets around the center.
        const N_PHASORS: usize = 64;
        let scale = (self.power / N_PHASORS as f64).sqrt();
        let mut phasors = Vec::with_capacity(N_PHASORS);
        for _ in 0..N_PHASORS {
            let offset: f64 = rng.sample::<f64, _>(StandardNormal) * self.spectral_width;
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            phasors.push((self.doppler_center + offset, phase));
        }
        CVector::from_fn(n, |p, _| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(w, phase) in &phasors {
                acc += Complex64::from_polar(scale, phase - w * p as f64 * pri);
            }
            acc
        })
    }
}

/// Zero-mean circular complex white Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Per-sample variance (E|n|^2).
    pub variance: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            variance: 0.0,
            seed: 0,
        }
    }

    pub fn new(variance: f64, seed: u64) -> Self {
        Self { variance, seed }
    }

    /// Realize `n` noise samples. Bit-exact function of the seed.
    pub fn realize(&self, n: usize) -> CVector {
        if self.variance <= 0.0 {
            return CVector::zeros(n);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let sigma = (self.variance / 2.0).sqrt();
        CVector::from_fn(n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
    }
}

/// What actually went into a synthesized echo; attached to the
/// [`SlowTimeVector`] and consumed by the truth-based metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub targets: Vec<MicroDopplerTarget>,
    pub clutter: ClutterModel,
    pub noise: NoiseModel,
}

impl GroundTruth {
    /// All Doppler lines in the scene as `(frequency, amplitude)`, with
    /// coincident lines coherently combined.
    pub fn doppler_lines(&self) -> Vec<(f64, Complex64)> {
        let mut lines: Vec<(f64, Complex64)> = Vec::new();
        for t in &self.targets {
            for (f, a) in t.doppler_lines() {
                if let Some(existing) = lines.iter_mut().find(|(ef, _)| (*ef - f).abs() < 1e-12) {
                    existing.1 += a;
                } else {
                    lines.push((f, a));
                }
            }
        }
        lines.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        lines
    }

    /// Target-only signal (no clutter, no noise) over `cfg.n_pulses`.
    pub fn clean_signal(&self, cfg: &PulseTrainConfig) -> CVector {
        let mut x = CVector::zeros(cfg.n_pulses);
        for t in &self.targets {
            for (w, a) in t.doppler_lines() {
                for p in 0..cfg.n_pulses {
                    x[p] += a * Complex64::from_polar(1.0, -w * p as f64 * cfg.pri);
                }
            }
        }
        x
    }
}

/// A length-P complex slow-time sequence at one range gate — the object all
/// estimators consume.
#[derive(Debug, Clone)]
pub struct SlowTimeVector {
    pub samples: CVector,
    pub config: PulseTrainConfig,
    pub truth: Option<GroundTruth>,
}

impl SlowTimeVector {
    /// Wrap raw samples; the length must match `config.n_pulses` and all
    /// entries must be finite.
    pub fn from_samples(samples: CVector, config: PulseTrainConfig) -> Result<Self> {
        if samples.len() != config.n_pulses {
            return Err(Error::Dimension(format!(
                "slow-time vector has {} samples but config says {} pulses",
                samples.len(),
                config.n_pulses
            )));
        }
        check_finite_vector(&samples, "slow-time samples")?;
        Ok(Self {
            samples,
            config,
            truth: None,
        })
    }

    pub fn with_truth(mut self, truth: GroundTruth) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn pri(&self) -> f64 {
        self.config.pri
    }

    /// Coherent mean of the samples.
    pub fn mean(&self) -> Complex64 {
        if self.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        self.samples.iter().sum::<Complex64>() / self.len() as f64
    }

    /// Energy `||x||^2`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The first `k` pulses as a shorter dwell (uniform sampling preserved);
    /// the truth record carries over.
    pub fn take_first(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.len() {
            return Err(Error::Dimension(format!(
                "cannot take {} of {} pulses",
                k,
                self.len()
            )));
        }
        let mut config = self.config.clone();
        config.n_pulses = k;
        Ok(Self {
            samples: CVector::from_fn(k, |p, _| self.samples[p]),
            config,
            truth: self.truth.clone(),
        })
    }
}

/// Synthesize the slow-time echo of a scene at one range gate.
///
/// Sample `p` is the coherent sum of every Doppler line of every in-gate
/// target, plus the clutter and noise realizations. Targets whose lines
/// fall outside the unambiguous span are rejected (no silent wrapping).
/// The returned vector carries the ground truth of the in-gate scene.
pub fn synthesize_echo(
    cfg: &PulseTrainConfig,
    scene: &[MicroDopplerTarget],
    clutter: &ClutterModel,
    noise: &NoiseModel,
    gate: usize,
) -> Result<SlowTimeVector> {
    let half = cfg.unambiguous_halfspan();
    for (idx, t) in scene.iter().enumerate() {
        for (w, _) in t.doppler_lines() {
            if w.abs() >= half {
                return Err(Error::Aliased {
                    doppler: w,
                    span: half,
                    target: idx,
                });
            }
        }
    }
    let in_gate: Vec<MicroDopplerTarget> = scene
        .iter()
        .filter(|t| (t.delay / cfg.gate_width).floor() as usize == gate)
        .cloned()
        .collect();

    let n = cfg.n_pulses;
    let clutter_seq = clutter.realize(n, cfg.pri);
    let noise_seq = noise.realize(n);
    let mut samples = CVector::zeros(n);
    for t in &in_gate {
        for (w, a) in t.doppler_lines() {
            for p in 0..n {
                samples[p] += a * Complex64::from_polar(1.0, -w * p as f64 * cfg.pri);
            }
        }
    }
    samples += &clutter_seq;
    samples += &noise_seq;

    Ok(SlowTimeVector {
        samples,
        config: cfg.clone(),
        truth: Some(GroundTruth {
            targets: in_gate,
            clutter: clutter.clone(),
            noise: noise.clone(),
        }),
    })
}

/// Coherent mean power `|mean(x)|^2` — the DC/clutter power estimate.
pub fn mean_power(x: &SlowTimeVector) -> f64 {
    x.mean().norm_sqr()
}
