//! Slow-time micro-Doppler processing for few-pulse radar dwells.
//!
//! The crate covers the processing chain used to pull rotor micro-Doppler
//! signatures out of short pulse trains:
//!
//! * [`signal`] — pulse-train echo synthesis for scenes of micro-Doppler
//!   targets plus clutter and noise, with an attached ground-truth record.
//! * [`pca`] — eigen-subspace clutter suppression (SSA-style) and optional
//!   noise-rank truncation, with a two-pulse MTI canceller for comparison.
//! * [`cs`] — sparse Doppler recovery from `K << N` randomly selected pulses
//!   by l1 minimization (basis pursuit and BPDN variants).
//! * [`iaa`] — single-snapshot Iterative Adaptive Approach spectral
//!   estimation on a short uniform pulse train.
//! * [`mimo`] — quadrant phase-center geometry, virtual-array assembly and
//!   the sparse-recovery identifiability experiment.
//! * [`metrics`] — peak extraction, support-recovery scoring and clutter
//!   suppression measurement against the ground-truth record.
//! * [`pipeline`] — scenario files, configurable stage graphs and the
//!   CSV/JSON emitters behind the `microdop` binary.
//!
//! # Conventions
//!
//! Doppler frequencies are angular (rad/s) throughout. A scatterer with
//! Doppler `w` contributes `exp(-j*w*p*pri)` at pulse `p`, and every
//! dictionary/steering column follows the same signature, so a target at `w`
//! lands on the grid point `w`. The unambiguous span for a pulse repetition
//! interval `pri` is `[-pi/pri, +pi/pri)`.
//!
//! Spectra are stored as complex amplitudes; power and dB are derived views.
//!
//! # Example
//!
//! ```
//! use microdop::signal::{ClutterModel, MicroDopplerTarget, NoiseModel, PulseTrainConfig};
//! use microdop::signal::synthesize_echo;
//! use microdop::numerics::{fft_spectrum, WindowKind};
//!
//! let cfg = PulseTrainConfig::new(512, 1e-3, 9.4e9);
//! let target = MicroDopplerTarget::tone(1.0.into(), 0.0, 736.3);
//! let echo = synthesize_echo(
//!     &cfg,
//!     &[target],
//!     &ClutterModel::none(),
//!     &NoiseModel::none(),
//!     0,
//! )
//! .unwrap();
//! let spectrum = fft_spectrum(&echo, WindowKind::Rectangular, 512).unwrap();
//! let peak = spectrum.peak_bin();
//! assert!((spectrum.grid.frequencies[peak] - 736.3).abs() < 10.0);
//! ```

pub mod cs;
mod error;
pub mod iaa;
pub mod metrics;
pub mod mimo;
pub mod numerics;
pub mod pca;
pub mod pipeline;
pub mod signal;
pub mod spectrum;

pub use error::{Error, Result};
