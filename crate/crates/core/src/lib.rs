//! Desk-scale simulation and signal-processing lab for clutter-aware
//! wideband MIMO-OFDM integrated sensing and communication (ISAC).
//!
//! The crate covers the full loop from scene description to clutter-aware
//! transceiver design:
//!
//! - [`scene`]: parametric scenes (targets, cold-clutter patches, hot-clutter
//!   paths), clutter amplitude statistics and reflectivity/coherence models
//! - [`waveform`]: OFDM symbol grids, block-level precoding, stacked waveform
//!   operators, communication QoS metrics
//! - [`steering`]: wideband array steering (beam squint), Doppler/delay
//!   steering, structured delay operators
//! - [`synth`]: received data-cube synthesis and snapshot stacking
//! - [`rx`]: AoA spectra, angle gating, waveform de-randomization, range
//!   focusing, range-Doppler maps, GLRT and CA-CFAR detection
//! - [`cov`]: disturbance covariance estimation (SCM family, shrinkage,
//!   robust and structured estimators, waveform-independent clutter kernels)
//! - [`suppress`]: slow-time, spatial, and space(-frequency)-time clutter
//!   suppression filters and post-suppression maps
//! - [`optim`]: clutter-aware joint transmit-receive design under
//!   communication QoS constraints (block-level and symbol-level)
//!
//! All angles are radians internally; configuration boundaries use degrees.
//! Complex data is `num_complex::Complex64` throughout.

pub mod cov;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod rx;
pub mod scene;
pub mod stats;
pub mod steering;
pub mod suppress;
pub mod synth;
pub mod waveform;

pub use error::{Error, Result};
pub use grid::OfdmGrid;

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;

/// Complex sample type used throughout the crate.
pub type Cx = num_complex::Complex64;

/// Dense complex matrix alias.
pub type CMat = nalgebra::DMatrix<Cx>;

/// Dense complex vector alias.
pub type CVec = nalgebra::DVector<Cx>;

/// Monostatic round-trip Doppler for a radial velocity `v` (m/s) at carrier
/// `f0` (Hz): `f_D = 2 v f0 / c0`. Positive velocity (approaching) maps to
/// positive Doppler.
pub fn doppler_from_velocity(v: f64, f0: f64) -> f64 {
    2.0 * v * f0 / C0
}

/// Inverse of [`doppler_from_velocity`].
pub fn velocity_from_doppler(f_d: f64, f0: f64) -> f64 {
    f_d * C0 / (2.0 * f0)
}
