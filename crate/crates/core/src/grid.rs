//! OFDM time-frequency lattice shared by every other type in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C0;

/// OFDM grid: carrier, subcarrier spacing and counts, CP duration.
///
/// The symbol duration `T_sym = 1/delta_f + t_cp` is always derived, never
/// stored.
///
/// ```
/// let g = isaclab::OfdmGrid::new(28e9, 120e3, 512, 256, None).unwrap();
/// assert!((g.t_sym() - (1.0 / 120e3 + g.t_cp)).abs() < 1e-18);
/// assert_eq!(g.bandwidth(), 512.0 * 120e3);
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmGrid {
    /// Carrier frequency f0 (Hz).
    pub f0: f64,
    /// Subcarrier spacing (Hz).
    pub delta_f: f64,
    /// Number of subcarriers N.
    pub n_subcarriers: usize,
    /// OFDM symbols per CPI, L.
    pub n_symbols: usize,
    /// Cyclic prefix duration (s).
    pub t_cp: f64,
}

impl OfdmGrid {
    /// Build a grid; `t_cp = None` applies the default `1/(14 delta_f)`
    /// (NR-like ~7% overhead).
    pub fn new(
        f0: f64,
        delta_f: f64,
        n_subcarriers: usize,
        n_symbols: usize,
        t_cp: Option<f64>,
    ) -> Result<Self> {
        if !(f0 > 0.0) {
            return Err(Error::invalid(format!("carrier frequency must be positive, got {f0}")));
        }
        if !(delta_f > 0.0) {
            return Err(Error::invalid(format!(
                "subcarrier spacing must be positive, got {delta_f}"
            )));
        }
        if n_subcarriers == 0 || n_symbols == 0 {
            return Err(Error::invalid("subcarrier and symbol counts must be at least 1"));
        }
        let t_cp = t_cp.unwrap_or(1.0 / (14.0 * delta_f));
        if t_cp < 0.0 {
            return Err(Error::invalid(format!("cyclic prefix must be nonnegative, got {t_cp}")));
        }
        Ok(Self { f0, delta_f, n_subcarriers, n_symbols, t_cp })
    }

    /// Symbol duration including CP (s).
    pub fn t_sym(&self) -> f64 {
        1.0 / self.delta_f + self.t_cp
    }

    /// Total bandwidth B = N * delta_f (Hz).
    pub fn bandwidth(&self) -> f64 {
        self.n_subcarriers as f64 * self.delta_f
    }

    /// Frequency of subcarrier `n`: f_n = f0 + n delta_f.
    pub fn subcarrier_freq(&self, n: usize) -> f64 {
        self.f0 + n as f64 * self.delta_f
    }

    /// Wavelength at subcarrier `n`.
    pub fn wavelength(&self, n: usize) -> f64 {
        C0 / self.subcarrier_freq(n)
    }

    /// Beam-squint factor `chi_n = 1 + n delta_f / f0`.
    pub fn chi(&self, n: usize) -> f64 {
        1.0 + n as f64 * self.delta_f / self.f0
    }

    /// Delay of range bin `m`: tau_m = m / (N delta_f).
    pub fn bin_delay(&self, m: usize) -> f64 {
        m as f64 / (self.n_subcarriers as f64 * self.delta_f)
    }

    /// Monostatic range of range bin `m` (m).
    pub fn bin_range(&self, m: usize) -> f64 {
        C0 * self.bin_delay(m) / 2.0
    }

    /// Doppler of Doppler bin `m` in natural DFT order, wrapped to the
    /// unambiguous interval `[-1/(2 T_sym), 1/(2 T_sym))`.
    pub fn bin_doppler(&self, m: usize) -> f64 {
        let l = self.n_symbols;
        let t = self.t_sym();
        let m = m % l;
        if (m as f64) < l as f64 / 2.0 {
            m as f64 / (l as f64 * t)
        } else {
            (m as f64 - l as f64) / (l as f64 * t)
        }
    }

    /// Velocity (m/s) of Doppler bin `m` under the round-trip convention.
    pub fn bin_velocity(&self, m: usize) -> f64 {
        crate::velocity_from_doppler(self.bin_doppler(m), self.f0)
    }

    /// Warn-level check: round-trip delays beyond the CP violate the
    /// CP-sufficiency assumption of the post-FFT model.
    pub fn delay_within_cp(&self, tau: f64) -> bool {
        tau >= 0.0 && tau <= self.t_cp
    }
}
