//! Parametric scenes: targets, cold-clutter patches, hot-clutter paths and
//! emitters, clutter amplitude statistics, and the reflectivity/coherence
//! models that drive data synthesis.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OfdmGrid;
use crate::linalg;
use crate::steering::ArrayGeometry;
use crate::{doppler_from_velocity, CMat, CVec, Cx, C0};

use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Amplitude statistics (Table-I style models + SIRV)
// ---------------------------------------------------------------------------

/// Texture distribution for compound-Gaussian (SIRV) clutter. All variants
/// are normalized to unit mean so the shape matrix carries the power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextureModel {
    /// Degenerate texture `kappa = c` (c = 1 recovers pure Gaussian speckle).
    Constant { value: f64 },
    /// Gamma texture with unit mean (K-distributed amplitude).
    Gamma { shape: f64 },
}

impl TextureModel {
    pub fn mean(&self) -> f64 {
        match self {
            TextureModel::Constant { value } => *value,
            TextureModel::Gamma { .. } => 1.0,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            TextureModel::Constant { value } => *value,
            TextureModel::Gamma { shape } => {
                rand_distr::Gamma::new(*shape, 1.0 / *shape).unwrap().sample(rng)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TextureModel::Constant { value } if *value > 0.0 => Ok(()),
            TextureModel::Constant { value } => {
                Err(Error::invalid(format!("texture value must be positive, got {value}")))
            }
            TextureModel::Gamma { shape } if *shape > 0.0 => Ok(()),
            TextureModel::Gamma { shape } => {
                Err(Error::invalid(format!("texture shape must be positive, got {shape}")))
            }
        }
    }
}

/// Clutter amplitude model. Scalar kinds describe the magnitude PDF of a
/// single reflection coefficient (phase uniform on `[0, 2pi)`); the SIRV
/// kind describes a full spatial snapshot `sqrt(kappa) g`, `g ~ CN(0, Sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AmplitudeModel {
    /// Complex Gaussian gain with mean power `sigma2`.
    Gaussian { sigma2: f64 },
    /// Rayleigh magnitude with scale `sigma_r`; `E{r^2} = 2 sigma_r^2`.
    Rayleigh { sigma_r: f64 },
    /// Log-normal magnitude: `ln r ~ N(mu, sigma^2)`.
    LogNormal { mu: f64, sigma: f64 },
    /// Weibull magnitude with shape `k` and scale `lambda`.
    Weibull { shape: f64, scale: f64 },
    /// K-distributed magnitude with shape `nu` and scale `b`;
    /// `E{r^2} = 4 nu / b^2`.
    KDist { nu: f64, b: f64 },
    /// Spherically invariant random vector: texture times correlated
    /// Gaussian speckle with shape matrix normalized to `tr(Sigma) = dim`.
    Sirv { texture: TextureModel, dim: usize },
}

impl AmplitudeModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            AmplitudeModel::Gaussian { sigma2 } => {
                if *sigma2 < 0.0 {
                    return Err(Error::invalid("gaussian power must be nonnegative"));
                }
            }
            AmplitudeModel::Rayleigh { sigma_r } => {
                if !(*sigma_r > 0.0) {
                    return Err(Error::invalid("rayleigh scale must be positive"));
                }
            }
            AmplitudeModel::LogNormal { sigma, .. } => {
                if !(*sigma > 0.0) {
                    return Err(Error::invalid("log-normal sigma must be positive"));
                }
            }
            AmplitudeModel::Weibull { shape, scale } => {
                if !(*shape > 0.0 && *scale > 0.0) {
                    return Err(Error::invalid("weibull shape and scale must be positive"));
                }
            }
            AmplitudeModel::KDist { nu, b } => {
                if !(*nu > 0.0 && *b > 0.0) {
                    return Err(Error::invalid("k-distribution nu and b must be positive"));
                }
            }
            AmplitudeModel::Sirv { texture, dim } => {
                texture.validate()?;
                if *dim == 0 {
                    return Err(Error::invalid("sirv dimension must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Scalar gain draw: magnitude on the selected PDF, phase uniform. The
    /// SIRV kind degenerates to `sqrt(kappa) CN(0,1)` (its shape matrix is a
    /// snapshot-level concept, see [`sample_clutter_gain_with_shape`]).
    pub fn sample_scalar(&self, rng: &mut ChaCha8Rng) -> Result<Cx> {
        self.validate()?;
        let phase = |rng: &mut ChaCha8Rng| {
            let u: f64 = rng.random();
            linalg::cis(2.0 * PI * u)
        };
        Ok(match self {
            AmplitudeModel::Gaussian { sigma2 } => standard_complex_gaussian(rng) * sigma2.sqrt(),
            AmplitudeModel::Rayleigh { sigma_r } => phase(rng) * rayleigh_draw(*sigma_r, rng),
            AmplitudeModel::LogNormal { mu, sigma } => {
                let r = rand_distr::LogNormal::new(*mu, *sigma)
                    .map_err(|e| Error::invalid(format!("log-normal: {e}")))?
                    .sample(rng);
                phase(rng) * r
            }
            AmplitudeModel::Weibull { shape, scale } => {
                let r = rand_distr::Weibull::new(*scale, *shape)
                    .map_err(|e| Error::invalid(format!("weibull: {e}")))?
                    .sample(rng);
                phase(rng) * r
            }
            AmplitudeModel::KDist { nu, b } => {
                let kappa = rand_distr::Gamma::new(*nu, 1.0 / *nu)
                    .map_err(|e| Error::invalid(format!("k-dist: {e}")))?
                    .sample(rng);
                let sigma_r = (2.0 * nu).sqrt() / b;
                phase(rng) * (kappa.sqrt() * rayleigh_draw(sigma_r, rng))
            }
            AmplitudeModel::Sirv { texture, .. } => {
                standard_complex_gaussian(rng) * texture.sample(rng).sqrt()
            }
        })
    }

    /// Analytic second moment `E{|gain|^2}` (for the SIRV kind, per element
    /// with the trace-normalized shape matrix).
    pub fn mean_square(&self) -> f64 {
        match self {
            AmplitudeModel::Gaussian { sigma2 } => *sigma2,
            AmplitudeModel::Rayleigh { sigma_r } => 2.0 * sigma_r * sigma_r,
            AmplitudeModel::LogNormal { mu, sigma } => (2.0 * mu + 2.0 * sigma * sigma).exp(),
            AmplitudeModel::Weibull { shape, scale } => {
                scale * scale * crate::stats::gamma_fn(1.0 + 2.0 / shape)
            }
            AmplitudeModel::KDist { nu, b } => 4.0 * nu / (b * b),
            AmplitudeModel::Sirv { texture, .. } => texture.mean(),
        }
    }
}

/// Result of one amplitude draw.
#[derive(Debug, Clone)]
pub enum GainSample {
    Scalar(Cx),
    Snapshot(CVec),
}

impl GainSample {
    pub fn scalar(&self) -> Option<Cx> {
        match self {
            GainSample::Scalar(z) => Some(*z),
            GainSample::Snapshot(_) => None,
        }
    }
}

fn standard_complex_gaussian(rng: &mut ChaCha8Rng) -> Cx {
    let n = rand_distr::StandardNormal;
    let re: f64 = n.sample(rng);
    let im: f64 = n.sample(rng);
    Cx::new(re, im) / (2.0f64).sqrt()
}

fn rayleigh_draw(sigma_r: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    sigma_r * (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Draw one complex clutter gain (or SIRV snapshot) from `model`. Scalar
/// kinds put the magnitude on the selected PDF with phase uniform on
/// `[0, 2pi)`.
pub fn sample_clutter_gain(model: &AmplitudeModel, rng: &mut ChaCha8Rng) -> Result<GainSample> {
    sample_clutter_gain_with_shape(model, None, rng)
}

/// As [`sample_clutter_gain`], with an explicit SIRV shape matrix
/// (trace-normalized internally). Scalar kinds ignore `shape`.
pub fn sample_clutter_gain_with_shape(
    model: &AmplitudeModel,
    shape: Option<&CMat>,
    rng: &mut ChaCha8Rng,
) -> Result<GainSample> {
    model.validate()?;
    if let AmplitudeModel::Sirv { texture, dim } = model {
        let kappa = texture.sample(rng);
        let sample = match shape {
            None => {
                let mut g = CVec::zeros(*dim);
                for i in 0..*dim {
                    g[i] = standard_complex_gaussian(rng);
                }
                GainSample::Snapshot(g * Cx::new(kappa.sqrt(), 0.0))
            }
            Some(sigma) => {
                if sigma.nrows() != *dim || sigma.ncols() != *dim {
                    return Err(Error::dim("sirv shape matrix does not match dim"));
                }
                let tr = sigma.trace().re;
                if tr <= 0.0 {
                    return Err(Error::invalid("sirv shape matrix must have positive trace"));
                }
                let normalized = sigma * Cx::new(*dim as f64 / tr, 0.0);
                let chol = linalg::loaded_cholesky(&normalized, 1e-12)?;
                let mut g = CVec::zeros(*dim);
                for i in 0..*dim {
                    g[i] = standard_complex_gaussian(rng);
                }
                GainSample::Snapshot(chol.l() * g * Cx::new(kappa.sqrt(), 0.0))
            }
        };
        return Ok(sample);
    }
    Ok(GainSample::Scalar(model.sample_scalar(rng)?))
}

// ---------------------------------------------------------------------------
// Reflectivity and frequency-coherence models
// ---------------------------------------------------------------------------

/// Terrain constants of the empirical (GIT-style) land-clutter reflectivity
/// model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GitParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Reflectivity in dB:
/// `sigma0 = 10 log10( A (phi_dep + C)^B exp[-D (1 + 0.1 sigma_h/lambda)] )`.
pub fn git_reflectivity(lambda: f64, phi_dep: f64, sigma_h: f64, p: &GitParams) -> Result<f64> {
    let lin = git_reflectivity_linear(lambda, phi_dep, sigma_h, p)?;
    Ok(10.0 * lin.log10())
}

/// Linear-scale GIT reflectivity.
pub fn git_reflectivity_linear(
    lambda: f64,
    phi_dep: f64,
    sigma_h: f64,
    p: &GitParams,
) -> Result<f64> {
    let base = phi_dep + p.c;
    if base <= 0.0 {
        return Err(Error::invalid(format!(
            "git reflectivity: phi_dep + C must be positive, got {base}"
        )));
    }
    let lin = p.a * base.powf(p.b) * (-p.d * (1.0 + 0.1 * sigma_h / lambda)).exp();
    if lin <= 0.0 {
        return Err(Error::numerical("git reflectivity produced a nonpositive argument to log"));
    }
    Ok(lin)
}

/// Wideband frequency-selectivity indicators:
/// electrical-size change `delta_ka = 2 pi D_dom B / c0` and subcarrier
/// coherence `rho_f = exp(-|delta_f_gap| / B_c)`.
pub fn wideband_indicators(d_dom: f64, b: f64, b_c: f64, delta_f_gap: f64) -> (f64, f64) {
    let delta_ka = 2.0 * PI * d_dom * b / C0;
    let rho_f = (-delta_f_gap.abs() / b_c).exp();
    (delta_ka, rho_f)
}

/// GIT coloring spec inside a [`FrequencyModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GitSpec {
    pub params: GitParams,
    /// Depression angle (rad).
    pub phi_dep: f64,
    /// Surface roughness (m).
    pub sigma_h: f64,
    /// System scale factor mapping reflectivity to received power.
    pub xi_c: f64,
}

/// Frequency-selectivity model for cold clutter: coherence bandwidth for
/// cross-subcarrier gain correlation, optional GIT coloring of per-subcarrier
/// powers, and dominant-scatterer size for the `delta(ka)` indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyModel {
    /// Coherence bandwidth B_c (Hz).
    pub b_c: f64,
    pub git: Option<GitSpec>,
    /// Dominant scatterer size (m).
    pub d_dom: f64,
}

impl FrequencyModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_c > 0.0) {
            return Err(Error::invalid("coherence bandwidth must be positive"));
        }
        Ok(())
    }

    /// Cross-subcarrier coherence between subcarriers `n` and `n'`.
    pub fn rho_f(&self, n: usize, n2: usize, delta_f: f64) -> f64 {
        let gap = (n as f64 - n2 as f64).abs() * delta_f;
        (-gap / self.b_c).exp()
    }
}

// ---------------------------------------------------------------------------
// Scene
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScattererRole {
    Target,
    ColdClutter,
}

/// Per-subcarrier mean power of a scatterer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerProfile {
    Flat(f64),
    PerSubcarrier(Vec<f64>),
}

impl PowerProfile {
    pub fn get(&self, n: usize) -> f64 {
        match self {
            PowerProfile::Flat(p) => *p,
            PowerProfile::PerSubcarrier(v) => v[n],
        }
    }

    pub fn total(&self, n_subcarriers: usize) -> f64 {
        match self {
            PowerProfile::Flat(p) => p * n_subcarriers as f64,
            PowerProfile::PerSubcarrier(v) => v.iter().sum(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        match self {
            PowerProfile::Flat(p) => *p *= factor,
            PowerProfile::PerSubcarrier(v) => v.iter_mut().for_each(|p| *p *= factor),
        }
    }
}

/// Point scatterer: a target of interest or a cold-clutter patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub role: ScattererRole,
    /// Azimuth (rad).
    pub theta: f64,
    /// Round-trip delay (s).
    pub tau: f64,
    /// Doppler shift (Hz).
    pub doppler: f64,
    /// Mean reflected power per subcarrier (linear).
    pub power: PowerProfile,
    pub amplitude: AmplitudeModel,
}

impl Scatterer {
    pub fn point(role: ScattererRole, theta: f64, tau: f64, doppler: f64, power: f64) -> Self {
        Self {
            role,
            theta,
            tau,
            doppler,
            power: PowerProfile::Flat(power),
            amplitude: AmplitudeModel::Gaussian { sigma2: 1.0 },
        }
    }
}

/// Hot-clutter propagation path from an external emitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotPath {
    /// Arrival azimuth (rad).
    pub theta: f64,
    /// Path delay (s).
    pub tau: f64,
    /// Doppler (Hz).
    pub doppler: f64,
    /// Path power (linear).
    pub power: f64,
    /// Index into the scene emitter list.
    pub emitter: usize,
    /// Waveform known at the receiver.
    pub cooperative: bool,
}

/// External emitter: per-subcarrier spectral power of its waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emitter {
    pub spectral_power: PowerProfile,
}

impl Default for Emitter {
    fn default() -> Self {
        Self { spectral_power: PowerProfile::Flat(1.0) }
    }
}

/// Additive disturbance specification.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    /// Spatially white `CN(0, sigma2 I)`.
    White(f64),
    /// Explicit Hermitian PSD covariance.
    Colored(CMat),
}

impl NoiseSpec {
    pub fn validate(&self, n_rx: usize) -> Result<()> {
        match self {
            NoiseSpec::White(s) => {
                if *s < 0.0 {
                    return Err(Error::invalid("noise power must be nonnegative"));
                }
            }
            NoiseSpec::Colored(r) => {
                if r.nrows() != n_rx || r.ncols() != n_rx {
                    return Err(Error::dim("noise covariance does not match rx element count"));
                }
                if linalg::hermitian_defect(r) > 1e-10 * (1.0 + r.camax()) {
                    return Err(Error::invalid("noise covariance must be Hermitian"));
                }
                if linalg::min_eigenvalue(r) < -1e-10 * (1.0 + r.camax()) {
                    return Err(Error::invalid("noise covariance must be PSD"));
                }
            }
        }
        Ok(())
    }

    /// Dense covariance matrix.
    pub fn covariance(&self, n_rx: usize) -> CMat {
        match self {
            NoiseSpec::White(s) => CMat::identity(n_rx, n_rx) * Cx::new(*s, 0.0),
            NoiseSpec::Colored(r) => r.clone(),
        }
    }
}

/// When scatterer gains are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainSchedule {
    /// Block fading: one draw per scatterer per CPI.
    #[default]
    PerCpi,
    /// Fast texture: redraw each OFDM symbol.
    PerSymbol,
}

/// Fully resolved scene: everything synthesis needs.
#[derive(Debug, Clone)]
pub struct Scene {
    pub grid: OfdmGrid,
    pub tx_array: ArrayGeometry,
    pub rx_array: ArrayGeometry,
    pub scatterers: Vec<Scatterer>,
    pub hot_paths: Vec<HotPath>,
    pub emitters: Vec<Emitter>,
    pub noise: NoiseSpec,
    pub freq_model: Option<FrequencyModel>,
    pub gain_schedule: GainSchedule,
    pub seed: u64,
    /// Non-fatal findings from scene construction (CP violations etc).
    pub warnings: Vec<String>,
}

impl Scene {
    /// The scene's counter-based generator; all stochastic draws for a given
    /// purpose route through a dedicated stream of this RNG.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn n_rx(&self) -> usize {
        self.rx_array.len()
    }

    pub fn n_tx(&self) -> usize {
        self.tx_array.len()
    }

    /// Clone with all targets removed (target-free training scenes).
    pub fn without_targets(&self) -> Scene {
        let mut s = self.clone();
        s.scatterers.retain(|sc| sc.role == ScattererRole::ColdClutter);
        s
    }

    /// Clone with the transmitter muted (quiet periods: hot clutter and
    /// noise only).
    pub fn muted_transmitter(&self) -> Scene {
        let mut s = self.clone();
        s.scatterers.clear();
        s
    }

    pub fn targets(&self) -> impl Iterator<Item = &Scatterer> {
        self.scatterers.iter().filter(|s| s.role == ScattererRole::Target)
    }

    pub fn cold_clutter(&self) -> impl Iterator<Item = &Scatterer> {
        self.scatterers.iter().filter(|s| s.role == ScattererRole::ColdClutter)
    }
}

// ---------------------------------------------------------------------------
// Scene configuration and construction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub f0_hz: f64,
    pub delta_f_hz: f64,
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    #[serde(default)]
    pub t_cp_s: Option<f64>,
}

/// One point scatterer in configuration units (degrees, meters, m/s).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub theta_deg: f64,
    pub range_m: f64,
    #[serde(default)]
    pub velocity_mps: Option<f64>,
    #[serde(default)]
    pub doppler_hz: Option<f64>,
    pub power: f64,
    #[serde(default)]
    pub amplitude: Option<AmplitudeModel>,
}

/// Batch generator for diffuse cold clutter on iso-range rings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterRingConfig {
    pub count: usize,
    pub ring_ranges_m: Vec<f64>,
    pub azimuth_deg: [f64; 2],
    pub velocity_mps: [f64; 2],
    /// Per-scatterer mean power (linear).
    pub power: f64,
    #[serde(default)]
    pub amplitude: Option<AmplitudeModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotPathConfig {
    pub theta_deg: f64,
    /// One-way propagation range of this path (m).
    pub range_m: f64,
    #[serde(default)]
    pub velocity_mps: Option<f64>,
    #[serde(default)]
    pub doppler_hz: Option<f64>,
    pub power: f64,
    #[serde(default)]
    pub emitter: usize,
    #[serde(default)]
    pub cooperative: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub grid: GridConfig,
    pub tx_elements: usize,
    pub rx_elements: usize,
    #[serde(default)]
    pub targets: Vec<PointConfig>,
    #[serde(default)]
    pub clutter: Vec<PointConfig>,
    #[serde(default)]
    pub clutter_rings: Option<ClutterRingConfig>,
    #[serde(default)]
    pub hot_paths: Vec<HotPathConfig>,
    #[serde(default)]
    pub n_emitters: Option<usize>,
    pub noise_power: f64,
    #[serde(default)]
    pub frequency_model: Option<FrequencyModel>,
    /// Scale clutter + hot power so the pre-processing SCNR (under isotropic
    /// unit-power illumination) hits this value.
    #[serde(default)]
    pub scnr_db: Option<f64>,
    #[serde(default)]
    pub gain_schedule: GainSchedule,
    /// Treat delays beyond the CP as errors instead of warnings.
    #[serde(default)]
    pub strict_cp: bool,
    pub seed: u64,
}

fn resolve_doppler(
    field: &str,
    velocity: Option<f64>,
    doppler: Option<f64>,
    f0: f64,
    round_trip: bool,
) -> Result<f64> {
    match (velocity, doppler) {
        (Some(_), Some(_)) => Err(Error::invalid(format!(
            "{field}: give either velocity_mps or doppler_hz, not both"
        ))),
        (Some(v), None) => {
            Ok(if round_trip { doppler_from_velocity(v, f0) } else { v * f0 / C0 })
        }
        (None, Some(f)) => Ok(f),
        (None, None) => Ok(0.0),
    }
}

/// Build a fully resolved [`Scene`] from a validated configuration:
/// velocities are converted to Doppler, ring clutter is expanded through the
/// scene RNG, per-subcarrier powers are populated (GIT coloring when a
/// frequency model is present), and the optional `scnr_db` knob rescales
/// disturbance power.
pub fn build_scene(config: &SceneConfig) -> Result<Scene> {
    let grid = OfdmGrid::new(
        config.grid.f0_hz,
        config.grid.delta_f_hz,
        config.grid.n_subcarriers,
        config.grid.n_symbols,
        config.grid.t_cp_s,
    )?;
    if config.tx_elements == 0 || config.rx_elements == 0 {
        return Err(Error::invalid("tx_elements and rx_elements must be at least 1"));
    }
    if !(config.noise_power >= 0.0) {
        return Err(Error::invalid("noise_power: must be nonnegative"));
    }
    if let Some(fm) = &config.frequency_model {
        fm.validate()?;
    }

    let tx_array = ArrayGeometry::ula_half_lambda(config.tx_elements, grid.f0);
    let rx_array = ArrayGeometry::ula_half_lambda(config.rx_elements, grid.f0);

    let mut warnings = Vec::new();
    let mut scatterers = Vec::new();

    let push_point = |cfg: &PointConfig,
                          role: ScattererRole,
                          field: &str,
                          warnings: &mut Vec<String>,
                          scatterers: &mut Vec<Scatterer>|
     -> Result<()> {
        if !(cfg.power >= 0.0) {
            return Err(Error::invalid(format!("{field}.power: must be nonnegative")));
        }
        let tau = 2.0 * cfg.range_m / C0;
        if !grid.delay_within_cp(tau) {
            let msg = format!(
                "{field}: round-trip delay {:.3e} s exceeds the CP {:.3e} s",
                tau, grid.t_cp
            );
            if config.strict_cp {
                return Err(Error::invalid(msg));
            }
            warnings.push(msg);
        }
        let doppler =
            resolve_doppler(field, cfg.velocity_mps, cfg.doppler_hz, grid.f0, true)?;
        let amplitude =
            cfg.amplitude.clone().unwrap_or(AmplitudeModel::Gaussian { sigma2: 1.0 });
        amplitude.validate().map_err(|e| Error::invalid(format!("{field}.amplitude: {e}")))?;
        scatterers.push(Scatterer {
            role,
            theta: cfg.theta_deg.to_radians(),
            tau,
            doppler,
            power: PowerProfile::Flat(cfg.power),
            amplitude,
        });
        Ok(())
    };

    for (i, t) in config.targets.iter().enumerate() {
        push_point(t, ScattererRole::Target, &format!("targets[{i}]"), &mut warnings, &mut scatterers)?;
    }
    for (i, c) in config.clutter.iter().enumerate() {
        push_point(
            c,
            ScattererRole::ColdClutter,
            &format!("clutter[{i}]"),
            &mut warnings,
            &mut scatterers,
        )?;
    }

    // Expand diffuse ring clutter through a dedicated RNG stream so scene
    // construction stays deterministic in (config, seed).
    if let Some(rings) = &config.clutter_rings {
        if rings.ring_ranges_m.is_empty() {
            return Err(Error::invalid("clutter_rings.ring_ranges_m: must not be empty"));
        }
        if !(rings.power >= 0.0) {
            return Err(Error::invalid("clutter_rings.power: must be nonnegative"));
        }
        let amplitude =
            rings.amplitude.clone().unwrap_or(AmplitudeModel::Gaussian { sigma2: 1.0 });
        amplitude.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(STREAM_SCENE_BUILD);
        let [az_lo, az_hi] = rings.azimuth_deg;
        let [v_lo, v_hi] = rings.velocity_mps;
        for i in 0..rings.count {
            let range = rings.ring_ranges_m[i % rings.ring_ranges_m.len()];
            let theta = (az_lo + (az_hi - az_lo) * rng.random::<f64>()).to_radians();
            let v = v_lo + (v_hi - v_lo) * rng.random::<f64>();
            let tau = 2.0 * range / C0;
            if !grid.delay_within_cp(tau) {
                let msg = format!(
                    "clutter_rings[{i}]: round-trip delay {:.3e} s exceeds the CP {:.3e} s",
                    tau, grid.t_cp
                );
                if config.strict_cp {
                    return Err(Error::invalid(msg));
                }
                if i == 0 {
                    warnings.push(msg);
                }
            }
            scatterers.push(Scatterer {
                role: ScattererRole::ColdClutter,
                theta,
                tau,
                doppler: doppler_from_velocity(v, grid.f0),
                power: PowerProfile::Flat(rings.power),
                amplitude: amplitude.clone(),
            });
        }
    }

    let n_emitters = config
        .n_emitters
        .unwrap_or_else(|| config.hot_paths.iter().map(|h| h.emitter + 1).max().unwrap_or(0));
    let emitters = vec![Emitter::default(); n_emitters];

    let mut hot_paths = Vec::new();
    for (i, h) in config.hot_paths.iter().enumerate() {
        if !(h.power >= 0.0) {
            return Err(Error::invalid(format!("hot_paths[{i}].power: must be nonnegative")));
        }
        if h.emitter >= n_emitters.max(1) {
            return Err(Error::invalid(format!(
                "hot_paths[{i}].emitter: index {} out of range",
                h.emitter
            )));
        }
        hot_paths.push(HotPath {
            theta: h.theta_deg.to_radians(),
            tau: h.range_m / C0,
            doppler: resolve_doppler(
                &format!("hot_paths[{i}]"),
                h.velocity_mps,
                h.doppler_hz,
                grid.f0,
                false,
            )?,
            power: h.power,
            emitter: h.emitter,
            cooperative: h.cooperative,
        });
    }

    // Per-subcarrier power coloring via the GIT reflectivity profile.
    if let Some(fm) = &config.frequency_model {
        if let Some(git) = &fm.git {
            let n = grid.n_subcarriers;
            for sc in scatterers.iter_mut().filter(|s| s.role == ScattererRole::ColdClutter) {
                let base = sc.power.get(0);
                let ref0 =
                    git_reflectivity_linear(grid.wavelength(0), git.phi_dep, git.sigma_h, &git.params)?;
                let mut profile = Vec::with_capacity(n);
                for m in 0..n {
                    let refl = git_reflectivity_linear(
                        grid.wavelength(m),
                        git.phi_dep,
                        git.sigma_h,
                        &git.params,
                    )?;
                    // xi_c carries the absolute level; the profile is applied
                    // relative to subcarrier 0 so `power` keeps its meaning.
                    profile.push(base * git.xi_c * refl / (git.xi_c * ref0));
                }
                sc.power = PowerProfile::PerSubcarrier(profile);
            }
        }
    }

    let mut scene = Scene {
        grid,
        tx_array,
        rx_array,
        scatterers,
        hot_paths,
        emitters,
        noise: NoiseSpec::White(config.noise_power),
        freq_model: config.frequency_model.clone(),
        gain_schedule: config.gain_schedule,
        seed: config.seed,
        warnings,
    };

    if let Some(db) = config.scnr_db {
        apply_scnr_knob(&mut scene, db)?;
    }

    Ok(scene)
}

/// Scale clutter + hot-path power so the analytic pre-processing SCNR under
/// isotropic unit-power illumination equals `scnr_db`.
fn apply_scnr_knob(scene: &mut Scene, scnr_db: f64) -> Result<()> {
    let n = scene.grid.n_subcarriers;
    let target_power: f64 = scene.targets().map(|s| s.power.total(n)).sum();
    let clutter_power: f64 = scene.cold_clutter().map(|s| s.power.total(n)).sum();
    let hot_power: f64 = scene
        .hot_paths
        .iter()
        .map(|h| h.power * scene.emitters[h.emitter].spectral_power.total(n))
        .sum();
    let noise_power = match &scene.noise {
        NoiseSpec::White(s) => s * n as f64,
        NoiseSpec::Colored(r) => r.trace().re / scene.n_rx() as f64 * n as f64,
    };
    if target_power <= 0.0 {
        return Err(Error::invalid("scnr_db knob requires at least one target with power"));
    }
    if clutter_power + hot_power <= 0.0 {
        return Err(Error::invalid("scnr_db knob requires clutter or hot paths to scale"));
    }
    let gamma = 10f64.powf(scnr_db / 10.0);
    let alpha = (target_power / gamma - noise_power) / (clutter_power + hot_power);
    if alpha <= 0.0 {
        return Err(Error::invalid(format!(
            "requested scnr {scnr_db} dB is above the noise-limited SCNR; reduce noise or raise target power"
        )));
    }
    for sc in scene.scatterers.iter_mut() {
        if sc.role == ScattererRole::ColdClutter {
            sc.power.scale(alpha);
        }
    }
    for h in scene.hot_paths.iter_mut() {
        h.power *= alpha;
    }
    Ok(())
}

/// RNG stream ids (one per stochastic purpose).
pub const STREAM_SCENE_BUILD: u64 = 0xBEE5;
pub const STREAM_GAINS: u64 = 1;
pub const STREAM_NOISE: u64 = 2;
pub const STREAM_EMITTERS: u64 = 3;
pub const STREAM_SYMBOLS: u64 = 4;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(2024)
    }

    #[test]
    fn zero_power_gaussian_is_zero() {
        let mut r = rng();
        let g = sample_clutter_gain(&AmplitudeModel::Gaussian { sigma2: 0.0 }, &mut r).unwrap();
        assert_eq!(g.scalar().unwrap(), Cx::new(0.0, 0.0));
    }

    #[test]
    fn rayleigh_second_moment_matches_table() {
        // E{r^2} = 2 sigma_r^2 within 3 standard errors over 1e5 draws
        let mut r = rng();
        let model = AmplitudeModel::Rayleigh { sigma_r: 1.0 };
        let n = 100_000;
        let sq: Vec<f64> = (0..n)
            .map(|_| sample_clutter_gain(&model, &mut r).unwrap().scalar().unwrap().norm_sqr())
            .collect();
        let mean = stats::mean(&sq);
        // var(r^2) for rayleigh(1) = E r^4 - (E r^2)^2 = 8 - 4 = 4
        let se = (4.0f64 / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn amplitude_moments_match_analytic() {
        let mut r = rng();
        let n = 200_000;
        for model in [
            AmplitudeModel::Gaussian { sigma2: 2.5 },
            AmplitudeModel::Rayleigh { sigma_r: 0.7 },
            AmplitudeModel::LogNormal { mu: -0.3, sigma: 0.4 },
            AmplitudeModel::Weibull { shape: 1.6, scale: 1.2 },
            AmplitudeModel::KDist { nu: 1.5, b: 2.0 },
        ] {
            let sq: Vec<f64> = (0..n)
                .map(|_| sample_clutter_gain(&model, &mut r).unwrap().scalar().unwrap().norm_sqr())
                .collect();
            let mean = stats::mean(&sq);
            let expect = model.mean_square();
            let se = (stats::variance(&sq) / n as f64).sqrt();
            assert!(
                (mean - expect).abs() < 4.0 * se.max(1e-6),
                "{model:?}: mean {mean} vs analytic {expect}"
            );
        }
    }

    #[test]
    fn sirv_unit_texture_degenerates_to_gaussian() {
        // kappa = 1: SIRV magnitudes match pure Gaussian speckle (KS at 1%)
        let mut r = rng();
        let dim = 4;
        let model =
            AmplitudeModel::Sirv { texture: TextureModel::Constant { value: 1.0 }, dim };
        let n = 4000;
        let mut sirv_mags = Vec::with_capacity(n * dim);
        for _ in 0..n {
            match sample_clutter_gain(&model, &mut r).unwrap() {
                GainSample::Snapshot(v) => sirv_mags.extend(v.iter().map(|z| z.norm())),
                GainSample::Scalar(_) => unreachable!(),
            }
        }
        let gauss_mags: Vec<f64> =
            (0..n * dim).map(|_| standard_complex_gaussian(&mut r).norm()).collect();
        let d = stats::ks_statistic(&sirv_mags, &gauss_mags);
        let crit = stats::ks_critical(sirv_mags.len(), gauss_mags.len(), 0.01);
        assert!(d < crit, "ks {d} vs critical {crit}");
    }

    #[test]
    fn sirv_heavy_texture_is_not_gaussian() {
        let mut r = rng();
        let model =
            AmplitudeModel::Sirv { texture: TextureModel::Gamma { shape: 0.3 }, dim: 4 };
        let n = 4000;
        let mut mags = Vec::new();
        for _ in 0..n {
            if let GainSample::Snapshot(v) = sample_clutter_gain(&model, &mut r).unwrap() {
                mags.extend(v.iter().map(|z| z.norm()));
            }
        }
        let gauss: Vec<f64> = (0..mags.len()).map(|_| standard_complex_gaussian(&mut r).norm()).collect();
        let d = stats::ks_statistic(&mags, &gauss);
        assert!(d > stats::ks_critical(mags.len(), gauss.len(), 0.01));
    }

    #[test]
    fn sirv_shape_matrix_trace_normalized() {
        let mut r = rng();
        let dim = 3;
        // intentionally badly scaled shape matrix
        let sigma = CMat::identity(dim, dim) * Cx::new(17.0, 0.0);
        let model = AmplitudeModel::Sirv { texture: TextureModel::Constant { value: 1.0 }, dim };
        let n = 20_000;
        let mut acc = 0.0;
        for _ in 0..n {
            if let GainSample::Snapshot(v) =
                sample_clutter_gain_with_shape(&model, Some(&sigma), &mut r).unwrap()
            {
                acc += v.norm_squared();
            }
        }
        // after normalization tr(Sigma) = dim so E ||v||^2 = dim
        let mean = acc / n as f64;
        assert!((mean - dim as f64).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn all_gains_finite() {
        let mut r = rng();
        for model in [
            AmplitudeModel::Gaussian { sigma2: 1.0 },
            AmplitudeModel::KDist { nu: 0.5, b: 1.0 },
            AmplitudeModel::Weibull { shape: 0.8, scale: 2.0 },
        ] {
            for _ in 0..2000 {
                let z = sample_clutter_gain(&model, &mut r).unwrap().scalar().unwrap();
                assert!(z.re.is_finite() && z.im.is_finite());
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(AmplitudeModel::Rayleigh { sigma_r: 0.0 }.validate().is_err());
        assert!(AmplitudeModel::Weibull { shape: -1.0, scale: 1.0 }.validate().is_err());
        assert!(AmplitudeModel::KDist { nu: 1.0, b: 0.0 }.validate().is_err());
        assert!(AmplitudeModel::Gaussian { sigma2: -0.1 }.validate().is_err());
        assert!(AmplitudeModel::Gaussian { sigma2: 0.0 }.validate().is_ok());
    }

    #[test]
    fn git_reflectivity_cases() {
        // sigma_h = 0, D = 0: exponential term is 1
        let p = GitParams { a: 0.1, b: 0.5, c: 0.2, d: 0.0 };
        let db = git_reflectivity(0.01, 0.3, 0.0, &p).unwrap();
        let expect = 10.0 * (0.1f64 * (0.5f64).powf(0.5)).log10();
        assert!((db - expect).abs() < 1e-12);

        // A=1, B=0, D=0: 0 dB regardless of C
        let p = GitParams { a: 1.0, b: 0.0, c: 7.0, d: 0.0 };
        assert!(git_reflectivity(0.01, 0.3, 1.0, &p).unwrap().abs() < 1e-12);

        // doubling lambda with sigma_h > 0 strictly increases sigma0
        let p = GitParams { a: 0.05, b: 0.7, c: 0.1, d: 2.0 };
        let lo = git_reflectivity(0.01, 0.2, 0.05, &p).unwrap();
        let hi = git_reflectivity(0.02, 0.2, 0.05, &p).unwrap();
        assert!(hi > lo);

        // nonpositive base angle errors
        let p = GitParams { a: 1.0, b: 1.0, c: -1.0, d: 0.0 };
        assert!(git_reflectivity(0.01, 0.5, 0.0, &p).is_err());
    }

    #[test]
    fn wideband_indicator_values() {
        // D_dom = 1 m, B = 400 MHz: delta(ka) ~ 8.4
        let (dka, _) = wideband_indicators(1.0, 400e6, 1e6, 0.0);
        assert!((dka - 8.4).abs() < 0.02, "delta_ka {dka}");
        // zero separation: rho = 1
        let (_, rho0) = wideband_indicators(1.0, 400e6, 1e6, 0.0);
        assert_eq!(rho0, 1.0);
        // gap = B_c: rho = 1/e
        let (_, rho) = wideband_indicators(1.0, 400e6, 2.5e6, 2.5e6);
        assert!((rho - (-1.0f64).exp()).abs() < 1e-12);
        // monotone nonincreasing in |gap|, always in (0, 1]
        let mut last = 1.0;
        for k in 0..50 {
            let (_, r) = wideband_indicators(1.0, 400e6, 2.5e6, k as f64 * 1e5);
            assert!(r > 0.0 && r <= last + 1e-15);
            last = r;
        }
    }

    fn desk_config() -> SceneConfig {
        SceneConfig {
            grid: GridConfig {
                f0_hz: 28e9,
                delta_f_hz: 120e3,
                n_subcarriers: 64,
                n_symbols: 32,
                t_cp_s: None,
            },
            tx_elements: 8,
            rx_elements: 8,
            targets: vec![PointConfig {
                theta_deg: -10.0,
                range_m: 41.8,
                velocity_mps: Some(-31.2),
                doppler_hz: None,
                power: 1.0,
                amplitude: None,
            }],
            clutter: vec![],
            clutter_rings: Some(ClutterRingConfig {
                count: 100,
                ring_ranges_m: vec![30.0, 36.0, 48.0, 54.0],
                azimuth_deg: [-90.0, 90.0],
                velocity_mps: [-1.0, 1.0],
                power: 1.0,
                amplitude: None,
            }),
            hot_paths: vec![],
            n_emitters: None,
            noise_power: 1e-3,
            frequency_model: None,
            scnr_db: None,
            gain_schedule: GainSchedule::default(),
            strict_cp: false,
            seed: 7,
        }
    }

    #[test]
    fn build_scene_table_ii_style() {
        let mut cfg = desk_config();
        cfg.grid.n_subcarriers = 512;
        cfg.grid.n_symbols = 256;
        cfg.tx_elements = 16;
        cfg.rx_elements = 16;
        let scene = build_scene(&cfg).unwrap();
        assert_eq!(scene.grid.f0, 28e9);
        assert_eq!(scene.grid.delta_f, 120e3);
        assert_eq!(scene.grid.n_subcarriers, 512);
        assert_eq!(scene.grid.n_symbols, 256);
        assert_eq!(scene.n_tx(), 16);
        assert_eq!(scene.n_rx(), 16);
        let toi = scene.targets().next().unwrap();
        assert!((toi.theta + 10f64.to_radians()).abs() < 1e-12);
        assert!((toi.tau - 2.0 * 41.8 / C0).abs() < 1e-16);
        assert!((toi.doppler - doppler_from_velocity(-31.2, 28e9)).abs() < 1e-9);
    }

    #[test]
    fn build_scene_ring_expansion() {
        let scene = build_scene(&desk_config()).unwrap();
        let cold: Vec<_> = scene.cold_clutter().collect();
        assert_eq!(cold.len(), 100);
        for sc in &cold {
            assert!(sc.theta >= -PI / 2.0 && sc.theta <= PI / 2.0);
            let v = crate::velocity_from_doppler(sc.doppler, 28e9);
            assert!(v.abs() <= 1.0 + 1e-12);
        }
        // deterministic in (config, seed)
        let again = build_scene(&desk_config()).unwrap();
        for (a, b) in scene.scatterers.iter().zip(again.scatterers.iter()) {
            assert_eq!(a.theta, b.theta);
            assert_eq!(a.doppler, b.doppler);
        }
        // different seed gives a different draw
        let mut cfg = desk_config();
        cfg.seed = 8;
        let other = build_scene(&cfg).unwrap();
        assert!(other.scatterers[1].theta != scene.scatterers[1].theta);
    }

    #[test]
    fn build_scene_empty_is_noise_only() {
        let mut cfg = desk_config();
        cfg.targets.clear();
        cfg.clutter_rings = None;
        let scene = build_scene(&cfg).unwrap();
        assert!(scene.scatterers.is_empty());
        assert!(scene.hot_paths.is_empty());
    }

    #[test]
    fn build_scene_validation_errors() {
        let mut cfg = desk_config();
        cfg.targets[0].power = -1.0;
        let err = build_scene(&cfg).unwrap_err().to_string();
        assert!(err.contains("targets[0].power"), "{err}");

        let mut cfg = desk_config();
        cfg.targets[0].range_m = 1e6; // delay way past the CP
        cfg.strict_cp = true;
        assert!(build_scene(&cfg).is_err());
        cfg.strict_cp = false;
        let scene = build_scene(&cfg).unwrap();
        assert!(!scene.warnings.is_empty());
    }

    #[test]
    fn scnr_knob_hits_requested_level() {
        let mut cfg = desk_config();
        cfg.scnr_db = Some(-45.0);
        let scene = build_scene(&cfg).unwrap();
        let n = scene.grid.n_subcarriers;
        let t: f64 = scene.targets().map(|s| s.power.total(n)).sum();
        let c: f64 = scene.cold_clutter().map(|s| s.power.total(n)).sum();
        let z = cfg.noise_power * n as f64;
        let scnr = 10.0 * (t / (c + z)).log10();
        assert!((scnr + 45.0).abs() < 1e-9, "scnr {scnr}");
    }

    #[test]
    fn git_coloring_populates_profiles() {
        let mut cfg = desk_config();
        cfg.frequency_model = Some(FrequencyModel {
            b_c: 5e6,
            git: Some(GitSpec {
                params: GitParams { a: 0.1, b: 0.6, c: 0.1, d: 1.5 },
                phi_dep: 0.2,
                sigma_h: 0.1,
                xi_c: 1.0,
            }),
            d_dom: 1.0,
        });
        let scene = build_scene(&cfg).unwrap();
        let sc = scene.cold_clutter().next().unwrap();
        match &sc.power {
            PowerProfile::PerSubcarrier(v) => {
                assert_eq!(v.len(), 64);
                assert!((v[0] - 1.0).abs() < 1e-12); // anchored at subcarrier 0
                assert!(v.iter().all(|p| *p > 0.0));
                // higher subcarrier -> shorter wavelength -> more roughness loss
                assert!(v[63] < v[0]);
            }
            PowerProfile::Flat(_) => panic!("expected per-subcarrier profile"),
        }
        // targets keep flat profiles
        let t = scene.targets().next().unwrap();
        assert!(matches!(t.power, PowerProfile::Flat(_)));
    }
}
