//! Received data-cube synthesis from a scene and a transmit record, snapshot
//! stacking, and the cube binary/CSV container.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::grid::OfdmGrid;
use crate::linalg::{cis, loaded_cholesky};
use crate::scene::{GainSchedule, NoiseSpec, Scene, ScattererRole, STREAM_EMITTERS, STREAM_NOISE};
use crate::waveform::TransmitRecord;
use crate::{CMat, CVec, Cx};

use std::f64::consts::PI;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Complex received tensor indexed (rx element, subcarrier, OFDM symbol),
/// stored as one `N_r x L` matrix per subcarrier.
#[derive(Debug, Clone)]
pub struct DataCube {
    pub grid: OfdmGrid,
    pub n_rx: usize,
    /// Per subcarrier `n`: matrix with column `l` equal to `y_n[l]`.
    pub data: Vec<CMat>,
    pub seed: u64,
    pub scene_hash: u64,
    pub components: Option<CubeComponents>,
    /// Realized external emitter waveforms (`N x L` per emitter), retained
    /// for cooperative hot-clutter processing.
    pub emitter_symbols: Vec<CMat>,
}

/// Separately retained contributions; they sum to the total cube.
#[derive(Debug, Clone)]
pub struct CubeComponents {
    pub target: Vec<CMat>,
    pub cold: Vec<CMat>,
    pub hot: Vec<CMat>,
    pub noise: Vec<CMat>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SynthOptions {
    pub retain_components: bool,
}

impl DataCube {
    pub fn n_subcarriers(&self) -> usize {
        self.grid.n_subcarriers
    }

    pub fn n_symbols(&self) -> usize {
        self.grid.n_symbols
    }

    /// Total energy of the cube.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|m| m.norm_squared()).sum()
    }
}

/// Stable per-scatterer RNG stream key so that identical scatterers draw
/// identical gains regardless of their position in the scene list.
fn scatterer_stream(theta: f64, tau: f64, doppler: f64, role: ScattererRole) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    };
    mix(theta.to_bits());
    mix(tau.to_bits());
    mix(doppler.to_bits());
    mix(match role {
        ScattererRole::Target => 1,
        ScattererRole::ColdClutter => 2,
    });
    // keep clear of the fixed purpose streams
    h | 0x8000_0000_0000_0000
}

fn scene_hash(scene: &Scene) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut mix = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    };
    mix(scene.seed);
    mix(scene.scatterers.len() as u64);
    mix(scene.hot_paths.len() as u64);
    for s in &scene.scatterers {
        mix(s.theta.to_bits());
        mix(s.tau.to_bits());
        mix(s.doppler.to_bits());
    }
    for p in &scene.hot_paths {
        mix(p.theta.to_bits());
        mix(p.tau.to_bits());
    }
    h
}

fn standard_complex_gaussian(rng: &mut ChaCha8Rng) -> Cx {
    let n = rand_distr::StandardNormal;
    let re: f64 = n.sample(rng);
    let im: f64 = n.sample(rng);
    Cx::new(re, im) / (2.0f64).sqrt()
}

/// Synthesize the received cube
/// `y_n[l] = H^t x + H^c x + H^h s_ext + z` for one CPI.
///
/// Gain draws are routed through per-scatterer counter-based streams derived
/// from `seed`, so component contributions are reproducible and additive
/// across scene unions. Gains are normalized to the amplitude model's
/// analytic second moment and scaled by the scatterer's per-subcarrier
/// power, drawn once per CPI (block fading) or per symbol depending on the
/// scene's gain schedule. With a frequency model present, cross-subcarrier
/// gain correlation follows the exponential coherence profile through a
/// first-order Gauss-Markov chain in `n`.
pub fn synthesize_cube(
    scene: &Scene,
    tx: &TransmitRecord,
    seed: u64,
    options: SynthOptions,
) -> Result<DataCube> {
    if tx.grid != scene.grid {
        return Err(Error::dim("scene and transmit record use different OFDM grids"));
    }
    if tx.n_tx() != scene.n_tx() {
        return Err(Error::dim("transmit record antenna count does not match scene tx array"));
    }
    scene.noise.validate(scene.n_rx())?;

    let grid = &scene.grid;
    let (n_sub, l, n_r) = (grid.n_subcarriers, grid.n_symbols, scene.n_rx());
    let t_sym = grid.t_sym();

    let mut target = vec![CMat::zeros(n_r, l); n_sub];
    let mut cold = vec![CMat::zeros(n_r, l); n_sub];
    let mut hot = vec![CMat::zeros(n_r, l); n_sub];
    let mut noise = vec![CMat::zeros(n_r, l); n_sub];

    // frequency-correlation factor between adjacent subcarriers
    let ar = scene
        .freq_model
        .as_ref()
        .map(|fm| (-grid.delta_f / fm.b_c).exp())
        .filter(|r| *r < 1.0 - 1e-15);

    for sc in &scene.scatterers {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(scatterer_stream(sc.theta, sc.tau, sc.doppler, sc.role));
        let ms = sc.amplitude.mean_square();
        let norm = if ms > 0.0 { 1.0 / ms.sqrt() } else { 0.0 };

        // unit-power gain per (n, l); block fading repeats the draw
        let draws_per_symbol = scene.gain_schedule == GainSchedule::PerSymbol;
        let n_draws = if draws_per_symbol { l } else { 1 };
        let mut gains = CMat::zeros(n_sub, n_draws);
        for d in 0..n_draws {
            match ar {
                // Gauss-Markov chain across subcarriers; the marginal is
                // Gaussian speckle in this mode regardless of the amplitude
                // kind (aggregate-cell CLT regime).
                Some(r) => {
                    let mut g = standard_complex_gaussian(&mut rng);
                    gains[(0, d)] = g;
                    let w = (1.0 - r * r).sqrt();
                    for n in 1..n_sub {
                        g = g * r + standard_complex_gaussian(&mut rng) * w;
                        gains[(n, d)] = g;
                    }
                }
                None => {
                    let g = sc.amplitude.sample_scalar(&mut rng)? * norm;
                    for n in 0..n_sub {
                        gains[(n, d)] = g;
                    }
                }
            }
        }

        let out = match sc.role {
            ScattererRole::Target => &mut target,
            ScattererRole::ColdClutter => &mut cold,
        };
        for n in 0..n_sub {
            let a = scene.tx_array.steering(sc.theta, grid, n);
            let b = scene.rx_array.steering(sc.theta, grid, n);
            let delay_phase = cis(-2.0 * PI * n as f64 * grid.delta_f * sc.tau);
            let amp = sc.power.get(n).sqrt();
            for sym in 0..l {
                let g = gains[(n, if draws_per_symbol { sym } else { 0 })];
                let ax = {
                    let mut acc = Cx::new(0.0, 0.0);
                    for j in 0..scene.n_tx() {
                        acc += a[j].conj() * tx.x[n][(j, sym)];
                    }
                    acc
                };
                let coeff =
                    g * amp * delay_phase * cis(2.0 * PI * sc.doppler * sym as f64 * t_sym) * ax;
                let mut col = out[n].column_mut(sym);
                for i in 0..n_r {
                    col[i] += coeff * b[i];
                }
            }
        }
    }

    // external emitters: i.i.d. unit-power QPSK shaped by the spectral profile
    let mut emitter_symbols = Vec::with_capacity(scene.emitters.len());
    for (g_idx, em) in scene.emitters.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(STREAM_EMITTERS + g_idx as u64);
        let s = CMat::from_fn(n_sub, l, |n, _| {
            let q: u8 = rng.random_range(0..4);
            cis(PI / 4.0 + PI / 2.0 * q as f64) * em.spectral_power.get(n).sqrt()
        });
        emitter_symbols.push(s);
    }

    for (p_idx, path) in scene.hot_paths.iter().enumerate() {
        if path.emitter >= emitter_symbols.len() {
            return Err(Error::invalid(format!(
                "hot path {p_idx} references emitter {} but the scene has {}",
                path.emitter,
                emitter_symbols.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(scatterer_stream(path.theta, path.tau, path.doppler, ScattererRole::ColdClutter) ^ 0x5151);
        let mu = standard_complex_gaussian(&mut rng) * path.power.sqrt();
        let s = &emitter_symbols[path.emitter];
        for n in 0..n_sub {
            let b = scene.rx_array.steering(path.theta, grid, n);
            let delay_phase = cis(-2.0 * PI * n as f64 * grid.delta_f * path.tau);
            for sym in 0..l {
                let coeff =
                    mu * delay_phase * cis(2.0 * PI * path.doppler * sym as f64 * t_sym) * s[(n, sym)];
                let mut col = hot[n].column_mut(sym);
                for i in 0..n_r {
                    col[i] += coeff * b[i];
                }
            }
        }
    }

    // additive disturbance
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(STREAM_NOISE);
        match &scene.noise {
            NoiseSpec::White(s2) => {
                let sd = s2.sqrt();
                for n in 0..n_sub {
                    for sym in 0..l {
                        let mut col = noise[n].column_mut(sym);
                        for i in 0..n_r {
                            col[i] = standard_complex_gaussian(&mut rng) * sd;
                        }
                    }
                }
            }
            NoiseSpec::Colored(r) => {
                let chol = loaded_cholesky(r, 1e-12)?;
                let lmat = chol.l();
                for n in 0..n_sub {
                    for sym in 0..l {
                        let g = CVec::from_fn(n_r, |_, _| standard_complex_gaussian(&mut rng));
                        let z = &lmat * g;
                        noise[n].column_mut(sym).copy_from(&z);
                    }
                }
            }
        }
    }

    let mut data = Vec::with_capacity(n_sub);
    for n in 0..n_sub {
        data.push(&target[n] + &cold[n] + &hot[n] + &noise[n]);
    }

    Ok(DataCube {
        grid: grid.clone(),
        n_rx: n_r,
        data,
        seed,
        scene_hash: scene_hash(scene),
        components: options
            .retain_components
            .then_some(CubeComponents { target, cold, hot, noise }),
        emitter_symbols,
    })
}

// ---------------------------------------------------------------------------
// Snapshot stacking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackMode {
    /// One `N_r L` vector per subcarrier, symbol blocks in order 0..L-1.
    PerSubcarrier,
    /// One `N_r L N` vector, subcarrier blocks in order 0..N-1.
    FullBand,
}

/// Stack the cube into snapshot vectors.
pub fn stack_snapshots(cube: &DataCube, mode: StackMode) -> Vec<CVec> {
    match mode {
        StackMode::PerSubcarrier => {
            cube.data.iter().map(|m| CVec::from_column_slice(m.as_slice())).collect()
        }
        StackMode::FullBand => {
            let block = cube.n_rx * cube.n_symbols();
            let mut v = CVec::zeros(block * cube.n_subcarriers());
            for (n, m) in cube.data.iter().enumerate() {
                v.rows_mut(n * block, block)
                    .copy_from(&CVec::from_column_slice(m.as_slice()));
            }
            vec![v]
        }
    }
}

/// Inverse of [`stack_snapshots`].
pub fn unstack_snapshots(
    vectors: &[CVec],
    mode: StackMode,
    grid: &OfdmGrid,
    n_rx: usize,
) -> Result<Vec<CMat>> {
    let l = grid.n_symbols;
    let n_sub = grid.n_subcarriers;
    match mode {
        StackMode::PerSubcarrier => {
            if vectors.len() != n_sub {
                return Err(Error::dim("expected one snapshot per subcarrier"));
            }
            vectors
                .iter()
                .map(|v| {
                    if v.len() != n_rx * l {
                        return Err(Error::dim("snapshot length mismatch"));
                    }
                    Ok(CMat::from_column_slice(n_rx, l, v.as_slice()))
                })
                .collect()
        }
        StackMode::FullBand => {
            if vectors.len() != 1 || vectors[0].len() != n_rx * l * n_sub {
                return Err(Error::dim("full-band snapshot length mismatch"));
            }
            let block = n_rx * l;
            Ok((0..n_sub)
                .map(|n| {
                    CMat::from_column_slice(
                        n_rx,
                        l,
                        vectors[0].rows(n * block, block).as_slice(),
                    )
                })
                .collect())
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization: binary container and CSV (small cubes)
// ---------------------------------------------------------------------------

const CUBE_MAGIC: &[u8; 8] = b"ISACCUBE";
const CUBE_VERSION: u32 = 1;

impl DataCube {
    /// Binary container: header (dims, grid, seed) then interleaved re/im
    /// 64-bit little-endian floats, subcarrier-major
    /// (`n` outer, then symbol, then rx element).
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(CUBE_MAGIC)?;
        w.write_all(&CUBE_VERSION.to_le_bytes())?;
        w.write_all(&(self.n_rx as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n_subcarriers as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n_symbols as u32).to_le_bytes())?;
        w.write_all(&self.grid.f0.to_le_bytes())?;
        w.write_all(&self.grid.delta_f.to_le_bytes())?;
        w.write_all(&self.grid.t_cp.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.scene_hash.to_le_bytes())?;
        for m in &self.data {
            for sym in 0..m.ncols() {
                for i in 0..m.nrows() {
                    let z = m[(i, sym)];
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<DataCube> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CUBE_MAGIC {
            return Err(Error::Io("not a cube container (bad magic)".into()));
        }
        let mut u32b = [0u8; 4];
        let mut f64b = [0u8; 8];
        let mut read_u32 = |r: &mut dyn Read| -> Result<u32> {
            r.read_exact(&mut u32b)?;
            Ok(u32::from_le_bytes(u32b))
        };
        let version = read_u32(&mut r)?;
        if version != CUBE_VERSION {
            return Err(Error::Io(format!("unsupported cube version {version}")));
        }
        let n_rx = read_u32(&mut r)? as usize;
        let n_sub = read_u32(&mut r)? as usize;
        let n_sym = read_u32(&mut r)? as usize;
        let mut read_f64 = |r: &mut dyn Read| -> Result<f64> {
            r.read_exact(&mut f64b)?;
            Ok(f64::from_le_bytes(f64b))
        };
        let f0 = read_f64(&mut r)?;
        let delta_f = read_f64(&mut r)?;
        let t_cp = read_f64(&mut r)?;
        let mut u64b = [0u8; 8];
        r.read_exact(&mut u64b)?;
        let seed = u64::from_le_bytes(u64b);
        r.read_exact(&mut u64b)?;
        let hash = u64::from_le_bytes(u64b);
        let grid = OfdmGrid::new(f0, delta_f, n_sub, n_sym, Some(t_cp))?;
        let mut data = Vec::with_capacity(n_sub);
        let mut buf = vec![0u8; 16];
        for _ in 0..n_sub {
            let mut m = CMat::zeros(n_rx, n_sym);
            for sym in 0..n_sym {
                for i in 0..n_rx {
                    r.read_exact(&mut buf)?;
                    let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
                    let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
                    m[(i, sym)] = Cx::new(re, im);
                }
            }
            data.push(m);
        }
        Ok(DataCube {
            grid,
            n_rx,
            data,
            seed,
            scene_hash: hash,
            components: None,
            emitter_symbols: Vec::new(),
        })
    }

    /// Long-form CSV for small cubes: one row per entry.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "# isaclab data cube, seed={}, scene_hash={:016x}", self.seed, self.scene_hash)?;
        writeln!(w, "subcarrier,symbol,rx_element,re,im")?;
        for (n, m) in self.data.iter().enumerate() {
            for sym in 0..m.ncols() {
                for i in 0..m.nrows() {
                    let z = m[(i, sym)];
                    writeln!(w, "{n},{sym},{i},{},{}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}
