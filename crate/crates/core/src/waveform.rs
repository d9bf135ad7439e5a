//! Communication/sensing symbol grids, block-level precoding, stacked
//! waveform operators, and communication QoS metrics.

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OfdmGrid;
use crate::linalg::cis;
use crate::{CMat, CVec, Cx};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// Omega-ary phase shift keying.
    Psk(u32),
    /// Square M-QAM, normalized to unit average power.
    Qam(u32),
}

impl Modulation {
    /// Constellation points (unit average power).
    pub fn constellation(&self) -> Result<Vec<Cx>> {
        match *self {
            Modulation::Psk(omega) => {
                if omega < 2 {
                    return Err(Error::invalid(format!("psk order must be >= 2, got {omega}")));
                }
                Ok((0..omega).map(|m| cis(2.0 * PI * m as f64 / omega as f64)).collect())
            }
            Modulation::Qam(m) => {
                let side = (m as f64).sqrt().round() as u32;
                if side * side != m || side < 2 || side % 2 != 0 {
                    return Err(Error::invalid(format!(
                        "qam order must be a square with even side (4, 16, 64, ...), got {m}"
                    )));
                }
                // levels -(side-1), ..., -1, 1, ..., side-1; divide by the RMS
                // energy so the unit-power invariant holds exactly
                let energy = 2.0 * (m as f64 - 1.0) / 3.0;
                let scale = 1.0 / energy.sqrt();
                let mut pts = Vec::with_capacity(m as usize);
                for i in 0..side {
                    for q in 0..side {
                        let re = (2.0 * i as f64 - (side as f64 - 1.0)) * scale;
                        let im = (2.0 * q as f64 - (side as f64 - 1.0)) * scale;
                        pts.push(Cx::new(re, im));
                    }
                }
                Ok(pts)
            }
        }
    }
}

/// Radar-stream content of a symbol grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadarProbe {
    /// Radar streams drawn from the same constellation as the data.
    #[default]
    Random,
    /// Deterministic constant unit symbols (pilot-only style probing).
    DeterministicUnit,
}

/// Per-(subcarrier, symbol) stream vectors: `K` communication streams
/// followed by `N_s - K` sensing streams.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    /// Per subcarrier: `N_s x L`.
    pub symbols: Vec<CMat>,
    pub n_comm: usize,
    pub modulation: Modulation,
}

impl SymbolGrid {
    pub fn n_streams(&self) -> usize {
        self.symbols[0].nrows()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols[0].ncols()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.symbols.len()
    }
}

/// I.i.d. unit-power constellation symbols on `n_s` streams (`k` of them
/// communication streams), per subcarrier and OFDM symbol.
pub fn generate_symbol_grid(
    grid: &OfdmGrid,
    k: usize,
    n_s: usize,
    modulation: Modulation,
    probe: RadarProbe,
    rng: &mut ChaCha8Rng,
) -> Result<SymbolGrid> {
    if k > n_s {
        return Err(Error::invalid(format!("stream split k={k} exceeds n_s={n_s}")));
    }
    let points = modulation.constellation()?;
    let l = grid.n_symbols;
    let mut symbols = Vec::with_capacity(grid.n_subcarriers);
    for _ in 0..grid.n_subcarriers {
        let m = CMat::from_fn(n_s, l, |s, _| {
            if s >= k && probe == RadarProbe::DeterministicUnit {
                Cx::new(1.0, 0.0)
            } else {
                points[rng.random_range(0..points.len())]
            }
        });
        symbols.push(m);
    }
    Ok(SymbolGrid { symbols, n_comm: k, modulation })
}

/// Block-level precoder, one `N_t x N_s` matrix per subcarrier partitioned
/// `[W_comm | W_radar]`.
#[derive(Debug, Clone)]
pub struct Precoder {
    pub w: Vec<CMat>,
}

impl Precoder {
    pub fn identity(grid: &OfdmGrid, n_t: usize) -> Self {
        Self { w: vec![CMat::identity(n_t, n_t); grid.n_subcarriers] }
    }

    /// Isotropic illumination with total per-RE power `p`: `W = sqrt(p/N_t) I`.
    pub fn isotropic(grid: &OfdmGrid, n_t: usize, p: f64) -> Self {
        let w = CMat::identity(n_t, n_t) * Cx::new((p / n_t as f64).sqrt(), 0.0);
        Self { w: vec![w; grid.n_subcarriers] }
    }

    pub fn n_streams(&self) -> usize {
        self.w[0].ncols()
    }

    /// Per-subcarrier transmit covariance `R_X,n = W_n W_n^H`.
    pub fn tx_covariance(&self, n: usize) -> CMat {
        &self.w[n] * self.w[n].adjoint()
    }
}

/// Precoded frequency-domain waveform over one CPI plus the structured
/// stacked-waveform operators built from it.
#[derive(Debug, Clone)]
pub struct TransmitRecord {
    pub grid: OfdmGrid,
    /// Per subcarrier: `N_t x L` precoded vectors `x_n[l]` as columns.
    pub x: Vec<CMat>,
}

impl TransmitRecord {
    pub fn n_tx(&self) -> usize {
        self.x[0].nrows()
    }

    /// Structured action of the per-subcarrier stacked waveform matrix
    /// `X_n = blkdiag{ I_{N_r} (x) x_n^T[0], ..., I_{N_r} (x) x_n^T[L-1] }`.
    pub fn waveform_op(&self, n: usize, n_rx: usize) -> WaveformOp<'_> {
        WaveformOp { x: &self.x[n], n_rx }
    }

    /// Angle-gated scalar waveform `X_p[n, l] = a_n^H(theta) x_n[l]`.
    pub fn gated_waveform(&self, tx_array: &crate::steering::ArrayGeometry, theta: f64) -> CMat {
        let n = self.grid.n_subcarriers;
        let l = self.grid.n_symbols;
        let mut out = CMat::zeros(n, l);
        for sc in 0..n {
            let a = tx_array.steering(theta, &self.grid, sc);
            for sym in 0..l {
                out[(sc, sym)] = (a.adjoint() * self.x[sc].column(sym))[(0, 0)];
            }
        }
        out
    }
}

/// `x_n[l] = W_n s_n[l]` for every subcarrier and symbol.
pub fn apply_precoder(precoder: &Precoder, grid_symbols: &SymbolGrid, grid: &OfdmGrid) -> Result<TransmitRecord> {
    if precoder.w.len() != grid_symbols.n_subcarriers() {
        return Err(Error::dim("precoder and symbol grid subcarrier counts differ"));
    }
    if precoder.w[0].ncols() != grid_symbols.n_streams() {
        return Err(Error::dim(format!(
            "precoder expects {} streams, symbol grid carries {}",
            precoder.w[0].ncols(),
            grid_symbols.n_streams()
        )));
    }
    let x = precoder
        .w
        .iter()
        .zip(grid_symbols.symbols.iter())
        .map(|(w, s)| w * s)
        .collect();
    Ok(TransmitRecord { grid: grid.clone(), x })
}

/// Lazy `X_n` operator (the dense matrix is `N_r L x N_r L N_t` and is only
/// materialized on demand at desk scales).
#[derive(Debug, Clone, Copy)]
pub struct WaveformOp<'a> {
    pub x: &'a CMat,
    pub n_rx: usize,
}

impl WaveformOp<'_> {
    pub fn n_tx(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_symbols(&self) -> usize {
        self.x.ncols()
    }

    /// Output dimension `N_r L`.
    pub fn rows(&self) -> usize {
        self.n_rx * self.n_symbols()
    }

    /// Input dimension `L N_r N_t`.
    pub fn cols(&self) -> usize {
        self.n_rx * self.n_symbols() * self.n_tx()
    }

    /// `X_n v`: block `l` is `(I_{N_r} (x) x_n^T[l]) v_l`.
    pub fn apply(&self, v: &CVec) -> Result<CVec> {
        if v.len() != self.cols() {
            return Err(Error::dim(format!(
                "waveform operator expects input of length {}, got {}",
                self.cols(),
                v.len()
            )));
        }
        let (n_t, n_r, l) = (self.n_tx(), self.n_rx, self.n_symbols());
        let mut out = CVec::zeros(self.rows());
        for sym in 0..l {
            for i in 0..n_r {
                let mut acc = Cx::new(0.0, 0.0);
                let base = (sym * n_r + i) * n_t;
                for j in 0..n_t {
                    acc += self.x[(j, sym)] * v[base + j];
                }
                out[sym * n_r + i] = acc;
            }
        }
        Ok(out)
    }

    /// `X_n^H w`: entry `(l, i, j)` is `conj(x_j[l]) w_{l,i}`.
    pub fn apply_adjoint(&self, w: &CVec) -> Result<CVec> {
        if w.len() != self.rows() {
            return Err(Error::dim(format!(
                "waveform adjoint expects input of length {}, got {}",
                self.rows(),
                w.len()
            )));
        }
        let (n_t, n_r, l) = (self.n_tx(), self.n_rx, self.n_symbols());
        let mut out = CVec::zeros(self.cols());
        for sym in 0..l {
            for i in 0..n_r {
                let wli = w[sym * n_r + i];
                let base = (sym * n_r + i) * n_t;
                for j in 0..n_t {
                    out[base + j] = self.x[(j, sym)].conj() * wli;
                }
            }
        }
        Ok(out)
    }

    /// Dense `X_n` (desk scales only).
    pub fn dense(&self) -> CMat {
        let (n_t, n_r, l) = (self.n_tx(), self.n_rx, self.n_symbols());
        let mut m = CMat::zeros(self.rows(), self.cols());
        for sym in 0..l {
            for i in 0..n_r {
                let row = sym * n_r + i;
                let base = (sym * n_r + i) * n_t;
                for j in 0..n_t {
                    m[(row, base + j)] = self.x[(j, sym)];
                }
            }
        }
        m
    }

    /// Slow-time factor of the separable effective steering
    /// `X_n v_n(theta, f_D) = (c (.) d) (x) b` with `c_l = a_n^H x_n[l]`.
    pub fn slow_time_factor(&self, a: &CVec, d: &CVec) -> CVec {
        CVec::from_fn(self.n_symbols(), |l, _| {
            let mut acc = Cx::new(0.0, 0.0);
            for j in 0..self.n_tx() {
                acc += a[j].conj() * self.x[(j, l)];
            }
            acc * d[l]
        })
    }
}

/// Per-user SINR and sum rate under linear precoding. Column `k` of each
/// channel matrix is user `k`'s channel `h_{n,k}`; the first `K` precoder
/// columns are the user beams, remaining columns count as interference.
#[derive(Debug, Clone)]
pub struct CommMetrics {
    /// `sinr[n][k]`, linear.
    pub sinr: Vec<Vec<f64>>,
    /// Sum rate over users and subcarriers (bit/s/Hz aggregate).
    pub sum_rate: f64,
}

pub fn comm_metrics(channels: &[CMat], precoder: &Precoder, sigma2_comm: f64) -> Result<CommMetrics> {
    if sigma2_comm <= 0.0 {
        return Err(Error::invalid("communication noise power must be positive"));
    }
    if channels.len() != precoder.w.len() {
        return Err(Error::dim("channel and precoder subcarrier counts differ"));
    }
    let mut sinr = Vec::with_capacity(channels.len());
    let mut sum_rate = 0.0;
    for (h, w) in channels.iter().zip(precoder.w.iter()) {
        if h.nrows() != w.nrows() {
            return Err(Error::dim("channel and precoder antenna counts differ"));
        }
        let k_users = h.ncols();
        if k_users > w.ncols() {
            return Err(Error::dim("more users than precoder streams"));
        }
        let gains = h.adjoint() * w; // K x N_s, entry (k, j) = h_k^H w_j
        let mut per_n = Vec::with_capacity(k_users);
        for k in 0..k_users {
            let sig = gains[(k, k)].norm_sqr();
            let mut interf = 0.0;
            for j in 0..w.ncols() {
                if j != k {
                    interf += gains[(k, j)].norm_sqr();
                }
            }
            let s = sig / (interf + sigma2_comm);
            sum_rate += (1.0 + s).log2();
            per_n.push(s);
        }
        sinr.push(per_n);
    }
    Ok(CommMetrics { sinr, sum_rate })
}

/// Symbol-level-precoding safety margin for an Omega-PSK constellation:
/// `delta = Re{h^H x s*} sin(pi/Omega) - |Im{h^H x s*}| cos(pi/Omega)`.
pub fn slp_safety_margin(h: &CVec, x: &CVec, s: Cx, omega: u32) -> f64 {
    let r = (h.adjoint() * x)[(0, 0)] * s.conj();
    let ang = PI / omega as f64;
    r.re * ang.sin() - r.im.abs() * ang.cos()
}
