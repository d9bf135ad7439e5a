//! Array geometry and steering constructs: frequency-dependent spatial
//! steering (beam squint), Doppler and delay steering, space-time steering
//! vectors, and the structured full-band delay operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OfdmGrid;
use crate::linalg::{cis, kron_vec};
use crate::{CVec, C0};

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayKind {
    /// Uniform linear array, half-wavelength spacing at the carrier.
    UlaHalfLambda,
    /// Arbitrary element coordinates.
    Arbitrary,
}

/// Receive or transmit array: element positions in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub positions: Vec<[f64; 3]>,
    pub kind: ArrayKind,
}

impl ArrayGeometry {
    /// Half-wavelength ULA along the x axis for carrier `f0`.
    pub fn ula_half_lambda(count: usize, f0: f64) -> Self {
        let d = C0 / f0 / 2.0;
        let positions = (0..count).map(|i| [i as f64 * d, 0.0, 0.0]).collect();
        Self { positions, kind: ArrayKind::UlaHalfLambda }
    }

    pub fn arbitrary(positions: Vec<[f64; 3]>) -> Self {
        Self { positions, kind: ArrayKind::Arbitrary }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Steering vector at azimuth `theta` for squint factor `chi` and
    /// carrier wavelength `lambda0`. Entries `e^{-j 2 pi chi / lambda0 *
    /// k(theta) . r_i}` with unit propagation vector
    /// `k(theta) = [sin, cos, 0]`; for the ULA kind this reduces to
    /// `e^{-j pi chi i sin(theta)}`.
    pub fn steering_chi(&self, theta: f64, chi: f64, lambda0: f64) -> CVec {
        match self.kind {
            ArrayKind::UlaHalfLambda => {
                let s = theta.sin();
                CVec::from_fn(self.len(), |i, _| cis(-PI * chi * i as f64 * s))
            }
            ArrayKind::Arbitrary => {
                let k = [theta.sin(), theta.cos(), 0.0];
                CVec::from_fn(self.len(), |i, _| {
                    let r = self.positions[i];
                    let proj = k[0] * r[0] + k[1] * r[1] + k[2] * r[2];
                    cis(-2.0 * PI * chi / lambda0 * proj)
                })
            }
        }
    }

    /// Steering vector on subcarrier `n` of `grid` (wideband squint model).
    pub fn steering(&self, theta: f64, grid: &OfdmGrid, n: usize) -> CVec {
        self.steering_chi(theta, grid.chi(n), grid.wavelength(0))
    }
}

/// Doppler steering vector `d(f_D)` of length `l`:
/// `d[m] = e^{j 2 pi f_D m T_sym}`.
pub fn doppler_steering(f_d: f64, l: usize, t_sym: f64) -> CVec {
    CVec::from_fn(l, |m, _| cis(2.0 * PI * f_d * m as f64 * t_sym))
}

/// Frequency-delay steering vector `t(tau)` of length `n`:
/// `t[m] = e^{-j 2 pi m delta_f tau}`.
pub fn delay_steering(tau: f64, n: usize, delta_f: f64) -> CVec {
    CVec::from_fn(n, |m, _| cis(-2.0 * PI * m as f64 * delta_f * tau))
}

/// Space-time steering vector on subcarrier `n`:
/// `v_n = d(f_D) (x) b_n(theta_rx) (x) a_n*(theta_tx)`, length `L N_r N_t`.
/// Monostatic scenes use `theta_tx == theta_rx`.
pub fn space_time_steering(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    theta_tx: f64,
    theta_rx: f64,
    f_d: f64,
    grid: &OfdmGrid,
    n: usize,
) -> CVec {
    let a = tx.steering(theta_tx, grid, n).map(|z| z.conj());
    let b = rx.steering(theta_rx, grid, n);
    let d = doppler_steering(f_d, grid.n_symbols, grid.t_sym());
    kron_vec(&d, &kron_vec(&b, &a))
}

/// Full-band angle-Doppler steering vector: `v_n` concatenated over all
/// subcarriers, length `N L N_r N_t`.
pub fn full_band_steering(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    theta: f64,
    f_d: f64,
    grid: &OfdmGrid,
) -> CVec {
    let per: Vec<CVec> = (0..grid.n_subcarriers)
        .map(|n| space_time_steering(tx, rx, theta, theta, f_d, grid, n))
        .collect();
    let block = per[0].len();
    let mut out = CVec::zeros(block * grid.n_subcarriers);
    for (n, v) in per.iter().enumerate() {
        out.rows_mut(n * block, block).copy_from(v);
    }
    out
}

/// Structured action of the full-band delay operator
/// `T(tau) = diag{t(tau)} (x) I_block`: subcarrier block `n` of the stacked
/// vector is scaled by `e^{-j 2 pi n delta_f tau}`.
#[derive(Debug, Clone)]
pub struct DelayOperator {
    pub tau: f64,
    pub delta_f: f64,
    pub n_subcarriers: usize,
    pub block: usize,
}

impl DelayOperator {
    pub fn new(tau: f64, grid: &OfdmGrid, block: usize) -> Self {
        Self { tau, delta_f: grid.delta_f, n_subcarriers: grid.n_subcarriers, block }
    }

    pub fn dim(&self) -> usize {
        self.n_subcarriers * self.block
    }

    /// Apply `T(tau)` to a stacked full-band vector.
    pub fn apply(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.dim() {
            return Err(Error::dim(format!(
                "delay operator dim {} applied to vector of length {}",
                self.dim(),
                x.len()
            )));
        }
        let mut out = x.clone();
        for n in 0..self.n_subcarriers {
            let phase = cis(-2.0 * PI * n as f64 * self.delta_f * self.tau);
            for i in 0..self.block {
                out[n * self.block + i] *= phase;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> OfdmGrid {
        OfdmGrid::new(28e9, 120e3, 16, 8, None).unwrap()
    }

    #[test]
    fn ula_boresight_all_ones() {
        let arr = ArrayGeometry::ula_half_lambda(8, 28e9);
        let a = arr.steering(0.0, &grid(), 3);
        for z in a.iter() {
            assert!((z - Cx::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ula_endfire_two_elements() {
        // theta = 90 deg, n = 0: [1, e^{-j pi}] = [1, -1]
        let arr = ArrayGeometry::ula_half_lambda(2, 28e9);
        let a = arr.steering(PI / 2.0, &grid(), 0);
        assert!((a[0] - Cx::new(1.0, 0.0)).norm() < 1e-12);
        assert!((a[1] - Cx::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn arbitrary_matches_brute_force() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let positions: Vec<[f64; 3]> = (0..6)
            .map(|_| {
                [
                    (rng.random::<f64>() - 0.5) * 0.1,
                    (rng.random::<f64>() - 0.5) * 0.1,
                    (rng.random::<f64>() - 0.5) * 0.1,
                ]
            })
            .collect();
        let arr = ArrayGeometry::arbitrary(positions.clone());
        for _ in 0..20 {
            let theta = (rng.random::<f64>() - 0.5) * PI;
            let n = rng.random_range(0..g.n_subcarriers);
            let a = arr.steering(theta, &g, n);
            let lambda_n = g.wavelength(n);
            for (i, p) in positions.iter().enumerate() {
                let proj = theta.sin() * p[0] + theta.cos() * p[1];
                let expect = cis(-2.0 * PI / lambda_n * proj);
                assert!((a[i] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ula_matches_general_geometry() {
        // the ULA fast path must agree with explicit coordinates
        let g = grid();
        let ula = ArrayGeometry::ula_half_lambda(8, 28e9);
        let gen = ArrayGeometry::arbitrary(ula.positions.clone());
        for &theta in &[-1.2, -0.3, 0.0, 0.7, 1.4] {
            for n in [0, 7, 15] {
                let fast = ula.steering(theta, &g, n);
                let slow = gen.steering(theta, &g, n);
                assert!((&fast - &slow).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn narrowband_limit_frequency_invariant() {
        let g = grid();
        let arr = ArrayGeometry::ula_half_lambda(8, 28e9);
        let theta = 0.4;
        let a0 = arr.steering_chi(theta, 1.0, g.wavelength(0));
        for n in 1..g.n_subcarriers {
            let an = arr.steering_chi(theta, 1.0, g.wavelength(0));
            assert_eq!(a0, an);
            // with squint they differ off boresight
            let squint = arr.steering(theta, &g, n);
            assert!((&a0 - &squint).norm() > 0.0);
        }
    }

    #[test]
    fn conjugate_symmetry_in_angle() {
        let g = grid();
        let arr = ArrayGeometry::ula_half_lambda(8, 28e9);
        let a = arr.steering(0.6, &g, 5);
        let b = arr.steering(-0.6, &g, 5);
        for i in 0..8 {
            assert!((a[i].conj() - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn temporal_steering_dft_identities() {
        let g = grid();
        let n = g.n_subcarriers;
        // on-grid delay: t(tau) equals conj of DFT column up to 1/sqrt(N)
        let n_d = 5;
        let tau = n_d as f64 / (n as f64 * g.delta_f);
        let t = delay_steering(tau, n, g.delta_f);
        let f = crate::linalg::dft_column(n, n_d);
        for m in 0..n {
            assert!((t[m] / (n as f64).sqrt() - f[m]).norm() < 1e-12);
        }
        // on-grid Doppler: d matches conjugate DFT column (inverse direction)
        let l = g.n_symbols;
        let n_v = 3;
        let f_d = n_v as f64 / (l as f64 * g.t_sym());
        let d = doppler_steering(f_d, l, g.t_sym());
        let fl = crate::linalg::dft_column(l, n_v);
        for m in 0..l {
            assert!((d[m] / (l as f64).sqrt() - fl[m].conj()).norm() < 1e-12);
        }
        // norms
        assert!((d.norm_squared() - l as f64).abs() < 1e-12);
        assert!((t.norm_squared() - n as f64).abs() < 1e-12);
        // zero parameters give all-ones
        assert!(doppler_steering(0.0, l, g.t_sym()).iter().all(|z| (z - 1.0).norm() < 1e-15));
    }

    #[test]
    fn space_time_kron_brute_force() {
        let g = grid();
        let tx = ArrayGeometry::ula_half_lambda(4, 28e9);
        let rx = ArrayGeometry::ula_half_lambda(3, 28e9);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let theta = (rng.random::<f64>() - 0.5) * PI;
            let f_d = (rng.random::<f64>() - 0.5) * 1e4;
            let n = rng.random_range(0..g.n_subcarriers);
            let v = space_time_steering(&tx, &rx, theta, theta, f_d, &g, n);
            assert_eq!(v.len(), g.n_symbols * 3 * 4);
            let a = tx.steering(theta, &g, n);
            let b = rx.steering(theta, &g, n);
            let d = doppler_steering(f_d, g.n_symbols, g.t_sym());
            for l in 0..g.n_symbols {
                for i in 0..3 {
                    for j in 0..4 {
                        let idx = (l * 3 + i) * 4 + j;
                        let expect = d[l] * b[i] * a[j].conj();
                        assert!((v[idx] - expect).norm() < 1e-12);
                    }
                }
            }
            // unit modulus entries
            for z in v.iter() {
                assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn space_time_l1_doppler_free() {
        let g = OfdmGrid::new(28e9, 120e3, 4, 1, None).unwrap();
        let tx = ArrayGeometry::ula_half_lambda(2, 28e9);
        let rx = ArrayGeometry::ula_half_lambda(2, 28e9);
        let v1 = space_time_steering(&tx, &rx, 0.3, 0.3, 0.0, &g, 1);
        let v2 = space_time_steering(&tx, &rx, 0.3, 0.3, 12345.0, &g, 1);
        assert!((&v1 - &v2).norm() < 1e-12);
    }

    #[test]
    fn delay_operator_properties() {
        let g = grid();
        let block = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = CVec::from_fn(g.n_subcarriers * block, |_, _| {
            Cx::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        // tau = 0 is the identity
        let t0 = DelayOperator::new(0.0, &g, block);
        assert!((&t0.apply(&x).unwrap() - &x).norm() < 1e-15);
        // composition adds delays
        let t1 = DelayOperator::new(1.3e-7, &g, block);
        let t2 = DelayOperator::new(0.7e-7, &g, block);
        let t12 = DelayOperator::new(2.0e-7, &g, block);
        let composed = t1.apply(&t2.apply(&x).unwrap()).unwrap();
        let direct = t12.apply(&x).unwrap();
        assert!((&composed - &direct).norm() < 1e-12);
        // unitary
        assert!((t1.apply(&x).unwrap().norm() - x.norm()).abs() < 1e-12);
        // dimension guard
        assert!(t1.apply(&CVec::zeros(3)).is_err());
    }
}
