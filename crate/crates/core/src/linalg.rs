//! Shared complex linear-algebra helpers: Hermitian handling, PSD
//! projection, loaded inversions, Kronecker products and vec/unvec.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMat, CVec, Cx};

/// Unit-modulus complex exponential `e^{j phase}`.
#[inline]
pub fn cis(phase: f64) -> Cx {
    Complex64::cis(phase)
}

/// Hermitian part `(M + M^H)/2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * Cx::new(0.5, 0.0)
}

/// Max absolute deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).camax()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Project a (nearly) Hermitian matrix onto the PSD cone by clipping
/// negative eigenvalues at zero.
pub fn psd_project(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    if vals.iter().all(|&v| v >= 0.0) {
        return hermitize(m);
    }
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let u = vecs.column(k);
            out += (u * u.adjoint()) * Cx::new(v, 0.0);
        }
    }
    out
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    let (vals, _) = herm_eigen(m);
    *vals.last().unwrap()
}

/// Diagonal loading `M + eps * tr(M)/dim * I`; `eps` relative. When the
/// trace is nonpositive the absolute floor `eps` is used instead.
pub fn diag_load(m: &CMat, eps: f64) -> CMat {
    let n = m.nrows();
    let mu = m.trace().re / n as f64;
    let level = if mu > 0.0 { eps * mu } else { eps };
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] += Cx::new(level, 0.0);
    }
    out
}

/// Cholesky of a Hermitian matrix with progressive diagonal loading.
/// Loading starts at `eps_rel` (relative to the mean diagonal) and grows by
/// 100x until the factorization succeeds.
pub fn loaded_cholesky(m: &CMat, eps_rel: f64) -> Result<Cholesky<Cx, Dyn>> {
    let h = hermitize(m);
    if let Some(c) = Cholesky::new(h.clone()) {
        return Ok(c);
    }
    let mut eps = eps_rel.max(1e-15);
    for _ in 0..8 {
        if let Some(c) = Cholesky::new(diag_load(&h, eps)) {
            return Ok(c);
        }
        eps *= 100.0;
    }
    Err(Error::numerical("covariance not positive definite even after heavy loading"))
}

/// Inverse through [`loaded_cholesky`].
pub fn loaded_inverse(m: &CMat, eps_rel: f64) -> Result<CMat> {
    Ok(loaded_cholesky(m, eps_rel)?.inverse())
}

/// Real part of the quadratic form `x^H M x`.
pub fn quad_form(m: &CMat, x: &CVec) -> f64 {
    (x.adjoint() * m * x)[(0, 0)].re
}

/// Kronecker product of complex matrices.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            for p in 0..rb {
                for q in 0..cb {
                    out[(i * rb + p, j * cb + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Kronecker product of complex vectors (`a` outer, `b` inner).
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Column-major stacking of a matrix into a vector.
pub fn vec_mat(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_mat`].
pub fn unvec(v: &CVec, rows: usize, cols: usize) -> Result<CMat> {
    if v.len() != rows * cols {
        return Err(Error::dim(format!("unvec: {} entries into {rows}x{cols}", v.len())));
    }
    Ok(CMat::from_column_slice(rows, cols, v.as_slice()))
}

/// Dominant generalized eigenpair of `(A, B)` with `A` Hermitian PSD and
/// `B` Hermitian positive definite: maximizes `x^H A x / x^H B x`.
/// Solved by Cholesky whitening of `B`.
pub fn dominant_generalized_eig(a: &CMat, b: &CMat, loading: f64) -> Result<(f64, CVec)> {
    let chol = loaded_cholesky(b, loading)?;
    // M = L^{-1} A L^{-H}, Hermitian
    let l = chol.l();
    let la = l.clone().solve_lower_triangular(a).ok_or_else(|| {
        Error::numerical("singular Cholesky factor in generalized eigenproblem")
    })?;
    let m = l
        .solve_lower_triangular(&la.adjoint())
        .ok_or_else(|| Error::numerical("singular Cholesky factor in generalized eigenproblem"))?
        .adjoint();
    let (vals, vecs) = herm_eigen(&m);
    let u = CVec::from_column_slice(vecs.column(0).as_slice());
    // x = L^{-H} u
    let x = l
        .adjoint()
        .solve_upper_triangular(&u)
        .ok_or_else(|| Error::numerical("back substitution failed"))?;
    Ok((vals[0], x))
}

/// Column `k` of the unitary DFT matrix of size `n`:
/// `f_k[m] = e^{-j 2 pi m k / n} / sqrt(n)`.
pub fn dft_column(n: usize, k: usize) -> CVec {
    let scale = 1.0 / (n as f64).sqrt();
    CVec::from_fn(n, |m, _| cis(-2.0 * std::f64::consts::PI * (m * k) as f64 / n as f64) * scale)
}

/// Relative Frobenius distance `||a-b||_F / max(||b||_F, floor)`.
pub fn rel_frobenius(a: &CMat, b: &CMat) -> f64 {
    let denom = b.norm().max(1e-300);
    (a - b).norm() / denom
}
