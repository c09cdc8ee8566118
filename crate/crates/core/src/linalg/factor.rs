use num_complex::Complex64;

use super::eigen::{hermitian_eigen, HermitianEigen};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Default tolerance for PSD checks, scaled by `max(1, ‖P‖_max)`.
pub const PSD_TOL: f64 = 1e-10;

/// Round-off window below zero that is silently clamped.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

/// Upper-triangular `A` with `A†·A = P` for Hermitian positive semidefinite `P`.
///
/// Runs the textbook column-by-column Cholesky recurrence; a pivot below `tol`
/// zeroes that row of `A` instead of dividing by it. When near-singular pivots
/// leave a reconstruction residual above 1e-11·max(1, ‖P‖), the factor is
/// recomputed as the R of a Householder QR of `P^{1/2}`, which is also upper
/// triangular with `R†R = P` and needs no division by pivots.
pub fn cholesky_psd(p: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = checked_psd_eigen(p, tol)?;
    let scale = p.max_abs().max(1.0);
    let n = p.rows();

    let mut a = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let d = p[(j, j)].re - (0..j).map(|k| a[(k, j)].norm_sqr()).sum::<f64>();
        if d < tol {
            continue;
        }
        let pivot = d.sqrt();
        a[(j, j)] = Complex64::new(pivot, 0.0);
        for i in (j + 1)..n {
            let s: Complex64 = (0..j).map(|k| a[(k, j)].conj() * a[(k, i)]).sum();
            a[(j, i)] = (p[(j, i)] - s) / pivot;
        }
    }
    let residual = (&a.adjoint() * &a).max_abs_diff(p);
    if residual <= 1e-11 * scale {
        return Ok(a);
    }
    let qr = triangular_from_root(&sqrt_from_eigen(&eig));
    let qr_residual = (&qr.adjoint() * &qr).max_abs_diff(p);
    Ok(if qr_residual < residual { qr } else { a })
}

/// Principal square root of a Hermitian PSD matrix.
pub fn sqrt_psd(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let tol = PSD_TOL * p.max_abs().max(1.0);
    let eig = checked_psd_eigen(p, tol)?;
    Ok(sqrt_from_eigen(&eig))
}

/// Reduced-rank inverse of a nonnegative diagonal: entries above `rank_tol`
/// are inverted, the rest map to zero.
pub fn pinv_diag(d: &[f64], rank_tol: f64) -> Vec<f64> {
    d.iter()
        .map(|&x| if x > rank_tol { 1.0 / x } else { 0.0 })
        .collect()
}

fn checked_psd_eigen(p: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    let eig = hermitian_eigen(p, tol)?;
    let min = eig.min_eigenvalue();
    if min < -tol {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(eig)
}

fn sqrt_from_eigen(eig: &HermitianEigen) -> ComplexMatrix {
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = &eig.eigenvectors;
    let s = &(v * &ComplexMatrix::from_diag(&roots)) * &v.adjoint();
    let n = s.rows();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(s[(i, i)].re, 0.0)
        } else {
            (s[(i, j)] + s[(j, i)].conj()) * 0.5
        }
    })
}

/// R factor of a Householder QR, rows rephased to a real nonnegative diagonal.
fn triangular_from_root(s: &ComplexMatrix) -> ComplexMatrix {
    let n = s.rows();
    let mut r = s.clone();
    for k in 0..n {
        let x: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * r[(k + t, j)]).sum();
            let f = dot * (2.0 / vnorm2);
            for (t, vt) in v.iter().enumerate() {
                r[(k + t, j)] -= vt * f;
            }
        }
        for i in (k + 1)..n {
            r[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    for i in 0..n {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            let ph = d.conj() / d.norm();
            for j in i..n {
                r[(i, j)] *= ph;
            }
            r[(i, i)] = Complex64::new(r[(i, i)].re, 0.0);
        }
    }
    r
}
