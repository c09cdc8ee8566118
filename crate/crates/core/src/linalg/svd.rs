use num_complex::Complex64;

use super::eigen::{hermitian_eigen, jacobi_rotation, MAX_SWEEPS};
use super::matrix::{inner, vec_norm, ComplexMatrix};
use crate::error::{Error, Result};

/// `K = U·Σ·V†` with `Σ` the `rows × cols` rectangular diagonal of `singular_values`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows × rows` unitary.
    pub u: ComplexMatrix,
    /// `cols × cols` unitary.
    pub v: ComplexMatrix,
    /// Descending, nonnegative, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
}

impl SvdResult {
    pub fn sigma(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.u.rows(), self.v.rows());
        for (i, &x) in self.singular_values.iter().enumerate() {
            s[(i, i)] = Complex64::new(x, 0.0);
        }
        s
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        &(&self.u * &self.sigma()) * &self.v.adjoint()
    }
}

/// Singular value decomposition.
///
/// When `cols ≥ rows` the left factor comes from diagonalizing `K·K†`, otherwise
/// the right factor comes from `K†·K`; the other factor is recovered from `K`
/// and completed to a full unitary. A one-sided Jacobi pass then makes the
/// rows of `U†K` orthogonal to working precision, so small singular values keep
/// their accuracy instead of inheriting the squared conditioning of the Gram
/// matrix.
///
/// `tol` is the Hermiticity allowance passed to the eigensolver; Gram matrices
/// are Hermitian by construction, so it only matters for pathological input.
pub fn svd(k: &ComplexMatrix, tol: f64) -> Result<SvdResult> {
    if k.cols() >= k.rows() {
        let (u, singular_values, v) = wide_svd(k, tol)?;
        Ok(SvdResult { u, v, singular_values })
    } else {
        let (v, singular_values, u) = wide_svd(&k.adjoint(), tol)?;
        Ok(SvdResult { u, v, singular_values })
    }
}

/// Singular values below this are treated as exact zeros when building `V`.
const ZERO_SINGULAR_VALUE: f64 = 1e-200;

/// Relative row non-orthogonality accepted by the one-sided Jacobi refinement.
const ROW_ORTHOGONALITY_TOL: f64 = 1e-15;

fn wide_svd(k: &ComplexMatrix, tol: f64) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (r, c) = (k.rows(), k.cols());
    debug_assert!(c >= r);
    let gram = k * &k.adjoint();
    let scale = gram.max_abs().max(1.0);
    let eig = hermitian_eigen(&gram, tol.max(1e-12) * scale)?;
    let mut u = eig.eigenvectors;
    let mut b = &u.adjoint() * k;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..r {
            for q in (p + 1)..r {
                let bp = b.row(p);
                let bq = b.row(q);
                let np: f64 = bp.iter().map(|z| z.norm_sqr()).sum();
                let nq: f64 = bq.iter().map(|z| z.norm_sqr()).sum();
                // (B·B†)_pq
                let g: Complex64 = inner(bq, bp);
                if g.norm() <= ROW_ORTHOGONALITY_TOL * (np * nq).sqrt() || g.norm() == 0.0 {
                    continue;
                }
                let j = jacobi_rotation(np, nq, g);
                b.rotate_rows_adjoint(p, q, &j);
                u.rotate_columns(p, q, &j);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = (0..r).map(|i| vec_norm(b.row(i))).collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let u = ComplexMatrix::from_fn(r, r, |i, j| u[(i, order[j])]);
    let mut singular_values = Vec::with_capacity(r);
    let mut v_cols: Vec<Vec<Complex64>> = Vec::with_capacity(c);
    for &i in &order {
        let s = norms[i];
        if s > ZERO_SINGULAR_VALUE {
            singular_values.push(s);
            v_cols.push(b.row(i).iter().map(|z| z.conj() / s).collect());
        } else {
            singular_values.push(0.0);
        }
    }
    // rows with zero singular value pick up V columns from the completion, which
    // keeps them aligned with their U columns only up to the null space
    let mut v_cols_full = Vec::with_capacity(c);
    let nonzero = v_cols.len();
    v_cols_full.extend(v_cols);
    complete_orthonormal(&mut v_cols_full, c);
    let v = ComplexMatrix::from_fn(c, c, |i, j| v_cols_full[j][i]);
    debug_assert!(nonzero <= r);
    Ok((u, singular_values, v))
}

/// Extends an orthonormal set of length-`n` vectors to a basis of ℂⁿ by
/// Gram–Schmidt over the standard basis, greediest candidate first.
pub(crate) fn complete_orthonormal(basis: &mut Vec<Vec<Complex64>>, n: usize) {
    let mut used = vec![false; n];
    while basis.len() < n {
        let mut best: Option<(usize, Vec<Complex64>, f64)> = None;
        for (k, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut cand = vec![Complex64::new(0.0, 0.0); n];
            cand[k] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for q in basis.iter() {
                    let proj = inner(q, &cand);
                    for (x, y) in cand.iter_mut().zip(q) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = vec_norm(&cand);
            if best.as_ref().is_none_or(|b| norm > b.2) {
                best = Some((k, cand, norm));
            }
        }
        let (k, cand, norm) = best.expect("basis not yet complete");
        used[k] = true;
        basis.push(cand.into_iter().map(|z| z / norm).collect());
    }
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.max_abs() == 0.0 {
        return 0.0;
    }
    svd(m, f64::INFINITY)
        .map(|s| s.singular_values[0])
        .expect("Jacobi SVD of a finite matrix converges")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_singular_values() {
        let s = svd(&ComplexMatrix::identity(3), 1e-12).unwrap();
        assert_eq!(s.singular_values, vec![1.0; 3]);
        assert!(s.reconstruct().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn one_by_one() {
        let s = svd(&ComplexMatrix::from_real_rows(&[&[0.6]]), 1e-12).unwrap();
        assert_eq!(s.singular_values, vec![0.6]);
        assert_eq!(s.u[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(s.v[(0, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tall_and_wide_shapes() {
        let tall = ComplexMatrix::from_real_rows(&[&[0.5], &[0.5]]);
        let s = svd(&tall, 1e-12).unwrap();
        assert_eq!((s.u.rows(), s.v.rows()), (2, 1));
        assert!((s.singular_values[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(s.reconstruct().max_abs_diff(&tall) < 1e-15);
        assert!(s.u.unitarity_residual() < 1e-15);

        let wide = tall.adjoint();
        let s = svd(&wide, 1e-12).unwrap();
        assert_eq!((s.u.rows(), s.v.rows()), (1, 2));
        assert!(s.reconstruct().max_abs_diff(&wide) < 1e-15);
        assert!(s.v.unitarity_residual() < 1e-15);
    }

    #[test]
    fn rank_deficient_completes_v() {
        let k = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0]]);
        let s = svd(&k, 1e-12).unwrap();
        assert!((s.singular_values[0] - 2.0).abs() < 1e-14);
        assert!(s.singular_values[1].abs() < 1e-14);
        assert!(s.v.unitarity_residual() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&k) < 1e-14);
    }

    #[test]
    fn tiny_singular_values_keep_v_unitary() {
        // singular values 1 and 1e-9, which the Gram matrix alone cannot resolve
        let th = 0.3f64;
        let rot = ComplexMatrix::from_real_rows(&[&[th.cos(), -th.sin()], &[th.sin(), th.cos()]]);
        let k = &(&rot * &ComplexMatrix::from_diag(&[1.0, 1e-9])) * &rot.adjoint();
        let s = svd(&k, 1e-12).unwrap();
        assert!((s.singular_values[1] - 1e-9).abs() < 1e-15);
        assert!(s.v.unitarity_residual() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&k) < 1e-15);
    }

    #[test]
    fn norms() {
        assert_eq!(operator_norm(&ComplexMatrix::identity(4)), 1.0);
        assert_eq!(operator_norm(&ComplexMatrix::from_real_rows(&[&[0.6]])), 0.6);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(2, 3)), 0.0);
    }

    #[test]
    fn completion_gives_orthonormal_basis() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut basis = vec![vec![Complex64::new(h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, 0.0)]];
        complete_orthonormal(&mut basis, 3);
        let m = ComplexMatrix::from_fn(3, 3, |i, j| basis[j][i]);
        assert!(m.unitarity_residual() < 1e-15);
    }
}
