use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Cyclic sweeps allowed before giving up.
pub const MAX_SWEEPS: usize = 64;

/// Relative off-diagonal Frobenius mass at which Jacobi stops.
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigendecomposition `M = V·diag(λ)·V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let d = ComplexMatrix::from_diag(&self.eigenvalues);
        &(v * &d) * &v.adjoint()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// 2×2 unitary `J` that diagonalizes the Hermitian block `[[app, apq], [apq*, aqq]]`
/// under `J†·A·J`.
///
/// The off-diagonal phase is first rotated onto the real axis, then a real
/// Jacobi rotation zeroes it.
pub(crate) fn jacobi_rotation(app: f64, aqq: f64, apq: Complex64) -> [[Complex64; 2]; 2] {
    let r = apq.norm();
    let phase = if r > 0.0 { apq / r } else { Complex64::new(1.0, 0.0) };
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e = phase.conj();
    [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [-e * s, e * c],
    ]
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// `tol` bounds the admissible asymmetry `‖M − M†‖_max`. Eigenvalues come out
/// descending and each eigenvector is rephased so its largest-magnitude
/// component (lowest index on ties) is real and nonnegative.
pub fn hermitian_eigen(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let residual = m.hermitian_residual();
    if residual > tol {
        return Err(Error::NotHermitian { residual });
    }
    let n = m.rows();
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);

    let norm = a.frobenius_norm();
    let mut converged = norm == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&a) <= OFF_DIAGONAL_TOL * norm {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= f64::EPSILON * 1e-3 * norm {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let j = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                a.rotate_columns(p, q, &j);
                a.rotate_rows_adjoint(p, q, &j);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                v.rotate_columns(p, q, &j);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    for j in 0..n {
        normalize_phase(&mut eigenvectors, j);
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Rephases column `j` so its dominant component is real and nonnegative.
pub(crate) fn normalize_phase(m: &mut ComplexMatrix, j: usize) {
    let col = m.column(j);
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    // ties within round-off resolve to the lowest index
    let k = col
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .expect("max is attained");
    let phase = col[k].conj() / col[k].norm();
    let rephased: Vec<Complex64> = col.iter().map(|&z| z * phase).collect();
    m.set_column(j, &rephased);
    m[(k, j)] = Complex64::new(m[(k, j)].re, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input_is_already_solved() {
        let e = hermitian_eigen(&ComplexMatrix::from_diag(&[2.0, 1.0]), 1e-12).unwrap();
        assert_eq!(e.eigenvalues, vec![2.0, 1.0]);
        assert!(e.eigenvectors.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn ascending_diagonal_is_sorted() {
        let e = hermitian_eigen(&ComplexMatrix::from_diag(&[0.1, 3.0, 2.0]), 1e-12).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 0.1]);
        assert_eq!(e.eigenvectors[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = hermitian_eigen(&m, 1e-12).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // phase convention: dominant component real nonnegative, lowest index on ties
        let expected = ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]);
        assert!(e.eigenvectors.max_abs_diff(&expected) < 1e-15, "{:?}", e.eigenvectors);
        for k in 0..2 {
            let v = e.eigenvectors.column(k);
            let mv = m.mul_vec(&v);
            for i in 0..2 {
                assert!((mv[i] - v[i] * e.eigenvalues[k]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn complex_off_diagonal() {
        // [[1, i], [-i, 1]] has spectrum {2, 0}
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(1.0, 0.0)]]);
        let e = hermitian_eigen(&m, 1e-12).unwrap();
        assert!((e.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(e.eigenvalues[1].abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eigen(&m, 1e-12), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_matrix() {
        let e = hermitian_eigen(&ComplexMatrix::zeros(3, 3), 1e-12).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn rotation_zeroes_block() {
        let apq = c(0.3, -0.7);
        let j = jacobi_rotation(1.5, -0.25, apq);
        let mut a = ComplexMatrix::from_rows(&[vec![c(1.5, 0.0), apq], vec![apq.conj(), c(-0.25, 0.0)]]);
        a.rotate_columns(0, 1, &j);
        a.rotate_rows_adjoint(0, 1, &j);
        assert!(a[(0, 1)].norm() < 1e-15);
        assert!(a[(1, 0)].norm() < 1e-15);
    }
}
