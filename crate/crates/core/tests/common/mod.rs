#![allow(dead_code)]

use dilatic::ComplexMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type NaMatrix = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_na(m: &ComplexMatrix) -> NaMatrix {
    NaMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_na(m: &NaMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn gaussian_entry(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_entry(rng))
}

/// Haar unitary: Q of a Gaussian matrix with the phases of diag(R) removed.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let qr = to_na(&gaussian(rng, n, n)).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    from_na(&q)
}

pub fn na_singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn na_operator_norm(m: &ComplexMatrix) -> f64 {
    na_singular_values(m)[0]
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn na_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = to_na(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

/// Random contraction with operator norm uniform in `[0.05, 1)`, or exactly 1
/// when `saturate`.
pub fn random_contraction(rng: &mut ChaCha8Rng, rows: usize, cols: usize, saturate: bool) -> ComplexMatrix {
    let g = gaussian(rng, rows, cols);
    let norm = na_operator_norm(&g);
    let target = if saturate { 1.0 } else { rng.random_range(0.05..1.0) };
    g.scale_real(target / norm)
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian_entry(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// `B B†` for a Gaussian `n × rank` matrix `B`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> ComplexMatrix {
    let b = gaussian(rng, n, rank);
    &b * &b.adjoint()
}

/// `S^{-1/2}` of a positive definite matrix through nalgebra.
pub fn na_inv_sqrt(s: &ComplexMatrix) -> ComplexMatrix {
    let eig = to_na(s).symmetric_eigen();
    let d = NaMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(1.0 / l.sqrt(), 0.0)));
    let v = &eig.eigenvectors;
    from_na(&(v * d * v.adjoint()))
}

pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// `Πᵢ = S^{-1/2} Pᵢ S^{-1/2}` with `S = Σ Pᵢ` for random PSD `Pᵢ` of random rank.
pub fn random_povm(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<ComplexMatrix> {
    loop {
        let parts: Vec<ComplexMatrix> = (0..n)
            .map(|_| {
                let rank = rng.random_range(1..=dim);
                random_psd(rng, dim, rank)
            })
            .collect();
        let mut s = ComplexMatrix::zeros(dim, dim);
        for p in &parts {
            s = &s + p;
        }
        if na_eigenvalues(&s)[0] < 1e-3 {
            continue;
        }
        let w = na_inv_sqrt(&s);
        return parts.iter().map(|p| hermitize(&(&(&w * p) * &w))).collect();
    }
}

/// A rank-`d` projector onto a random subspace, followed by a random
/// `rest`-element POVM on its complement.
pub fn projector_povm(rng: &mut ChaCha8Rng, dim: usize, d: usize, rest: usize) -> Vec<ComplexMatrix> {
    let w = random_unitary(rng, dim);
    let top = w.submatrix(0..dim, 0..d);
    let mut out = vec![hermitize(&(&top * &top.adjoint()))];
    let b = w.submatrix(0..dim, d..dim);
    if rest == 1 {
        out.push(hermitize(&(&b * &b.adjoint())));
    } else {
        for q in random_povm(rng, rest, dim - d) {
            out.push(hermitize(&(&(&b * &q) * &b.adjoint())));
        }
    }
    out
}

/// `⟨ψ|M|ψ⟩`, real part.
pub fn expectation(m: &ComplexMatrix, psi: &[Complex64]) -> f64 {
    let mv = m.mul_vec(psi);
    psi.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

pub fn trine() -> Vec<ComplexMatrix> {
    (0..3)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let (s, co) = a.sin_cos();
            ComplexMatrix::from_real_rows(&[&[co * co, co * s], &[co * s, s * s]]).scale_real(2.0 / 3.0)
        })
        .collect()
}

pub fn projective_qubit() -> Vec<ComplexMatrix> {
    vec![ComplexMatrix::from_diag(&[1.0, 0.0]), ComplexMatrix::from_diag(&[0.0, 1.0])]
}
