//! Unitary dilation of a contraction.
//!
//! A contraction `K` (`N₂ × N₁`, `‖K‖ ≤ 1`) is embedded as the top-left block of
//! a unitary `𝒰 = U·G·V†` acting on `M = 2·max(N₁, N₂)` modes, where
//! `K = U·Σ·V†` is the SVD and `G` is the block dilation of the padded singular
//! value diagonal `Σ′`:
//!
//! ```text
//!     G = [ Σ′            (I − Σ′²)^{1/2} ]
//!         [ (I − Σ′²)^{1/2}       −Σ′      ]
//! ```
//!
//! The input amplitudes are padded with vacuum (zeros) up to `M`; the first
//! `N₂` output amplitudes are then exactly `K·ψ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, svd, ComplexMatrix, SvdResult};

/// Norm slack accepted as round-off when checking `‖K‖ ≤ 1`.
pub const CONTRACTION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormPolicy {
    Reject,
    /// Divide by the operator norm when it exceeds one.
    Rescale,
}

/// A validated contraction `K` mapping `n_in` modes to `n_out` modes.
#[derive(Debug, Clone)]
pub struct ContractionMap {
    k: ComplexMatrix,
    norm: f64,
    scale: f64,
}

impl ContractionMap {
    /// Accepts `k` only if it is already a contraction.
    pub fn new(k: ComplexMatrix) -> Result<Self> {
        validate_contraction(k, NormPolicy::Reject)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.k
    }

    pub fn n_in(&self) -> usize {
        self.k.cols()
    }

    pub fn n_out(&self) -> usize {
        self.k.rows()
    }

    /// Operator norm after any rescaling.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Factor the input was divided by (1 unless rescaled).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.k
    }
}

pub fn validate_contraction(k: ComplexMatrix, policy: NormPolicy) -> Result<ContractionMap> {
    let norm = operator_norm(&k);
    if norm <= 1.0 + CONTRACTION_SLACK {
        return Ok(ContractionMap { k, norm, scale: 1.0 });
    }
    match policy {
        NormPolicy::Reject => Err(Error::NotContraction { norm }),
        NormPolicy::Rescale => {
            let k = k.scale_real(1.0 / norm);
            let rescaled = operator_norm(&k);
            Ok(ContractionMap {
                k,
                norm: rescaled,
                scale: norm,
            })
        }
    }
}

/// Pads the singular values to length `max(n_in, n_out)` with ones.
pub fn extend_sigma(singular_values: &[f64], n_in: usize, n_out: usize) -> Vec<f64> {
    let m = n_in.max(n_out);
    let mut out: Vec<f64> = singular_values.iter().take(n_in.min(n_out)).map(|s| s.abs()).collect();
    out.resize(m, 1.0);
    out
}

/// Real `2m × 2m` unitary dilation of the diagonal contraction `diag(sigma_prime)`.
pub fn build_g(sigma_prime: &[f64]) -> ComplexMatrix {
    let m = sigma_prime.len();
    let mut g = ComplexMatrix::zeros(2 * m, 2 * m);
    for (i, &s) in sigma_prime.iter().enumerate() {
        let c = complement(s);
        g[(i, i)] = Complex64::new(s, 0.0);
        g[(i, i + m)] = Complex64::new(c, 0.0);
        g[(i + m, i)] = Complex64::new(c, 0.0);
        g[(i + m, i + m)] = Complex64::new(-s, 0.0);
    }
    g
}

/// `√(1 − s²)`, factored to stay accurate near `s = 1`.
pub(crate) fn complement(s: f64) -> f64 {
    ((1.0 - s) * (1.0 + s)).max(0.0).sqrt()
}

/// All factors of `𝒰 = U·G·V†`.
#[derive(Debug, Clone)]
pub struct DilationResult {
    /// The dilation `𝒰`, `M × M`.
    pub u_big: ComplexMatrix,
    /// `U` extended by the identity to `M × M`.
    pub u: ComplexMatrix,
    /// `V` extended by the identity to `M × M`.
    pub v: ComplexMatrix,
    pub g: ComplexMatrix,
    /// Length `max(N₁, N₂)`.
    pub sigma_prime: Vec<f64>,
    /// `θᵢ = arccos σᵢ`, length `min(N₁, N₂)`.
    pub thetas: Vec<f64>,
    /// The unextended SVD of `K`.
    pub svd: SvdResult,
    n_in: usize,
    n_out: usize,
}

impl DilationResult {
    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn mode_count(&self) -> usize {
        self.u_big.rows()
    }

    /// The embedded contraction, `𝒰[0..N₂, 0..N₁]`.
    pub fn corner(&self) -> ComplexMatrix {
        self.u_big.submatrix(0..self.n_out, 0..self.n_in)
    }
}

pub fn dilate(k: &ContractionMap) -> Result<DilationResult> {
    let (n_in, n_out) = (k.n_in(), k.n_out());
    let mut decomposition = svd(k.matrix(), 1e-9)?;
    for s in &mut decomposition.singular_values {
        if *s > 1.0 + CONTRACTION_SLACK {
            return Err(Error::NotContraction { norm: *s });
        }
        *s = s.min(1.0);
    }
    let m = n_in.max(n_out);
    let sigma_prime = extend_sigma(&decomposition.singular_values, n_in, n_out);
    let g = build_g(&sigma_prime);
    let u = decomposition.u.embed_in_identity(2 * m);
    let v = decomposition.v.embed_in_identity(2 * m);
    let u_big = &(&u * &g) * &v.adjoint();
    let thetas = decomposition.singular_values.iter().map(|s| s.acos()).collect();
    Ok(DilationResult {
        u_big,
        u,
        v,
        g,
        sigma_prime,
        thetas,
        svd: decomposition,
        n_in,
        n_out,
    })
}

/// Pads `input` with vacuum to the dilation size and applies `𝒰`.
pub fn apply_dilation(d: &DilationResult, input: &[Complex64]) -> Result<Vec<Complex64>> {
    if input.len() != d.n_in {
        return Err(Error::DimensionMismatch {
            expected: d.n_in,
            found: input.len(),
        });
    }
    let mut padded = input.to_vec();
    padded.resize(d.mode_count(), Complex64::new(0.0, 0.0));
    Ok(d.u_big.mul_vec(&padded))
}
