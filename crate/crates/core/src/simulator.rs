//! Single-photon propagation, measurement and quantum-operation maps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dilation::{dilate, validate_contraction, ContractionMap, NormPolicy};
use crate::error::{Error, Result};
use crate::interferometer::{dilation_to_circuit, recompose, OpticalCircuit};
use crate::linalg::{hermitian_eigen, vec_norm, ComplexMatrix};
use crate::povm::{OutcomeRoute, PovmCircuitBundle};

/// Norm slack for states and traces.
pub const NORM_TOL: f64 = 1e-9;

/// Amplitudes below this norm count as annihilated.
pub const ZERO_AMPLITUDE: f64 = 1e-14;

/// Photon amplitudes over spatial modes; may be sub-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState(Vec<Complex64>);

impl QuditState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("state has no modes".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("state has non-finite amplitudes".into()));
        }
        let norm = vec_norm(&amplitudes);
        if norm > 1.0 + NORM_TOL {
            return Err(Error::InvalidInput(format!("state norm {norm} exceeds 1")));
        }
        Ok(Self(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Photon in mode `k` of `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.0)
    }

    fn require_unit(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("input state must be normalized, norm is {norm}")));
        }
        Ok(())
    }

    fn normalized_from(v: Vec<Complex64>) -> Option<Self> {
        let norm = vec_norm(&v);
        (norm >= ZERO_AMPLITUDE).then(|| Self(v.into_iter().map(|z| z / norm).collect()))
    }
}

/// Hermitian PSD matrix with trace at most one.
#[derive(Debug, Clone)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let residual = rho.hermitian_residual();
        if residual > 1e-10 {
            return Err(Error::NotHermitian { residual });
        }
        let eig = hermitian_eigen(&rho, 1e-10)?;
        if eig.min_eigenvalue() < -1e-10 {
            return Err(Error::NotPositive {
                min_eigenvalue: eig.min_eigenvalue(),
            });
        }
        let tr = rho.trace().re;
        if tr > 1.0 + NORM_TOL {
            return Err(Error::InvalidInput(format!("density matrix trace {tr} exceeds 1")));
        }
        Ok(Self(rho))
    }

    pub fn from_pure(psi: &QuditState) -> Self {
        let v = psi.amplitudes();
        Self(ComplexMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Divides by the trace.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr < ZERO_AMPLITUDE * ZERO_AMPLITUDE {
            return Err(Error::ZeroOutcome);
        }
        Ok(Self(self.0.scale_real(1.0 / tr)))
    }
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Runs `psi` through the circuit, padding missing modes with vacuum.
pub fn propagate(c: &OpticalCircuit, psi: &QuditState) -> Result<QuditState> {
    if psi.dim() > c.mode_count {
        return Err(Error::DimensionMismatch {
            expected: c.mode_count,
            found: psi.dim(),
        });
    }
    let mut amps = psi.amplitudes().to_vec();
    amps.resize(c.mode_count, Complex64::new(0.0, 0.0));
    c.apply(&mut amps);
    Ok(QuditState(amps))
}

/// `K|ψ⟩/‖K|ψ⟩‖` together with the success probability `⟨ψ|K†K|ψ⟩`.
pub fn apply_pure_map(k: &ContractionMap, psi: &QuditState) -> Result<(QuditState, f64)> {
    psi.require_unit()?;
    if psi.dim() != k.n_in() {
        return Err(Error::DimensionMismatch {
            expected: k.n_in(),
            found: psi.dim(),
        });
    }
    let out = k.matrix().mul_vec(psi.amplitudes());
    let prob = out.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let state = QuditState::normalized_from(out).ok_or(Error::ZeroOutcome)?;
    Ok((state, prob))
}

/// `ℰ(ρ) = Σ Kᵢ ρ Kᵢ†`, normalized, with probability `Tr ℰ(ρ)`.
pub fn apply_quantum_operation(kraus: &[ContractionMap], rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::InvalidInput("empty Kraus set".into()))?;
    let (n_in, n_out) = (first.n_in(), first.n_out());
    for k in kraus {
        if k.n_in() != n_in || k.n_out() != n_out {
            return Err(Error::DimensionMismatch {
                expected: n_in,
                found: k.n_in(),
            });
        }
    }
    if rho.dim() != n_in {
        return Err(Error::DimensionMismatch {
            expected: n_in,
            found: rho.dim(),
        });
    }
    let mut bound = ComplexMatrix::zeros(n_in, n_in);
    let mut out = ComplexMatrix::zeros(n_out, n_out);
    for k in kraus {
        let m = k.matrix();
        bound = &bound + &(&m.adjoint() * m);
        out = &out + &(&(m * rho.matrix()) * &m.adjoint());
    }
    let max_eigenvalue = hermitian_eigen(&hermitize(&bound), 1e-9)?.max_eigenvalue();
    if max_eigenvalue > 1.0 + NORM_TOL {
        return Err(Error::KrausBoundViolated { max_eigenvalue });
    }
    let prob = out.trace().re;
    if prob < ZERO_AMPLITUDE * ZERO_AMPLITUDE {
        return Err(Error::ZeroOutcome);
    }
    Ok((DensityMatrix(hermitize(&out.scale_real(1.0 / prob))), prob))
}

/// Sampled detector counts and the seed that produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub seed: u64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    /// Indexed by outcome label.
    pub outcome_probs: Vec<f64>,
    /// Post-measurement state per outcome; `None` for outcomes that cannot occur.
    pub outcome_states: Vec<Option<QuditState>>,
    pub shots: Option<ShotRecord>,
}

/// Measures `psi` with a compiled POVM circuit.
///
/// Probabilities are the squared norms of the routed port blocks. With
/// `shots`, outcomes are drawn from those probabilities by a ChaCha8
/// generator seeded with `seed`, or with a fresh seed that is recorded.
pub fn measure_povm(
    bundle: &PovmCircuitBundle,
    psi: &QuditState,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<MeasurementRecord> {
    measure_routed(&bundle.circuit, &bundle.routing, bundle.dim, psi, shots, seed)
}

/// Same as [`measure_povm`] for a circuit and routing table loaded separately.
pub fn measure_routed(
    circuit: &OpticalCircuit,
    routing: &[OutcomeRoute],
    dim: usize,
    psi: &QuditState,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<MeasurementRecord> {
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.dim(),
        });
    }
    psi.require_unit()?;
    let out = propagate(circuit, psi)?;
    let n_outcomes = routing.iter().map(|r| r.outcome + 1).max().unwrap_or(0);
    let mut outcome_probs = vec![0.0; n_outcomes];
    let mut outcome_states = vec![None; n_outcomes];
    for route in routing {
        let block: Vec<Complex64> = route.ports.iter().map(|&p| out.amplitudes()[p]).collect();
        outcome_probs[route.outcome] = block.iter().map(|z| z.norm_sqr()).sum();
        outcome_states[route.outcome] = QuditState::normalized_from(block);
    }
    let shots = shots.map(|count| {
        let seed = seed.unwrap_or_else(|| rand::rng().random());
        ShotRecord {
            seed,
            counts: sample_counts(&outcome_probs, count, seed),
        }
    });
    Ok(MeasurementRecord {
        outcome_probs,
        outcome_states,
        shots,
    })
}

fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = probs.iter().sum();
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let mut x = rng.random::<f64>() * total;
        let mut pick = probs.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            if x < p {
                pick = i;
                break;
            }
            x -= p;
        }
        counts[pick] += 1;
    }
    counts
}

/// Zeroes every coherence between different outcome port groups (and any
/// port outside them) of an extended-space density matrix.
pub fn dephase(rho_ext: &ComplexMatrix, routing: &[OutcomeRoute]) -> ComplexMatrix {
    let mut group = vec![usize::MAX; rho_ext.rows()];
    for (g, r) in routing.iter().enumerate() {
        for &p in &r.ports {
            group[p] = g;
        }
    }
    ComplexMatrix::from_fn(rho_ext.rows(), rho_ext.cols(), |i, j| {
        if group[i] != usize::MAX && group[i] == group[j] {
            rho_ext[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `𝒲(ρ) = (Σ Aᵢ ρ Aᵢ†)/n`: the circuit output is dephased across outcome
/// groups and the `n` diagonal blocks are summed into one subspace with
/// weight `1/n`. The result keeps the `1/n` factor; call
/// [`DensityMatrix::normalized`] for `Σ Aᵢ ρ Aᵢ†`.
pub fn dephase_and_mix(bundle: &PovmCircuitBundle, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = bundle.dim;
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.dim(),
        });
    }
    let u = recompose(&bundle.circuit);
    let embed = u.submatrix(0..u.rows(), 0..n);
    let rho_ext = &(&embed * rho.matrix()) * &embed.adjoint();
    let dephased = dephase(&rho_ext, &bundle.routing);
    let weight = 1.0 / bundle.routing.len() as f64;
    let mut mixed = ComplexMatrix::zeros(n, n);
    for route in &bundle.routing {
        let block = ComplexMatrix::from_fn(n, n, |i, j| dephased[(route.ports[i], route.ports[j])]);
        mixed = &mixed + &block;
    }
    Ok(DensityMatrix(hermitize(&mixed.scale_real(weight))))
}

/// Circuit that turns a photon in mode 0 into `target` on the first `N`
/// output modes; any missing norm leaks to the ancilla modes.
pub fn prepare_qudit(target: &QuditState) -> Result<OpticalCircuit> {
    let k = ComplexMatrix::column_vector(target.amplitudes());
    let map = validate_contraction(k, NormPolicy::Reject)?;
    dilation_to_circuit(&dilate(&map)?)
}

/// Local filter that equalizes Schmidt coefficients: `K = diag(min c / cᵢ)`.
///
/// Applied to one photon of `Σ cᵢ|ii⟩`, success leaves the maximally
/// entangled state; the success probability is `N·min(c)²`.
pub fn entanglement_filter(schmidt: &[f64]) -> Result<(ContractionMap, f64)> {
    if schmidt.is_empty() {
        return Err(Error::InvalidInput("no Schmidt coefficients".into()));
    }
    if let Some(i) = schmidt.iter().position(|&c| c.is_nan() || c <= 0.0) {
        return Err(Error::DegenerateInput(format!(
            "Schmidt coefficient {i} is {}, filter needs all coefficients positive",
            schmidt[i]
        )));
    }
    let total: f64 = schmidt.iter().map(|c| c * c).sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidInput(format!("squared Schmidt coefficients sum to {total}")));
    }
    let min = schmidt.iter().copied().fold(f64::INFINITY, f64::min);
    let diag: Vec<f64> = schmidt.iter().map(|&c| min / c).collect();
    let map = ContractionMap::new(ComplexMatrix::from_diag(&diag))?;
    Ok((map, schmidt.len() as f64 * min * min))
}
