//! Beam splitter / phase shifter circuits and the triangular (Reck) decomposition.
//!
//! Circuits act on single-photon amplitude vectors. Elements are applied in
//! list order, so the circuit matrix is `E_last ⋯ E_2·E_1`.
//!
//! Beam splitter on modes `(i, j)`, `i < j`:
//!
//! ```text
//!     [ cos θ            −sin θ·e^{iφ} ]
//!     [ sin θ·e^{−iφ}     cos θ        ]
//! ```
//!
//! with reflection probability `R = sin²θ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dilation::DilationResult;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Angles below this are treated as identity elements and left out.
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpticalElement {
    BeamSplitter { modes: (usize, usize), theta: f64, phi: f64 },
    PhaseShifter { mode: usize, phi: f64 },
}

impl OpticalElement {
    pub fn is_beam_splitter(&self) -> bool {
        matches!(self, OpticalElement::BeamSplitter { .. })
    }

    /// Reflection probability `sin²θ`; zero for phase shifters.
    pub fn reflectivity(&self) -> f64 {
        match *self {
            OpticalElement::BeamSplitter { theta, .. } => theta.sin().powi(2),
            OpticalElement::PhaseShifter { .. } => 0.0,
        }
    }

    fn max_mode(&self) -> usize {
        match *self {
            OpticalElement::BeamSplitter { modes, .. } => modes.0.max(modes.1),
            OpticalElement::PhaseShifter { mode, .. } => mode,
        }
    }

    fn check(&self, mode_count: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match *self {
            OpticalElement::BeamSplitter { modes: (i, j), theta, phi } => {
                if i >= j || j >= mode_count {
                    return bad(format!("beam splitter modes ({i}, {j}) invalid for {mode_count} modes"));
                }
                if !(0.0..=PI / 2.0).contains(&theta) || !theta.is_finite() {
                    return bad(format!("beam splitter angle {theta} outside [0, π/2]"));
                }
                check_phase(phi)
            }
            OpticalElement::PhaseShifter { mode, phi } => {
                if mode >= mode_count {
                    return bad(format!("phase shifter mode {mode} invalid for {mode_count} modes"));
                }
                check_phase(phi)
            }
        }
    }

    /// Applies the element in place to an amplitude vector.
    pub fn apply(&self, amps: &mut [Complex64]) {
        match *self {
            OpticalElement::BeamSplitter { modes: (i, j), theta, phi } => {
                let b = beam_splitter_block(theta, phi);
                let (a, c) = (amps[i], amps[j]);
                amps[i] = b[0][0] * a + b[0][1] * c;
                amps[j] = b[1][0] * a + b[1][1] * c;
            }
            OpticalElement::PhaseShifter { mode, phi } => {
                amps[mode] *= Complex64::from_polar(1.0, phi);
            }
        }
    }

    fn remap(&self, map: &[usize]) -> Self {
        match *self {
            OpticalElement::BeamSplitter { modes: (i, j), theta, phi } => {
                let (a, b) = (map[i], map[j]);
                debug_assert!(a < b, "mode map must be increasing");
                OpticalElement::BeamSplitter { modes: (a, b), theta, phi }
            }
            OpticalElement::PhaseShifter { mode, phi } => OpticalElement::PhaseShifter { mode: map[mode], phi },
        }
    }
}

fn check_phase(phi: f64) -> Result<()> {
    if phi.is_finite() && phi > -PI && phi <= PI {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("phase {phi} outside (−π, π]")))
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

fn beam_splitter_block(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    [
        [Complex64::new(c, 0.0), -e * s],
        [e.conj() * s, Complex64::new(c, 0.0)],
    ]
}

/// Full `mode_count × mode_count` matrix of one element.
pub fn element_matrix(e: &OpticalElement, mode_count: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(mode_count);
    match *e {
        OpticalElement::BeamSplitter { modes: (i, j), theta, phi } => {
            let b = beam_splitter_block(theta, phi);
            m[(i, i)] = b[0][0];
            m[(i, j)] = b[0][1];
            m[(j, i)] = b[1][0];
            m[(j, j)] = b[1][1];
        }
        OpticalElement::PhaseShifter { mode, phi } => {
            m[(mode, mode)] = Complex64::from_polar(1.0, phi);
        }
    }
    m
}

/// A named contiguous run of elements (one interferometer module).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleLabel {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalCircuit {
    pub mode_count: usize,
    pub elements: Vec<OpticalElement>,
    pub modules: Vec<ModuleLabel>,
}

impl OpticalCircuit {
    pub fn new(mode_count: usize) -> Self {
        Self {
            mode_count,
            elements: Vec::new(),
            modules: Vec::new(),
        }
    }

    /// Checks mode indices, angle ranges and module ranges.
    pub fn validate(&self) -> Result<()> {
        if self.mode_count == 0 {
            return Err(Error::InvalidInput("circuit has no modes".into()));
        }
        for e in &self.elements {
            e.check(self.mode_count)?;
        }
        for m in &self.modules {
            if m.start > m.end || m.end > self.elements.len() {
                return Err(Error::InvalidInput(format!(
                    "module {} range {}..{} out of bounds",
                    m.name, m.start, m.end
                )));
            }
        }
        Ok(())
    }

    pub fn beam_splitter_count(&self) -> usize {
        self.elements.iter().filter(|e| e.is_beam_splitter()).count()
    }

    pub fn module(&self, name: &str) -> Option<&[OpticalElement]> {
        self.modules
            .iter()
            .find(|m| m.name == name)
            .map(|m| &self.elements[m.start..m.end])
    }

    /// Appends `sub` as a labeled module, sending its local mode `k` to `modes[k]`.
    ///
    /// `modes` must be strictly increasing so beam splitter pairs keep `i < j`.
    pub fn push_module(&mut self, name: impl Into<String>, sub: &OpticalCircuit, modes: &[usize]) {
        assert_eq!(sub.mode_count, modes.len(), "mode map length");
        assert!(modes.windows(2).all(|w| w[0] < w[1]), "mode map must be increasing");
        assert!(modes.last().is_none_or(|&m| m < self.mode_count));
        let start = self.elements.len();
        self.elements.extend(sub.elements.iter().map(|e| e.remap(modes)));
        self.modules.push(ModuleLabel {
            name: name.into(),
            start,
            end: self.elements.len(),
        });
    }

    /// Appends raw elements as a labeled module.
    pub fn push_elements(&mut self, name: impl Into<String>, elements: Vec<OpticalElement>) {
        debug_assert!(elements.iter().all(|e| e.max_mode() < self.mode_count));
        let start = self.elements.len();
        self.elements.extend(elements);
        self.modules.push(ModuleLabel {
            name: name.into(),
            start,
            end: self.elements.len(),
        });
    }

    /// Runs an amplitude vector of length `mode_count` through the circuit.
    pub fn apply(&self, amps: &mut [Complex64]) {
        assert_eq!(amps.len(), self.mode_count);
        for e in &self.elements {
            e.apply(amps);
        }
    }
}

/// Circuit matrix: product of the element matrices in application order.
pub fn recompose(c: &OpticalCircuit) -> ComplexMatrix {
    let n = c.mode_count;
    let mut m = ComplexMatrix::zeros(n, n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        c.apply(&mut col);
        m.set_column(j, &col);
    }
    m
}

/// Maximum beam splitter count of a triangular `n`-mode interferometer.
pub fn reck_bound(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `N₁²/2 + N₂²/2 − |N₁/2 − N₂/2|`: beam splitters needed to dilate an `N₂ × N₁` map.
pub fn dilation_bound(n_in: usize, n_out: usize) -> usize {
    (n_in * n_in + n_out * n_out - n_in.abs_diff(n_out)) / 2
}

/// Decomposes an `N × N` unitary into at most `N(N−1)/2` nearest-neighbour
/// beam splitters followed by one phase shifter per mode.
///
/// Row `N−1` is cleared first, left to right, by mixing adjacent columns;
/// then row `N−2`, and so on up the triangle. Whatever is left is a diagonal
/// of phases.
pub fn reck_decompose(u: &ComplexMatrix, tol: f64) -> Result<OpticalCircuit> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: u.rows(),
            found: u.cols(),
        });
    }
    let residual = u.unitarity_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    let n = u.rows();
    let mut w = u.clone();
    let mut elements = Vec::new();
    for i in (1..n).rev() {
        for j in 0..i {
            let a = w[(i, j)];
            let b = w[(i, j + 1)];
            if a.norm() == 0.0 {
                continue;
            }
            let theta = a.norm().atan2(b.norm());
            if theta < PRUNE_TOL {
                continue;
            }
            let phi = if b.norm() > 0.0 { wrap_phase(b.arg() - a.arg()) } else { 0.0 };
            // w ← w·T† nulls w[i][j]
            let t = beam_splitter_block(theta, phi);
            let t_adj = [[t[0][0].conj(), t[1][0].conj()], [t[0][1].conj(), t[1][1].conj()]];
            w.rotate_columns(j, j + 1, &t_adj);
            w[(i, j)] = Complex64::new(0.0, 0.0);
            elements.push(OpticalElement::BeamSplitter { modes: (j, j + 1), theta, phi });
        }
    }
    for k in 0..n {
        let phi = wrap_phase(w[(k, k)].arg());
        if phi.abs() >= PRUNE_TOL {
            elements.push(OpticalElement::PhaseShifter { mode: k, phi });
        }
    }
    let mut circuit = OpticalCircuit::new(n);
    circuit.push_elements("U", elements);
    Ok(circuit)
}

const MODULE_TOL: f64 = 1e-9;

/// Three labeled modules realizing `𝒰 = U·G·V†`: `V†` on the input modes, the
/// `G` splitters coupling mode `i` to `i + max(N₁, N₂)`, then `U` on the output
/// modes.
pub fn dilation_to_circuit(d: &DilationResult) -> Result<OpticalCircuit> {
    let mode_count = d.mode_count();
    let half = mode_count / 2;
    let mut circuit = OpticalCircuit::new(mode_count);

    let v_adj = reck_decompose(&d.svd.v.adjoint(), MODULE_TOL)?;
    circuit.push_module("V†", &v_adj, &(0..d.n_in()).collect::<Vec<_>>());

    circuit.push_elements("G", sigma_dilation_elements(&d.sigma_prime, &(0..half).collect::<Vec<_>>(), &(half..mode_count).collect::<Vec<_>>()));

    let u = reck_decompose(&d.svd.u, MODULE_TOL)?;
    circuit.push_module("U", &u, &(0..d.n_out()).collect::<Vec<_>>());
    Ok(circuit)
}

/// Elements implementing `[[Σ, Σ_C], [Σ_C, −Σ]]` with `Σ` on `upper` and the
/// complement on `lower`: a beam splitter with `cos θ = σ` (omitted when
/// `σ = 1`) followed by a π phase on the lower mode.
pub(crate) fn sigma_dilation_elements(sigmas: &[f64], upper: &[usize], lower: &[usize]) -> Vec<OpticalElement> {
    assert_eq!(sigmas.len(), upper.len());
    assert_eq!(sigmas.len(), lower.len());
    let mut out = Vec::with_capacity(2 * sigmas.len());
    for ((&s, &i), &j) in sigmas.iter().zip(upper).zip(lower) {
        assert!(i < j);
        let theta = s.clamp(0.0, 1.0).acos();
        if theta >= PRUNE_TOL {
            out.push(OpticalElement::BeamSplitter { modes: (i, j), theta, phi: PI });
        }
        out.push(OpticalElement::PhaseShifter { mode: j, phi: PI });
    }
    out
}
