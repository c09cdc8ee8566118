//! Sequential linear-optical realization of a finite POVM.
//!
//! Stage `k` sees the photon through the accumulated contraction `C` with
//! `C†C = I − Σ_{i<k} Πᵢ`. It diagonalizes the relative operator
//! `M = C⁺† Πₖ C⁺ = U_kL† Σ*² U_kL` and builds three interferometer modules:
//!
//! * `U_kL` on the currently active ports,
//! * the dilation of `Σ*` coupling each active port to a fresh vacuum port,
//! * `Vₖ` on the `Σ*` outputs (padded with vacuum), whose outputs are the
//!   detector ports of outcome `k`.
//!
//! The complement outputs carry `Σ*_C U_kL C` to the next stage; ports where
//! `Σ*_C` vanishes carry nothing and are dropped. The last element needs only
//! its `Vₙ` module, so `n` elements take `3n − 2` modules in total.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::dilation::complement;
use crate::error::{Error, Result};
use crate::interferometer::{reck_decompose, sigma_dilation_elements, OpticalCircuit};
use crate::linalg::{
    cholesky_psd, complete_orthonormal, hermitian_eigen, inner, pinv_diag, svd, vec_norm, ComplexMatrix,
    EIGENVALUE_CLAMP,
};

/// Hermiticity tolerance on POVM elements.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a POVM element.
pub const PSD_TOL: f64 = 1e-10;
/// Largest accepted `‖Σ Πᵢ − I‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Default threshold below which `Σ_C²` eigenvalues count as projected out.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// `Σ*` values up to `1 + SIGMA_CLAMP` are round-off and clamped to one.
pub const SIGMA_CLAMP: f64 = 1e-6;

/// A validated POVM `{Πᵢ}` on a `dim`-dimensional space.
#[derive(Debug, Clone)]
pub struct PovmSpec {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    eigen_ranges: Vec<(f64, f64)>,
}

impl PovmSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(min, max)` eigenvalue of each element.
    pub fn eigen_ranges(&self) -> &[(f64, f64)] {
        &self.eigen_ranges
    }

    /// Whether element `i` has an eigenvalue at 1, i.e. fully projects some direction.
    pub fn has_unit_eigenvalue(&self, i: usize) -> bool {
        self.eigen_ranges[i].1 >= 1.0 - DEFAULT_RANK_TOL
    }

    /// Element order that puts unit-eigenvalue elements first, stable otherwise.
    pub fn auto_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| !self.has_unit_eigenvalue(i));
        order
    }

    /// Suggests reordering when an element with a unit eigenvalue comes after
    /// one without; leading with such elements shrinks later stages.
    pub fn ordering_hint(&self) -> Option<String> {
        let auto = self.auto_order();
        if auto.iter().copied().eq(0..self.len()) {
            None
        } else {
            Some(format!(
                "elements {:?} have unit eigenvalues; ordering {:?} would drop ports earlier",
                (0..self.len()).filter(|&i| self.has_unit_eigenvalue(i)).collect::<Vec<_>>(),
                auto
            ))
        }
    }
}

pub fn validate_povm(elements: Vec<ComplexMatrix>, dim: usize) -> Result<PovmSpec> {
    if elements.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "a POVM needs at least 2 elements, got {}",
            elements.len()
        )));
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    let mut eigen_ranges = Vec::with_capacity(elements.len());
    for (index, pi) in elements.iter().enumerate() {
        if pi.rows() != dim || pi.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if pi.rows() != dim { pi.rows() } else { pi.cols() },
            });
        }
        let residual = pi.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::ElementNotHermitian { index, residual });
        }
        let eig = hermitian_eigen(pi, HERMITIAN_TOL)?;
        let min = eig.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::ElementNotPositive {
                index,
                min_eigenvalue: min,
            });
        }
        eigen_ranges.push((min, eig.max_eigenvalue()));
        sum = &sum + pi;
    }
    let residual = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    if residual > COMPLETENESS_TOL {
        return Err(Error::NotComplete { residual });
    }
    Ok(PovmSpec {
        dim,
        elements,
        eigen_ranges,
    })
}

/// `Aᵢ` with `Aᵢ†Aᵢ = Πᵢ`; `index` is the outcome label.
#[derive(Debug, Clone)]
pub struct DetectionOperator {
    pub a: ComplexMatrix,
    pub index: usize,
}

/// Upper-triangular detection operators, one per element.
pub fn detection_operators(p: &PovmSpec) -> Result<Vec<DetectionOperator>> {
    p.elements
        .iter()
        .enumerate()
        .map(|(index, pi)| {
            Ok(DetectionOperator {
                a: cholesky_psd(pi, 1e-12)?,
                index,
            })
        })
        .collect()
}

/// One stage of the sequential construction.
#[derive(Debug, Clone)]
pub struct StageDecomposition {
    /// Outcome label realized at this stage.
    pub outcome: usize,
    /// `U₁` or `U_kL`; `None` when no port is still active.
    pub u_stage: Option<ComplexMatrix>,
    /// `Σ₁` or `Σ*ₖ`, each in `[0, 1]`.
    pub sigma_star: Vec<f64>,
    /// `√(1 − σ²)` for each entry of `sigma_star`.
    pub sigma_c: Vec<f64>,
    /// `Vₖ`, `dim × dim`.
    pub v_stage: ComplexMatrix,
    /// Number of ports entering this stage.
    pub active_dim: usize,
    /// Ports projected out at this stage (where `Σ*_C` vanishes).
    pub rank_drop: usize,
    /// Local indices of the complement ports passed to the next stage.
    pub kept: Vec<usize>,
    /// `[Σ* U_kL C; 0]`, the outcome block before `Vₖ`.
    pub pre_v_block: ComplexMatrix,
}

/// Accumulated contraction `C` between stages.
#[derive(Debug, Clone)]
pub struct ResidualContext {
    dim: usize,
    c: Option<ComplexMatrix>,
    stage: usize,
    rank_tol: f64,
}

impl ResidualContext {
    /// Context before the first stage: `C = I`.
    pub fn new(dim: usize, rank_tol: f64) -> Self {
        Self {
            dim,
            c: Some(ComplexMatrix::identity(dim)),
            stage: 0,
            rank_tol,
        }
    }

    pub fn active_dim(&self) -> usize {
        self.c.as_ref().map_or(0, |c| c.rows())
    }

    pub fn accumulated(&self) -> Option<&ComplexMatrix> {
        self.c.as_ref()
    }

    /// `C†C`, which should equal `I − Σ_{i<k} Πᵢ`.
    pub fn residual_operator(&self) -> ComplexMatrix {
        match &self.c {
            Some(c) => &c.adjoint() * c,
            None => ComplexMatrix::zeros(self.dim, self.dim),
        }
    }

    /// Realizes `pi_next` from the current residual and advances `C`.
    pub fn compile_stage(&mut self, outcome: usize, pi_next: &ComplexMatrix) -> Result<StageDecomposition> {
        self.stage += 1;
        let Some(c) = &self.c else {
            return self.empty_stage(outcome, pi_next);
        };
        let r = c.rows();
        let eig = hermitian_eigen(&relative_operator(c, pi_next, self.rank_tol)?, 1e-8)?;
        let u_stage = eig.eigenvectors.adjoint();
        let mut sigma_star = Vec::with_capacity(r);
        for &l in &eig.eigenvalues {
            // round-off eigenvalues would otherwise become √ε-sized directions
            let s = if l > EIGENVALUE_CLAMP { l.sqrt() } else { 0.0 };
            if s > 1.0 + SIGMA_CLAMP {
                return Err(Error::StageInfeasible {
                    stage: self.stage,
                    value: s,
                });
            }
            sigma_star.push(s.min(1.0));
        }
        let sigma_c: Vec<f64> = sigma_star.iter().map(|&s| complement(s)).collect();
        let rotated = &u_stage * c;

        let pre_v_block = ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i < r {
                rotated[(i, j)] * sigma_star[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let kept: Vec<usize> = (0..r).filter(|&i| sigma_c[i] * sigma_c[i] > self.rank_tol).collect();
        self.c = if kept.is_empty() {
            None
        } else {
            Some(ComplexMatrix::from_fn(kept.len(), self.dim, |i, j| {
                rotated[(kept[i], j)] * sigma_c[kept[i]]
            }))
        };
        Ok(StageDecomposition {
            outcome,
            u_stage: Some(u_stage),
            sigma_star,
            sigma_c,
            v_stage: ComplexMatrix::identity(self.dim),
            active_dim: r,
            rank_drop: r - kept.len(),
            kept,
            pre_v_block,
        })
    }

    /// Final stage: the residual itself must already realize `pi_last`, so
    /// the relative operator is the identity and only `Vₙ` is needed.
    pub fn finish(mut self, outcome: usize, pi_last: &ComplexMatrix) -> Result<StageDecomposition> {
        self.stage += 1;
        let Some(c) = &self.c else {
            return self.empty_stage(outcome, pi_last);
        };
        let r = c.rows();
        let eig = hermitian_eigen(&relative_operator(c, pi_last, self.rank_tol)?, 1e-8)?;
        let mut sigma_star = Vec::with_capacity(r);
        for &l in &eig.eigenvalues {
            let s = l.max(0.0).sqrt();
            if (s - 1.0).abs() > SIGMA_CLAMP {
                return Err(Error::StageInfeasible {
                    stage: self.stage,
                    value: s,
                });
            }
            sigma_star.push(s.min(1.0));
        }
        let sigma_c = sigma_star.iter().map(|&s| complement(s)).collect();
        let pre_v_block = ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i < r {
                c[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(StageDecomposition {
            outcome,
            u_stage: Some(ComplexMatrix::identity(r)),
            sigma_star,
            sigma_c,
            v_stage: ComplexMatrix::identity(self.dim),
            active_dim: r,
            rank_drop: r,
            kept: Vec::new(),
            pre_v_block,
        })
    }

    fn empty_stage(&self, outcome: usize, pi: &ComplexMatrix) -> Result<StageDecomposition> {
        let leftover = pi.max_abs();
        if leftover > 1e-8 {
            return Err(Error::StageInfeasible {
                stage: self.stage,
                value: leftover,
            });
        }
        Ok(StageDecomposition {
            outcome,
            u_stage: None,
            sigma_star: Vec::new(),
            sigma_c: Vec::new(),
            v_stage: ComplexMatrix::identity(self.dim),
            active_dim: 0,
            rank_drop: 0,
            kept: Vec::new(),
            pre_v_block: ComplexMatrix::zeros(self.dim, self.dim),
        })
    }
}

/// `C⁺† Π C⁺` on the row space of `C`, inverting only singular values above `rank_tol`.
fn relative_operator(c: &ComplexMatrix, pi: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    let r = c.rows();
    let dec = svd(c, 1e-9)?;
    let inv = pinv_diag(&dec.singular_values, rank_tol);
    // C⁺ = Y_r · diag(inv) · X†
    let y_scaled = ComplexMatrix::from_fn(c.cols(), r, |i, j| dec.v[(i, j)] * inv[j]);
    let pseudo = &y_scaled * &dec.u.adjoint();
    let m = &(&pseudo.adjoint() * pi) * &pseudo;
    Ok(ComplexMatrix::from_fn(r, r, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5))
}

/// `Vₖ` for a stage: the override if given (checked unitary), otherwise the
/// unitary that turns the stage's outcome block into `target`.
pub fn choose_v(
    stage: &StageDecomposition,
    target: &ComplexMatrix,
    v_override: Option<&ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let n = stage.pre_v_block.rows();
    if let Some(v) = v_override {
        if v.rows() != n || v.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.rows(),
            });
        }
        let residual = v.unitarity_residual();
        if residual > 1e-10 {
            return Err(Error::NotUnitary { residual });
        }
        return Ok(v.clone());
    }
    // F = X S Y†; want V with V F = A, so V xⱼ = A yⱼ / sⱼ on the range
    let dec = svd(&stage.pre_v_block, 1e-9)?;
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut sources: Vec<usize> = Vec::with_capacity(n);
    for (j, &s) in dec.singular_values.iter().enumerate() {
        if s <= 1e-12 {
            continue;
        }
        let mut w: Vec<Complex64> = target.mul_vec(&dec.v.column(j)).into_iter().map(|z| z / s).collect();
        for _ in 0..2 {
            for q in &images {
                let proj = inner(q, &w);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let norm = vec_norm(&w);
        if norm < 1e-8 {
            continue;
        }
        images.push(w.into_iter().map(|z| z / norm).collect());
        sources.push(j);
    }
    // map the remaining left singular vectors onto the orthogonal complement
    let mut rest: Vec<usize> = (0..n).filter(|j| !sources.contains(j)).collect();
    let matched = images.len();
    complete_orthonormal(&mut images, n);
    sources.append(&mut rest);
    let w = ComplexMatrix::from_fn(n, n, |i, k| images[k][i]);
    let x = ComplexMatrix::from_fn(n, n, |i, k| dec.u[(i, sources[k])]);
    debug_assert!(matched <= n);
    Ok(&w * &x.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElementOrder {
    /// Stages follow the element list.
    #[default]
    Given,
    /// Unit-eigenvalue elements first.
    Auto,
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    pub order: ElementOrder,
    pub rank_tol: f64,
    /// Replacement `Vᵢ`, keyed by outcome label.
    pub v_overrides: BTreeMap<usize, ComplexMatrix>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            order: ElementOrder::Given,
            rank_tol: DEFAULT_RANK_TOL,
            v_overrides: BTreeMap::new(),
        }
    }
}

/// Detector ports of one outcome.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OutcomeRoute {
    pub outcome: usize,
    pub ports: Vec<usize>,
}

/// A compiled POVM circuit with its routing and detection operators.
#[derive(Debug, Clone)]
pub struct PovmCircuitBundle {
    pub dim: usize,
    pub stages: Vec<StageDecomposition>,
    /// Labeled modules in order `U₁ G₁ V₁ … U_kL G_k V_k … Vₙ`.
    pub circuit: OpticalCircuit,
    /// Indexed by outcome label.
    pub detection_ops: Vec<DetectionOperator>,
    /// One route per outcome, in stage order.
    pub routing: Vec<OutcomeRoute>,
    pub total_modes: usize,
}

impl PovmCircuitBundle {
    pub fn module_count(&self) -> usize {
        self.circuit.modules.len()
    }

    pub fn outcome_count(&self) -> usize {
        self.routing.len()
    }

    pub fn beam_splitter_count(&self) -> usize {
        self.circuit.beam_splitter_count()
    }

    /// `(outcome, block)` pairs where `block = 𝒰[ports, 0..dim]` maps the input
    /// amplitudes to that outcome's detector amplitudes.
    pub fn outcome_blocks(&self) -> Vec<(usize, ComplexMatrix)> {
        let u = crate::interferometer::recompose(&self.circuit);
        self.routing
            .iter()
            .map(|r| (r.outcome, u.select_rows(&r.ports, 0..self.dim)))
            .collect()
    }
}

pub fn compile_povm(p: &PovmSpec) -> Result<PovmCircuitBundle> {
    compile_povm_with(p, &CompileOptions::default())
}

pub fn compile_povm_with(p: &PovmSpec, options: &CompileOptions) -> Result<PovmCircuitBundle> {
    let n = p.dim();
    let order = match options.order {
        ElementOrder::Given => (0..p.len()).collect(),
        ElementOrder::Auto => p.auto_order(),
    };
    let detection_ops = detection_operators(p)?;

    let mut ctx = ResidualContext::new(n, options.rank_tol);
    let mut stages = Vec::with_capacity(order.len());
    for (pos, &label) in order.iter().enumerate() {
        let pi = &p.elements()[label];
        let mut stage = if pos + 1 == order.len() {
            ctx.clone().finish(label, pi)?
        } else {
            ctx.compile_stage(label, pi)?
        };
        stage.v_stage = choose_v(&stage, &detection_ops[label].a, options.v_overrides.get(&label))?;
        stages.push(stage);
    }

    let (circuit, routing) = layout(n, &stages)?;
    Ok(PovmCircuitBundle {
        dim: n,
        total_modes: circuit.mode_count,
        stages,
        circuit,
        detection_ops,
        routing,
    })
}

const MODULE_TOL: f64 = 1e-8;

/// Assigns global modes to every module and emits the circuit.
fn layout(n: usize, stages: &[StageDecomposition]) -> Result<(OpticalCircuit, Vec<OutcomeRoute>)> {
    // first pass: mode count
    let mut total = n;
    for (k, st) in stages.iter().enumerate() {
        if k + 1 < stages.len() {
            total += st.active_dim;
        }
        total += n - st.active_dim;
    }
    let mut circuit = OpticalCircuit::new(total);
    let mut routing = Vec::with_capacity(stages.len());
    let mut active: Vec<usize> = (0..n).collect();
    let mut next_free = n;
    let mut take = |count: usize| {
        let range: Vec<usize> = (next_free..next_free + count).collect();
        next_free += count;
        range
    };

    for (k, st) in stages.iter().enumerate() {
        let idx = k + 1;
        let last = idx == stages.len();
        debug_assert_eq!(active.len(), st.active_dim);
        if !last {
            let u_name = if idx == 1 { "U1".to_string() } else { format!("U{idx}L") };
            match &st.u_stage {
                Some(u) => {
                    let sub = reck_decompose(u, MODULE_TOL)?;
                    circuit.push_module(u_name, &sub, &active);
                }
                None => circuit.push_elements(u_name, Vec::new()),
            }
            let lower = take(active.len());
            circuit.push_elements(format!("G{idx}"), sigma_dilation_elements(&st.sigma_star, &active, &lower));
            let mut ports = active.clone();
            ports.extend(take(n - active.len()));
            let v = reck_decompose(&st.v_stage, MODULE_TOL)?;
            circuit.push_module(format!("V{idx}"), &v, &ports);
            routing.push(OutcomeRoute {
                outcome: st.outcome,
                ports,
            });
            active = st.kept.iter().map(|&i| lower[i]).collect();
        } else {
            let mut ports = active.clone();
            ports.extend(take(n - active.len()));
            let v = reck_decompose(&st.v_stage, MODULE_TOL)?;
            circuit.push_module(format!("V{idx}"), &v, &ports);
            routing.push(OutcomeRoute {
                outcome: st.outcome,
                ports,
            });
        }
    }
    debug_assert_eq!(next_free, total);
    Ok((circuit, routing))
}
