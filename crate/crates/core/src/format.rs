//! JSON documents for matrices, states, POVMs and compiled circuits.
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major. Floats are
//! written in shortest round-trip form, so parse(emit(x)) == x bit for bit.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::interferometer::{ModuleLabel, OpticalCircuit, OpticalElement};
use crate::linalg::ComplexMatrix;
use crate::povm::{OutcomeRoute, PovmCircuitBundle};

pub const CIRCUIT_FORMAT: &str = "dilatic-circuit";
pub const CIRCUIT_VERSION: u32 = 1;

/// Malformed document. `line` is 1-based, 0 when no position applies.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

impl std::error::Error for ParseError {}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        ParseError { line: e.line(), message }
    }
}

fn invalid(message: impl Into<String>) -> ParseError {
    ParseError {
        line: 0,
        message: message.into(),
    }
}

pub type Entry = [f64; 2];

fn to_entries(values: &[Complex64]) -> Vec<Entry> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn from_entries(entries: &[Entry], what: &str) -> Result<Vec<Complex64>, ParseError> {
    entries
        .iter()
        .enumerate()
        .map(|(i, &[re, im])| {
            if re.is_finite() && im.is_finite() {
                Ok(Complex64::new(re, im))
            } else {
                Err(invalid(format!("{what}: entry {i} is not finite")))
            }
        })
        .collect()
}

fn matrix_from(rows: usize, cols: usize, entries: &[Entry], what: &str) -> Result<ComplexMatrix, ParseError> {
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("{what}: dimensions must be positive")));
    }
    if entries.len() != rows * cols {
        return Err(invalid(format!(
            "{what}: declared {rows}x{cols} needs {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    ComplexMatrix::from_vec(rows, cols, from_entries(entries, what)?).map_err(|e| invalid(format!("{what}: {e}")))
}

/// Input documents, discriminated by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixFile {
    Contraction {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
        rows: usize,
        cols: usize,
        entries: Vec<Entry>,
    },
    Unitary {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
        rows: usize,
        cols: usize,
        entries: Vec<Entry>,
    },
    Density {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
        rows: usize,
        cols: usize,
        entries: Vec<Entry>,
    },
    State {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
        dim: usize,
        entries: Vec<Entry>,
    },
    Povm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
        dim: usize,
        elements: Vec<Vec<Entry>>,
    },
}

/// Decoded contents of a [`MatrixFile`].
#[derive(Debug, Clone)]
pub enum MatrixData {
    Contraction(ComplexMatrix),
    Unitary(ComplexMatrix),
    Density(ComplexMatrix),
    State(Vec<Complex64>),
    Povm { dim: usize, elements: Vec<ComplexMatrix> },
}

impl MatrixData {
    pub fn kind(&self) -> &'static str {
        match self {
            MatrixData::Contraction(_) => "contraction",
            MatrixData::Unitary(_) => "unitary",
            MatrixData::Density(_) => "density",
            MatrixData::State(_) => "state",
            MatrixData::Povm { .. } => "povm",
        }
    }
}

impl MatrixFile {
    pub fn contraction(k: &ComplexMatrix) -> Self {
        MatrixFile::Contraction {
            label: None,
            comment: None,
            rows: k.rows(),
            cols: k.cols(),
            entries: to_entries(k.as_slice()),
        }
    }

    pub fn unitary(u: &ComplexMatrix) -> Self {
        MatrixFile::Unitary {
            label: None,
            comment: None,
            rows: u.rows(),
            cols: u.cols(),
            entries: to_entries(u.as_slice()),
        }
    }

    pub fn density(rho: &ComplexMatrix) -> Self {
        MatrixFile::Density {
            label: None,
            comment: None,
            rows: rho.rows(),
            cols: rho.cols(),
            entries: to_entries(rho.as_slice()),
        }
    }

    pub fn state(amplitudes: &[Complex64]) -> Self {
        MatrixFile::State {
            label: None,
            comment: None,
            dim: amplitudes.len(),
            entries: to_entries(amplitudes),
        }
    }

    pub fn povm(dim: usize, elements: &[ComplexMatrix]) -> Self {
        MatrixFile::Povm {
            label: None,
            comment: None,
            dim,
            elements: elements.iter().map(|e| to_entries(e.as_slice())).collect(),
        }
    }

    pub fn with_label(mut self, text: impl Into<String>) -> Self {
        match &mut self {
            MatrixFile::Contraction { label, .. }
            | MatrixFile::Unitary { label, .. }
            | MatrixFile::Density { label, .. }
            | MatrixFile::State { label, .. }
            | MatrixFile::Povm { label, .. } => *label = Some(text.into()),
        }
        self
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            MatrixFile::Contraction { label, .. }
            | MatrixFile::Unitary { label, .. }
            | MatrixFile::Density { label, .. }
            | MatrixFile::State { label, .. }
            | MatrixFile::Povm { label, .. } => label.as_deref(),
        }
    }

    /// Checks declared dimensions and finiteness, and decodes the entries.
    pub fn decode(&self) -> Result<MatrixData, ParseError> {
        Ok(match self {
            MatrixFile::Contraction { rows, cols, entries, .. } => {
                MatrixData::Contraction(matrix_from(*rows, *cols, entries, "contraction")?)
            }
            MatrixFile::Unitary { rows, cols, entries, .. } => {
                MatrixData::Unitary(matrix_from(*rows, *cols, entries, "unitary")?)
            }
            MatrixFile::Density { rows, cols, entries, .. } => {
                MatrixData::Density(matrix_from(*rows, *cols, entries, "density")?)
            }
            MatrixFile::State { dim, entries, .. } => {
                if *dim == 0 || entries.len() != *dim {
                    return Err(invalid(format!(
                        "state: declared dim {dim}, found {} entries",
                        entries.len()
                    )));
                }
                MatrixData::State(from_entries(entries, "state")?)
            }
            MatrixFile::Povm { dim, elements, .. } => {
                let elements = elements
                    .iter()
                    .enumerate()
                    .map(|(i, e)| matrix_from(*dim, *dim, e, &format!("povm element {i}")))
                    .collect::<Result<_, _>>()?;
                MatrixData::Povm { dim: *dim, elements }
            }
        })
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let file: MatrixFile = serde_json::from_str(text)?;
        file.decode()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix file serializes")
    }
}

/// What a circuit file realizes, beyond its elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CircuitPayload {
    /// Dilation of an `n_out × n_in` contraction: input on modes
    /// `0..n_in`, the map's output on modes `0..n_out`.
    Map { n_in: usize, n_out: usize },
    /// Compiled POVM: input on modes `0..dim`, one port list per outcome.
    Povm {
        dim: usize,
        routing: Vec<OutcomeRoute>,
        /// Row-major `dim × dim` matrices indexed by outcome label.
        detection_operators: Vec<Vec<Entry>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub format: String,
    pub version: u32,
    pub mode_count: usize,
    pub elements: Vec<OpticalElement>,
    pub modules: Vec<ModuleLabel>,
    pub payload: CircuitPayload,
}

impl CircuitFile {
    pub fn from_map(circuit: &OpticalCircuit, n_in: usize, n_out: usize) -> Self {
        Self::new(circuit, CircuitPayload::Map { n_in, n_out })
    }

    pub fn from_bundle(bundle: &PovmCircuitBundle) -> Self {
        Self::new(
            &bundle.circuit,
            CircuitPayload::Povm {
                dim: bundle.dim,
                routing: bundle.routing.clone(),
                detection_operators: bundle.detection_ops.iter().map(|d| to_entries(d.a.as_slice())).collect(),
            },
        )
    }

    fn new(circuit: &OpticalCircuit, payload: CircuitPayload) -> Self {
        Self {
            format: CIRCUIT_FORMAT.into(),
            version: CIRCUIT_VERSION,
            mode_count: circuit.mode_count,
            elements: circuit.elements.clone(),
            modules: circuit.modules.clone(),
            payload,
        }
    }

    pub fn circuit(&self) -> OpticalCircuit {
        OpticalCircuit {
            mode_count: self.mode_count,
            elements: self.elements.clone(),
            modules: self.modules.clone(),
        }
    }

    /// Input dimension of the realized map or measurement.
    pub fn input_dim(&self) -> usize {
        match &self.payload {
            CircuitPayload::Map { n_in, .. } => *n_in,
            CircuitPayload::Povm { dim, .. } => *dim,
        }
    }

    /// Detector groups: the outcomes of a POVM, or `success`/`leak` for a map.
    pub fn routing(&self) -> Vec<OutcomeRoute> {
        match &self.payload {
            CircuitPayload::Map { n_out, .. } => {
                let mut routes = vec![OutcomeRoute {
                    outcome: 0,
                    ports: (0..*n_out).collect(),
                }];
                if self.mode_count > *n_out {
                    routes.push(OutcomeRoute {
                        outcome: 1,
                        ports: (*n_out..self.mode_count).collect(),
                    });
                }
                routes
            }
            CircuitPayload::Povm { routing, .. } => routing.clone(),
        }
    }

    pub fn detection_operators(&self) -> Result<Vec<ComplexMatrix>, ParseError> {
        match &self.payload {
            CircuitPayload::Map { .. } => Ok(Vec::new()),
            CircuitPayload::Povm {
                dim,
                detection_operators,
                ..
            } => detection_operators
                .iter()
                .enumerate()
                .map(|(i, e)| matrix_from(*dim, *dim, e, &format!("detection operator {i}")))
                .collect(),
        }
    }

    fn check(&self) -> Result<(), ParseError> {
        if self.format != CIRCUIT_FORMAT {
            return Err(invalid(format!("unknown format {:?}", self.format)));
        }
        if self.version != CIRCUIT_VERSION {
            return Err(invalid(format!("unsupported version {}", self.version)));
        }
        for e in &self.elements {
            let (theta, phi) = match *e {
                OpticalElement::BeamSplitter { theta, phi, .. } => (theta, phi),
                OpticalElement::PhaseShifter { phi, .. } => (0.0, phi),
            };
            if !theta.is_finite() || !phi.is_finite() {
                return Err(invalid("element angle is not finite"));
            }
        }
        self.circuit().validate().map_err(|e| invalid(e.to_string()))?;
        let dim = self.input_dim();
        if dim == 0 || dim > self.mode_count {
            return Err(invalid(format!("input dimension {dim} invalid for {} modes", self.mode_count)));
        }
        match &self.payload {
            CircuitPayload::Map { n_out, .. } => {
                if *n_out == 0 || *n_out > self.mode_count {
                    return Err(invalid(format!("output dimension {n_out} invalid")));
                }
            }
            CircuitPayload::Povm {
                routing,
                detection_operators,
                ..
            } => {
                let mut seen = vec![false; self.mode_count];
                for (i, r) in routing.iter().enumerate() {
                    if r.outcome >= routing.len() {
                        return Err(invalid(format!("route {i} has outcome {} out of range", r.outcome)));
                    }
                    if r.ports.len() != dim {
                        return Err(invalid(format!("route {i} has {} ports, expected {dim}", r.ports.len())));
                    }
                    for &p in &r.ports {
                        if p >= self.mode_count || std::mem::replace(&mut seen[p], true) {
                            return Err(invalid(format!("route {i} port {p} out of range or repeated")));
                        }
                    }
                }
                if detection_operators.len() != routing.len() {
                    return Err(invalid("one detection operator per outcome expected"));
                }
                self.detection_operators()?;
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let file: CircuitFile = serde_json::from_str(text)?;
        file.check()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit file serializes")
    }
}
