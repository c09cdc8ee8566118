//! The `dilatic` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 domain validation
//! failure, 3 I/O, parse or usage failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dilation::{dilate, validate_contraction, NormPolicy};
use crate::error::Error;
use crate::format::{CircuitFile, CircuitPayload, MatrixData, MatrixFile};
use crate::interferometer::{dilation_bound, dilation_to_circuit, recompose};
use crate::linalg::ComplexMatrix;
use crate::povm::{compile_povm_with, validate_povm, CompileOptions, ElementOrder, DEFAULT_RANK_TOL};
use crate::simulator::{measure_routed, QuditState, NORM_TOL};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOL_ENV: &str = "DILATIC_TOL";
pub const DEFAULT_TOL: f64 = 1e-10;

/// Outcome blocks of a compiled POVM must reproduce the elements this well.
const POVM_BLOCK_TOL: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dilatic", version, about = "Compile contractions and POVMs into linear-optical circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Order {
    Given,
    Auto,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dilate a contraction file into a beam splitter circuit
    CompileMap {
        /// Contraction file, or - for stdin
        input: PathBuf,
        /// Circuit output path; stdout when omitted or -
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Divide by the operator norm instead of rejecting non-contractions
        #[arg(long)]
        rescale: bool,
        /// Largest accepted recomposition residual
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Compile a POVM file into a sequential measurement circuit
    CompilePovm {
        /// POVM file, or - for stdin
        input: PathBuf,
        /// Circuit output path; stdout when omitted or -
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Stage order: as given, or elements with unit eigenvalues first
        #[arg(long, value_enum, default_value = "given")]
        order: Order,
        /// Rank tolerance for dropping exhausted ports
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Send a state through a circuit and report detection probabilities
    Simulate {
        circuit: PathBuf,
        state: PathBuf,
        /// Number of sampled detection events
        #[arg(long)]
        shots: Option<u64>,
        /// Sampling seed; drawn and reported when omitted
        #[arg(long)]
        seed: Option<u64>,
        /// Machine-readable output
        #[arg(long)]
        json: bool,
    },
    /// Check a circuit against a contraction, unitary or POVM file
    Verify {
        circuit: PathBuf,
        matrix: PathBuf,
        /// Largest accepted residual (default 1e-10)
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug)]
enum Failure {
    Verify(String),
    Domain(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Verify(_) => EXIT_VERIFY,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verify(m) | Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_IO
                }
            };
        }
    };
    let result = match cli.command {
        Command::CompileMap {
            input,
            output,
            rescale,
            tol,
        } => compile_map(&input, output.as_deref(), rescale, tol, out, err),
        Command::CompilePovm {
            input,
            output,
            order,
            tol,
        } => compile_povm_cmd(&input, output.as_deref(), order, tol, out, err),
        Command::Simulate {
            circuit,
            state,
            shots,
            seed,
            json,
        } => simulate(&circuit, &state, shots, seed, json, out),
        Command::Verify { circuit, matrix, tol } => verify(&circuit, &matrix, tol, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn resolve_tol(flag: Option<f64>, default: f64) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Failure::Io(format!("{TOL_ENV}={s:?} is not a number")))?,
            Err(_) => default,
        },
    };
    if !tol.is_finite() || tol < 0.0 {
        return Err(Failure::Io(format!("tolerance {tol} must be a finite nonnegative number")));
    }
    Ok(tol)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Io(format!("cannot read stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
    }
}

fn load_matrix(path: &Path) -> Result<MatrixData, Failure> {
    let text = read_input(path)?;
    MatrixFile::parse(&text)
        .and_then(|f| f.decode())
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<CircuitFile, Failure> {
    let text = read_input(path)?;
    CircuitFile::parse(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn wrong_kind(path: &Path, want: &str, found: &MatrixData) -> Failure {
    Failure::Io(format!("{}: expected a {want} file, found {}", path.display(), found.kind()))
}

/// Writes the circuit; returns the stream the report should go to.
fn emit_circuit<'a>(
    file: &CircuitFile,
    output: Option<&Path>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
) -> Result<&'a mut dyn Write, Failure> {
    let text = file.to_json();
    match output {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text + "\n").map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display())))?;
            writeln!(out, "wrote: {}", p.display())?;
            Ok(out)
        }
        _ => {
            writeln!(out, "{text}")?;
            Ok(err)
        }
    }
}

fn header(w: &mut dyn Write, tol: f64) -> io::Result<()> {
    writeln!(w, "dilatic {VERSION}")?;
    writeln!(w, "tolerance: {tol:e}")
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.12}")).collect();
    format!("[{}]", parts.join(", "))
}

fn compile_map(
    input: &Path,
    output: Option<&Path>,
    rescale: bool,
    tol: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let tol = resolve_tol(tol, DEFAULT_TOL)?;
    let k = match load_matrix(input)? {
        MatrixData::Contraction(k) | MatrixData::Unitary(k) => k,
        other => return Err(wrong_kind(input, "contraction", &other)),
    };
    let policy = if rescale { NormPolicy::Rescale } else { NormPolicy::Reject };
    let map = validate_contraction(k, policy)?;
    let d = dilate(&map)?;
    let circuit = dilation_to_circuit(&d)?;
    let (n_in, n_out) = (map.n_in(), map.n_out());
    let u = recompose(&circuit);
    let residual = u
        .submatrix(0..n_out, 0..n_in)
        .max_abs_diff(map.matrix())
        .max(u.max_abs_diff(&d.u_big));

    let file = CircuitFile::from_map(&circuit, n_in, n_out);
    let report = emit_circuit(&file, output, out, err)?;
    header(report, tol)?;
    writeln!(report, "N1 (inputs): {n_in}")?;
    writeln!(report, "N2 (outputs): {n_out}")?;
    writeln!(report, "operator norm: {:.12}", map.norm())?;
    if map.scale() != 1.0 {
        writeln!(report, "rescaled by: {:.12}", map.scale())?;
    }
    writeln!(report, "singular values: {}", fmt_list(&d.svd.singular_values))?;
    writeln!(report, "modes: {}", circuit.mode_count)?;
    writeln!(
        report,
        "beam splitters: {} (bound {})",
        circuit.beam_splitter_count(),
        dilation_bound(n_in, n_out)
    )?;
    writeln!(report, "residual: {residual:.3e}")?;
    if residual > tol {
        return Err(Failure::Verify(format!("recomposition residual {residual:.3e} exceeds {tol:e}")));
    }
    Ok(())
}

fn compile_povm_cmd(
    input: &Path,
    output: Option<&Path>,
    order: Order,
    tol: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let rank_tol = resolve_tol(tol, DEFAULT_RANK_TOL)?;
    let (dim, elements) = match load_matrix(input)? {
        MatrixData::Povm { dim, elements } => (dim, elements),
        other => return Err(wrong_kind(input, "povm", &other)),
    };
    let spec = validate_povm(elements, dim)?;
    let options = CompileOptions {
        order: match order {
            Order::Given => ElementOrder::Given,
            Order::Auto => ElementOrder::Auto,
        },
        rank_tol,
        ..CompileOptions::default()
    };
    let bundle = compile_povm_with(&spec, &options)?;

    let mut sum = ComplexMatrix::zeros(dim, dim);
    for e in spec.elements() {
        sum = &sum + e;
    }
    let completeness = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    let block_residual = bundle
        .outcome_blocks()
        .iter()
        .map(|(i, b)| (&b.adjoint() * b).max_abs_diff(&spec.elements()[*i]))
        .fold(0.0, f64::max);

    let file = CircuitFile::from_bundle(&bundle);
    let report = emit_circuit(&file, output, out, err)?;
    header(report, rank_tol)?;
    writeln!(report, "dimension: {dim}")?;
    writeln!(report, "elements: {}", spec.len())?;
    writeln!(report, "completeness residual: {completeness:.3e}")?;
    for (i, (lo, hi)) in spec.eigen_ranges().iter().enumerate() {
        writeln!(report, "element {i}: eigenvalues in [{lo:.6}, {hi:.6}]")?;
    }
    for (k, st) in bundle.stages.iter().enumerate() {
        writeln!(
            report,
            "stage {} (outcome {}): active {}, sigma* = {}, D = {}",
            k + 1,
            st.outcome,
            st.active_dim,
            fmt_list(&st.sigma_star),
            st.rank_drop
        )?;
    }
    let names: Vec<&str> = bundle.circuit.modules.iter().map(|m| m.name.as_str()).collect();
    writeln!(report, "modules: {}", bundle.module_count())?;
    writeln!(report, "module order: {}", names.join(" "))?;
    writeln!(report, "modes: {}", bundle.total_modes)?;
    writeln!(report, "beam splitters: {}", bundle.beam_splitter_count())?;
    writeln!(report, "block residual: {block_residual:.3e}")?;
    if let (Order::Given, Some(hint)) = (order, spec.ordering_hint()) {
        writeln!(report, "hint: {hint}")?;
    }
    if block_residual > POVM_BLOCK_TOL {
        return Err(Failure::Verify(format!(
            "outcome blocks miss the POVM elements by {block_residual:.3e}"
        )));
    }
    Ok(())
}

fn simulate(
    circuit_path: &Path,
    state_path: &Path,
    shots: Option<u64>,
    seed: Option<u64>,
    as_json: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let file = load_circuit(circuit_path)?;
    let amplitudes = match load_matrix(state_path)? {
        MatrixData::State(v) => v,
        other => return Err(wrong_kind(state_path, "state", &other)),
    };
    let psi = QuditState::new(amplitudes)?;
    let routing = file.routing();
    let record = measure_routed(&file.circuit(), &routing, file.input_dim(), &psi, shots, seed)?;
    let labels: Vec<String> = match file.payload {
        CircuitPayload::Map { .. } => ["success", "leak"].iter().map(|s| s.to_string()).collect(),
        CircuitPayload::Povm { .. } => (0..record.outcome_probs.len()).map(|i| format!("outcome {i}")).collect(),
    };
    let labels = &labels[..record.outcome_probs.len()];

    if as_json {
        let states: Vec<_> = record
            .outcome_states
            .iter()
            .map(|s| {
                s.as_ref()
                    .map(|s| s.amplitudes().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            })
            .collect();
        let doc = json!({
            "version": VERSION,
            "tolerance": NORM_TOL,
            "seed": record.shots.as_ref().map(|s| s.seed),
            "labels": labels,
            "probabilities": record.outcome_probs,
            "states": states,
            "shots": shots,
            "counts": record.shots.as_ref().map(|s| &s.counts),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"))?;
        return Ok(());
    }

    header(out, NORM_TOL)?;
    match &record.shots {
        Some(s) => writeln!(out, "seed: {}", s.seed)?,
        None => writeln!(out, "seed: none")?,
    }
    for (i, label) in labels.iter().enumerate() {
        writeln!(out, "{label}: p = {:.12}", record.outcome_probs[i])?;
        if let Some(s) = &record.outcome_states[i] {
            let parts: Vec<String> = s
                .amplitudes()
                .iter()
                .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(out, "  state: [{}]", parts.join(", "))?;
        }
    }
    writeln!(out, "probability sum: {:.12}", record.outcome_probs.iter().sum::<f64>())?;
    if let Some(s) = &record.shots {
        let total: u64 = s.counts.iter().sum();
        writeln!(out, "shots: {total}")?;
        for (label, c) in labels.iter().zip(&s.counts) {
            writeln!(out, "{label}: count = {c} (freq {:.6})", *c as f64 / total.max(1) as f64)?;
        }
    }
    Ok(())
}

fn verify(circuit_path: &Path, matrix_path: &Path, tol: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let tol = resolve_tol(tol, DEFAULT_TOL)?;
    let file = load_circuit(circuit_path)?;
    let data = load_matrix(matrix_path)?;
    let u = recompose(&file.circuit());
    let residual = match (&file.payload, &data) {
        (CircuitPayload::Map { n_in, n_out }, MatrixData::Contraction(k) | MatrixData::Unitary(k)) => {
            if k.rows() != *n_out || k.cols() != *n_in {
                return Err(Failure::Domain(format!(
                    "circuit realizes a {n_out}x{n_in} map, matrix is {}x{}",
                    k.rows(),
                    k.cols()
                )));
            }
            u.submatrix(0..*n_out, 0..*n_in).max_abs_diff(k)
        }
        (CircuitPayload::Povm { dim, .. }, MatrixData::Povm { dim: pdim, elements }) => {
            let routing = file.routing();
            if pdim != dim || elements.len() != routing.len() {
                return Err(Failure::Domain(format!(
                    "circuit measures {} outcomes in dimension {dim}, file has {} in dimension {pdim}",
                    routing.len(),
                    elements.len()
                )));
            }
            routing
                .iter()
                .map(|r| {
                    let b = u.select_rows(&r.ports, 0..*dim);
                    (&b.adjoint() * &b).max_abs_diff(&elements[r.outcome])
                })
                .fold(0.0, f64::max)
        }
        (CircuitPayload::Map { .. }, other) => return Err(wrong_kind(matrix_path, "contraction", other)),
        (CircuitPayload::Povm { .. }, other) => return Err(wrong_kind(matrix_path, "povm", other)),
    };
    header(out, tol)?;
    writeln!(out, "unitarity residual: {:.3e}", u.unitarity_residual())?;
    writeln!(out, "residual: {residual:.3e}")?;
    if residual <= tol {
        writeln!(out, "verified")?;
        Ok(())
    } else {
        Err(Failure::Verify(format!("residual {residual:.3e} exceeds tolerance {tol:e}")))
    }
}
