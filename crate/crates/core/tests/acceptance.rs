//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::fs;
use std::process::Command;
use std::time::Instant;

use common::*;
use dilatic::cli;
use dilatic::dilation::{dilate, ContractionMap};
use dilatic::format::MatrixFile;
use dilatic::interferometer::{dilation_to_circuit, recompose, reck_decompose, OpticalElement};
use dilatic::povm::{compile_povm, detection_operators, validate_povm};
use dilatic::simulator::{
    apply_pure_map, apply_quantum_operation, entanglement_filter, measure_povm, DensityMatrix, QuditState,
};
use dilatic::ComplexMatrix;
use num_complex::Complex64;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: usize, name: &str, result: Result<String, String>) {
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL {id:>2} {name}: {detail}");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// 200 contractions with N₁, N₂ ∈ 1..=8; every tenth has a unit singular value.
fn contraction_set() -> Vec<ComplexMatrix> {
    let mut r = rng(0xD11A7E);
    (0..200)
        .map(|i| {
            let n_out = 1 + i % 8;
            let n_in = 1 + (i / 8) % 8;
            random_contraction(&mut r, n_out, n_in, i % 10 == 0)
        })
        .collect()
}

fn dilation_correctness(set: &[ComplexMatrix]) -> Result<String, String> {
    let start = Instant::now();
    let mut worst_unitary = 0.0f64;
    let mut worst_corner = 0.0f64;
    for k in set {
        let d = dilate(&ContractionMap::new(k.clone()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        worst_unitary = worst_unitary.max(d.u_big.unitarity_residual());
        worst_corner = worst_corner.max(d.corner().max_abs_diff(k));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(worst_unitary < 1e-10, || format!("unitarity residual {worst_unitary:.2e}"))?;
    ensure(worst_corner < 1e-10, || format!("corner residual {worst_corner:.2e}"))?;
    ensure(elapsed < 5.0, || format!("took {elapsed:.2} s"))?;
    Ok(format!(
        "{} maps, max |U†U-I| {worst_unitary:.1e}, max corner {worst_corner:.1e}, {elapsed:.3} s",
        set.len()
    ))
}

fn angle_law(set: &[ComplexMatrix]) -> Result<String, String> {
    let mut checked = 0;
    let mut unit = 0;
    let mut worst = 0.0f64;
    for k in set {
        let d = dilate(&ContractionMap::new(k.clone()).unwrap()).map_err(|e| e.to_string())?;
        let circuit = dilation_to_circuit(&d).map_err(|e| e.to_string())?;
        let m = k.rows().max(k.cols());
        let g = circuit.module("G").ok_or("no G module")?;
        for (i, &s) in d.svd.singular_values.iter().enumerate() {
            let bs = g.iter().find_map(|e| match *e {
                OpticalElement::BeamSplitter { modes, theta, .. } if modes == (i, i + m) => Some((theta, e.reflectivity())),
                _ => None,
            });
            match bs {
                Some((theta, refl)) => {
                    let err = (theta.cos() - s).abs().max((refl - (1.0 - s * s)).abs());
                    worst = worst.max(err);
                    checked += 1;
                }
                None => {
                    // omitted splitter means θ = 0, so σ must be 1
                    ensure((s - 1.0).abs() < 1e-12, || format!("missing splitter for σ = {s}"))?;
                    unit += 1;
                }
            }
        }
    }
    ensure(worst < 1e-12, || format!("max angle error {worst:.2e}"))?;
    Ok(format!("{checked} splitters with max error {worst:.1e}, {unit} unit values need none"))
}

fn count_bound(set: &[ComplexMatrix]) -> Result<String, String> {
    let mut violations = 0;
    for k in set {
        let circuit = dilation_to_circuit(&dilate(&ContractionMap::new(k.clone()).unwrap()).unwrap()).unwrap();
        let (n1, n2) = (k.cols() as f64, k.rows() as f64);
        let bound = n1 * n1 / 2.0 + n2 * n2 / 2.0 - (n1 / 2.0 - n2 / 2.0).abs();
        if circuit.beam_splitter_count() as f64 > bound + 1e-9 {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    let mut r = rng(3);
    for n in 1..=12 {
        let count = reck_decompose(&random_unitary(&mut r, n), 1e-10)
            .map_err(|e| e.to_string())?
            .beam_splitter_count();
        ensure(count == n * (n - 1) / 2, || format!("N = {n}: {count} splitters"))?;
    }
    Ok(format!("0 violations over {} maps; generic N = 1..12 hit N(N-1)/2", set.len()))
}

fn reck_round_trip() -> Result<String, String> {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 16;
        let u = random_unitary(&mut r, n);
        let circuit = reck_decompose(&u, 1e-10).map_err(|e| e.to_string())?;
        worst = worst.max(recompose(&circuit).max_abs_diff(&u));
    }
    ensure(worst < 1e-10, || format!("residual {worst:.2e}"))?;
    Ok(format!("100 unitaries, N <= 16, max residual {worst:.1e}"))
}

/// Compiles the POVM and checks module count and probabilities over 20 states.
fn check_povm(elements: &[ComplexMatrix], dim: usize, r: &mut rand_chacha::ChaCha8Rng) -> Result<(f64, f64), String> {
    let spec = validate_povm(elements.to_vec(), dim).map_err(|e| e.to_string())?;
    let bundle = compile_povm(&spec).map_err(|e| e.to_string())?;
    let n = elements.len();
    ensure(bundle.module_count() == 3 * n - 2, || {
        format!("{} modules for n = {n}", bundle.module_count())
    })?;
    let (mut worst_p, mut worst_sum) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let psi = random_state(r, dim);
        let rec = measure_povm(&bundle, &QuditState::new(psi.clone()).unwrap(), None, None).map_err(|e| e.to_string())?;
        for (p, e) in rec.outcome_probs.iter().zip(elements) {
            worst_p = worst_p.max((p - expectation(e, &psi)).abs());
        }
        worst_sum = worst_sum.max((rec.outcome_probs.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(worst_p < 1e-8, || format!("probability error {worst_p:.2e}"))?;
    ensure(worst_sum < 1e-9, || format!("sum error {worst_sum:.2e}"))?;
    Ok((worst_p, worst_sum))
}

fn povm_pipeline() -> Result<String, String> {
    let mut r = rng(5);
    let (mut worst_p, mut worst_sum) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let n = 2 + i % 4;
        let dim = 2 + (i / 4) % 5;
        let elements = random_povm(&mut r, n, dim);
        let (p, s) = check_povm(&elements, dim, &mut r).map_err(|e| format!("POVM {i} (n={n}, N={dim}): {e}"))?;
        worst_p = worst_p.max(p);
        worst_sum = worst_sum.max(s);
    }
    Ok(format!("100 POVMs, 3n-2 modules, max |p - <Π>| {worst_p:.1e}, max |Σp - 1| {worst_sum:.1e}"))
}

fn degenerate_case() -> Result<String, String> {
    let mut r = rng(6);
    let mut drops = 0;
    for i in 0..40 {
        let dim = 2 + i % 5;
        let d = 1 + (i / 5) % (dim - 1);
        let rest = 1 + i % 3;
        let elements = projector_povm(&mut r, dim, d, rest);
        let spec = validate_povm(elements.clone(), dim).map_err(|e| e.to_string())?;
        let bundle = compile_povm(&spec).map_err(|e| e.to_string())?;
        ensure(bundle.stages[0].rank_drop == d, || {
            format!("case {i}: rank drop {} for D = {d}", bundle.stages[0].rank_drop)
        })?;
        drops += d;
        check_povm(&elements, dim, &mut r).map_err(|e| format!("case {i}: {e}"))?;
    }
    let bundle = compile_povm(&validate_povm(projective_qubit(), 2).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let psi = random_state(&mut r, 2);
        let rec = measure_povm(&bundle, &QuditState::new(psi.clone()).unwrap(), None, None).unwrap();
        worst = worst
            .max((rec.outcome_probs[0] - psi[0].norm_sqr()).abs())
            .max((rec.outcome_probs[1] - psi[1].norm_sqr()).abs());
    }
    ensure(worst < 1e-12, || format!("projective error {worst:.2e}"))?;
    Ok(format!("40 POVMs with projectors ({drops} ports dropped); projective qubit error {worst:.1e}"))
}

fn trine_statistics() -> Result<String, String> {
    let bundle = compile_povm(&validate_povm(trine(), 2).unwrap()).map_err(|e| e.to_string())?;
    let shots = 100_000u64;
    let rec = measure_povm(&bundle, &QuditState::basis(2, 0), Some(shots), Some(7)).map_err(|e| e.to_string())?;
    let want = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
    let mut worst = 0.0f64;
    for (p, w) in rec.outcome_probs.iter().zip(want) {
        worst = worst.max((p - w).abs());
    }
    ensure(worst < 1e-10, || format!("exact probability error {worst:.2e}"))?;
    let counts = rec.shots.unwrap().counts;
    let mut worst_z = 0.0f64;
    for (c, p) in counts.iter().zip(want) {
        let se = (p * (1.0 - p) / shots as f64).sqrt();
        worst_z = worst_z.max((*c as f64 / shots as f64 - p).abs() / se);
    }
    ensure(worst_z < 4.0, || format!("frequency off by {worst_z:.2} standard errors"))?;
    Ok(format!("exact error {worst:.1e}; counts {counts:?} within {worst_z:.2} standard errors"))
}

fn quantum_operation_law() -> Result<String, String> {
    let mut r = rng(8);
    let mut worst_trace = 0.0f64;
    for i in 0..50 {
        let n = 2 + i % 4;
        let dim = 2 + (i / 4) % 5;
        let spec = validate_povm(random_povm(&mut r, n, dim), dim).map_err(|e| e.to_string())?;
        let kraus: Vec<ContractionMap> = detection_operators(&spec)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|d| ContractionMap::new(d.a).unwrap())
            .collect();
        let rho = DensityMatrix::from_pure(&QuditState::new(random_state(&mut r, dim)).unwrap());
        let (_, p) = apply_quantum_operation(&kraus, &rho).map_err(|e| e.to_string())?;
        worst_trace = worst_trace.max((p - 1.0).abs());
    }
    ensure(worst_trace < 1e-9, || format!("trace error {worst_trace:.2e}"))?;
    let mut worst_p = 0.0f64;
    for i in 0..50 {
        let (n_out, n_in) = (1 + i % 6, 1 + (i / 6) % 6);
        let k = random_contraction(&mut r, n_out, n_in, false);
        let psi = random_state(&mut r, n_in);
        let (_, p) = apply_pure_map(&ContractionMap::new(k.clone()).unwrap(), &QuditState::new(psi.clone()).unwrap())
            .map_err(|e| e.to_string())?;
        worst_p = worst_p.max((p - expectation(&(&k.adjoint() * &k), &psi)).abs());
    }
    ensure(worst_p < 1e-10, || format!("success probability error {worst_p:.2e}"))?;
    Ok(format!("Kraus trace error {worst_trace:.1e}; pure-map probability error {worst_p:.1e}"))
}

fn filter_check() -> Result<String, String> {
    let schmidt = [0.8f64.sqrt(), 0.2f64.sqrt()];
    let (k, p) = entanglement_filter(&schmidt).map_err(|e| e.to_string())?;
    ensure((p - 0.4).abs() < 1e-12, || format!("success probability {p}"))?;
    let out: Vec<f64> = (0..2).map(|i| k.matrix()[(i, i)].re * schmidt[i]).collect();
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    let spread = (out[0] / norm - out[1] / norm).abs();
    ensure(spread < 1e-12, || format!("output Schmidt coefficients differ by {spread:.2e}"))?;

    // equalizing diagonal contractions: diag(a, a·c₁/c₂) with both entries ≤ 1
    let (mut best, mut best_a) = (0.0f64, 0.0f64);
    for step in 0..=1000 {
        let a = step as f64 * 1e-3;
        let b = a * schmidt[0] / schmidt[1];
        if b > 1.0 + 1e-12 {
            continue;
        }
        let prob = (a * schmidt[0]).powi(2) + (b * schmidt[1]).powi(2);
        if prob > best {
            best = prob;
            best_a = a;
        }
    }
    let k00 = k.matrix()[(0, 0)].re;
    ensure(best <= p + 1e-12, || format!("grid found {best} > {p}"))?;
    ensure((best_a - k00).abs() <= 1e-3, || format!("grid optimum at a = {best_a}, filter has {k00}"))?;
    Ok(format!("p = {p:.12}, spread {spread:.1e}, grid optimum a = {best_a} (filter {k00})"))
}

fn cli_round_trip() -> Result<String, String> {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let file = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let run = |args: &[&str]| {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = cli::run(std::iter::once("dilatic").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    };

    let mut r = rng(10);
    let mut cases: Vec<(usize, Vec<ComplexMatrix>)> = vec![(2, trine()), (2, projective_qubit())];
    for i in 0..8 {
        let dim = 2 + i % 4;
        cases.push((dim, random_povm(&mut r, 2 + i % 4, dim)));
    }
    for (i, (dim, elements)) in cases.iter().enumerate() {
        let povm = file(&format!("p{i}.json"));
        let circ = file(&format!("c{i}.json"));
        let state = file(&format!("s{i}.json"));
        fs::write(&povm, MatrixFile::povm(*dim, elements).to_json()).unwrap();
        let psi: Vec<Complex64> = random_state(&mut r, *dim);
        fs::write(&state, MatrixFile::state(&psi).to_json()).unwrap();
        let (code, _) = run(&["compile-povm", &povm, "-o", &circ]);
        ensure(code == 0, || format!("compile-povm exit {code} on case {i}"))?;
        let (code, out) = run(&["simulate", &circ, &state, "--json"]);
        ensure(code == 0, || format!("simulate exit {code} on case {i}"))?;
        let doc: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
        let from_file: Vec<f64> = doc["probabilities"]
            .as_array()
            .ok_or("no probabilities")?
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let bundle = compile_povm(&validate_povm(elements.clone(), *dim).unwrap()).unwrap();
        let rec = measure_povm(&bundle, &QuditState::new(psi).unwrap(), None, None).unwrap();
        for (a, b) in from_file.iter().zip(&rec.outcome_probs) {
            ensure(format!("{a:.12}") == format!("{b:.12}"), || format!("case {i}: {a} vs {b}"))?;
        }
    }

    // exit-code contract through the installed binary, driven by a shell script
    let k = file("k.json");
    fs::write(&k, r#"{"kind": "contraction", "rows": 1, "cols": 2, "entries": [[0.6, 0.0], [0.0, 0.3]]}"#).unwrap();
    fs::write(file("w.json"), r#"{"kind": "contraction", "rows": 1, "cols": 2, "entries": [[0.5, 0.0], [0.0, 0.3]]}"#).unwrap();
    fs::write(file("big.json"), r#"{"kind": "contraction", "rows": 1, "cols": 1, "entries": [[3.0, 0.0]]}"#).unwrap();
    fs::write(file("junk.json"), "{ \"kind\": ").unwrap();
    let script = r#"
        set -u
        "$BIN" compile-map k.json -o k.circ.json >/dev/null 2>&1; a=$?
        "$BIN" verify k.circ.json w.json >/dev/null 2>&1; b=$?
        "$BIN" compile-map big.json >/dev/null 2>&1; c=$?
        "$BIN" compile-map junk.json >/dev/null 2>&1; d=$?
        "$BIN" verify k.circ.json k.json >/dev/null 2>&1; e=$?
        echo "$a $b $c $d $e"
    "#;
    let output = Command::new("sh")
        .arg("-c")
        .arg(script)
        .current_dir(dir.path())
        .env("BIN", env!("CARGO_BIN_EXE_dilatic"))
        .env_remove(cli::TOL_ENV)
        .output()
        .map_err(|e| format!("cannot run sh: {e}"))?;
    let codes = String::from_utf8_lossy(&output.stdout).trim().to_string();
    ensure(codes == "0 1 2 3 0", || format!("exit codes {codes:?}, expected \"0 1 2 3 0\""))?;
    Ok(format!("{} POVM files match in-memory to 12 places; exit codes {codes}", cases.len()))
}

fn main() {
    let mut report = Report { failures: 0 };
    let set = contraction_set();
    report.check(1, "dilation correctness", dilation_correctness(&set));
    report.check(2, "G angle law", angle_law(&set));
    report.check(3, "beam splitter bound", count_bound(&set));
    report.check(4, "Reck round trip", reck_round_trip());
    report.check(5, "POVM pipeline", povm_pipeline());
    report.check(6, "degenerate rank drop", degenerate_case());
    report.check(7, "trine statistics", trine_statistics());
    report.check(8, "quantum operation law", quantum_operation_law());
    report.check(9, "entanglement filter", filter_check());
    report.check(10, "CLI round trip", cli_round_trip());
    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
