//! Compile the qubit trine POVM into seven modules and measure |0⟩.

use std::f64::consts::PI;

use dilatic::povm::{compile_povm, validate_povm};
use dilatic::simulator::{measure_povm, QuditState};
use dilatic::ComplexMatrix;

fn main() -> dilatic::Result<()> {
    let elements: Vec<ComplexMatrix> = (0..3)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / 3.0).sin_cos();
            ComplexMatrix::from_real_rows(&[&[c * c, c * s], &[c * s, s * s]]).scale_real(2.0 / 3.0)
        })
        .collect();
    let spec = validate_povm(elements, 2)?;
    let bundle = compile_povm(&spec)?;

    let names: Vec<&str> = bundle.circuit.modules.iter().map(|m| m.name.as_str()).collect();
    println!("modules ({}): {}", bundle.module_count(), names.join(" "));
    println!("modes: {}, beam splitters: {}", bundle.total_modes, bundle.beam_splitter_count());
    for (k, st) in bundle.stages.iter().enumerate() {
        println!("stage {}: sigma* {:?}, D = {}", k + 1, st.sigma_star, st.rank_drop);
    }
    for r in &bundle.routing {
        println!("outcome {} detectors on ports {:?}", r.outcome, r.ports);
    }

    let rec = measure_povm(&bundle, &QuditState::basis(2, 0), Some(100_000), Some(7))?;
    println!("probabilities: {:?}", rec.outcome_probs);
    println!("counts (seed 7): {:?}", rec.shots.unwrap().counts);
    Ok(())
}
