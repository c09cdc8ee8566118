//! A POVM whose first element is a projector: its ports drop out of later stages.

use dilatic::povm::{compile_povm, compile_povm_with, validate_povm, CompileOptions, ElementOrder};
use dilatic::simulator::{measure_povm, QuditState};
use dilatic::ComplexMatrix;

fn main() -> dilatic::Result<()> {
    // qutrit: project onto |0⟩, then split the rest three ways
    let third = 1.0 / 3.0;
    let h = 0.5;
    let elements = vec![
        ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, h, 0.0], &[0.0, 0.0, third]]),
        ComplexMatrix::from_diag(&[1.0, 0.0, 0.0]),
        ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, h, 0.0], &[0.0, 0.0, 2.0 * third]]),
    ];
    let spec = validate_povm(elements, 3)?;
    if let Some(hint) = spec.ordering_hint() {
        println!("hint: {hint}");
    }

    for order in [ElementOrder::Given, ElementOrder::Auto] {
        let options = CompileOptions { order, ..CompileOptions::default() };
        let bundle = compile_povm_with(&spec, &options)?;
        let drops: Vec<usize> = bundle.stages.iter().map(|s| s.rank_drop).collect();
        println!(
            "{order:?}: modes {}, beam splitters {}, rank drops {drops:?}",
            bundle.total_modes,
            bundle.beam_splitter_count()
        );
    }

    let projective = validate_povm(
        vec![ComplexMatrix::from_diag(&[1.0, 0.0]), ComplexMatrix::from_diag(&[0.0, 1.0])],
        2,
    )?;
    let bundle = compile_povm(&projective)?;
    let psi = QuditState::from_real(&[0.6, 0.8])?;
    let rec = measure_povm(&bundle, &psi, None, None)?;
    println!("projective on (0.6, 0.8): {:?}", rec.outcome_probs);
    Ok(())
}
