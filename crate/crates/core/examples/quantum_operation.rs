//! Kraus maps on density matrices, and the dephased mixture of a compiled POVM.

use dilatic::dilation::ContractionMap;
use dilatic::povm::{compile_povm, validate_povm};
use dilatic::simulator::{apply_pure_map, apply_quantum_operation, dephase_and_mix, DensityMatrix, QuditState};
use dilatic::ComplexMatrix;

fn main() -> dilatic::Result<()> {
    let plus = QuditState::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2])?;

    let k = ContractionMap::new(ComplexMatrix::from_diag(&[0.6, 1.0]))?;
    let (out, p) = apply_pure_map(&k, &plus)?;
    println!("pure map: success {p:.4}, output {:?}", out.amplitudes());

    // amplitude damping with γ = 0.3
    let g: f64 = 0.3;
    let k0 = ContractionMap::new(ComplexMatrix::from_diag(&[1.0, (1.0 - g).sqrt()]))?;
    let k1 = ContractionMap::new(ComplexMatrix::from_real_rows(&[&[0.0, g.sqrt()], &[0.0, 0.0]]))?;
    let (rho, p) = apply_quantum_operation(&[k0, k1], &DensityMatrix::from_pure(&plus))?;
    println!("damping: trace {p:.4}\n{:?}", rho.matrix());

    let spec = validate_povm(
        vec![ComplexMatrix::from_diag(&[0.7, 0.2]), ComplexMatrix::from_diag(&[0.3, 0.8])],
        2,
    )?;
    let bundle = compile_povm(&spec)?;
    let w = dephase_and_mix(&bundle, &DensityMatrix::from_pure(&plus))?;
    println!("mixture: trace {:.4} (1/n)", w.trace());
    println!("normalized:\n{:?}", w.normalized()?.matrix());
    Ok(())
}
