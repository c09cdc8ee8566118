//! Embed a 2×3 contraction in a 6-mode unitary and build its beam splitter circuit.

use dilatic::dilation::{apply_dilation, dilate, validate_contraction, NormPolicy};
use dilatic::interferometer::{dilation_bound, dilation_to_circuit, recompose};
use dilatic::ComplexMatrix;
use num_complex::Complex64;

fn main() -> dilatic::Result<()> {
    let k = ComplexMatrix::from_rows(&[
        vec![Complex64::new(0.5, 0.1), Complex64::new(0.2, 0.0), Complex64::new(0.0, -0.3)],
        vec![Complex64::new(0.1, 0.0), Complex64::new(0.4, 0.4), Complex64::new(0.3, 0.0)],
    ]);
    let map = validate_contraction(k, NormPolicy::Reject)?;
    let d = dilate(&map)?;
    println!("singular values: {:?}", d.svd.singular_values);
    println!("mixing angles:   {:?}", d.thetas);
    println!("unitarity residual: {:.2e}", d.u_big.unitarity_residual());
    println!("corner residual:    {:.2e}", d.corner().max_abs_diff(map.matrix()));

    let circuit = dilation_to_circuit(&d)?;
    for m in &circuit.modules {
        println!("module {:<3} elements {}..{}", m.name, m.start, m.end);
    }
    println!(
        "beam splitters: {} (bound {})",
        circuit.beam_splitter_count(),
        dilation_bound(map.n_in(), map.n_out())
    );
    println!("circuit vs dilation: {:.2e}", recompose(&circuit).max_abs_diff(&d.u_big));

    let psi = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let out = apply_dilation(&d, &psi)?;
    let success: f64 = out[..2].iter().map(|z| z.norm_sqr()).sum();
    println!("photon in mode 0: success {success:.6}, leak {:.6}", 1.0 - success);
    Ok(())
}
