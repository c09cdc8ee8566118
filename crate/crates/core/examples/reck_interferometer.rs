//! Decompose a unitary into a triangular beam splitter array and rebuild it.

use std::f64::consts::PI;

use dilatic::interferometer::{reck_bound, reck_decompose, recompose, OpticalElement};
use dilatic::ComplexMatrix;
use num_complex::Complex64;

fn main() -> dilatic::Result<()> {
    // 4-point discrete Fourier transform
    let n = 4;
    let u = ComplexMatrix::from_fn(n, n, |j, k| {
        Complex64::from_polar(0.5, 2.0 * PI * (j * k) as f64 / n as f64)
    });
    let circuit = reck_decompose(&u, 1e-10)?;
    for e in &circuit.elements {
        match *e {
            OpticalElement::BeamSplitter { modes, theta, phi } => {
                println!("BS {modes:?}  theta {theta:.6}  phi {phi:+.6}  R {:.6}", e.reflectivity())
            }
            OpticalElement::PhaseShifter { mode, phi } => println!("PS {mode}       phi {phi:+.6}"),
        }
    }
    println!("beam splitters: {} of at most {}", circuit.beam_splitter_count(), reck_bound(n));
    println!("round trip residual: {:.2e}", recompose(&circuit).max_abs_diff(&u));
    Ok(())
}
