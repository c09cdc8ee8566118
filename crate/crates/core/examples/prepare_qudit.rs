//! Circuits that turn one photon into an arbitrary (possibly sub-normalized) qutrit.

use dilatic::simulator::{prepare_qudit, propagate, QuditState};
use num_complex::Complex64;

fn main() -> dilatic::Result<()> {
    let targets = [
        vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.48), Complex64::new(0.64, 0.0)],
        vec![Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)],
    ];
    for t in targets {
        let target = QuditState::new(t)?;
        let circuit = prepare_qudit(&target)?;
        let out = propagate(&circuit, &QuditState::basis(1, 0))?;
        let leak: f64 = out.amplitudes()[target.dim()..].iter().map(|z| z.norm_sqr()).sum();
        let shown: Vec<String> = out.amplitudes()[..target.dim()]
            .iter()
            .map(|z| format!("{:.3}{:+.3}i", z.re, z.im))
            .collect();
        println!(
            "{} modes, {} beam splitters, output [{}], leak {leak:.3}",
            circuit.mode_count,
            circuit.beam_splitter_count(),
            shown.join(", ")
        );
    }
    Ok(())
}
