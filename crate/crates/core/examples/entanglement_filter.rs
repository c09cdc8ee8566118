//! Local filtering that turns a partially entangled pair into a maximally entangled one.

use dilatic::dilation::dilate;
use dilatic::interferometer::dilation_to_circuit;
use dilatic::simulator::entanglement_filter;

fn main() -> dilatic::Result<()> {
    for schmidt in [vec![0.8f64.sqrt(), 0.2f64.sqrt()], vec![0.5f64.sqrt(), 0.3f64.sqrt(), 0.2f64.sqrt()]] {
        let (k, p) = entanglement_filter(&schmidt)?;
        let diag: Vec<f64> = (0..schmidt.len()).map(|i| k.matrix()[(i, i)].re).collect();
        let circuit = dilation_to_circuit(&dilate(&k)?)?;
        println!(
            "c = {schmidt:.4?}: K = diag{diag:.4?}, success {p:.4}, {} beam splitters",
            circuit.beam_splitter_count()
        );
    }
    Ok(())
}
