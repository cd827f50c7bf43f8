//! Reverse reconciliation of one frame: Bob maps his data onto a codeword
//! with the 8-dimensional rotation, Alice decodes with belief propagation.
//!
//! `cargo run --release --example md_reconciliation`

use cvqkd::recon::{bp_decode, construct_matrix, md_encode, md_llr, MetEnsemble};
use cvqkd::RandomSource;
use rand_distr::{Distribution, StandardNormal};

fn main() -> cvqkd::Result<()> {
    let h = construct_matrix(&MetEnsemble::rate_002(), 10_240, &RandomSource::from_u64(9))?;
    let mut rng = RandomSource::from_u64(10).rng();
    for snr in [0.02f64, 0.03, 0.05] {
        let rho: f64 = (snr / (1.0 + snr)).sqrt();
        let y: Vec<f64> = (0..h.n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x: Vec<f64> = y
            .iter()
            .map(|v| {
                let z: f64 = StandardNormal.sample(&mut rng);
                rho * v + (1.0 - rho * rho).sqrt() * z
            })
            .collect();
        // Bob's key bits are a codeword; his side information goes public
        let bits = h.random_codeword(&mut rng);
        let side = md_encode(&y, &bits, 8)?;
        let llr = md_llr(&x, &side, snr)?;
        let raw = llr.iter().zip(&bits).filter(|(l, b)| (**l < 0.0) != (**b == 1)).count();
        let r = bp_decode(&h, &llr, 500);
        let left = r.bits.iter().zip(&bits).filter(|(a, b)| a != b).count();
        println!(
            "SNR {snr:.3}: {raw} raw bit errors, decoder converged {} after {} iterations, {left} errors left",
            r.converged, r.iterations
        );
    }
    Ok(())
}
