//! Reconciliation efficiency against the number of punctured bits, closed
//! form for the full code and measured FER on a short code.
//!
//! `cargo run --release --example puncturing_efficiency`

use cvqkd::experiment::efficiency_table;
use cvqkd::recon::{construct_matrix, fer_benchmark, plan_puncturing, FerChannel, FerConfig, MetEnsemble};
use cvqkd::RandomSource;

fn main() -> cvqkd::Result<()> {
    let snr = 0.0443;
    let ps = [0, 318_000, 320_000, 325_000, 330_000, 335_000, 340_000, 345_000];
    println!("{:>8} {:>8} {:>8}", "p", "R_punc", "beta/%");
    for r in efficiency_table(20_480, 1_024_000, &ps, snr)? {
        println!("{:>8} {:>8.4} {:>8.2}", r.p, r.rate_punctured, 100.0 * r.beta);
    }

    // the same fractions on a code 100 times shorter
    let h = construct_matrix(&MetEnsemble::rate_002(), 10_240, &RandomSource::from_u64(6))?;
    let cfg = FerConfig { snr, trials: 40, max_iter: 500, channel: FerChannel::Md { dim: 8 } };
    println!("\nn = {}, k = {}", h.n, h.k);
    for p in [0, 3_180, 3_300, 3_450] {
        let plan = plan_puncturing(&h, p, &RandomSource::from_u64(7))?;
        let r = fer_benchmark(&h, &plan, &cfg, &RandomSource::from_u64(8))?;
        println!("p {p:>5}: beta {:.2}%, FER {:.3}, mean iterations {:.0}", 100.0 * r.beta, r.fer, r.mean_iterations);
    }
    Ok(())
}
