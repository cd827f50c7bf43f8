//! Total noise of the link against the residual carrier left by the bias
//! controller.
//!
//! `cargo run --release --example carrier_suppression_sweep [-- frames]`

use cvqkd::experiment::{suppression_sweep, ExperimentConfig, SweepConfig};
use cvqkd::RandomSource;

fn main() -> cvqkd::Result<()> {
    let frames: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let mut cfg = ExperimentConfig::default();
    cfg.fig4 = SweepConfig { suppression_db: vec![9.0, 13.0, 17.0, 21.0, 25.0], frames };
    let (rows, _) = suppression_sweep(&cfg, 1.0, &RandomSource::from_u64(5))?;
    println!("{:>8} {:>12} {:>10}", "CS/dB", "t+u/mPNU", "std");
    for r in rows {
        println!("{:>8} {:>12.2} {:>10.2}", r.suppression_db, r.total_noise_mean, r.total_noise_std);
    }
    Ok(())
}
