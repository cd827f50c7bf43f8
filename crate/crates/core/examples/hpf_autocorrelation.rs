//! Autocorrelation of Bob's recovered symbols for 1st, 3rd and 5th order
//! high-pass filters at 190 kHz.
//!
//! `cargo run --release --example hpf_autocorrelation [-- scale]`

use cvqkd::experiment::{acf_study, ExperimentConfig};
use cvqkd::RandomSource;

fn main() -> cvqkd::Result<()> {
    let scale: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let cfg = ExperimentConfig::default();
    let (rows, summary) = acf_study(&cfg, scale, &RandomSource::from_u64(4))?;
    println!("{:>4} {:>10} {:>10} {:>10}", "lag", "order 1", "order 3", "order 5");
    for lag in 1..=8 {
        let at = |o| rows.iter().find(|r| r.order == o && r.lag == lag).map(|r| r.acf_mean).unwrap_or(f64::NAN);
        println!("{lag:>4} {:>10.4} {:>10.4} {:>10.4}", at(1), at(3), at(5));
    }
    for s in summary {
        println!("order {}: min over lags 1..5 {:.4}, max |acf| {:.4}", s.order, s.min_acf_lag_1_5, s.max_abs_acf);
    }
    Ok(())
}
