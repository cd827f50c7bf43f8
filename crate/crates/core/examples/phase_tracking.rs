//! Unscented Kalman tracking of a laser phase random walk from a noisy
//! pilot, compared with the steady-state Riccati variance.
//!
//! `cargo run --release --example phase_tracking`

use cvqkd::rx::{ukf_phase_track, UkfConfig};
use cvqkd::{ComplexBuffer, RandomSource};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

fn main() -> cvqkd::Result<()> {
    let rate = 20e6;
    let n = 400_000;
    let mut rng = RandomSource::from_u64(3).rng();
    println!("{:>10} {:>8} {:>12} {:>12}", "linewidth", "SNR/dB", "residual", "Riccati");
    for linewidth in [200.0, 2e3, 20e3] {
        let step = Normal::new(0.0, (2.0 * std::f64::consts::PI * linewidth / rate).sqrt()).unwrap();
        let mut theta = 0.0;
        let phase: Vec<f64> = (0..n)
            .map(|_| {
                theta += step.sample(&mut rng);
                theta
            })
            .collect();
        for snr_db in [20.0, 30.0] {
            let r = 10f64.powf(-snr_db / 10.0);
            let noise = Normal::new(0.0, (r / 2.0).sqrt()).unwrap();
            let pilot: Vec<Complex64> =
                phase.iter().map(|&t| Complex64::from_polar(1.0, t) + Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng))).collect();
            let cfg = UkfConfig::for_linewidth(linewidth, rate, r / 2.0);
            let track = ukf_phase_track(&ComplexBuffer::new(pilot, rate)?, &cfg)?;
            let tail = n / 2;
            let resid = track.phases[tail..].iter().zip(&phase[tail..]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (n - tail) as f64;
            println!("{linewidth:>10} {snr_db:>8} {resid:>12.3e} {:>12.3e}", cfg.steady_state_var(1.0));
        }
    }
    Ok(())
}
