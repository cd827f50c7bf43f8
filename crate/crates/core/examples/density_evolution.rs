//! Decoding thresholds of the regular (3,6) ensemble and the rate-0.02
//! multi-edge ensemble, quantised engine against the Gaussian approximation.
//!
//! `cargo run --release --example density_evolution [-- --quick]`

use std::time::Instant;

use cvqkd::recon::{
    awgn_capacity, density_evolution, threshold_search, DeConfig, DeEngine, MetEnsemble,
};

fn main() -> cvqkd::Result<()> {
    let quick = std::env::args().any(|a| a == "--quick");
    let cfg = DeConfig::default();

    let reg = MetEnsemble::regular(3, 6)?;
    for engine in [DeEngine::Gaussian, DeEngine::Quantized] {
        let t = Instant::now();
        let th = threshold_search(&reg, &cfg, engine, (0.80, 0.95), 1e-3)?;
        println!("(3,6) {engine:?}: sigma* {:.4} ({} runs, {:.1?})", th.sigma, th.evaluations, t.elapsed());
    }

    let met = MetEnsemble::rate_002();
    println!("\nrate-0.02 ensemble, design rate {:.6}", met.rate());
    for sigma in [5.80, 6.05] {
        let t = Instant::now();
        let r = density_evolution(&met, sigma, &cfg)?;
        println!(
            "sigma {sigma:.2}: converged {} after {} iterations, error {:.2e} ({:.1?})",
            r.converged,
            r.iterations,
            r.final_error,
            t.elapsed()
        );
    }
    if quick {
        return Ok(());
    }
    let ga = threshold_search(&met, &cfg, DeEngine::Gaussian, (5.5, 6.5), 1e-3)?;
    println!("Gaussian approximation: sigma* {:.3}", ga.sigma);
    // the coarse grid biases the multi-edge threshold upward; the fine one
    // takes a few minutes per evaluation near threshold
    let t = Instant::now();
    let th = threshold_search(&met, &DeConfig::fine(), DeEngine::Quantized, (ga.sigma - 0.15, ga.sigma + 0.15), 1e-3)?;
    let s = th.sigma;
    let snr = 1.0 / (s * s);
    println!(
        "quantised: sigma* {s:.3}  SNR {:.2} dB  efficiency {:.1}%  ({} runs, {:.1?})",
        10.0 * snr.log10(),
        100.0 * met.rate() / awgn_capacity(snr),
        th.evaluations,
        t.elapsed()
    );
    Ok(())
}
