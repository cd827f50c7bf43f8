//! One transmitter frame: Gaussian symbols, RRC shaping, high-pass, pilot
//! and DAC, with the spectrum of the drive signal.
//!
//! `cargo run --release --example alice_waveform`

use cvqkd::spectrum::welch;
use cvqkd::tx::{alice_frame, TxConfig};
use cvqkd::RandomSource;
use num_complex::Complex64;

fn main() -> cvqkd::Result<()> {
    let tx = TxConfig::default();
    let a = alice_frame(&tx, 20_000, &RandomSource::from_u64(2))?;
    let s = &a.symbols;
    println!(
        "{} symbols at {} MBd, per-quadrature variance {:.4}, {} reference symbols",
        s.len(),
        tx.baud / 1e6,
        s.quadrature_variance(),
        s.reference_count()
    );
    println!("pilot amplitude {:.4}, DAC clip fraction {:.2e}", a.pilot_amplitude, a.drive.clip_fraction);
    if a.drive.clipping_warning {
        println!("warning: DAC clipping above threshold");
    }

    let drive: Vec<Complex64> = a.drive.i.samples.iter().zip(&a.drive.q.samples).map(|(&i, &q)| Complex64::new(i, q)).collect();
    let psd = welch(&drive, tx.rate, 1 << 14);
    let total = psd.total();
    let half = tx.quantum_half_bandwidth();
    let bands = [
        ("quantum band", -half, half),
        ("pilot", tx.pilot.freq_hz - 1e6, tx.pilot.freq_hz + 1e6),
        ("between", half + 2e6, tx.pilot.freq_hz - 2e6),
        ("above pilot", tx.pilot.freq_hz + 2e6, 400e6),
    ];
    for (name, lo, hi) in bands {
        println!("{name:>13}: {:7.2} dB of total", 10.0 * (psd.band_power(lo, hi) / total).log10());
    }
    Ok(())
}
