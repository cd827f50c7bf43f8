//! Image-band power of the baseband IQ scheme against optical single
//! sideband with an imperfect sideband suppression.
//!
//! `cargo run --release --example iq_leakage`

use cvqkd::optics::{baseband_approx, ossb_approx, sideband_leakage, IqModulatorParams};
use cvqkd::tx::{alice_frame, TxConfig};
use cvqkd::RandomSource;

fn main() -> cvqkd::Result<()> {
    let tx = TxConfig { hpf: None, ..TxConfig::default() };
    let alice = alice_frame(&tx, 1 << 12, &RandomSource::from_u64(1))?;
    let q = &alice.quantum;
    let i = q.with_samples(q.samples.iter().map(|z| z.re).collect());
    let qq = q.with_samples(q.samples.iter().map(|z| z.im).collect());
    let half = tx.quantum_half_bandwidth();

    // bias drift moves the carrier but never opens an image band
    for (phi1, phi2) in [(0.0, 0.0), (0.05, -0.03), (0.2, 0.1)] {
        let p = IqModulatorParams::dark_fringe(3.5, 3.0).with_bias_phases(phi1, phi2);
        let out = baseband_approx(&i, &qq, &p)?;
        // where a 100 MHz subcarrier would put its image
        let leak = sideband_leakage(&out, (-half, half), (200e6 - half, 200e6 + half))?;
        println!("baseband, bias ({phi1:+.2}, {phi2:+.2}) rad: image {:.1} dB", leak.0);
    }

    println!("\n{:>8} {:>12} {:>12}", "delta/mu", "image/dB", "20log10");
    let rf = 100e6;
    for r in [0.0, 0.01, 0.03, 0.1, 0.3] {
        let mut p = IqModulatorParams::dark_fringe(3.5, 3.0);
        p.delta_sideband = r * p.mu1;
        let out = ossb_approx(q, &p, rf);
        let leak = sideband_leakage(&out, (-rf - half, -rf + half), (rf - half, rf + half))?;
        println!("{r:>8.2} {:>12.2} {:>12.2}", leak.0, 20.0 * f64::log10(r));
    }
    Ok(())
}
