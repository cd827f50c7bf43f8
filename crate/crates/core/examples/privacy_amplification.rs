//! Toeplitz hashing of a reconciled key, fast path against the dense product.
//!
//! `cargo run --release --example privacy_amplification`

use std::time::Instant;

use cvqkd::pa::{derive_seed, pack_bits, toeplitz_hash, toeplitz_hash_dense};
use cvqkd::RandomSource;
use rand::Rng;

fn main() -> cvqkd::Result<()> {
    let mut rng = RandomSource::from_u64(11).rng();
    for (nin, nout) in [(1 << 12, 1 << 10), (1 << 15, 1 << 13), (1 << 20, 1 << 18)] {
        let x: Vec<u8> = (0..nin).map(|_| rng.random::<bool>() as u8).collect();
        let seed = derive_seed(&RandomSource::from_u64(12), nin, nout)?;
        let t = Instant::now();
        let fast = toeplitz_hash(&x, &seed)?;
        let tf = t.elapsed();
        let check = if nin * nout <= 1 << 30 {
            let t = Instant::now();
            let dense = toeplitz_hash_dense(&x, &seed)?;
            format!("dense {:.1?}, equal {}", t.elapsed(), dense == fast)
        } else {
            "dense skipped".into()
        };
        let ones = fast.iter().filter(|&&b| b == 1).count();
        println!("{nin:>8} → {nout:>7}: fast {tf:.1?}, {check}, ones {:.4}, {} bytes", ones as f64 / nout as f64, pack_bits(&fast).len());
    }
    Ok(())
}
