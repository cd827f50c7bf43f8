//! Composable key fraction of the 20 km run and its dependence on block size.
//!
//! `cargo run --release --example composable_key`

use cvqkd::security::{
    composable_key_length, holevo_bound, null_key_threshold, BlockSize, KeyInputs, NoiseBudget,
};

fn main() -> cvqkd::Result<()> {
    let b = NoiseBudget::paper_operating_point();
    println!("SNR {:.4}  chi {:.5} bit/symbol", b.snr(), holevo_bound(&b)?);

    let at = composable_key_length(&KeyInputs::paper_defaults(BlockSize::Finite(1_000_000_000)))?;
    println!(
        "N = 1e9: I_AB {:.5}, chi_wc {:.5}, u_wc {:.3} mPNU, key {} bits, fraction {:.5}",
        at.i_ab,
        at.chi,
        at.u_wc * 1e3,
        at.key_length,
        at.key_fraction
    );

    println!("\n{:>12} {:>12} {:>14}", "N", "fraction", "threshold/mPNU");
    for exp in [8.0, 8.25, 8.5, 8.75, 9.0, 9.5, 10.0, 11.0] {
        let n = 10f64.powf(exp) as u64;
        let k = KeyInputs::paper_defaults(BlockSize::Finite(n));
        let f = composable_key_length(&k)?.key_fraction;
        let th = null_key_threshold(&k).map(|p| p.mpnu()).unwrap_or(f64::NAN);
        println!("{n:>12} {f:>12.5} {th:>14.3}");
    }
    let asym = KeyInputs::paper_defaults(BlockSize::Asymptotic);
    println!(
        "{:>12} {:>12.5} {:>14.3}",
        "asymptotic",
        composable_key_length(&asym)?.key_fraction,
        null_key_threshold(&asym)?.mpnu()
    );
    Ok(())
}
