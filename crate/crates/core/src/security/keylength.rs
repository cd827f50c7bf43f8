use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::estimation::NoiseBudget;
use super::holevo::{holevo_bound, mutual_information};
use crate::error::{Error, Result};
use crate::units::Pnu;

/// Security parameters and finite-size constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiniteSizeParams {
    pub eps_pe: f64,
    pub eps_smooth: f64,
    pub eps_pa: f64,
    pub eps_ir: f64,
    /// Bits per real symbol of Bob's discretised data entering the AEP term.
    pub aep_bits: u32,
    /// Fraction of sent symbols that end up in full reconciliation frames.
    pub usable_fraction: f64,
}

impl Default for FiniteSizeParams {
    fn default() -> Self {
        FiniteSizeParams {
            eps_pe: 1e-10,
            eps_smooth: 1e-10,
            eps_pa: 1e-10,
            eps_ir: 1e-12,
            aep_bits: 11,
            usable_fraction: 987_648_000.0 / 1e9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlockSize {
    /// Number of complex symbols sent.
    Finite(u64),
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyInputs {
    pub budget: NoiseBudget,
    pub beta: f64,
    pub fer: f64,
    pub block: BlockSize,
    pub finite: FiniteSizeParams,
}

impl KeyInputs {
    pub fn paper_defaults(block: BlockSize) -> Self {
        KeyInputs {
            budget: NoiseBudget::paper_operating_point(),
            beta: 0.9304,
            fer: 0.215,
            block,
            finite: FiniteSizeParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyAccounting {
    pub n_sent: Option<u64>,
    /// Complex symbols in frames that decoded.
    pub n_after_ir: Option<f64>,
    pub beta: f64,
    pub fer: f64,
    pub snr: f64,
    /// Bits per complex symbol.
    pub i_ab: f64,
    pub chi: f64,
    pub eta_wc: f64,
    pub u_wc: f64,
    pub delta_aep: f64,
    /// Before clamping at zero.
    pub raw_length: f64,
    pub key_length: u64,
    /// Secret bits per real symbol surviving reconciliation.
    pub key_fraction: f64,
}

fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(p)
}

/// Confidence-interval worst case of `η` and `u` from `n_pe` complex symbols
/// (two real samples each). `t`, `τ` and `Va` are trusted and unchanged.
pub fn worst_case_bounds(b: &NoiseBudget, n_pe: u64, eps_pe: f64) -> Result<NoiseBudget> {
    if n_pe == 0 {
        return Err(Error::param("n_pe", "zero"));
    }
    if !(eps_pe > 0.0 && eps_pe < 1.0) {
        return Err(Error::param("eps_pe", format!("{eps_pe}")));
    }
    let m = 2.0 * n_pe as f64;
    let z = normal_quantile(1.0 - eps_pe / 2.0);
    let n0 = 1.0 + b.t.value() + b.u.value();
    let g = (b.eta * b.tau).sqrt();
    let g_wc = g - z * (n0 / (m * b.va.value())).sqrt();
    if g_wc <= 0.0 {
        return Err(Error::Unphysical(format!("worst-case gain {g_wc} ≤ 0 for {n_pe} symbols")));
    }
    let n0_wc = n0 + z * n0 * (2.0 / m).sqrt();
    Ok(NoiseBudget {
        eta: g_wc * g_wc / b.tau,
        u: Pnu::new(n0_wc - 1.0 - b.t.value())?,
        ..*b
    })
}

fn delta_aep(f: &FiniteSizeParams, p_ec: f64) -> f64 {
    let d = f.aep_bits as f64;
    4.0 * (2f64.powf(d / 2.0) + 2.0).log2() * (18.0 / (p_ec * p_ec * f.eps_smooth.powi(4))).log2().sqrt()
}

pub fn composable_key_length(k: &KeyInputs) -> Result<KeyAccounting> {
    if !(0.0..1.0).contains(&k.fer) {
        return Err(Error::param("fer", format!("{}", k.fer)));
    }
    if !(k.beta > 0.0 && k.beta <= 1.0) {
        return Err(Error::param("beta", format!("{}", k.beta)));
    }
    let snr = k.budget.snr();
    let i_ab = mutual_information(snr).per_symbol;
    match k.block {
        BlockSize::Asymptotic => {
            let chi = holevo_bound(&k.budget)?;
            let per_symbol = k.beta * i_ab - chi;
            Ok(KeyAccounting {
                n_sent: None,
                n_after_ir: None,
                beta: k.beta,
                fer: k.fer,
                snr,
                i_ab,
                chi,
                eta_wc: k.budget.eta,
                u_wc: k.budget.u.value(),
                delta_aep: 0.0,
                raw_length: f64::INFINITY * per_symbol.signum(),
                key_length: 0,
                key_fraction: (per_symbol / 2.0).max(0.0),
            })
        }
        BlockSize::Finite(n) => {
            let f = &k.finite;
            let n_used = (n as f64 * f.usable_fraction).floor();
            if n_used < 1.0 {
                return Err(Error::param("n", "no usable symbols"));
            }
            let wc = worst_case_bounds(&k.budget, n_used as u64, f.eps_pe)?;
            let chi = holevo_bound(&wc)?;
            let p_ec = 1.0 - k.fer;
            let n_ok = n_used * p_ec;
            let n_real = 2.0 * n_ok;
            let daep = delta_aep(f, p_ec);
            let raw = n_ok * (k.beta * i_ab - chi) - n_real.sqrt() * daep
                + (p_ec * (1.0 - f.eps_smooth.powi(2) / 3.0)).log2()
                + 2.0 * (2f64.sqrt() * f.eps_pa).log2()
                - (1.0 / f.eps_ir).log2();
            let key_length = if raw > 0.0 { raw.floor() as u64 } else { 0 };
            Ok(KeyAccounting {
                n_sent: Some(n),
                n_after_ir: Some(n_ok),
                beta: k.beta,
                fer: k.fer,
                snr,
                i_ab,
                chi,
                eta_wc: wc.eta,
                u_wc: wc.u.value(),
                delta_aep: daep,
                raw_length: raw,
                key_length,
                key_fraction: key_length as f64 / n_real,
            })
        }
    }
}

/// Smallest block size with a positive key, searched in `log N` over
/// `[lo, hi]` to a relative precision of 10⁻³.
pub fn positive_key_onset(k: &KeyInputs, lo: u64, hi: u64) -> Result<u64> {
    let positive = |n: f64| -> Result<bool> {
        let mut kk = *k;
        kk.block = BlockSize::Finite(n.round() as u64);
        // too few symbols for a positive worst-case gain means no key either
        match composable_key_length(&kk) {
            Ok(a) => Ok(a.raw_length > 0.0),
            Err(Error::Unphysical(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !(lo >= 1 && hi > lo) {
        return Err(Error::param("range", format!("[{lo}, {hi}]")));
    }
    let (mut a, mut b) = ((lo as f64).ln(), (hi as f64).ln());
    if positive(a.exp())? {
        return Ok(lo);
    }
    if !positive(b.exp())? {
        return Err(Error::NoRoot(format!("no key up to N = {hi}")));
    }
    while b - a > 1e-3 {
        let mid = 0.5 * (a + b);
        if positive(mid.exp())? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b.exp().ceil() as u64)
}

/// Excess noise at which the key vanishes, by bisection over [0, 100] mPNU.
pub fn null_key_threshold(k: &KeyInputs) -> Result<Pnu> {
    let margin = |u: f64| -> Result<f64> {
        let mut kk = *k;
        kk.budget = kk.budget.with_u(u)?;
        let acc = composable_key_length(&kk)?;
        Ok(match k.block {
            BlockSize::Asymptotic => acc.beta * acc.i_ab - acc.chi,
            BlockSize::Finite(_) => acc.raw_length,
        })
    };
    let (mut lo, mut hi) = (0.0, 0.1);
    if margin(lo)? <= 0.0 {
        return Err(Error::NoRoot("no key even without excess noise".into()));
    }
    if margin(hi)? > 0.0 {
        return Err(Error::NoRoot("key still positive at 100 mPNU".into()));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if margin(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Pnu::new(0.5 * (lo + hi))
}
