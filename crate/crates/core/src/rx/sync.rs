//! Frame synchronisation by cross-correlation on reference symbols.

use num_complex::Complex64;

use crate::buffer::{ComplexBuffer, SymbolFrame};
use crate::error::{Error, Result};
use crate::spectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    /// `received[i + lag]` lines up with `reference[i]`.
    pub lag: isize,
    pub peak_correlation: f64,
    pub second_peak: f64,
}

/// Normalised correlation magnitude for every lag in `[-max_lag, max_lag]`.
fn correlation_curve(received: &[Complex64], reference: &SymbolFrame, max_lag: usize) -> Vec<(isize, f64)> {
    let na = reference.len();
    let nb = received.len();
    let len = (na + nb).next_power_of_two();
    let use_all = reference.reference_count() == 0;
    let mask: Vec<f64> = reference.reference_mask.iter().map(|&m| if m || use_all { 1.0 } else { 0.0 }).collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut fa = vec![zero; len];
    let mut fm = vec![zero; len];
    let mut fma = vec![zero; len];
    for i in 0..na {
        fa[i] = reference.symbols[i] * mask[i];
        fm[i] = Complex64::new(mask[i], 0.0);
        fma[i] = Complex64::new(mask[i] * reference.symbols[i].norm_sqr(), 0.0);
    }
    let mut fb = vec![zero; len];
    let mut fb2 = vec![zero; len];
    let mut fones = vec![zero; len];
    for i in 0..nb {
        fb[i] = received[i];
        fb2[i] = Complex64::new(received[i].norm_sqr(), 0.0);
        fones[i] = Complex64::new(1.0, 0.0);
    }
    for v in [&mut fa, &mut fm, &mut fma, &mut fb, &mut fb2, &mut fones] {
        spectrum::fft(v);
    }
    let xcorr = |x: &[Complex64], y: &[Complex64]| {
        let mut out: Vec<Complex64> = x.iter().zip(y).map(|(a, b)| a.conj() * b).collect();
        spectrum::ifft(&mut out);
        out
    };
    let c = xcorr(&fa, &fb);
    let eb = xcorr(&fm, &fb2);
    let ea = xcorr(&fma, &fones);
    let cnt = xcorr(&fm, &fones);
    let total = mask.iter().sum::<f64>();
    let mut out = Vec::new();
    let max_lag = max_lag as isize;
    for lag in -max_lag..=max_lag {
        if lag <= -(na as isize) || lag >= nb as isize {
            continue;
        }
        let k = lag.rem_euclid(len as isize) as usize;
        if cnt[k].re < 0.5 * total - 0.5 {
            continue;
        }
        let den = (ea[k].re.max(0.0) * eb[k].re.max(0.0)).sqrt();
        let v = if den > 0.0 { c[k].norm() / den } else { 0.0 };
        out.push((lag, v));
    }
    out
}

pub fn synchronize(received: &SymbolFrame, reference: &SymbolFrame, max_lag: usize) -> Result<SyncResult> {
    let curve = correlation_curve(&received.symbols, reference, max_lag);
    pick(&curve)
}

fn pick(curve: &[(isize, f64)]) -> Result<SyncResult> {
    if curve.len() < 2 {
        return Err(Error::param("max_lag", "fewer than two admissible lags"));
    }
    let (lag, peak) = curve.iter().copied().fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
    let second = curve.iter().filter(|c| c.0 != lag).map(|c| c.1).fold(0.0, f64::max);
    if (second / peak).powi(2) >= 0.5 {
        return Err(Error::AmbiguousSync { peak, second });
    }
    Ok(SyncResult { lag, peak_correlation: peak, second_peak: second })
}

/// Symbol timing on a matched-filter output: searches all `sps` sampling
/// phases and symbol lags up to `max_lag`. The returned lag is the sample
/// index of reference symbol 0.
pub fn acquire_timing(mf: &ComplexBuffer, reference: &SymbolFrame, sps: usize, max_lag: usize) -> Result<SyncResult> {
    acquire_timing_at(mf, reference, sps, max_lag, 0..sps)
}

/// As [`acquire_timing`], restricted to the given sampling phases.
pub fn acquire_timing_at(
    mf: &ComplexBuffer,
    reference: &SymbolFrame,
    sps: usize,
    max_lag: usize,
    phases: impl IntoIterator<Item = usize>,
) -> Result<SyncResult> {
    let mut best: Option<(usize, Vec<(isize, f64)>, f64)> = None;
    for phase in phases {
        if phase >= sps {
            return Err(Error::param("phase", format!("{phase} not below {sps} samples per symbol")));
        }
        let syms: Vec<Complex64> = mf.samples.iter().skip(phase).step_by(sps).copied().collect();
        let curve = correlation_curve(&syms, reference, max_lag);
        let peak = curve.iter().map(|c| c.1).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| peak > b.2) {
            best = Some((phase, curve, peak));
        }
    }
    let (phase, curve, _) = best.ok_or_else(|| Error::param("sps", "zero"))?;
    let r = pick(&curve)?;
    let lag = r.lag * sps as isize + phase as isize;
    Ok(SyncResult { lag, ..r })
}
