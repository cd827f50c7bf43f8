use std::f64::consts::PI;

use num_complex::Complex64;

use crate::buffer::{ComplexBuffer, RealBuffer};
use crate::error::{Error, Result};
use crate::spectrum;

/// Required ratio of the pilot line over the median bin in the search band.
pub const MIN_LINE_DB: f64 = 20.0;

/// Frequency of the pilot line inside `band` (Hz, positive frequencies of the
/// real trace). Coarse FFT peak, then a straight-line fit to the unwrapped
/// phase of the line isolated within ±`refine_hz`.
pub fn estimate_pilot_frequency(trace: &RealBuffer, band: (f64, f64), refine_hz: f64) -> Result<f64> {
    let n = trace.len();
    if n < 1024 {
        return Err(Error::TooShort { needed: 1024, got: n });
    }
    let rate = trace.rate;
    let mut spec: Vec<Complex64> = trace.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spectrum::fft(&mut spec);
    let bins: Vec<usize> = (0..n / 2)
        .filter(|&k| {
            let f = k as f64 * rate / n as f64;
            f >= band.0 && f <= band.1
        })
        .collect();
    if bins.len() < 8 {
        return Err(Error::param("band", "search band holds fewer than 8 bins"));
    }
    let mut powers: Vec<f64> = bins.iter().map(|&k| spec[k].norm_sqr()).collect();
    let (imax, pmax) = powers.iter().enumerate().fold((0, 0.0), |(bi, bp), (i, &p)| if p > bp { (i, p) } else { (bi, bp) });
    let kpeak = bins[imax];
    powers.sort_by(f64::total_cmp);
    let median = powers[powers.len() / 2].max(f64::MIN_POSITIVE);
    let ratio_db = 10.0 * (pmax / median).log10();
    if ratio_db < MIN_LINE_DB {
        return Err(Error::NoPilot(ratio_db));
    }
    let fpeak = kpeak as f64 * rate / n as f64;
    for (k, s) in spec.iter_mut().enumerate() {
        let f = spectrum::bin_frequency(k, n, rate);
        if (f - fpeak).abs() > refine_hz {
            *s = Complex64::new(0.0, 0.0);
        }
    }
    spectrum::ifft(&mut spec);
    let phase = unwrap(spec.iter().map(|z| z.arg()));
    // edges carry the brick-wall transients
    let lo = n / 10;
    let hi = n - n / 10;
    Ok(slope(&phase[lo..hi]) * rate / (2.0 * PI))
}

/// Measured pilot frequency minus its nominal value.
pub fn estimate_freq_offset(trace: &RealBuffer, band: (f64, f64), pilot_nominal_hz: f64) -> Result<f64> {
    Ok(estimate_pilot_frequency(trace, band, 1e6)? - pilot_nominal_hz)
}

pub fn unwrap(phases: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = Vec::new();
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for p in phases {
        if let Some(q) = prev {
            let d = p - q;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

/// Least-squares slope against sample index.
fn slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Multiplies by `exp(-j 2π f t)`.
pub fn downconvert(buffer: &ComplexBuffer, freq_hz: f64) -> ComplexBuffer {
    let w = -2.0 * PI * freq_hz / buffer.rate;
    let samples = buffer
        .samples
        .iter()
        .enumerate()
        .map(|(n, z)| z * Complex64::from_polar(1.0, w * n as f64))
        .collect();
    buffer.with_samples(samples)
}

/// Complex baseband view of a real trace: analytic signal over √2.
pub fn to_complex(trace: &RealBuffer) -> ComplexBuffer {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    trace.with_samples(spectrum::analytic_signal(&trace.samples).into_iter().map(|z| z * s).collect())
}
