use std::f64::consts::PI;

use num_complex::Complex64;

use crate::buffer::RealBuffer;
use crate::error::{Error, Result};
use crate::spectrum;

/// Zero-phase FIR that flattens the vacuum-noise spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningFilter {
    pub taps: Vec<f64>,
    pub rate: f64,
    pub source_frames: usize,
}

impl WhiteningFilter {
    pub fn apply(&self, trace: &RealBuffer) -> Result<RealBuffer> {
        if (trace.rate - self.rate).abs() > 1e-6 * self.rate {
            return Err(Error::param("rate", "trace rate differs from whitening design rate"));
        }
        let x: Vec<Complex64> = trace.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let y = spectrum::convolve_same(&x, &self.taps);
        Ok(trace.with_samples(y.into_iter().map(|c| c.re).collect()))
    }

    /// Magnitude response at `freq`.
    pub fn gain(&self, freq: f64) -> f64 {
        let w = 2.0 * PI * freq / self.rate;
        let c = (self.taps.len() - 1) as f64 / 2.0;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, h)| Complex64::from_polar(*h, -w * (n as f64 - c)))
            .sum::<Complex64>()
            .norm()
    }
}

/// Builds the filter from the averaged spectrum of vacuum traces. The result
/// gives unit variance per sample on vacuum input.
pub fn build_whitening(frames: &[RealBuffer], segment: usize) -> Result<WhiteningFilter> {
    let first = frames.first().ok_or_else(|| Error::param("frames", "no vacuum frames"))?;
    if segment < 16 || !segment.is_power_of_two() {
        return Err(Error::param("segment", format!("{segment} must be a power of two ≥ 16")));
    }
    let mut avg = vec![0.0; segment];
    for f in frames {
        if f.len() < segment {
            return Err(Error::TooShort { needed: segment, got: f.len() });
        }
        if (f.rate - first.rate).abs() > 1e-6 * first.rate {
            return Err(Error::param("frames", "mixed sample rates"));
        }
        let psd = spectrum::welch_real(&f.samples, f.rate, segment);
        for (a, p) in avg.iter_mut().zip(&psd.power) {
            *a += p / frames.len() as f64;
        }
    }
    // back to FFT order
    let half = segment / 2;
    let mut p = vec![0.0; segment];
    for (i, v) in avg.iter().enumerate() {
        p[(i + segment - half) % segment] = *v;
    }
    let mut sorted = p.clone();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[segment / 2] * 1e-4;
    let mut m: Vec<Complex64> = p
        .iter()
        .map(|&v| Complex64::new(1.0 / (segment as f64 * v.max(floor)).sqrt(), 0.0))
        .collect();
    spectrum::ifft(&mut m);
    let len = segment - 1;
    let c = (len - 1) / 2;
    let taps: Vec<f64> = (0..len)
        .map(|n| {
            let k = (n + segment - c) % segment;
            let w = 0.5 - 0.5 * (2.0 * PI * (n + 1) as f64 / (len + 1) as f64).cos();
            m[k].re * w
        })
        .collect();
    // window shaves the mainlobe slightly; restore unit output variance
    let mut filt = WhiteningFilter { taps, rate: first.rate, source_frames: frames.len() };
    let out_var: f64 = (0..segment)
        .map(|k| {
            let f = spectrum::bin_frequency(k, segment, first.rate);
            filt.gain(f).powi(2) * p[k]
        })
        .sum();
    let s = 1.0 / out_var.sqrt();
    for t in filt.taps.iter_mut() {
        *t *= s;
    }
    Ok(filt)
}
