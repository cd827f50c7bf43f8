//! Root-raised-cosine pulse shaping.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::buffer::{ComplexBuffer, SymbolFrame};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RrcFilter {
    pub rolloff: f64,
    pub span_symbols: usize,
    pub sps: usize,
    pub taps: Vec<f64>,
}

impl RrcFilter {
    /// Unit-energy taps, `span_symbols * sps + 1` long, peak in the middle.
    pub fn new(rolloff: f64, span_symbols: usize, sps: usize) -> Result<Self> {
        if !(rolloff > 0.0 && rolloff <= 1.0) {
            return Err(Error::param("rolloff", format!("{rolloff}")));
        }
        if span_symbols == 0 || sps == 0 {
            return Err(Error::param("rrc", "span and samples per symbol must be positive"));
        }
        let len = span_symbols * sps + 1;
        let mid = (len - 1) as f64 / 2.0;
        let b = rolloff;
        let mut taps: Vec<f64> = (0..len)
            .map(|i| {
                let t = (i as f64 - mid) / sps as f64;
                if t.abs() < 1e-12 {
                    1.0 + b * (4.0 / PI - 1.0)
                } else if (t.abs() - 1.0 / (4.0 * b)).abs() < 1e-9 {
                    b / 2f64.sqrt()
                        * ((1.0 + 2.0 / PI) * (PI / (4.0 * b)).sin() + (1.0 - 2.0 / PI) * (PI / (4.0 * b)).cos())
                } else {
                    ((PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos())
                        / (PI * t * (1.0 - (4.0 * b * t).powi(2)))
                }
            })
            .collect();
        let e: f64 = taps.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in taps.iter_mut() {
            *v /= e;
        }
        Ok(RrcFilter { rolloff, span_symbols, sps, taps })
    }

    pub fn delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }
}

/// Places symbols every `sps` samples and convolves with the pulse. Output has
/// `(n - 1) * sps + taps` samples; symbol `i` peaks at `i * sps + delay`.
pub fn upsample_shape(frame: &SymbolFrame, rrc: &RrcFilter, rate: f64) -> Result<ComplexBuffer> {
    let expect = frame.baud * rrc.sps as f64;
    if (expect - rate).abs() > 1e-6 * rate {
        return Err(Error::param("rate", format!("{rate} Hz is not baud * sps = {expect}")));
    }
    let n = frame.len();
    if n == 0 {
        return ComplexBuffer::new(Vec::new(), rate);
    }
    let sps = rrc.sps;
    let taps = &rrc.taps;
    let out_len = (n - 1) * sps + taps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    for (i, a) in frame.symbols.iter().enumerate() {
        let base = i * sps;
        for (j, h) in taps.iter().enumerate() {
            out[base + j] += a * h;
        }
    }
    ComplexBuffer::new(out, rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nyquist_zero_crossings() {
        // cascade of two RRC pulses is a raised cosine: zero at nonzero symbol lags
        let rrc = RrcFilter::new(0.2, 32, 50).unwrap();
        let rc = crate::spectrum::convolve_real(&rrc.taps, &rrc.taps);
        let centre = rc.len() / 2;
        assert!((rc[centre] - 1.0).abs() < 1e-6);
        for k in 1..10 {
            assert!(rc[centre + 50 * k].abs() < 2e-3, "lag {k}: {}", rc[centre + 50 * k]);
        }
    }
}
