//! Sampled waveforms and symbol frames.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniformly sampled sequence with its sample rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer<T> {
    pub samples: Vec<T>,
    pub rate: f64,
}

pub type RealBuffer = SampleBuffer<f64>;
pub type ComplexBuffer = SampleBuffer<Complex64>;

impl<T> SampleBuffer<T> {
    pub fn new(samples: Vec<T>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::param("rate", format!("{rate} Hz")));
        }
        Ok(SampleBuffer { samples, rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    /// Same rate, new samples.
    pub fn with_samples<U>(&self, samples: Vec<U>) -> SampleBuffer<U> {
        SampleBuffer { samples, rate: self.rate }
    }
}

impl RealBuffer {
    pub fn to_complex(&self) -> ComplexBuffer {
        self.with_samples(self.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }
}

impl ComplexBuffer {
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Complex symbols at the baud rate, plus a mask of the positions disclosed
/// for synchronisation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
    pub baud: f64,
    pub reference_mask: Vec<bool>,
}

impl SymbolFrame {
    pub fn new(symbols: Vec<Complex64>, baud: f64) -> Result<Self> {
        if !(baud.is_finite() && baud > 0.0) {
            return Err(Error::param("baud", format!("{baud}")));
        }
        let n = symbols.len();
        Ok(SymbolFrame { symbols, baud, reference_mask: vec![false; n] })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn reference_count(&self) -> usize {
        self.reference_mask.iter().filter(|&&m| m).count()
    }

    /// Sub-frame `[start, end)` keeping the mask aligned.
    pub fn slice(&self, start: usize, end: usize) -> SymbolFrame {
        SymbolFrame {
            symbols: self.symbols[start..end].to_vec(),
            baud: self.baud,
            reference_mask: self.reference_mask[start..end].to_vec(),
        }
    }

    /// Per-quadrature variance, averaged over I and Q, mean removed.
    pub fn quadrature_variance(&self) -> f64 {
        quadrature_variance(&self.symbols)
    }
}

pub fn quadrature_variance(xs: &[Complex64]) -> f64 {
    let n = xs.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = xs.iter().sum::<Complex64>() / n;
    xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (2.0 * (n - 1.0))
}
