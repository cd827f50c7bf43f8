use crate::buffer::SymbolFrame;
use crate::error::{Error, Result};

/// Normalised autocorrelation of the symbols, both quadratures pooled, means
/// removed. Entry `k` is lag `k`; entry 0 is 1.
pub fn autocorrelation(frame: &SymbolFrame, max_lag: usize) -> Result<Vec<f64>> {
    let n = frame.len();
    if n <= 10 * max_lag || n < 2 {
        return Err(Error::TooShort { needed: 10 * max_lag + 1, got: n });
    }
    let mean = frame.symbols.iter().sum::<num_complex::Complex64>() / n as f64;
    let x: Vec<_> = frame.symbols.iter().map(|z| z - mean).collect();
    let var = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    Ok((0..=max_lag)
        .map(|k| {
            let s: f64 = x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a.re * b.re + a.im * b.im).sum();
            s / (n - k) as f64 / var
        })
        .collect())
}
