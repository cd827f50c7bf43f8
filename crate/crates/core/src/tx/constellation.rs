//! Discrete Gaussian constellation by inversion sampling.

use num_complex::Complex64;
use rand::Rng;
use rand::seq::index::sample;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::buffer::SymbolFrame;
use crate::error::{Error, Result};
use crate::random::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianConstellation {
    pub bits: u32,
    pub coverage_sigmas: f64,
    pub target_variance: f64,
    levels: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GaussianConstellation {
    /// `2^bits` equal-width bins over `±coverage_sigmas`, each carrying the
    /// Gaussian mass of its bin at its midpoint. Levels are scaled so the
    /// discrete variance equals `target_variance`.
    pub fn new(bits: u32, coverage_sigmas: f64, target_variance: f64) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::param("bits", format!("{bits}")));
        }
        if !(coverage_sigmas > 0.0) || !(target_variance > 0.0) {
            return Err(Error::param("constellation", "coverage and variance must be positive"));
        }
        let m = 1usize << bits;
        let w = 2.0 * coverage_sigmas / m as f64;
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        let mids: Vec<f64> = (0..m).map(|i| -coverage_sigmas + (i as f64 + 0.5) * w).collect();
        let mut p: Vec<f64> = mids.iter().map(|&x| std.cdf(x + w / 2.0) - std.cdf(x - w / 2.0)).collect();
        let total: f64 = p.iter().sum();
        for v in p.iter_mut() {
            *v /= total;
        }
        // symmetric by construction; keep it exact in floating point
        for i in 0..m / 2 {
            p[m - 1 - i] = p[i];
        }
        let var_unit: f64 = mids.iter().zip(&p).map(|(x, q)| q * x * x).sum();
        let scale = (target_variance / var_unit).sqrt();
        let levels = mids.iter().map(|x| x * scale).collect();
        let mut cumulative = vec![0.0; m];
        let mut acc = 0.0;
        for i in 0..m / 2 {
            acc += p[i];
            cumulative[i] = acc;
        }
        for i in 0..m / 2 {
            cumulative[m - 2 - i] = 1.0 - cumulative[i];
        }
        cumulative[m - 1] = 1.0;
        if m >= 2 {
            cumulative[m / 2 - 1] = 0.5;
        }
        Ok(GaussianConstellation { bits, coverage_sigmas, target_variance, levels, cumulative })
    }

    pub fn paper_default(target_variance: f64) -> Self {
        Self::new(6, 3.5, target_variance).expect("valid defaults")
    }

    pub fn offset(&self) -> i32 {
        1 << (self.bits - 1)
    }

    pub fn level(&self, label: i32) -> f64 {
        self.levels[(label + self.offset()) as usize]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn variance(&self) -> f64 {
        self.levels.iter().zip(self.probabilities()).map(|(x, p)| p * x * x).sum()
    }

    /// Label for a uniform draw in [0, 1).
    pub fn label_for(&self, u: f64) -> i32 {
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.levels.len() - 1);
        idx as i32 - self.offset()
    }
}

/// Gaussian integer labels from 32-bit uniform words.
pub fn inversion_sample(src: &RandomSource, c: &GaussianConstellation, n: usize) -> Vec<i32> {
    let mut rng = src.rng();
    (0..n)
        .map(|_| {
            let w: u32 = rng.random();
            c.label_for(w as f64 / 4294967296.0)
        })
        .collect()
}

/// Complex symbols with independently drawn I and Q labels.
pub fn build_symbols(src: &RandomSource, c: &GaussianConstellation, n: usize, baud: f64) -> Result<SymbolFrame> {
    let li = inversion_sample(&src.child("I", 0), c, n);
    let lq = inversion_sample(&src.child("Q", 0), c, n);
    let symbols = li.iter().zip(&lq).map(|(&i, &q)| Complex64::new(c.level(i), c.level(q))).collect();
    SymbolFrame::new(symbols, baud)
}

/// Marks `round(fraction * len)` positions, uniformly without replacement.
pub fn mark_references(frame: &mut SymbolFrame, fraction: f64, src: &RandomSource) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::param("reference_fraction", format!("{fraction}")));
    }
    let n = frame.len();
    let k = ((fraction * n as f64).round() as usize).min(n);
    frame.reference_mask = vec![false; n];
    for i in sample(&mut src.rng(), n, k) {
        frame.reference_mask[i] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_and_centre() {
        let c = GaussianConstellation::paper_default(1.0);
        assert_eq!(c.label_for(0.0), -32);
        assert_eq!(c.label_for(1e-300), -32);
        assert_eq!(c.label_for(0.5), 0);
        assert_eq!(c.label_for(1.0 - 1e-16), 31);
        assert!((c.level(0) + c.level(-1)).abs() < 1e-15);
    }

    #[test]
    fn variance_is_target() {
        let c = GaussianConstellation::paper_default(2.5);
        assert!((c.variance() / 2.5 - 1.0).abs() < 1e-12);
        let labels = inversion_sample(&RandomSource::from_u64(9), &c, 200_000);
        let var = labels.iter().map(|&l| c.level(l).powi(2)).sum::<f64>() / labels.len() as f64;
        assert!((var / 2.5 - 1.0).abs() < 0.01);
    }
}
