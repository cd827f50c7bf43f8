//! Rate adaptation by puncturing, and reconciliation efficiency.

use rand::seq::index::sample;

use super::matrix::ParityMatrix;
use crate::error::{Error, Result};
use crate::random::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct PuncturePlan {
    pub n: usize,
    pub k: usize,
    /// Sorted punctured positions.
    pub positions: Vec<u32>,
}

impl PuncturePlan {
    pub fn p(&self) -> usize {
        self.positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / (self.n - self.p()) as f64
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.positions {
            m[i as usize] = true;
        }
        m
    }

    /// Positions that are transmitted, in increasing order.
    pub fn transmitted(&self) -> Vec<u32> {
        let m = self.mask();
        (0..self.n as u32).filter(|&i| !m[i as usize]).collect()
    }
}

/// Puncture `p` positions drawn uniformly from the degree-one variables,
/// which are the only population large enough for the rates of interest.
pub fn plan_puncturing(h: &ParityMatrix, p: usize, src: &RandomSource) -> Result<PuncturePlan> {
    if p >= h.n.saturating_sub(h.k) {
        return Err(Error::param("p", format!("{p} must be below n - k = {}", h.n - h.k)));
    }
    let pool: Vec<u32> = (0..h.n as u32).filter(|&v| h.var_degree(v as usize) == 1).collect();
    if p > pool.len() {
        return Err(Error::param("p", format!("only {} degree-one positions available", pool.len())));
    }
    let mut rng = src.child("puncture", p as u64).rng();
    let mut positions: Vec<u32> = sample(&mut rng, pool.len(), p).into_iter().map(|i| pool[i]).collect();
    positions.sort_unstable();
    Ok(PuncturePlan { n: h.n, k: h.k, positions })
}

/// Binary-input AWGN capacity bound used for efficiency, `½log2(1+s)`.
pub fn awgn_capacity(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// `β = [k/(n−p)] / ½log2(1+snr)`.
pub fn efficiency(p: usize, k: usize, n: usize, snr: f64) -> Result<f64> {
    if p >= n {
        return Err(Error::param("p", format!("{p} must be below n = {n}")));
    }
    if !(snr > 0.0) {
        return Err(Error::param("snr", format!("{snr} must be positive")));
    }
    Ok(k as f64 / (n - p) as f64 / awgn_capacity(snr))
}
