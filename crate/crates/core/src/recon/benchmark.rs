//! Monte-Carlo frame error rate of the reconciliation pipeline.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::bp::BpDecoder;
use super::md::{md_encode, md_llr};
use super::matrix::ParityMatrix;
use super::puncture::{efficiency, PuncturePlan};
use crate::error::{Error, Result};
use crate::random::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FerChannel {
    /// Correlated Gaussian pairs through the multidimensional mapping.
    Md { dim: usize },
    /// Binary-input AWGN with the same SNR.
    BiAwgn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerConfig {
    pub snr: f64,
    pub trials: usize,
    pub max_iter: usize,
    pub channel: FerChannel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FerResult {
    pub p: usize,
    pub rate: f64,
    pub beta: f64,
    pub trials: usize,
    pub failures: usize,
    pub fer: f64,
    pub mean_iterations: f64,
    pub channel: FerChannel,
}

/// LLRs for one frame: Bob's codeword `bits` observed by Alice at `snr`.
pub fn frame_llrs(bits: &[u8], plan: &PuncturePlan, snr: f64, channel: FerChannel, src: &RandomSource) -> Result<Vec<f64>> {
    let tx = plan.transmitted();
    let mut rng = src.rng();
    let mut llr = vec![0.0; bits.len()];
    match channel {
        FerChannel::BiAwgn => {
            let sd = (1.0 / snr).sqrt();
            for &i in &tx {
                let z: f64 = StandardNormal.sample(&mut rng);
                let r = 1.0 - 2.0 * bits[i as usize] as f64 + sd * z;
                llr[i as usize] = 2.0 * snr * r;
            }
        }
        FerChannel::Md { dim } => {
            if tx.len() % dim != 0 {
                return Err(Error::param("p", format!("{} transmitted bits do not fill {dim}-blocks", tx.len())));
            }
            let rho = (snr / (1.0 + snr)).sqrt();
            let side = (1.0 - rho * rho).sqrt();
            let mut y = Vec::with_capacity(tx.len());
            let mut x = Vec::with_capacity(tx.len());
            for _ in 0..tx.len() {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                y.push(a);
                x.push(rho * a + side * b);
            }
            let cb: Vec<u8> = tx.iter().map(|&i| bits[i as usize]).collect();
            let info = md_encode(&y, &cb, dim)?;
            for (&i, l) in tx.iter().zip(md_llr(&x, &info, snr)?) {
                llr[i as usize] = l;
            }
        }
    }
    Ok(llr)
}

pub fn fer_benchmark(h: &ParityMatrix, plan: &PuncturePlan, cfg: &FerConfig, src: &RandomSource) -> Result<FerResult> {
    if cfg.trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let outcomes: Vec<Result<(bool, usize)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let s = src.child("fer-trial", t as u64);
            let mut rng = s.child("codeword", 0).rng();
            let bits = h.random_codeword(&mut rng);
            let llr = frame_llrs(&bits, plan, cfg.snr, cfg.channel, &s.child("channel", 0))?;
            let r = BpDecoder::new(h).decode(&llr, cfg.max_iter);
            Ok((r.converged && r.bits == bits, r.iterations))
        })
        .collect();
    let mut failures = 0;
    let mut iters = 0;
    for o in outcomes {
        let (ok, it) = o?;
        failures += (!ok) as usize;
        iters += it;
    }
    Ok(FerResult {
        p: plan.p(),
        rate: plan.rate(),
        beta: efficiency(plan.p(), plan.k, plan.n, cfg.snr)?,
        trials: cfg.trials,
        failures,
        fer: failures as f64 / cfg.trials as f64,
        mean_iterations: iters as f64 / cfg.trials as f64,
        channel: cfg.channel,
    })
}
