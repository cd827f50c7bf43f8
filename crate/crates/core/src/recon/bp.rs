//! Flooding sum-product decoding.

use super::matrix::ParityMatrix;

/// Message clamp, keeps `tanh` away from exactly one.
pub const LLR_CLAMP: f64 = 38.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Reusable decoder state for one matrix.
pub struct BpDecoder<'a> {
    h: &'a ParityMatrix,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    total: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(h: &'a ParityMatrix) -> Self {
        BpDecoder { h, c2v: vec![0.0; h.edges()], v2c: vec![0.0; h.edges()], total: vec![0.0; h.n], scratch: Vec::new() }
    }

    /// Decode channel LLRs (positive favours bit 0).
    pub fn decode(&mut self, llr: &[f64], max_iter: usize) -> DecodeResult {
        let h = self.h;
        assert_eq!(llr.len(), h.n, "one LLR per code bit");
        self.c2v.iter_mut().for_each(|x| *x = 0.0);
        let mut bits = vec![0u8; h.n];
        for (e, m) in self.v2c.iter_mut().enumerate() {
            *m = llr[h.edge_var[e] as usize];
        }
        for it in 1..=max_iter {
            self.check_update();
            self.var_update(llr);
            for (b, &t) in bits.iter_mut().zip(&self.total) {
                *b = (t < 0.0) as u8;
            }
            if h.syndrome_ok(&bits) {
                return DecodeResult { bits, converged: true, iterations: it };
            }
        }
        DecodeResult { bits, converged: false, iterations: max_iter }
    }

    fn check_update(&mut self) {
        let h = self.h;
        for c in 0..h.m {
            let r = h.check_range(c);
            let d = r.len();
            self.scratch.clear();
            self.scratch.extend(self.v2c[r.clone()].iter().map(|&x| (0.5 * x).tanh()));
            // exclusive products by a forward and a backward sweep
            let mut fwd = 1.0;
            for i in 0..d {
                self.c2v[r.start + i] = fwd;
                fwd *= self.scratch[i];
            }
            let mut bwd = 1.0;
            for i in (0..d).rev() {
                let p = (self.c2v[r.start + i] * bwd).clamp(-1.0 + 1e-16, 1.0 - 1e-16);
                self.c2v[r.start + i] = (2.0 * p.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
                bwd *= self.scratch[i];
            }
        }
    }

    fn var_update(&mut self, llr: &[f64]) {
        let h = self.h;
        for v in 0..h.n {
            let r = h.var_range(v);
            let mut t = llr[v];
            for &e in &h.var_edges[r.clone()] {
                t += self.c2v[e as usize];
            }
            self.total[v] = t;
            for &e in &h.var_edges[r] {
                let e = e as usize;
                self.v2c[e] = (t - self.c2v[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
    }
}

pub fn bp_decode(h: &ParityMatrix, llr: &[f64], max_iter: usize) -> DecodeResult {
    BpDecoder::new(h).decode(llr, max_iter)
}
