//! Density evolution for MET ensembles on the binary-input AWGN channel.
//!
//! The reference engine tracks quantised LLR densities on a uniform grid.
//! Check nodes combine pairs of densities through an exact magnitude/sign
//! table whose outputs are split between the two neighbouring bins so the
//! mean magnitude is kept. Variable nodes convolve with FFTs and saturate at
//! the grid edge after every convolution, as a clamped decoder would.
//! A Gaussian-approximation engine gives a fast estimate used to bracket the
//! threshold search.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use super::ensemble::MetEnsemble;
use crate::error::{Error, Result};
use crate::spectrum::{fft, ifft};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    pub bin_width: f64,
    pub max_llr: f64,
    pub max_iterations: usize,
    pub target_error: f64,
    /// Iterations over which a relative improvement below `stall_tolerance`
    /// counts as a fixed point.
    pub stall_window: usize,
    pub stall_tolerance: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            bin_width: 1.0 / 16.0,
            max_llr: 30.0,
            max_iterations: 4000,
            target_error: 1e-10,
            stall_window: 50,
            stall_tolerance: 1e-6,
        }
    }
}

impl DeConfig {
    /// Grid fine enough for ensembles whose channel LLRs sit below one
    /// baseline bin, as at rate 0.02 where the channel mean is about 0.06.
    pub fn fine() -> Self {
        DeConfig { bin_width: 1.0 / 64.0, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub converged: bool,
    pub iterations: usize,
    pub final_error: f64,
    /// Bit error probability after each iteration.
    pub trajectory: Vec<f64>,
}

type Density = Vec<f64>;

/// Bin masses below this are dropped in check-node combinations.
const MASS_FLOOR: f64 = 1e-30;

struct Grid {
    delta: f64,
    /// Bins on each side of zero.
    k: usize,
    /// Check-node table: lower output bin and weight of the upper one.
    table_idx: Vec<u32>,
    table_w: Vec<f64>,
    fft_len: usize,
}

impl Grid {
    fn new(cfg: &DeConfig) -> Result<Self> {
        if !(cfg.bin_width > 0.0 && cfg.max_llr > cfg.bin_width) {
            return Err(Error::param("bin_width", "grid must have positive width below max_llr"));
        }
        let k = (cfg.max_llr / cfg.bin_width).round() as usize;
        let delta = cfg.bin_width;
        let side = k + 1;
        let mut table_idx = vec![0u32; side * side];
        let mut table_w = vec![0.0; side * side];
        let th: Vec<f64> = (0..side).map(|i| (0.5 * i as f64 * delta).tanh()).collect();
        for a in 0..side {
            for b in 0..side {
                let p = (th[a] * th[b]).min(1.0 - 1e-16);
                let z = 2.0 * p.atanh() / delta;
                let lo = (z.floor() as usize).min(a.min(b));
                let w = if lo >= a.min(b) { 0.0 } else { z - lo as f64 };
                table_idx[a * side + b] = lo as u32;
                table_w[a * side + b] = w;
            }
        }
        let m = 2 * k + 1;
        Ok(Grid { delta, k, table_idx, table_w, fft_len: (2 * m - 1).next_power_of_two() })
    }

    fn len(&self) -> usize {
        2 * self.k + 1
    }

    fn delta_at_zero(&self) -> Density {
        let mut d = vec![0.0; self.len()];
        d[self.k] = 1.0;
        d
    }

    fn gaussian(&self, mean: f64, var: f64) -> Density {
        let s = (2.0 * var).sqrt();
        let cdf = |x: f64| 0.5 * erfc(-(x - mean) / s);
        let mut d = vec![0.0; self.len()];
        let mut prev = 0.0;
        for (i, v) in d.iter_mut().enumerate() {
            let hi = if i + 1 == self.len() { 1.0 } else { cdf((i as f64 - self.k as f64 + 0.5) * self.delta) };
            *v = hi - prev;
            prev = hi;
        }
        d
    }

    fn channel(&self, sigma: f64) -> Density {
        let mu = 2.0 / (sigma * sigma);
        self.gaussian(mu, 2.0 * mu)
    }

    fn error(&self, d: &Density) -> f64 {
        d[..self.k].iter().sum::<f64>() + 0.5 * d[self.k]
    }

    fn boxplus(&self, a: &Density, b: &Density) -> Density {
        let k = self.k;
        let side = k + 1;
        let split = |d: &Density| -> (Vec<f64>, Vec<f64>) {
            let mut p = vec![0.0; side];
            let mut n = vec![0.0; side];
            p[0] = 0.5 * d[k];
            n[0] = 0.5 * d[k];
            for m in 1..side {
                p[m] = d[k + m];
                n[m] = d[k - m];
            }
            (p, n)
        };
        let (ap, an) = split(a);
        let (bp, bn) = split(b);
        let same_input = std::ptr::eq(a, b) || a == b;
        let nz: Vec<usize> = (0..side).filter(|&m| bp[m] + bn[m] > MASS_FLOOR).collect();
        let mut op = vec![0.0; side + 1];
        let mut on = vec![0.0; side + 1];
        for m1 in 0..side {
            let (p1, n1) = (ap[m1], an[m1]);
            if p1 + n1 <= MASS_FLOOR {
                continue;
            }
            let row = m1 * side;
            // a ⊞ a is symmetric in the two arguments, visit each pair once
            let (cols, lo) = if same_input { (&nz[nz.partition_point(|&m| m < m1)..], m1) } else { (&nz[..], usize::MAX) };
            for &m2 in cols {
                let mult = if m2 == lo { 1.0 } else if same_input { 2.0 } else { 1.0 };
                let same = mult * (p1 * bp[m2] + n1 * bn[m2]);
                let opp = mult * (p1 * bn[m2] + n1 * bp[m2]);
                let idx = self.table_idx[row + m2] as usize;
                let w = self.table_w[row + m2];
                op[idx] += same * (1.0 - w);
                op[idx + 1] += same * w;
                on[idx] += opp * (1.0 - w);
                on[idx + 1] += opp * w;
            }
        }
        let mut out = vec![0.0; self.len()];
        out[k] = op[0] + on[0];
        for m in 1..side {
            out[k + m] = op[m];
            out[k - m] = on[m];
        }
        out
    }

    fn spectrum(&self, d: &Density) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (b, &v) in buf.iter_mut().zip(d) {
            b.re = v;
        }
        fft(&mut buf);
        buf
    }

    /// Saturating convolution, both inputs on the grid.
    fn conv(&self, a: &Density, b: &Density) -> Density {
        let fa = self.spectrum(a);
        let fb = self.spectrum(b);
        let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        ifft(&mut prod);
        // index s of the full result sits at value (s - 2k)·Δ
        let k = self.k as isize;
        let mut out = vec![0.0; self.len()];
        let full = 2 * self.len() - 1;
        for (s, c) in prod.iter().take(full).enumerate() {
            let v = (s as isize - 2 * k).clamp(-k, k);
            out[(v + k) as usize] += c.re.max(0.0);
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|x| *x /= total);
        out
    }
}

/// Memoised k-fold combinations of one density under an associative operation.
struct Powers<'g, F: Fn(&Grid, &Density, &Density) -> Density> {
    grid: &'g Grid,
    op: F,
    base: Vec<Density>,
    memo: HashMap<(usize, u32), Density>,
}

impl<'g, F: Fn(&Grid, &Density, &Density) -> Density> Powers<'g, F> {
    fn get(&mut self, t: usize, k: u32) -> Density {
        debug_assert!(k >= 1);
        if k == 1 {
            return self.base[t].clone();
        }
        if let Some(d) = self.memo.get(&(t, k)) {
            return d.clone();
        }
        let h = k / 2;
        let a = self.get(t, h);
        let b = self.get(t, k - h);
        let d = (self.op)(self.grid, &a, &b);
        self.memo.insert((t, k), d.clone());
        d
    }

    /// Combination of `degrees[t]` copies of each base density.
    fn product(&mut self, degrees: &[u32], init: Option<Density>) -> Option<Density> {
        let mut acc = init;
        for (t, &d) in degrees.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let p = self.get(t, d);
            acc = Some(match acc {
                None => p,
                Some(a) => (self.op)(self.grid, &a, &p),
            });
        }
        acc
    }
}

fn mix(parts: &[(f64, Density)], len: usize) -> Density {
    let mut out = vec![0.0; len];
    let tot: f64 = parts.iter().map(|p| p.0).sum();
    for (w, d) in parts {
        for (o, v) in out.iter_mut().zip(d) {
            *o += w / tot * v;
        }
    }
    out
}

fn leave_one(deg: &[u32], t: usize) -> Vec<u32> {
    let mut d = deg.to_vec();
    d[t] -= 1;
    d
}

fn stalled(traj: &[f64], window: usize, tol: f64) -> bool {
    if traj.len() <= window {
        return false;
    }
    let now = traj[traj.len() - 1];
    let then = traj[traj.len() - 1 - window];
    then - now <= tol * then
}

/// Quantised density evolution at noise level `sigma`.
pub fn density_evolution(e: &MetEnsemble, sigma: f64, cfg: &DeConfig) -> Result<DeResult> {
    let grid = Grid::new(cfg)?;
    evolve(e, sigma, cfg, &grid)
}

fn evolve(e: &MetEnsemble, sigma: f64, cfg: &DeConfig, grid: &Grid) -> Result<DeResult> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("{sigma} must be positive")));
    }
    let nt = e.edge_types;
    let ch = grid.channel(sigma);
    let chans: Vec<Density> =
        e.variables.iter().map(|v| if v.transmitted { ch.clone() } else { grid.delta_at_zero() }).collect();
    let vw: Vec<Vec<f64>> = (0..nt).map(|t| e.variables.iter().map(|v| v.fraction * v.degrees[t] as f64).collect()).collect();
    let cw: Vec<Vec<f64>> = (0..nt).map(|t| e.checks.iter().map(|c| c.fraction * c.degrees[t] as f64).collect()).collect();
    let err_w: f64 = e.variables.iter().map(|v| v.fraction).sum();

    // variable-to-check densities per edge type, first round is the channel
    let mut v2c: Vec<Density> = (0..nt)
        .map(|t| {
            let parts: Vec<(f64, Density)> =
                (0..e.variables.len()).filter(|&i| vw[t][i] > 0.0).map(|i| (vw[t][i], chans[i].clone())).collect();
            mix(&parts, grid.len())
        })
        .collect();
    let mut traj = Vec::new();
    for it in 1..=cfg.max_iterations {
        let mut cn = Powers { grid, op: Grid::boxplus, base: v2c.clone(), memo: HashMap::new() };
        let c2v: Vec<Density> = (0..nt)
            .map(|t| {
                let parts: Vec<(f64, Density)> = (0..e.checks.len())
                    .filter(|&j| cw[t][j] > 0.0)
                    .map(|j| {
                        let d = cn.product(&leave_one(&e.checks[j].degrees, t), None).unwrap_or_else(|| grid.delta_at_zero());
                        (cw[t][j], d)
                    })
                    .collect();
                mix(&parts, grid.len())
            })
            .collect();

        let outputs: Vec<(Vec<Option<Density>>, f64)> = (0..e.variables.len())
            .into_par_iter()
            .map(|i| {
                let v = &e.variables[i];
                let mut vn = Powers { grid, op: Grid::conv, base: c2v.clone(), memo: HashMap::new() };
                let post = vn.product(&v.degrees, Some(chans[i].clone())).expect("channel seed");
                let outs = (0..nt)
                    .map(|t| (v.degrees[t] > 0).then(|| vn.product(&leave_one(&v.degrees, t), Some(chans[i].clone())).expect("seed")))
                    .collect();
                (outs, v.fraction * grid.error(&post))
            })
            .collect();
        let err = outputs.iter().map(|o| o.1).sum::<f64>() / err_w;
        traj.push(err);
        for t in 0..nt {
            let parts: Vec<(f64, Density)> = outputs
                .iter()
                .enumerate()
                .filter_map(|(i, o)| o.0[t].as_ref().map(|d| (vw[t][i], d.clone())))
                .collect();
            v2c[t] = mix(&parts, grid.len());
        }
        if err < cfg.target_error {
            return Ok(DeResult { converged: true, iterations: it, final_error: err, trajectory: traj });
        }
        if stalled(&traj, cfg.stall_window, cfg.stall_tolerance) {
            return Ok(DeResult { converged: false, iterations: it, final_error: err, trajectory: traj });
        }
    }
    let final_error = *traj.last().unwrap_or(&0.5);
    Ok(DeResult { converged: false, iterations: cfg.max_iterations, final_error, trajectory: traj })
}

/// Mean-to-tanh map of a symmetric Gaussian LLR, `1 − E[tanh(L/2)]`.
pub fn phi(m: f64) -> f64 {
    if m <= 0.0 {
        return 1.0;
    }
    if m > 40.0 {
        // tail expansion, relative error below 1e-4 here
        return (std::f64::consts::PI / m).sqrt() * (-m / 4.0).exp() * (1.0 - 10.0 / (7.0 * m));
    }
    let s = (2.0 * m).sqrt();
    let n = 400;
    let (lo, hi) = (m - 10.0 * s, m + 10.0 * s);
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let u = lo + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += w * (0.5 * u).tanh() * (-(u - m).powi(2) / (4.0 * m)).exp();
    }
    1.0 - acc * h / (4.0 * std::f64::consts::PI * m).sqrt()
}

pub fn phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e4f64.ln());
    if y <= phi(hi.exp()) {
        return hi.exp();
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if phi(mid.exp()) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Gaussian-approximation density evolution.
pub fn gaussian_approximation(e: &MetEnsemble, sigma: f64, cfg: &DeConfig) -> Result<DeResult> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("{sigma} must be positive")));
    }
    let nt = e.edge_types;
    let mch: Vec<f64> = e.variables.iter().map(|v| if v.transmitted { 2.0 / (sigma * sigma) } else { 0.0 }).collect();
    let vw: Vec<Vec<f64>> = (0..nt).map(|t| e.variables.iter().map(|v| v.fraction * v.degrees[t] as f64).collect()).collect();
    let cw: Vec<Vec<f64>> = (0..nt).map(|t| e.checks.iter().map(|c| c.fraction * c.degrees[t] as f64).collect()).collect();
    let norm = |w: &[f64]| -> f64 { w.iter().sum::<f64>().max(1e-300) };
    // per var type, per edge type outgoing mean
    let mut vout: Vec<Vec<f64>> = e.variables.iter().enumerate().map(|(i, _)| vec![mch[i]; nt]).collect();
    let mut traj = Vec::new();
    for it in 1..=cfg.max_iterations {
        // E[tanh] of the mixed variable-to-check message on each edge type
        let tanh_in: Vec<f64> = (0..nt)
            .map(|t| {
                let s = norm(&vw[t]);
                (0..e.variables.len()).map(|i| vw[t][i] / s * (1.0 - phi(vout[i][t]))).sum()
            })
            .collect();
        let c_mean: Vec<f64> = (0..nt)
            .map(|t| {
                let s = norm(&cw[t]);
                (0..e.checks.len())
                    .filter(|&j| cw[t][j] > 0.0)
                    .map(|j| {
                        let d = leave_one(&e.checks[j].degrees, t);
                        let prod: f64 = (0..nt).map(|u| tanh_in[u].powi(d[u] as i32)).product();
                        cw[t][j] / s * phi_inv(1.0 - prod)
                    })
                    .sum()
            })
            .collect();
        let mut err = 0.0;
        for (i, v) in e.variables.iter().enumerate() {
            let post = mch[i] + (0..nt).map(|t| v.degrees[t] as f64 * c_mean[t]).sum::<f64>();
            err += v.fraction * q_func((post / 2.0).sqrt());
            for t in 0..nt {
                vout[i][t] = post - c_mean[t];
            }
        }
        traj.push(err);
        if err < cfg.target_error {
            return Ok(DeResult { converged: true, iterations: it, final_error: err, trajectory: traj });
        }
        if stalled(&traj, cfg.stall_window, cfg.stall_tolerance) {
            return Ok(DeResult { converged: false, iterations: it, final_error: err, trajectory: traj });
        }
    }
    let final_error = *traj.last().unwrap_or(&0.5);
    Ok(DeResult { converged: false, iterations: cfg.max_iterations, final_error, trajectory: traj })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeEngine {
    Quantized,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub sigma: f64,
    /// Converging and failing noise levels bracketing the threshold.
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

/// Largest σ for which evolution converges, by bisection to `resolution`.
pub fn threshold_search(
    e: &MetEnsemble,
    cfg: &DeConfig,
    engine: DeEngine,
    initial: (f64, f64),
    resolution: f64,
) -> Result<ThresholdResult> {
    let grid = match engine {
        DeEngine::Quantized => Some(Grid::new(cfg)?),
        DeEngine::Gaussian => None,
    };
    let mut evals = 0;
    let mut ok = |s: f64| -> Result<bool> {
        evals += 1;
        Ok(match &grid {
            Some(g) => evolve(e, s, cfg, g)?.converged,
            None => gaussian_approximation(e, s, cfg)?.converged,
        })
    };
    let (mut lo, mut hi) = initial;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::param("initial", "need 0 < lo < hi"));
    }
    let mut widen = 0;
    while !ok(lo)? {
        hi = lo;
        lo *= 0.8;
        widen += 1;
        if widen > 20 {
            return Err(Error::NoRoot("evolution fails at every tried noise level".into()));
        }
    }
    while ok(hi)? {
        lo = hi;
        hi *= 1.25;
        widen += 1;
        if widen > 40 {
            return Err(Error::NoRoot("evolution converges at every tried noise level".into()));
        }
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult { sigma: 0.5 * (lo + hi), bracket: (lo, hi), evaluations: evals })
}
