//! Unscented Kalman filter for carrier phase from a baseband pilot.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::buffer::ComplexBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UkfConfig {
    /// Random-walk phase increment variance per step, rad².
    pub process_noise_var: f64,
    /// Noise variance of each pilot component per step.
    pub measurement_noise_var: f64,
    pub initial_var: f64,
    pub kappa: f64,
}

impl UkfConfig {
    /// Process noise of a Wiener phase with the given linewidth, sampled at `rate`.
    pub fn for_linewidth(linewidth_hz: f64, rate: f64, measurement_noise_var: f64) -> Self {
        UkfConfig {
            process_noise_var: 2.0 * std::f64::consts::PI * linewidth_hz / rate,
            measurement_noise_var,
            initial_var: 1.0,
            kappa: 2.0,
        }
    }

    /// Steady-state posterior variance of the linearised filter for pilot
    /// amplitude `a`.
    pub fn steady_state_var(&self, a: f64) -> f64 {
        let info = a * a / self.measurement_noise_var;
        let q = self.process_noise_var;
        // P = (P + q) / (1 + (P + q) info)  =>  info P² + q info P - q = 0
        (-q * info + ((q * info).powi(2) + 4.0 * info * q).sqrt()) / (2.0 * info)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrack {
    pub phases: Vec<f64>,
    pub posterior_var: Vec<f64>,
    pub amplitude: f64,
}

impl PhaseTrack {
    pub fn mean_posterior_var(&self) -> f64 {
        let skip = self.posterior_var.len() / 10;
        let tail = &self.posterior_var[skip..];
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }
}

/// Tracks `θ` in `pilot ≈ A exp(jθ) + noise`. The state is an unwrapped real
/// phase; the measurement model is `A [cos θ, sin θ]`.
pub fn ukf_phase_track(pilot: &ComplexBuffer, cfg: &UkfConfig) -> Result<PhaseTrack> {
    let n = pilot.len();
    if n < 16 {
        return Err(Error::TooShort { needed: 16, got: n });
    }
    let r = cfg.measurement_noise_var;
    if !(r > 0.0) || cfg.process_noise_var < 0.0 {
        return Err(Error::param("ukf", "noise variances must be positive"));
    }
    let p2 = pilot.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let a = (p2 - 2.0 * r).max(1e-3 * p2).sqrt();
    let init: Complex64 = pilot.samples.iter().take(64).sum();
    let mut x = init.arg();
    let mut p = cfg.initial_var;
    let lam = cfg.kappa;
    let w0 = lam / (1.0 + lam);
    let wi = 1.0 / (2.0 * (1.0 + lam));
    let mut phases = Vec::with_capacity(n);
    let mut post = Vec::with_capacity(n);
    let window = 2000usize.min(n);
    let mut nis_acc = 0.0;
    let mut nis_hist = vec![0.0; window];
    for (k, z) in pilot.samples.iter().enumerate() {
        p += cfg.process_noise_var;
        let s = ((1.0 + lam) * p).sqrt();
        let pts = [x, x + s, x - s];
        let ws = [w0, wi, wi];
        let ys: Vec<[f64; 2]> = pts.iter().map(|t| [a * t.cos(), a * t.sin()]).collect();
        let mut ym = [0.0; 2];
        for (y, w) in ys.iter().zip(ws) {
            ym[0] += w * y[0];
            ym[1] += w * y[1];
        }
        let mut syy = [[r, 0.0], [0.0, r]];
        let mut sxy = [0.0; 2];
        for ((y, w), t) in ys.iter().zip(ws).zip(pts) {
            let d = [y[0] - ym[0], y[1] - ym[1]];
            for i in 0..2 {
                for j in 0..2 {
                    syy[i][j] += w * d[i] * d[j];
                }
                sxy[i] += w * (t - x) * d[i];
            }
        }
        let det = syy[0][0] * syy[1][1] - syy[0][1] * syy[1][0];
        let inv = [[syy[1][1] / det, -syy[0][1] / det], [-syy[1][0] / det, syy[0][0] / det]];
        let gain = [sxy[0] * inv[0][0] + sxy[1] * inv[1][0], sxy[0] * inv[0][1] + sxy[1] * inv[1][1]];
        let innov = [z.re - ym[0], z.im - ym[1]];
        x += gain[0] * innov[0] + gain[1] * innov[1];
        p -= gain[0] * sxy[0] + gain[1] * sxy[1];
        p = p.max(1e-15);
        let nis = innov[0] * (inv[0][0] * innov[0] + inv[0][1] * innov[1])
            + innov[1] * (inv[1][0] * innov[0] + inv[1][1] * innov[1]);
        nis_acc += nis - nis_hist[k % window];
        nis_hist[k % window] = nis;
        if k >= window && nis_acc / window as f64 > 2e3 || !x.is_finite() {
            return Err(Error::TrackerDiverged(k));
        }
        phases.push(x);
        post.push(p);
    }
    Ok(PhaseTrack { phases, posterior_var: post, amplitude: a })
}

/// Multiplies by `exp(-jθ)` sample by sample.
pub fn phase_correct(buffer: &ComplexBuffer, phases: &[f64]) -> Result<ComplexBuffer> {
    if phases.len() != buffer.len() {
        return Err(Error::param("phases", format!("{} estimates for {} samples", phases.len(), buffer.len())));
    }
    let samples = buffer.samples.iter().zip(phases).map(|(z, t)| z * Complex64::from_polar(1.0, -t)).collect();
    Ok(buffer.with_samples(samples))
}

/// Linear interpolation of a track sampled every `factor` samples (sample `k`
/// of the track sits at index `k * factor + offset`) onto `len` samples.
pub fn upsample_track(track: &[f64], factor: usize, offset: usize, len: usize) -> Vec<f64> {
    let m = track.len();
    (0..len)
        .map(|i| {
            let pos = (i as f64 - offset as f64) / factor as f64;
            if pos <= 0.0 {
                track[0]
            } else if pos >= (m - 1) as f64 {
                track[m - 1]
            } else {
                let k = pos.floor() as usize;
                let f = pos - k as f64;
                track[k] * (1.0 - f) + track[k + 1] * f
            }
        })
        .collect()
}
