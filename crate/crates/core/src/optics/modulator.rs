//! Dual-parallel MZM (IQ modulator) transfer functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::buffer::{ComplexBuffer, RealBuffer};
use crate::error::{Error, Result};
use crate::spectrum;
use crate::units::Decibel;

/// Bias, drive and imperfection parameters of the IQ modulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqModulatorParams {
    /// Half-wave voltage of the two child MZMs.
    pub v_pi: f64,
    /// Voltage giving a π/2 shift on the parent phase section.
    pub v_pi_pm: f64,
    pub v_dc1: f64,
    pub v_dc2: f64,
    pub v_dc3: f64,
    /// Small-signal modulation indices of the I and Q arms, rad per drive unit.
    pub mu1: f64,
    pub mu2: f64,
    /// Residual bias phases of the child MZMs away from the null.
    pub phi1: f64,
    pub phi2: f64,
    /// Image-sideband amplitude of an optical single-sideband modulator.
    pub delta_sideband: f64,
}

impl IqModulatorParams {
    /// Both children at the null, parent at quadrature. Drive in volts maps to
    /// phase with `mu = π / (2 v_pi)`.
    pub fn dark_fringe(v_pi: f64, v_pi_pm: f64) -> Self {
        let mu = PI / (2.0 * v_pi);
        IqModulatorParams {
            v_pi,
            v_pi_pm,
            v_dc1: -v_pi,
            v_dc2: -v_pi,
            v_dc3: -v_pi_pm,
            mu1: mu,
            mu2: mu,
            phi1: 0.0,
            phi2: 0.0,
            delta_sideband: 0.0,
        }
    }

    /// Moves the child biases off the null by the given phases.
    pub fn with_bias_phases(mut self, phi1: f64, phi2: f64) -> Self {
        let to_volts = 2.0 * self.v_pi / PI;
        self.v_dc1 = -self.v_pi + phi1 * to_volts;
        self.v_dc2 = -self.v_pi + phi2 * to_volts;
        self.phi1 = phi1;
        self.phi2 = phi2;
        self
    }

    /// Residual carrier Δ of the linearised model.
    pub fn delta_carrier(&self) -> Complex64 {
        Complex64::new(self.phi1, self.phi2) / 2.0
    }
}

/// Exact field transfer for drive voltages `v1`, `v2`, normalised to the
/// input field.
pub fn iq_transfer_exact(v1: &RealBuffer, v2: &RealBuffer, p: &IqModulatorParams) -> Result<ComplexBuffer> {
    if v1.len() != v2.len() {
        return Err(Error::param("drive", format!("I has {} samples, Q has {}", v1.len(), v2.len())));
    }
    let k = PI / (2.0 * p.v_pi);
    let parent = Complex64::from_polar(1.0, -PI * p.v_dc3 / (2.0 * p.v_pi_pm));
    let samples = v1
        .samples
        .iter()
        .zip(&v2.samples)
        .map(|(&a, &b)| {
            let i = (k * (a + p.v_dc1)).cos();
            let q = (k * (b + p.v_dc2)).cos();
            (Complex64::new(i, 0.0) + parent * q) / 2.0
        })
        .collect();
    ComplexBuffer::new(samples, v1.rate)
}

/// Small-signal model at the dark fringe: `[μ1 I + jμ2 Q + φ1 + jφ2] / 2`.
pub fn baseband_approx(i: &RealBuffer, q: &RealBuffer, p: &IqModulatorParams) -> Result<ComplexBuffer> {
    if i.len() != q.len() {
        return Err(Error::param("drive", "I and Q lengths differ"));
    }
    let d = p.delta_carrier();
    let samples = i
        .samples
        .iter()
        .zip(&q.samples)
        .map(|(&a, &b)| Complex64::new(p.mu1 * a, p.mu2 * b) / 2.0 + d)
        .collect();
    ComplexBuffer::new(samples, i.rate)
}

/// Optical single-sideband model for comparison: wanted sideband at `-rf_hz`,
/// conjugate image at `+rf_hz` with relative amplitude `δ/μ`.
pub fn ossb_approx(alpha: &ComplexBuffer, p: &IqModulatorParams, rf_hz: f64) -> ComplexBuffer {
    let mu = (p.mu1 + p.mu2) / 2.0;
    let d = p.delta_carrier();
    let w = 2.0 * PI * rf_hz / alpha.rate;
    let samples = alpha
        .samples
        .iter()
        .enumerate()
        .map(|(n, &a)| {
            let ph = Complex64::from_polar(1.0, w * n as f64);
            a * ph.conj() * (mu / 2.0) + a.conj() * ph * (p.delta_sideband / 2.0) + d
        })
        .collect();
    alpha.with_samples(samples)
}

/// Image-band power over signal-band power. Bands are `(lo, hi)` in Hz.
pub fn sideband_leakage(field: &ComplexBuffer, signal_band: (f64, f64), image_band: (f64, f64)) -> Result<Decibel> {
    let overlap = signal_band.0 < image_band.1 && image_band.0 < signal_band.1;
    if overlap {
        return Err(Error::param("bands", "signal and image bands overlap"));
    }
    let seg = 1usize << 14;
    let psd = spectrum::welch(&field.samples, field.rate, seg.min(field.len().next_power_of_two()));
    let ps = psd.band_power(signal_band.0, signal_band.1);
    let pi = psd.band_power(image_band.0, image_band.1);
    if !(ps > 0.0) {
        return Err(Error::param("signal_band", "no power in signal band"));
    }
    Ok(Decibel::from_linear(pi.max(1e-300) / ps))
}

/// Automatic bias control dither on the two child MZMs, expressed in drive
/// volts so that it can be added to the RF drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbcDither {
    /// Peak dither phase on each child MZM, radians.
    pub amplitude_rad: f64,
    pub freq1_hz: f64,
    pub freq2_hz: f64,
}

impl AbcDither {
    /// Dither amplitude giving a residual carrier `cs` below `signal_power`
    /// (both measured at the modulator output).
    pub fn for_suppression(cs: Decibel, signal_power: f64) -> Self {
        // mean |Δ|² = (φ1² + φ2²)/4 with sinusoidal φ of peak a gives a²/4
        let carrier = signal_power / cs.linear();
        AbcDither { amplitude_rad: (4.0 * carrier).sqrt(), freq1_hz: 1e3, freq2_hz: 1.1e3 }
    }
}

pub fn abc_dither(n: usize, rate: f64, d: &AbcDither, p: &IqModulatorParams) -> (Vec<f64>, Vec<f64>) {
    let to_volts = 2.0 * p.v_pi / PI;
    let a = d.amplitude_rad * to_volts;
    let w1 = 2.0 * PI * d.freq1_hz / rate;
    let w2 = 2.0 * PI * d.freq2_hz / rate;
    let v1 = (0..n).map(|k| a * (w1 * k as f64).sin()).collect();
    let v2 = (0..n).map(|k| a * (w2 * k as f64).sin()).collect();
    (v1, v2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buf(v: Vec<f64>) -> RealBuffer {
        RealBuffer::new(v, 1e9).unwrap()
    }

    #[test]
    fn null_bias_suppresses_carrier() {
        let mut p = IqModulatorParams::dark_fringe(3.5, 3.0);
        let z = buf(vec![0.0; 4]);
        let e = iq_transfer_exact(&z, &z, &p).unwrap();
        assert!(e.samples.iter().all(|c| c.norm() < 1e-15));
        p.v_dc1 = p.v_pi;
        p.v_dc2 = p.v_pi;
        p.v_dc3 = p.v_pi_pm;
        let e = iq_transfer_exact(&z, &z, &p).unwrap();
        assert!(e.samples.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn residual_carrier_example() {
        let p = IqModulatorParams::dark_fringe(3.5, 3.0).with_bias_phases(0.01, 0.02);
        let z = buf(vec![0.0; 2]);
        let e = baseband_approx(&z, &z, &p).unwrap();
        assert!((e.samples[0] - Complex64::new(0.005, 0.010)).norm() < 1e-15);
    }
}
