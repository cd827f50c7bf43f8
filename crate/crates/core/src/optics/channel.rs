//! Attenuation to the target modulation variance, fiber propagation and the
//! RF heterodyne detector.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::buffer::{ComplexBuffer, RealBuffer};
use crate::error::{Error, Result};
use crate::random::RandomSource;
use crate::spectrum;
use crate::tx::butterworth_lowpass;
use crate::units::{Decibel, Pnu};

/// Frequencies counted as quantum signal when measuring `Va`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumBandMask {
    /// Below this |f| the band is excluded (high-pass notch, carrier, dither).
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub sps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationResult {
    pub field: ComplexBuffer,
    /// Amplitude factor that was applied.
    pub scale: f64,
    /// Variance measured before scaling, per quadrature in shot-noise units.
    pub va_before: f64,
}

fn measure_va(field: &ComplexBuffer, band: &QuantumBandMask) -> f64 {
    let seg = (1usize << 15).min(field.len().next_power_of_two() / 2).max(256);
    let psd = spectrum::welch(&field.samples, field.rate, seg);
    let p = psd.band_power(-band.hi_hz, -band.lo_hz) + psd.band_power(band.lo_hz, band.hi_hz);
    p * band.sps as f64 / 2.0
}

/// Scales the field so the quantum band carries `target` per quadrature at the
/// symbol level.
pub fn attenuate_to_va(field: &ComplexBuffer, target: Pnu, band: &QuantumBandMask) -> Result<AttenuationResult> {
    if target.value() <= 0.0 {
        return Err(Error::param("va", "target modulation variance must be positive"));
    }
    let va = measure_va(field, band);
    if !(va > 0.0) {
        return Err(Error::param("field", "no power in the quantum band"));
    }
    let scale = (target.value() / va).sqrt();
    let samples = field.samples.iter().map(|z| z * scale).collect();
    Ok(AttenuationResult { field: field.with_samples(samples), scale, va_before: va })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Fiber transmittance.
    pub eta: f64,
    /// Combined linewidth of transmitter laser and local oscillator.
    pub linewidth_hz: f64,
    /// Offset between transmitter laser and local oscillator.
    pub freq_offset_hz: f64,
    /// Untrusted excess noise added at the channel output, per quadrature.
    pub u_excess: Pnu,
}

/// Loss, Wiener phase noise, frequency offset and excess noise.
pub fn propagate(field: &ComplexBuffer, ch: &ChannelParams, src: &RandomSource) -> Result<ComplexBuffer> {
    if !(ch.eta > 0.0 && ch.eta <= 1.0) {
        return Err(Error::param("eta", format!("{}", ch.eta)));
    }
    if ch.linewidth_hz < 0.0 {
        return Err(Error::param("linewidth_hz", "negative"));
    }
    let amp = ch.eta.sqrt();
    let step = Normal::new(0.0, (2.0 * PI * ch.linewidth_hz / field.rate).sqrt())
        .map_err(|e| Error::param("linewidth_hz", e.to_string()))?;
    let noise_std = ch.u_excess.value().sqrt();
    let mut phase_rng = src.child("phase", 0).rng();
    let mut noise_rng = src.child("excess", 0).rng();
    let w = 2.0 * PI * ch.freq_offset_hz / field.rate;
    let mut theta = 0.0;
    let samples = field
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            if n > 0 {
                theta += step.sample(&mut phase_rng);
            }
            let mut y = x * amp * Complex64::from_polar(1.0, theta + w * n as f64);
            if noise_std > 0.0 {
                let re: f64 = StandardNormal.sample(&mut noise_rng);
                let im: f64 = StandardNormal.sample(&mut noise_rng);
                y += Complex64::new(re, im) * noise_std;
            }
            y
        })
        .collect();
    Ok(field.with_samples(samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorParams {
    /// Detection efficiency (trusted).
    pub tau: f64,
    /// Shot noise over electronic noise.
    pub clearance_db: f64,
    pub bandwidth_hz: f64,
    pub adc_bits: u32,
    /// ADC range, in units of the shot-noise standard deviation per sample.
    pub adc_full_scale: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams { tau: 0.68, clearance_db: 15.0, bandwidth_hz: 365e6, adc_bits: 12, adc_full_scale: 8.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Signal,
    Vacuum,
    Electronic,
}

/// Real ADC trace. Shot noise has unit variance per sample before the
/// detector response; the field enters as `√(2τ) Re{field}`.
pub fn heterodyne_detect(
    field: &ComplexBuffer,
    det: &DetectorParams,
    kind: MeasurementKind,
    src: &RandomSource,
) -> Result<RealBuffer> {
    if !(det.tau > 0.0 && det.tau <= 1.0) {
        return Err(Error::param("tau", format!("{}", det.tau)));
    }
    let elec_var = (Decibel(-det.clearance_db)).linear();
    let elec_std = elec_var.sqrt();
    let gain = (2.0 * det.tau).sqrt();
    let mut shot_rng = src.child("shot", 0).rng();
    let mut elec_rng = src.child("electronic", 0).rng();
    let raw: Vec<f64> = field
        .samples
        .iter()
        .map(|z| {
            let e: f64 = StandardNormal.sample(&mut elec_rng);
            let mut v = elec_std * e;
            if kind != MeasurementKind::Electronic {
                let s: f64 = StandardNormal.sample(&mut shot_rng);
                v += s;
            }
            if kind == MeasurementKind::Signal {
                v += gain * z.re;
            }
            v
        })
        .collect();
    let lp = butterworth_lowpass(2, det.bandwidth_hz, field.rate)?;
    let shaped = lp.filter(&raw);
    let half = 1i64 << (det.adc_bits - 1);
    let step = det.adc_full_scale / half as f64;
    let out = shaped
        .iter()
        .map(|&v| ((v / step).round() as i64).clamp(-half, half - 1) as f64 * step)
        .collect();
    Ok(field.with_samples(out))
}
