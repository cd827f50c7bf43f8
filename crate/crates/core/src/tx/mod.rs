//! Alice's digital signal chain: Gaussian symbols, RRC shaping, temporal-mode
//! high-pass, pilot tone and DAC quantisation.

mod constellation;
mod filter;
mod shaping;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use constellation::{build_symbols, inversion_sample, mark_references, GaussianConstellation};
pub use filter::{butterworth_lowpass, highpass, Biquad, FilterFamily, HighPassSpec, Sample, Sos};
pub use shaping::{upsample_shape, RrcFilter};

use crate::buffer::{ComplexBuffer, RealBuffer, SymbolFrame};
use crate::error::{Error, Result};
use crate::random::RandomSource;
use crate::spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotSpec {
    pub freq_hz: f64,
    /// Pilot amplitude over the quantum signal's RMS amplitude.
    pub amplitude_ratio: f64,
}

/// Where the quantum signal lives, for placing the pilot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumBand {
    pub half_bandwidth_hz: f64,
    pub rms: f64,
}

pub fn add_pilot(buffer: &ComplexBuffer, pilot: &PilotSpec, quantum: &QuantumBand) -> Result<ComplexBuffer> {
    if pilot.freq_hz.abs() <= quantum.half_bandwidth_hz {
        return Err(Error::param(
            "pilot.freq_hz",
            format!("{} Hz falls inside the quantum band ±{} Hz", pilot.freq_hz, quantum.half_bandwidth_hz),
        ));
    }
    if pilot.freq_hz.abs() >= buffer.rate / 2.0 {
        return Err(Error::param("pilot.freq_hz", "above Nyquist"));
    }
    let amp = pilot.amplitude_ratio * quantum.rms;
    let w = 2.0 * PI * pilot.freq_hz / buffer.rate;
    let samples = buffer
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| x + Complex64::from_polar(amp, w * n as f64))
        .collect();
    Ok(buffer.with_samples(samples))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DacOutput {
    pub i: RealBuffer,
    pub q: RealBuffer,
    pub full_scale: f64,
    pub clip_fraction: f64,
    /// More than 0.1 % of samples hit the rails.
    pub clipping_warning: bool,
}

fn quantize(x: f64, step: f64, lo: i64, hi: i64) -> (f64, bool) {
    let code = (x / step).round() as i64;
    let clipped = code < lo || code > hi;
    (code.clamp(lo, hi) as f64 * step, clipped)
}

/// Mid-tread uniform quantiser, `2^bits` codes, `±full_scale` range. When
/// `full_scale` is `None` it is set to the largest |I| or |Q| sample.
pub fn quantize_dac(buffer: &ComplexBuffer, bits: u32, full_scale: Option<f64>) -> Result<DacOutput> {
    if !(2..=24).contains(&bits) {
        return Err(Error::param("dac_bits", format!("{bits}")));
    }
    let fs = match full_scale {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::param("full_scale", format!("{v}"))),
        None => buffer.samples.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs())).max(f64::MIN_POSITIVE),
    };
    let half = 1i64 << (bits - 1);
    let step = fs / half as f64;
    let (lo, hi) = (-half, half - 1);
    let mut clips = 0usize;
    let mut vi = Vec::with_capacity(buffer.len());
    let mut vq = Vec::with_capacity(buffer.len());
    for z in &buffer.samples {
        let (a, ca) = quantize(z.re, step, lo, hi);
        let (b, cb) = quantize(z.im, step, lo, hi);
        clips += ca as usize + cb as usize;
        vi.push(a);
        vq.push(b);
    }
    let clip_fraction = if buffer.is_empty() { 0.0 } else { clips as f64 / (2 * buffer.len()) as f64 };
    Ok(DacOutput {
        i: buffer.with_samples(vi),
        q: buffer.with_samples(vq),
        full_scale: fs,
        clip_fraction,
        clipping_warning: clip_fraction > 1e-3,
    })
}

/// Full-length matched filter with the RRC taps (peak delay of the cascade is
/// `2 * rrc.delay()` relative to the symbol instants of the transmitter).
pub fn matched_filter(buffer: &ComplexBuffer, rrc: &RrcFilter) -> ComplexBuffer {
    buffer.with_samples(spectrum::convolve(&buffer.samples, &rrc.taps))
}

/// Every `sps`-th sample starting at `lag`.
pub fn downsample(buffer: &ComplexBuffer, sps: usize, lag: usize, n_symbols: usize, baud: f64) -> Result<SymbolFrame> {
    let last = lag + (n_symbols.max(1) - 1) * sps;
    if n_symbols > 0 && last >= buffer.len() {
        return Err(Error::TooShort { needed: last + 1, got: buffer.len() });
    }
    let symbols = (0..n_symbols).map(|i| buffer.samples[lag + i * sps]).collect();
    SymbolFrame::new(symbols, baud)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TxConfig {
    pub baud: f64,
    pub rate: f64,
    pub rolloff: f64,
    pub span_symbols: usize,
    pub constellation_bits: u32,
    pub coverage_sigmas: f64,
    pub hpf: Option<HighPassSpec>,
    pub pilot: PilotSpec,
    pub dac_bits: u32,
    pub reference_fraction: f64,
}

impl Default for TxConfig {
    fn default() -> Self {
        TxConfig {
            baud: 20e6,
            rate: 1e9,
            rolloff: 0.2,
            span_symbols: 32,
            constellation_bits: 6,
            coverage_sigmas: 3.5,
            hpf: Some(HighPassSpec::butterworth(5, 190e3, 1e9)),
            pilot: PilotSpec { freq_hz: 60e6, amplitude_ratio: 10.0 },
            dac_bits: 16,
            reference_fraction: 0.01,
        }
    }
}

impl TxConfig {
    pub fn sps(&self) -> Result<usize> {
        let r = self.rate / self.baud;
        if (r - r.round()).abs() > 1e-9 || r < 2.0 {
            return Err(Error::param("rate", format!("rate/baud = {r} must be an integer ≥ 2")));
        }
        Ok(r.round() as usize)
    }

    pub fn rrc(&self) -> Result<RrcFilter> {
        RrcFilter::new(self.rolloff, self.span_symbols, self.sps()?)
    }

    pub fn quantum_half_bandwidth(&self) -> f64 {
        self.baud * (1.0 + self.rolloff) / 2.0
    }

    /// Nominal RMS amplitude per sample of the shaped quantum signal, for
    /// unit per-quadrature symbol variance.
    pub fn quantum_rms(&self) -> Result<f64> {
        Ok((2.0 / self.sps()? as f64).sqrt())
    }
}

/// One transmitted frame with everything Alice keeps.
#[derive(Debug, Clone)]
pub struct AliceFrame {
    /// Drawn symbols, unit per-quadrature variance.
    pub symbols: SymbolFrame,
    /// Shaped and high-passed quantum waveform, without pilot.
    pub quantum: ComplexBuffer,
    pub drive: DacOutput,
    pub pilot_amplitude: f64,
}

pub fn alice_frame(cfg: &TxConfig, n_symbols: usize, src: &RandomSource) -> Result<AliceFrame> {
    let c = GaussianConstellation::new(cfg.constellation_bits, cfg.coverage_sigmas, 1.0)?;
    let mut symbols = build_symbols(&src.child("symbols", 0), &c, n_symbols, cfg.baud)?;
    mark_references(&mut symbols, cfg.reference_fraction, &src.child("references", 0))?;
    let rrc = cfg.rrc()?;
    let mut quantum = upsample_shape(&symbols, &rrc, cfg.rate)?;
    if let Some(h) = &cfg.hpf {
        quantum = highpass(&quantum, h)?;
    }
    let band = QuantumBand { half_bandwidth_hz: cfg.quantum_half_bandwidth(), rms: cfg.quantum_rms()? };
    let with_pilot = add_pilot(&quantum, &cfg.pilot, &band)?;
    let drive = quantize_dac(&with_pilot, cfg.dac_bits, None)?;
    Ok(AliceFrame { symbols, quantum, drive, pilot_amplitude: cfg.pilot.amplitude_ratio * band.rms })
}

/// Alice's copy of the mode Bob measures: her own quantum waveform through
/// the receiver high-pass and matched filter, sampled at the symbol peaks.
pub fn temporal_mode_symbols(cfg: &TxConfig, frame: &AliceFrame) -> Result<SymbolFrame> {
    let rrc = cfg.rrc()?;
    let mut q = frame.quantum.clone();
    if let Some(h) = &cfg.hpf {
        q = highpass(&q, h)?;
    }
    let mf = matched_filter(&q, &rrc);
    let mut out = downsample(&mf, rrc.sps, 2 * rrc.delay(), frame.symbols.len(), cfg.baud)?;
    out.reference_mask = frame.symbols.reference_mask.clone();
    Ok(out)
}
