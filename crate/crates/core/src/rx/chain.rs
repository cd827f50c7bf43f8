//! Bob's offline receiver: whitening, frequency and phase recovery, temporal
//! mode high-pass, matched filter and timing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::frequency::{downconvert, estimate_pilot_frequency, to_complex};
use super::sync::{acquire_timing, acquire_timing_at, SyncResult};
use super::ukf::{phase_correct, ukf_phase_track, upsample_track, UkfConfig};
use super::whitening::WhiteningFilter;
use crate::buffer::{ComplexBuffer, RealBuffer, SymbolFrame};
use crate::error::Result;
use crate::spectrum;
use crate::tx::{downsample, highpass, matched_filter, TxConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverConfig {
    /// Nominal intermediate frequency (laser/LO offset).
    pub nominal_if_hz: f64,
    /// Half-width of the pilot search window around its nominal position.
    pub pilot_search_hz: f64,
    /// Half-width of the pilot isolation low-pass.
    pub pilot_isolation_hz: f64,
    /// Phase tracker runs on the pilot decimated by this factor.
    pub decimation: usize,
    /// Linewidth assumed by the tracker's process model.
    pub assumed_linewidth_hz: f64,
    pub whitening_segment: usize,
    pub sync_max_lag: usize,
    /// Sampling phase from earlier frames, skips the phase search.
    pub fixed_phase: Option<usize>,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            nominal_if_hz: 200e6,
            pilot_search_hz: 20e6,
            pilot_isolation_hz: 2e6,
            decimation: 50,
            assumed_linewidth_hz: 200.0,
            whitening_segment: 1024,
            sync_max_lag: 64,
            fixed_phase: None,
        }
    }
}

/// Per-frame receiver output.
#[derive(Debug, Clone)]
pub struct RecoveredFrame {
    pub symbols: SymbolFrame,
    pub sync: SyncResult,
    pub freq_offset_hz: f64,
    pub residual_phase_var: f64,
    pub pilot_amplitude: f64,
}

/// Parameters fixed by the signal frame and reused on its noise frames.
#[derive(Debug, Clone, Copy)]
pub struct FrameTiming {
    pub freq_offset_hz: f64,
    pub lag: usize,
    pub n_symbols: usize,
}

impl RecoveredFrame {
    pub fn timing(&self) -> FrameTiming {
        FrameTiming { freq_offset_hz: self.freq_offset_hz, lag: self.sync.lag.max(0) as usize, n_symbols: self.symbols.len() }
    }
}

fn baseband(trace: &RealBuffer, whitening: &WhiteningFilter) -> Result<ComplexBuffer> {
    Ok(to_complex(&whitening.apply(trace)?))
}

/// Temporal-mode high-pass and matched filter.
fn symbol_stage(bb: &ComplexBuffer, tx: &TxConfig) -> Result<ComplexBuffer> {
    let mut x = bb.clone();
    if let Some(h) = &tx.hpf {
        x = highpass(&x, h)?;
    }
    Ok(matched_filter(&x, &tx.rrc()?))
}

/// Pilot at baseband, low-passed and decimated, plus its white-equivalent
/// noise variance per decimated sample and component.
fn isolate_pilot(bb: &ComplexBuffer, tx: &TxConfig, rx: &ReceiverConfig) -> (ComplexBuffer, f64) {
    let p = downconvert(bb, tx.pilot.freq_hz);
    let taps = spectrum::lowpass_taps(rx.pilot_isolation_hz, bb.rate, 1001);
    let filtered = spectrum::convolve_same(&p.samples, &taps);
    let dec: Vec<Complex64> = filtered.iter().step_by(rx.decimation).copied().collect();
    // noise density next to the pilot, away from the line
    let psd = spectrum::welch(&p.samples, p.rate, 4096);
    let lo = 3.0 * rx.pilot_isolation_hz;
    let hi = lo + 5e6;
    let density = (psd.band_density(lo, hi) + psd.band_density(-hi, -lo)) / 2.0 / psd.resolution;
    let dec_rate = bb.rate / rx.decimation as f64;
    (ComplexBuffer { samples: dec, rate: dec_rate }, density * dec_rate / 2.0)
}

/// Runs the full chain on a signal trace. `reference` is Alice's temporal-mode
/// copy of the frame with its reference positions marked.
pub fn receive_signal(
    trace: &RealBuffer,
    whitening: &WhiteningFilter,
    reference: &SymbolFrame,
    tx: &TxConfig,
    rx: &ReceiverConfig,
) -> Result<RecoveredFrame> {
    let white = whitening.apply(trace)?;
    let pilot_nominal = rx.nominal_if_hz + tx.pilot.freq_hz;
    let band = (pilot_nominal - rx.pilot_search_hz, pilot_nominal + rx.pilot_search_hz);
    let f_pilot = estimate_pilot_frequency(&white, band, 1e6)?;
    let offset = f_pilot - tx.pilot.freq_hz;
    let bb = downconvert(&to_complex(&white), offset);
    let (pilot, r) = isolate_pilot(&bb, tx, rx);
    let ukf = UkfConfig::for_linewidth(rx.assumed_linewidth_hz, pilot.rate, r);
    let track = ukf_phase_track(&pilot, &ukf)?;
    let phases = upsample_track(&track.phases, rx.decimation, 0, bb.len());
    let corrected = phase_correct(&bb, &phases)?;
    let mf = symbol_stage(&corrected, tx)?;
    let sync = match rx.fixed_phase {
        Some(p) => acquire_timing_at(&mf, reference, tx.sps()?, rx.sync_max_lag, [p])?,
        None => acquire_timing(&mf, reference, tx.sps()?, rx.sync_max_lag)?,
    };
    let lag = sync.lag.max(0) as usize;
    let symbols = downsample(&mf, tx.sps()?, lag, reference.len(), tx.baud)?;
    Ok(RecoveredFrame {
        symbols,
        sync,
        freq_offset_hz: offset,
        residual_phase_var: track.mean_posterior_var(),
        pilot_amplitude: track.amplitude,
    })
}

/// Vacuum or electronic trace through the same filters, at the signal frame's
/// frequency and timing.
pub fn receive_noise(trace: &RealBuffer, whitening: &WhiteningFilter, timing: &FrameTiming, tx: &TxConfig) -> Result<SymbolFrame> {
    let bb = downconvert(&baseband(trace, whitening)?, timing.freq_offset_hz);
    let mf = symbol_stage(&bb, tx)?;
    downsample(&mf, tx.sps()?, timing.lag, timing.n_symbols, tx.baud)
}
