//! One complete quantum link: Alice's DSP, IQ modulator, fiber, heterodyne
//! detector and Bob's receiver, with shot-noise calibration and channel
//! estimation per frame.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::buffer::{ComplexBuffer, RealBuffer, SymbolFrame};
use crate::error::{Error, Result};
use crate::optics::{
    abc_dither, attenuate_to_va, heterodyne_detect, iq_transfer_exact, propagate, AbcDither, ChannelParams,
    DetectorParams, IqModulatorParams, MeasurementKind, QuantumBandMask,
};
use crate::random::RandomSource;
use crate::rx::{build_whitening, receive_noise, receive_signal, ReceiverConfig, RecoveredFrame, WhiteningFilter};
use crate::security::{calibrate_shot_noise, estimate_channel, Calibration, ChannelEstimate};
use crate::tx::{alice_frame, temporal_mode_symbols, AliceFrame, TxConfig};
use crate::units::{Decibel, Pnu};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub tx: TxConfig,
    pub rx: ReceiverConfig,
    pub detector: DetectorParams,
    /// Modulation variance per quadrature at Alice's output.
    pub va: f64,
    pub eta: f64,
    pub linewidth_hz: f64,
    /// Laser/LO offset. The receiver searches around its own nominal value.
    pub if_hz: f64,
    /// Excess noise referred to Bob's detector output, mPNU.
    pub u_excess_mpnu: f64,
    /// Residual carrier below the modulated signal, set by the bias dither.
    pub carrier_suppression_db: f64,
    pub v_pi: f64,
    pub v_pi_pm: f64,
    /// DAC full scale in units of `v_pi`.
    pub drive_fraction: f64,
    pub symbols_per_frame: usize,
    /// Vacuum frames used to design the whitening filter.
    pub whitening_frames: usize,
    /// Frames whose timing is averaged into a common sampling phase; zero
    /// leaves every frame to find its own.
    pub timing_frames: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        // desk frames are short, so more of each is disclosed for timing
        LinkConfig {
            tx: TxConfig { reference_fraction: 0.1, ..TxConfig::default() },
            rx: ReceiverConfig::default(),
            detector: DetectorParams::default(),
            va: 0.27,
            eta: 0.24,
            linewidth_hz: 200.0,
            if_hz: 200.3e6,
            u_excess_mpnu: 0.73,
            carrier_suppression_db: 25.0,
            v_pi: 3.5,
            v_pi_pm: 3.0,
            drive_fraction: 0.1,
            symbols_per_frame: 10_000,
            whitening_frames: 4,
            timing_frames: 8,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        Pnu::new(self.va)?;
        Pnu::from_mpnu(self.u_excess_mpnu)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param("eta", format!("{}", self.eta)));
        }
        if !(self.drive_fraction > 0.0 && self.drive_fraction < 1.0) {
            return Err(Error::param("drive_fraction", format!("{} must be in (0, 1)", self.drive_fraction)));
        }
        if self.symbols_per_frame < 1000 {
            return Err(Error::param("symbols_per_frame", "need at least 1000 symbols per frame"));
        }
        self.tx.sps()?;
        Ok(())
    }

    fn modulator(&self) -> IqModulatorParams {
        IqModulatorParams::dark_fringe(self.v_pi, self.v_pi_pm)
    }
}

/// Optical field after the modulator and the attenuator, plus the factor that
/// converts Alice's unit-variance symbols to PNU.
#[derive(Debug, Clone)]
pub struct PreparedFrame {
    pub alice: AliceFrame,
    pub field: ComplexBuffer,
    pub pnu_per_unit: f64,
}

pub fn prepare(cfg: &LinkConfig, src: &RandomSource) -> Result<PreparedFrame> {
    let alice = alice_frame(&cfg.tx, cfg.symbols_per_frame, &src.child("alice", 0))?;
    let p = cfg.modulator();
    let volts = cfg.drive_fraction * cfg.v_pi / alice.drive.full_scale;
    let n = alice.drive.i.len();
    let rate = alice.drive.i.rate;

    // dither sized against the quantum signal power at the modulator output
    let k = std::f64::consts::PI / (2.0 * cfg.v_pi);
    let gain = 0.5 * k * volts;
    let sig_power = gain * gain * alice.quantum.mean_power();
    let dither = AbcDither::for_suppression(Decibel(cfg.carrier_suppression_db), sig_power);
    let (d1, d2) = abc_dither(n, rate, &dither, &p);
    let v1 = RealBuffer::new(alice.drive.i.samples.iter().zip(&d1).map(|(v, d)| v * volts + d).collect(), rate)?;
    let v2 = RealBuffer::new(alice.drive.q.samples.iter().zip(&d2).map(|(v, d)| v * volts + d).collect(), rate)?;
    let e = iq_transfer_exact(&v1, &v2, &p)?;

    // scale so the symbols carry Va; the residual carrier and pilot ride along
    let target = cfg.va;
    let q_scaled = ComplexBuffer::new(alice.quantum.samples.iter().map(|z| z * gain).collect(), rate)?;
    let band = QuantumBandMask { lo_hz: 0.0, hi_hz: cfg.tx.quantum_half_bandwidth(), sps: cfg.tx.sps()? };
    let att = attenuate_to_va(&q_scaled, Pnu::new(target)?, &band)?;
    let field = e.with_samples(e.samples.iter().map(|z| z * att.scale).collect());
    Ok(PreparedFrame { alice, field, pnu_per_unit: gain * att.scale })
}

pub fn channel(cfg: &LinkConfig, u_mpnu: f64) -> Result<ChannelParams> {
    // excess noise is specified at the detector output, injected before τ
    Ok(ChannelParams {
        eta: cfg.eta,
        linewidth_hz: cfg.linewidth_hz,
        freq_offset_hz: cfg.if_hz,
        u_excess: Pnu::new(u_mpnu * 1e-3 / cfg.detector.tau)?,
    })
}

fn silent(len: usize, rate: f64) -> Result<ComplexBuffer> {
    ComplexBuffer::new(vec![Complex64::new(0.0, 0.0); len], rate)
}

pub fn noise_trace(cfg: &LinkConfig, kind: MeasurementKind, len: usize, src: &RandomSource) -> Result<RealBuffer> {
    heterodyne_detect(&silent(len, cfg.tx.rate)?, &cfg.detector, kind, src)
}

pub fn design_whitening(cfg: &LinkConfig, len: usize, src: &RandomSource) -> Result<WhiteningFilter> {
    let frames = (0..cfg.whitening_frames.max(1))
        .map(|i| noise_trace(cfg, MeasurementKind::Vacuum, len, &src.child("whitening", i as u64)))
        .collect::<Result<Vec<_>>>()?;
    build_whitening(&frames, cfg.rx.whitening_segment)
}

/// Everything one frame yields.
#[derive(Debug, Clone)]
pub struct FrameOutcome {
    pub alice_pnu: SymbolFrame,
    pub bob_raw: SymbolFrame,
    pub vacuum: SymbolFrame,
    pub electronic: SymbolFrame,
    pub freq_offset_hz: f64,
    pub sync_lag: isize,
    pub residual_phase_var: f64,
    pub clip_fraction: f64,
}

impl FrameOutcome {
    pub fn calibration(&self) -> Result<Calibration> {
        calibrate_shot_noise(std::slice::from_ref(&self.vacuum), std::slice::from_ref(&self.electronic))
    }

    pub fn estimate(&self, tau: f64) -> Result<ChannelEstimate> {
        estimate_channel(&self.alice_pnu, &self.bob_raw, &self.calibration()?, tau)
    }
}

/// Whitening design length, long enough for a stable PSD.
pub fn trace_len(cfg: &LinkConfig) -> Result<usize> {
    let sps = cfg.tx.sps()?;
    Ok(cfg.symbols_per_frame * sps + cfg.tx.span_symbols * sps + 1)
}

/// Signal path of one frame: Alice's reference copy and Bob's recovery.
pub struct SignalFrame {
    pub prepared: PreparedFrame,
    pub reference: SymbolFrame,
    pub recovered: RecoveredFrame,
    pub trace_len: usize,
}

pub fn run_signal(cfg: &LinkConfig, whitening: &WhiteningFilter, u_mpnu: f64, src: &RandomSource) -> Result<SignalFrame> {
    let prepared = prepare(cfg, &src.child("prepare", 0))?;
    let rx_field = propagate(&prepared.field, &channel(cfg, u_mpnu)?, &src.child("channel", 0))?;
    let trace = heterodyne_detect(&rx_field, &cfg.detector, MeasurementKind::Signal, &src.child("detect", 0))?;
    let reference = temporal_mode_symbols(&cfg.tx, &prepared.alice)?;
    let recovered = receive_signal(&trace, whitening, &reference, &cfg.tx, &cfg.rx)?;
    Ok(SignalFrame { prepared, reference, recovered, trace_len: trace.len() })
}

pub fn run_frame(cfg: &LinkConfig, whitening: &WhiteningFilter, u_mpnu: f64, src: &RandomSource) -> Result<FrameOutcome> {
    let SignalFrame { prepared, reference, recovered, trace_len: len } = run_signal(cfg, whitening, u_mpnu, src)?;
    let timing = recovered.timing();
    let vac = noise_trace(cfg, MeasurementKind::Vacuum, len, &src.child("vacuum", 0))?;
    let ele = noise_trace(cfg, MeasurementKind::Electronic, len, &src.child("electronic", 0))?;
    let vacuum = receive_noise(&vac, whitening, &timing, &cfg.tx)?;
    let electronic = receive_noise(&ele, whitening, &timing, &cfg.tx)?;
    let scale = prepared.pnu_per_unit;
    let mut alice_pnu = reference;
    alice_pnu.symbols.iter_mut().for_each(|z| *z *= scale);
    Ok(FrameOutcome {
        alice_pnu,
        bob_raw: recovered.symbols,
        vacuum,
        electronic,
        freq_offset_hz: recovered.freq_offset_hz,
        sync_lag: recovered.sync.lag,
        residual_phase_var: recovered.residual_phase_var,
        clip_fraction: prepared.alice.drive.clip_fraction,
    })
}

/// Whitening filter and sampling phase shared by all frames of a run.
#[derive(Debug, Clone)]
pub struct LinkSession {
    pub cfg: LinkConfig,
    pub whitening: WhiteningFilter,
    root: RandomSource,
}

impl LinkSession {
    pub fn open(cfg: &LinkConfig, src: &RandomSource) -> Result<Self> {
        cfg.validate()?;
        let whitening = design_whitening(cfg, trace_len(cfg)?, &src.child("whitening", 0))?;
        let mut cfg = cfg.clone();
        if cfg.timing_frames > 0 && cfg.rx.fixed_phase.is_none() {
            let sps = cfg.tx.sps()?;
            // circular mean of the per-frame phases, weighted by peak strength
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..cfg.timing_frames {
                let rec = run_signal(&cfg, &whitening, cfg.u_excess_mpnu, &src.child("timing", i as u64))?.recovered;
                let ang = 2.0 * std::f64::consts::PI * rec.sync.lag.rem_euclid(sps as isize) as f64 / sps as f64;
                acc += Complex64::from_polar(rec.sync.peak_correlation.powi(2), ang);
            }
            let phase = (acc.arg() / (2.0 * std::f64::consts::PI) * sps as f64).round().rem_euclid(sps as f64);
            cfg.rx.fixed_phase = Some(phase as usize % sps);
        }
        Ok(LinkSession { cfg, whitening, root: src.clone() })
    }

    pub fn frame(&self, u_mpnu: f64, index: u64) -> Result<FrameOutcome> {
        run_frame(&self.cfg, &self.whitening, u_mpnu, &self.root.child("frame", index))
    }

    /// Signal path only, with the same randomness as `frame(u_mpnu, index)`.
    pub fn signal(&self, u_mpnu: f64, index: u64) -> Result<SignalFrame> {
        run_signal(&self.cfg, &self.whitening, u_mpnu, &self.root.child("frame", index))
    }
}

/// Pools frames into a single estimate, the way a long key run would.
pub fn pooled_estimate(frames: &[FrameOutcome], tau: f64) -> Result<ChannelEstimate> {
    if frames.is_empty() {
        return Err(Error::param("frames", "nothing to pool"));
    }
    let vac: Vec<SymbolFrame> = frames.iter().map(|f| f.vacuum.clone()).collect();
    let ele: Vec<SymbolFrame> = frames.iter().map(|f| f.electronic.clone()).collect();
    let cal = calibrate_shot_noise(&vac, &ele)?;
    // per-frame gains differ by the phase reference, so rotate each frame onto
    // Alice before concatenating
    let mut a = Vec::new();
    let mut b = Vec::new();
    for f in frames {
        let sab: Complex64 = f.alice_pnu.symbols.iter().zip(&f.bob_raw.symbols).map(|(x, y)| x.conj() * y).sum();
        let rot = (sab / sab.norm()).conj();
        a.extend_from_slice(&f.alice_pnu.symbols);
        b.extend(f.bob_raw.symbols.iter().map(|y| y * rot));
    }
    let baud = frames[0].alice_pnu.baud;
    estimate_channel(&SymbolFrame::new(a, baud)?, &SymbolFrame::new(b, baud)?, &cal, tau)
}
