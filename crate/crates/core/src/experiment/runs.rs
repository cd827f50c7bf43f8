//! The study's experiments. Each returns typed results and, through
//! [`ArtifactWriter`], the CSV tables behind one figure or table.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{scaled, ExperimentConfig};
use super::io::{read_complex_waveform, read_csv, read_real_waveform, write_complex_waveform, write_real_waveform, ArtifactWriter};
use super::link::{channel, noise_trace, pooled_estimate, prepare, FrameOutcome, LinkConfig, LinkSession};
use crate::buffer::SymbolFrame;
use crate::error::{Error, Result, ResultExt};
use crate::optics::{heterodyne_detect, propagate, MeasurementKind};
use crate::pa::{derive_seed, toeplitz_hash, unpack_bits, write_key, KeyManifest};
use crate::random::{draw_uniform_bits, RandomSource};
use crate::recon::{
    awgn_capacity, construct_matrix, efficiency, fer_benchmark, plan_puncturing, threshold_search, DeEngine,
    FerChannel, FerConfig, FerResult, ParityMatrix,
};
use crate::rx::{autocorrelation, build_whitening, receive_noise, receive_signal};
use crate::security::{
    composable_key_length, null_key_threshold, positive_key_onset, BlockSize, ChannelEstimate, KeyAccounting,
    KeyInputs, NoiseBudget,
};
use crate::tx::{temporal_mode_symbols, HighPassSpec};

/// One row per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRow {
    pub u_injected_mpnu: f64,
    pub frame: u64,
    pub eta_tau: f64,
    pub t_mpnu: f64,
    pub u_mpnu: f64,
    pub u_sigma_mpnu: f64,
    pub total_noise_mpnu: f64,
    pub freq_offset_hz: f64,
    pub sync_lag: i64,
    pub residual_phase_var: f64,
}

/// Receiver record of one frame, in raw receiver units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: u64,
    pub signal_var: f64,
    pub vacuum_var: f64,
    pub electronic_var: f64,
    pub sync_lag: i64,
    pub freq_offset_hz: f64,
    pub residual_phase_var: f64,
}

impl FrameRecord {
    fn new(frame: u64, f: &FrameOutcome) -> Self {
        FrameRecord {
            frame,
            signal_var: f.bob_raw.quadrature_variance(),
            vacuum_var: f.vacuum.quadrature_variance(),
            electronic_var: f.electronic.quadrature_variance(),
            sync_lag: f.sync_lag as i64,
            freq_offset_hz: f.freq_offset_hz,
            residual_phase_var: f.residual_phase_var,
        }
    }
}

fn frame_row(u_injected: f64, frame: u64, f: &FrameOutcome, tau: f64) -> Result<FrameRow> {
    let e = f.estimate(tau)?;
    Ok(FrameRow {
        u_injected_mpnu: u_injected,
        frame,
        eta_tau: e.eta_tau,
        t_mpnu: e.budget.t.mpnu(),
        u_mpnu: e.u_raw * 1e3,
        u_sigma_mpnu: e.u_sigma * 1e3,
        total_noise_mpnu: (e.budget.t.value() + e.u_raw) * 1e3,
        freq_offset_hz: f.freq_offset_hz,
        sync_lag: f.sync_lag as i64,
        residual_phase_var: f.residual_phase_var,
    })
}

/// Frames `0..n` of a session at one excess-noise level, in parallel.
fn run_frames(session: &LinkSession, u_mpnu: f64, n: usize) -> Result<Vec<FrameOutcome>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| session.frame(u_mpnu, i).context(|| format!("frame {i} at u = {u_mpnu} mPNU")))
        .collect()
}

/// Pooled result of a batch of frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledRow {
    pub u_injected_mpnu: f64,
    pub frames: usize,
    pub symbols: usize,
    pub eta: f64,
    pub t_mpnu: f64,
    pub u_mpnu: f64,
    pub u_sigma_mpnu: f64,
    /// Fraction of frames whose own estimate lies within 3σ of the injection.
    pub within_3sigma: f64,
}

fn pooled_row(u_injected: f64, frames: &[FrameOutcome], rows: &[FrameRow], tau: f64) -> Result<(PooledRow, ChannelEstimate)> {
    let p = pooled_estimate(frames, tau)?;
    let inside = rows.iter().filter(|r| (r.u_mpnu - u_injected).abs() <= 3.0 * r.u_sigma_mpnu).count();
    Ok((
        PooledRow {
            u_injected_mpnu: u_injected,
            frames: frames.len(),
            symbols: p.n_symbols,
            eta: p.eta_tau / tau,
            t_mpnu: p.budget.t.mpnu(),
            u_mpnu: p.u_raw * 1e3,
            u_sigma_mpnu: p.u_sigma * 1e3,
            within_3sigma: inside as f64 / rows.len().max(1) as f64,
        },
        p,
    ))
}

// ---------------------------------------------------------------- link runs

#[derive(Debug, Clone)]
pub struct LinkStudy {
    pub rows: Vec<FrameRow>,
    pub records: Vec<FrameRecord>,
    pub pooled: Vec<PooledRow>,
    pub sampling_phase: Option<usize>,
}

fn link_study(link: &LinkConfig, levels: &[f64], frames: usize, src: &RandomSource) -> Result<(LinkStudy, Vec<ChannelEstimate>)> {
    let session = LinkSession::open(link, src)?;
    let tau = link.detector.tau;
    let mut study = LinkStudy { rows: Vec::new(), records: Vec::new(), pooled: Vec::new(), sampling_phase: session.cfg.rx.fixed_phase };
    let mut estimates = Vec::new();
    for &u in levels {
        let outcomes = run_frames(&session, u, frames)?;
        let rows = outcomes
            .iter()
            .enumerate()
            .map(|(i, f)| frame_row(u, i as u64, f, tau).context(|| format!("estimate of frame {i}")))
            .collect::<Result<Vec<_>>>()?;
        study.records.extend(outcomes.iter().enumerate().map(|(i, f)| FrameRecord::new(i as u64, f)));
        let (row, est) = pooled_row(u, &outcomes, &rows, tau)?;
        study.rows.extend(rows);
        study.pooled.push(row);
        estimates.push(est);
    }
    Ok((study, estimates))
}

/// Direct fibre-less link: `η = 1`, no excess noise. Shows the floor of the
/// receiver chain on its own.
pub fn backtoback(cfg: &ExperimentConfig, scale: f64, src: &RandomSource) -> Result<LinkStudy> {
    let link = LinkConfig { eta: 1.0, u_excess_mpnu: 0.0, ..cfg.link.clone() };
    Ok(link_study(&link, &[0.0], scaled(cfg.backtoback.frames, scale), src)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRow {
    pub u_injected_mpnu: f64,
    pub u_estimated_mpnu: f64,
    pub n_symbols: u64,
    pub snr: f64,
    pub chi_wc: f64,
    pub i_ab: f64,
    pub key_length: u64,
    pub key_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct EndToEnd {
    pub link: LinkStudy,
    pub keys: Vec<KeyRow>,
    pub accounting: Vec<KeyAccounting>,
}

/// Estimation at several injected excess-noise levels on identical frames,
/// then the key a full-size run would give at each estimate.
pub fn end_to_end(cfg: &ExperimentConfig, scale: f64, src: &RandomSource) -> Result<EndToEnd> {
    let (link, estimates) = link_study(&cfg.link, &cfg.e2e.u_mpnu, scaled(cfg.e2e.frames, scale), src)?;
    let sec = &cfg.security;
    let mut keys = Vec::new();
    let mut accounting = Vec::new();
    for (row, est) in link.pooled.iter().zip(&estimates) {
        let budget = NoiseBudget::new(cfg.link.va, est.budget.eta, cfg.link.detector.tau, est.budget.t.value(), est.u_raw.max(0.0))?;
        let k = KeyInputs { budget, beta: sec.beta, fer: sec.fer, block: BlockSize::Finite(sec.n_symbols), finite: sec.finite };
        let acc = composable_key_length(&k)?;
        keys.push(KeyRow {
            u_injected_mpnu: row.u_injected_mpnu,
            u_estimated_mpnu: row.u_mpnu,
            n_symbols: sec.n_symbols,
            snr: acc.snr,
            chi_wc: acc.chi,
            i_ab: acc.i_ab,
            key_length: acc.key_length,
            key_fraction: acc.key_fraction,
        });
        accounting.push(acc);
    }
    Ok(EndToEnd { link, keys, accounting })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfRow {
    pub order: usize,
    pub lag: usize,
    pub acf_mean: f64,
    pub acf_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfSummary {
    pub order: usize,
    pub cutoff_hz: f64,
    /// Smallest mean autocorrelation over lags 1 to 5.
    pub min_acf_lag_1_5: f64,
    /// Largest mean |autocorrelation| over lags ≥ 1.
    pub max_abs_acf: f64,
}

/// Autocorrelation of Bob's recovered symbols with high-pass filters of one
/// cutoff and several orders. Every order sees the same frames.
pub fn acf_study(cfg: &ExperimentConfig, scale: f64, src: &RandomSource) -> Result<(Vec<AcfRow>, Vec<AcfSummary>)> {
    let a = &cfg.fig3;
    let frames = scaled(a.frames, scale);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &order in &a.orders {
        let mut link = cfg.link.clone();
        link.tx.hpf = Some(HighPassSpec::butterworth(order, a.cutoff_hz, link.tx.rate));
        link.symbols_per_frame = a.symbols_per_frame;
        link.timing_frames = link.timing_frames.min(2);
        let session = LinkSession::open(&link, src).context(|| format!("order {order}"))?;
        let acfs = (0..frames as u64)
            .into_par_iter()
            .map(|i| {
                let s = session.signal(link.u_excess_mpnu, i).context(|| format!("order {order}, frame {i}"))?;
                autocorrelation(&s.recovered.symbols, a.max_lag)
            })
            .collect::<Result<Vec<_>>>()?;
        let n = acfs.len() as f64;
        for lag in 0..=a.max_lag {
            let mean = acfs.iter().map(|c| c[lag]).sum::<f64>() / n;
            let var = if acfs.len() > 1 { acfs.iter().map(|c| (c[lag] - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            rows.push(AcfRow { order, lag, acf_mean: mean, acf_std: var.sqrt() });
        }
        let mine: Vec<&AcfRow> = rows.iter().filter(|r| r.order == order).collect();
        summary.push(AcfSummary {
            order,
            cutoff_hz: a.cutoff_hz,
            min_acf_lag_1_5: mine[1..=5.min(a.max_lag)].iter().map(|r| r.acf_mean).fold(f64::INFINITY, f64::min),
            max_abs_acf: mine[1..].iter().map(|r| r.acf_mean.abs()).fold(0.0, f64::max),
        });
    }
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionRow {
    pub suppression_db: f64,
    pub frames: usize,
    /// Trusted plus untrusted noise, mPNU.
    pub total_noise_mean: f64,
    pub total_noise_std: f64,
    /// Standard error of the mean.
    pub total_noise_sem: f64,
}

/// Total noise against the residual carrier left by the bias controller.
pub fn suppression_sweep(cfg: &ExperimentConfig, scale: f64, src: &RandomSource) -> Result<(Vec<SuppressionRow>, Vec<FrameRow>)> {
    let frames = scaled(cfg.fig4.frames, scale);
    let base = LinkSession::open(&cfg.link, src)?;
    let tau = cfg.link.detector.tau;
    let mut out = Vec::new();
    let mut all_rows = Vec::new();
    for &cs in &cfg.fig4.suppression_db {
        let mut session = base.clone();
        session.cfg.carrier_suppression_db = cs;
        let outcomes = run_frames(&session, cfg.link.u_excess_mpnu, frames).context(|| format!("suppression {cs} dB"))?;
        let rows = outcomes
            .iter()
            .enumerate()
            .map(|(i, f)| frame_row(cfg.link.u_excess_mpnu, i as u64, f, tau))
            .collect::<Result<Vec<_>>>()?;
        let n = rows.len() as f64;
        let mean = rows.iter().map(|r| r.total_noise_mpnu).sum::<f64>() / n;
        let var = if rows.len() > 1 { rows.iter().map(|r| (r.total_noise_mpnu - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        out.push(SuppressionRow {
            suppression_db: cs,
            frames,
            total_noise_mean: mean,
            total_noise_std: var.sqrt(),
            total_noise_sem: (var / n).sqrt(),
        });
        all_rows.extend(rows);
    }
    Ok((out, all_rows))
}

// ----------------------------------------------------------------- key rate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyrateRow {
    pub log10_n: f64,
    pub n_symbols: u64,
    pub key_fraction: f64,
    pub key_length: u64,
    pub chi_wc: f64,
    pub u_wc_mpnu: f64,
    /// Excess noise at which the key vanishes, when it exists.
    pub null_key_threshold_mpnu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyrateSummary {
    pub snr: f64,
    pub i_ab: f64,
    pub chi: f64,
    pub n_symbols: u64,
    pub key_fraction: f64,
    pub key_length: u64,
    pub null_key_threshold_mpnu: f64,
    pub onset_n: u64,
    pub asymptotic_key_fraction: f64,
    pub asymptotic_threshold_mpnu: f64,
}

/// Composable key fraction against block size at the configured operating
/// point. Pure formula evaluation.
pub fn keyrate_vs_n(cfg: &ExperimentConfig) -> Result<(Vec<KeyrateRow>, KeyrateSummary)> {
    let sec = &cfg.security;
    let inputs = |block| -> Result<KeyInputs> {
        Ok(KeyInputs { budget: sec.budget()?, beta: sec.beta, fer: sec.fer, block, finite: sec.finite })
    };
    let mut rows = Vec::new();
    for &e in &cfg.fig5.log10_n {
        let n = 10f64.powf(e).round() as u64;
        let k = inputs(BlockSize::Finite(n))?;
        let (fraction, length, chi, u_wc) = match composable_key_length(&k) {
            Ok(a) => (a.key_fraction, a.key_length, a.chi, a.u_wc * 1e3),
            Err(Error::Unphysical(_)) => (0.0, 0, f64::NAN, f64::NAN),
            Err(e) => return Err(e.context(format!("N = {n}"))),
        };
        let th = null_key_threshold(&k).ok().map(|p| p.mpnu());
        rows.push(KeyrateRow { log10_n: e, n_symbols: n, key_fraction: fraction, key_length: length, chi_wc: chi, u_wc_mpnu: u_wc, null_key_threshold_mpnu: th });
    }
    let at = inputs(BlockSize::Finite(sec.n_symbols))?;
    let acc = composable_key_length(&at)?;
    let asym = inputs(BlockSize::Asymptotic)?;
    let (lo, hi) = cfg.fig5.onset_range;
    let summary = KeyrateSummary {
        snr: acc.snr,
        i_ab: acc.i_ab,
        chi: crate::security::holevo_bound(&sec.budget()?)?,
        n_symbols: sec.n_symbols,
        key_fraction: acc.key_fraction,
        key_length: acc.key_length,
        null_key_threshold_mpnu: null_key_threshold(&at)?.mpnu(),
        onset_n: positive_key_onset(&at, lo, hi)?,
        asymptotic_key_fraction: composable_key_length(&asym)?.key_fraction,
        asymptotic_threshold_mpnu: null_key_threshold(&asym)?.mpnu(),
    };
    Ok((rows, summary))
}

// ----------------------------------------------------------- reconciliation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub rate: f64,
    pub sigma_de: f64,
    pub snr_db: f64,
    pub sigma_shannon: f64,
    pub beta_code: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub evaluations: usize,
    pub bin_width: f64,
}

/// Noise level at which `½log2(1 + 1/σ²)` equals `rate`.
pub fn shannon_sigma(rate: f64) -> f64 {
    1.0 / ((2f64).powf(2.0 * rate) - 1.0).sqrt()
}

/// Density-evolution threshold of the configured ensemble.
pub fn decoding_threshold(cfg: &ExperimentConfig) -> Result<ThresholdRow> {
    let r = &cfg.reconciliation;
    let e = r.load_ensemble()?;
    let de = r.de();
    let th = threshold_search(&e, &de, DeEngine::Quantized, r.threshold_bracket, r.threshold_resolution)?;
    let snr = 1.0 / (th.sigma * th.sigma);
    Ok(ThresholdRow {
        rate: e.rate(),
        sigma_de: th.sigma,
        snr_db: 10.0 * snr.log10(),
        sigma_shannon: shannon_sigma(e.rate()),
        beta_code: e.rate() / awgn_capacity(snr),
        bracket_lo: th.bracket.0,
        bracket_hi: th.bracket.1,
        evaluations: th.evaluations,
        bin_width: de.bin_width,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub p: usize,
    pub rate_punctured: f64,
    pub beta: f64,
}

/// Closed-form efficiency of each puncturing length, no decoding.
pub fn efficiency_table(k: usize, n: usize, punctures: &[usize], snr: f64) -> Result<Vec<EfficiencyRow>> {
    punctures
        .iter()
        .map(|&p| {
            Ok(EfficiencyRow { p, rate_punctured: k as f64 / (n - p.min(n - 1)) as f64, beta: efficiency(p, k, n, snr)? })
        })
        .collect()
}

pub fn load_matrix(cfg: &ExperimentConfig, src: &RandomSource) -> Result<ParityMatrix> {
    let r = &cfg.reconciliation;
    let e = r.load_ensemble()?;
    let msrc = src.child("matrix", 0);
    match &r.cache_dir {
        Some(dir) => ParityMatrix::cached(&e, r.n, &msrc, dir),
        None => construct_matrix(&e, r.n, &msrc),
    }
}

/// Frame error rate of the multidimensional reconciliation at each puncturing
/// length.
pub fn fer_table(cfg: &ExperimentConfig, scale: f64, src: &RandomSource) -> Result<(Vec<EfficiencyRow>, Vec<FerResult>)> {
    let r = &cfg.reconciliation;
    let h = load_matrix(cfg, src)?;
    let eff = efficiency_table(h.k, h.n, &r.punctures, r.snr)?;
    let fcfg = FerConfig { snr: r.snr, trials: scaled(r.trials, scale), max_iter: r.max_iterations, channel: FerChannel::Md { dim: r.md_dim } };
    let mut out = Vec::new();
    for &p in &r.punctures {
        let plan = plan_puncturing(&h, p, src)?;
        out.push(fer_benchmark(&h, &plan, &fcfg, &src.child("fer", p as u64)).context(|| format!("p = {p}"))?);
    }
    Ok((eff, out))
}

// ------------------------------------------------------ fixtures and pieces

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRow {
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub reference: bool,
}

fn symbol_rows(f: &SymbolFrame) -> Vec<SymbolRow> {
    f.symbols
        .iter()
        .enumerate()
        .map(|(i, z)| SymbolRow { index: i, re: z.re, im: z.im, reference: f.reference_mask.get(i).copied().unwrap_or(false) })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedFrame {
    pub seed_id: String,
    pub n_symbols: usize,
    pub pnu_per_unit: f64,
    pub u_injected_mpnu: f64,
    pub clip_fraction: f64,
}

/// One frame as waveform fixtures: Alice's drive, then the signal, vacuum and
/// electronic detector traces, plus Alice's reference symbols in PNU.
pub fn simulate_fixtures(cfg: &ExperimentConfig, src: &RandomSource, out: &mut ArtifactWriter) -> Result<SimulatedFrame> {
    let link = &cfg.link;
    link.validate()?;
    let id = src.fingerprint();
    let fsrc = src.child("frame", 0);
    let prep = prepare(link, &fsrc.child("prepare", 0))?;
    let drive = crate::buffer::ComplexBuffer::new(
        prep.alice.drive.i.samples.iter().zip(&prep.alice.drive.q.samples).map(|(&i, &q)| num_complex::Complex64::new(i, q)).collect(),
        prep.alice.drive.i.rate,
    )?;
    write_complex_waveform(&out.path("alice_drive.iq"), &drive, &id)?;
    out.register("alice_drive.iq", drive.len())?;
    let field = propagate(&prep.field, &channel(link, link.u_excess_mpnu)?, &fsrc.child("channel", 0))?;
    let trace = heterodyne_detect(&field, &link.detector, MeasurementKind::Signal, &fsrc.child("detect", 0))?;
    write_real_waveform(&out.path("signal.trace"), &trace, &id)?;
    out.register("signal.trace", trace.len())?;
    for (name, kind) in [("vacuum.trace", MeasurementKind::Vacuum), ("electronic.trace", MeasurementKind::Electronic)] {
        let t = noise_trace(link, kind, trace.len(), &fsrc.child(name, 0))?;
        write_real_waveform(&out.path(name), &t, &id)?;
        out.register(name, t.len())?;
    }
    let mut reference = temporal_mode_symbols(&link.tx, &prep.alice)?;
    reference.symbols.iter_mut().for_each(|z| *z *= prep.pnu_per_unit);
    out.csv("reference.csv", &symbol_rows(&reference))?;
    let meta = SimulatedFrame {
        seed_id: id,
        n_symbols: reference.len(),
        pnu_per_unit: prep.pnu_per_unit,
        u_injected_mpnu: link.u_excess_mpnu,
        clip_fraction: prep.alice.drive.clip_fraction,
    };
    out.json("frame.json", &meta)?;
    Ok(meta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DspReport {
    pub record: FrameRecord,
    pub estimate: ChannelEstimate,
}

/// Bob's receiver on fixtures written by [`simulate_fixtures`].
pub fn dsp_from_fixtures(cfg: &ExperimentConfig, input: &Path, out: &mut ArtifactWriter) -> Result<DspReport> {
    let link = &cfg.link;
    let signal = read_real_waveform(&input.join("signal.trace"))?;
    let vacuum = read_real_waveform(&input.join("vacuum.trace"))?;
    let electronic = read_real_waveform(&input.join("electronic.trace"))?;
    let rows: Vec<SymbolRow> = read_csv(&input.join("reference.csv"))?;
    let alice_pnu = SymbolFrame {
        symbols: rows.iter().map(|r| num_complex::Complex64::new(r.re, r.im)).collect(),
        baud: link.tx.baud,
        reference_mask: rows.iter().map(|r| r.reference).collect(),
    };
    // also fine to check the drive fixture parses, it documents the frame
    read_complex_waveform(&input.join("alice_drive.iq"))?;
    let whitening = build_whitening(std::slice::from_ref(&vacuum), link.rx.whitening_segment)?;
    let rec = receive_signal(&signal, &whitening, &alice_pnu, &link.tx, &link.rx)?;
    let timing = rec.timing();
    let outcome = FrameOutcome {
        alice_pnu,
        bob_raw: rec.symbols.clone(),
        vacuum: receive_noise(&vacuum, &whitening, &timing, &link.tx)?,
        electronic: receive_noise(&electronic, &whitening, &timing, &link.tx)?,
        freq_offset_hz: rec.freq_offset_hz,
        sync_lag: rec.sync.lag,
        residual_phase_var: rec.residual_phase_var,
        clip_fraction: 0.0,
    };
    let estimate = outcome.estimate(link.detector.tau)?;
    out.csv("symbols.csv", &symbol_rows(&rec.symbols))?;
    let record = FrameRecord::new(0, &outcome);
    out.jsonl("frames.jsonl", std::slice::from_ref(&record))?;
    out.json("estimate.json", &estimate)?;
    Ok(DspReport { record, estimate })
}

/// Privacy amplification of `input` (packed bits, LSB first) or, without
/// input, of seeded random bits.
pub fn amplify(cfg: &ExperimentConfig, input: Option<&Path>, src: &RandomSource, out: &mut ArtifactWriter) -> Result<KeyManifest> {
    let bits = match input {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| Error::from(e).context(p.display().to_string()))?;
            unpack_bits(&bytes, bytes.len() * 8)
        }
        None => draw_uniform_bits(&src.child("reconciled", 0), cfg.pa.input_bits).into_iter().map(u8::from).collect(),
    };
    let output_len = match cfg.pa.output_bits {
        Some(l) => l,
        None => {
            // secret share of the corrected bits at the configured operating point
            let sec = &cfg.security;
            let acc = composable_key_length(&KeyInputs {
                budget: sec.budget()?,
                beta: sec.beta,
                fer: sec.fer,
                block: BlockSize::Finite(sec.n_symbols),
                finite: sec.finite,
            })?;
            let corrected = acc.n_after_ir.unwrap_or(0.0) * acc.beta * acc.i_ab;
            (bits.len() as f64 * acc.key_length as f64 / corrected).floor() as usize
        }
    };
    if output_len == 0 {
        return Err(Error::param("output_bits", "no secret bits at this operating point"));
    }
    let seed = derive_seed(src, bits.len(), output_len)?;
    let key = toeplitz_hash(&bits, &seed)?;
    let f = &cfg.security.finite;
    let m = write_key(out.dir(), &key, &seed, Some((f.eps_pa + f.eps_smooth + f.eps_pe, f.eps_ir)))?;
    out.register("key.bin", key.len())?;
    out.register("key.manifest.json", 1)?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub task: String,
    pub size: usize,
    pub seconds: f64,
    pub per_second: f64,
}

fn timed<T>(task: &str, size: usize, f: impl FnOnce() -> Result<T>) -> Result<(BenchRow, T)> {
    let t = Instant::now();
    let v = f()?;
    let s = t.elapsed().as_secs_f64();
    Ok((BenchRow { task: task.into(), size, seconds: s, per_second: size as f64 / s.max(1e-12) }, v))
}

/// Wall-clock throughput of the heavy stages. Sizes follow `scale`.
pub fn bench(cfg: &ExperimentConfig, scale: f64, src: &RandomSource) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    let pa_in = scaled(1 << 22, scale);
    let bits: Vec<u8> = draw_uniform_bits(&src.child("bench-bits", 0), pa_in).into_iter().map(u8::from).collect();
    let seed = derive_seed(&src.child("bench-seed", 0), pa_in, pa_in / 8)?;
    rows.push(timed("toeplitz_hash_input_bits", pa_in, || toeplitz_hash(&bits, &seed))?.0);

    let n = 10_240;
    let e = cfg.reconciliation.load_ensemble()?;
    let (row, h) = timed("matrix_construction_bits", n, || construct_matrix(&e, n, &src.child("bench-matrix", 0)))?;
    rows.push(row);
    let plan = plan_puncturing(&h, 0, src)?;
    let trials = scaled(20, scale);
    let fcfg = FerConfig { snr: cfg.reconciliation.snr, trials, max_iter: 50, channel: FerChannel::Md { dim: 8 } };
    let (mut row, r) = timed("bp_frames", trials, || fer_benchmark(&h, &plan, &fcfg, &src.child("bench-fer", 0)))?;
    row.size = (r.mean_iterations * trials as f64) as usize;
    row.task = "bp_iterations_n10240".into();
    row.per_second = row.size as f64 / row.seconds;
    rows.push(row);

    let frames = scaled(4, scale);
    let mut link = cfg.link.clone();
    link.timing_frames = 1;
    let session = LinkSession::open(&link, src)?;
    rows.push(timed("link_frames", frames, || (0..frames as u64).map(|i| session.frame(link.u_excess_mpnu, i)).collect::<Result<Vec<_>>>())?.0);
    Ok(rows)
}
