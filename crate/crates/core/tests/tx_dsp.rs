use std::f64::consts::PI;

use cvqkd::spectrum::welch;
use cvqkd::tx::*;
use cvqkd::{ComplexBuffer, RandomSource, SymbolFrame};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tone(freq: f64, rate: f64, n: usize, amp: f64) -> ComplexBuffer {
    let w = 2.0 * PI * freq / rate;
    ComplexBuffer::new((0..n).map(|k| Complex64::from_polar(amp, w * k as f64)).collect(), rate).unwrap()
}

#[test]
fn inversion_centre_and_tail() {
    let g = GaussianConstellation::paper_default(1.0);
    assert_eq!(g.level(g.label_for(0.5)), g.level(0));
    assert!(g.level(0) > 0.0 && g.level(0) < 0.2);
    assert_eq!(g.label_for(f64::MIN_POSITIVE), -32);
    // leftmost level is the centre of the first bin above -3.5 sigma
    let lo = g.levels()[0];
    assert!(lo < -3.3 && lo > -3.5, "{lo}");
}

#[test]
fn inversion_variance_and_histogram() {
    let g = GaussianConstellation::paper_default(0.27);
    let n = 1_000_000;
    let labels = inversion_sample(&RandomSource::from_u64(11), &g, n);
    let var = labels.iter().map(|&l| g.level(l).powi(2)).sum::<f64>() / n as f64;
    assert!((var / g.variance() - 1.0).abs() < 0.02);
    let mut counts = vec![0usize; 64];
    for &l in &labels {
        counts[(l + g.offset()) as usize] += 1;
    }
    // chi-square against the discrete law, bins with tiny expectation merged
    let p = g.probabilities();
    let (mut chi2, mut dof, mut exp_acc, mut obs_acc) = (0.0, 0usize, 0.0, 0.0);
    for (pi, ci) in p.iter().zip(&counts) {
        exp_acc += pi * n as f64;
        obs_acc += *ci as f64;
        if exp_acc >= 20.0 {
            chi2 += (obs_acc - exp_acc).powi(2) / exp_acc;
            dof += 1;
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
    }
    // p > 1e-6 for ~60 degrees of freedom needs chi2 below about 130
    assert!(chi2 < 130.0, "chi2 {chi2} over {dof} bins");
}

#[test]
fn symbols_reproducible_and_independent() {
    let g = GaussianConstellation::paper_default(1.0);
    let a = build_symbols(&RandomSource::from_u64(3), &g, 4, 20e6).unwrap();
    let b = build_symbols(&RandomSource::from_u64(3), &g, 4, 20e6).unwrap();
    assert_eq!(a.symbols, b.symbols);

    let n = 1_000_000;
    let f = build_symbols(&RandomSource::from_u64(4), &g, n, 20e6).unwrap();
    let (mut si, mut sq, mut sii, mut sqq, mut siq) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for z in &f.symbols {
        si += z.re;
        sq += z.im;
        sii += z.re * z.re;
        sqq += z.im * z.im;
        siq += z.re * z.im;
    }
    let nf = n as f64;
    let rho = (siq / nf) / ((sii / nf) * (sqq / nf)).sqrt();
    let bound = 4.0 / nf.sqrt();
    assert!(rho.abs() < bound, "rho {rho}");
    assert!((si / nf).abs() < bound && (sq / nf).abs() < bound);
    let sem = (2.0 / nf).sqrt();
    assert!((f.quadrature_variance() - 1.0).abs() < 3.0 * sem * 1.5);
}

#[test]
fn shaping_impulse_and_superposition() {
    let rrc = RrcFilter::new(0.2, 32, 50).unwrap();
    assert_eq!(rrc.taps.len(), 1601);
    let one = SymbolFrame::new(vec![c(1.0, 0.0)], 20e6).unwrap();
    let y = upsample_shape(&one, &rrc, 1e9).unwrap();
    assert_eq!(y.len(), rrc.taps.len());
    for (a, b) in y.samples.iter().zip(&rrc.taps) {
        assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
    }
    let zeros = SymbolFrame::new(vec![c(0.0, 0.0); 5], 20e6).unwrap();
    assert!(upsample_shape(&zeros, &rrc, 1e9).unwrap().samples.iter().all(|z| z.norm() == 0.0));

    let two = SymbolFrame::new(vec![c(1.0, 0.0), c(1.0, 0.0)], 20e6).unwrap();
    let y = upsample_shape(&two, &rrc, 1e9).unwrap();
    for (n, z) in y.samples.iter().enumerate() {
        let a = rrc.taps.get(n).copied().unwrap_or(0.0);
        let b = if n >= 50 { rrc.taps.get(n - 50).copied().unwrap_or(0.0) } else { 0.0 };
        assert!((z.re - a - b).abs() < 1e-12);
    }
}

#[test]
fn shaped_spectrum_is_band_limited() {
    let g = GaussianConstellation::paper_default(1.0);
    let f = build_symbols(&RandomSource::from_u64(5), &g, 20_000, 20e6).unwrap();
    let rrc = RrcFilter::new(0.2, 32, 50).unwrap();
    let y = upsample_shape(&f, &rrc, 1e9).unwrap();
    let psd = welch(&y.samples, 1e9, 1 << 14);
    let inband = psd.band_density(-10e6, 10e6);
    let outside = psd.band_density(13e6, 400e6).max(psd.band_density(-400e6, -13e6));
    assert!(10.0 * (outside / inband).log10() < -40.0);
}

#[test]
fn rrc_cascade_is_nyquist() {
    let rrc = RrcFilter::new(0.2, 32, 50).unwrap();
    let one = SymbolFrame::new(vec![c(1.0, 0.0)], 20e6).unwrap();
    let y = matched_filter(&upsample_shape(&one, &rrc, 1e9).unwrap(), &rrc);
    let peak = y.samples[2 * rrc.delay()].re;
    let isi: f64 = (1..=32)
        .flat_map(|k| [2 * rrc.delay() + 50 * k, 2 * rrc.delay() - 50 * k])
        .map(|i| y.samples[i].norm_sqr())
        .sum();
    assert!(10.0 * (isi / (peak * peak)).log10() < -40.0);
}

#[test]
fn loopback_evm_without_highpass() {
    let g = GaussianConstellation::paper_default(1.0);
    let f = build_symbols(&RandomSource::from_u64(6), &g, 4000, 20e6).unwrap();
    let rrc = RrcFilter::new(0.2, 32, 50).unwrap();
    let mf = matched_filter(&upsample_shape(&f, &rrc, 1e9).unwrap(), &rrc);
    let b = downsample(&mf, 50, 2 * rrc.delay(), f.len(), 20e6).unwrap();
    let err: f64 = f.symbols.iter().zip(&b.symbols).map(|(a, b)| (a - b).norm_sqr()).sum();
    let sig: f64 = f.symbols.iter().map(|a| a.norm_sqr()).sum();
    assert!((err / sig).sqrt() < 0.01);
}

#[test]
fn highpass_matches_butterworth_magnitude() {
    let rate = 1e9;
    let spec = HighPassSpec::butterworth(5, 190e3, rate);
    let sos = spec.design().unwrap();
    for f in [50e3f64, 190e3, 1e6, 100e6] {
        let want = 1.0 / (1.0 + (190e3 / f).powi(10)).sqrt();
        let got = sos.response(f, rate).norm();
        assert!((20.0 * (got / want).log10()).abs() < 0.2, "{f}");
    }
    let cases = [(190e3, -3.0103, 0.2), (100e6, 0.0, 0.1)];
    for (f, db, tol) in cases {
        let x = tone(f, rate, 400_000, 1.0);
        let y = highpass(&x, &spec).unwrap();
        let tail = &y.samples[200_000..];
        let p = tail.iter().map(|z| z.norm_sqr()).sum::<f64>() / tail.len() as f64;
        assert!((10.0 * p.log10() - db).abs() < tol, "{f}: {}", 10.0 * p.log10());
    }
}

#[test]
fn highpass_rejects_dc() {
    let x = ComplexBuffer::new(vec![c(1.0, -2.0); 300_000], 1e9).unwrap();
    let y = highpass(&x, &HighPassSpec::butterworth(5, 190e3, 1e9)).unwrap();
    assert!(y.samples[250_000..].iter().all(|z| z.norm() < 1e-3 * 5f64.sqrt()));
    // real and imaginary parts see the same filter
    let r = ComplexBuffer::new(vec![c(1.0, 1.0); 1000], 1e9).unwrap();
    let yr = highpass(&r, &HighPassSpec::butterworth(3, 190e3, 1e9)).unwrap();
    assert!(yr.samples.iter().all(|z| z.re == z.im));
}

#[test]
fn pilot_adds_single_line() {
    let band = QuantumBand { half_bandwidth_hz: 12e6, rms: 0.2 };
    let pilot = PilotSpec { freq_hz: 60e6, amplitude_ratio: 10.0 };
    let ap2 = (10.0f64 * 0.2).powi(2);
    let zero = ComplexBuffer::new(vec![c(0.0, 0.0); 1 << 16], 1e9).unwrap();
    let p = add_pilot(&zero, &pilot, &band).unwrap();
    assert!((p.mean_power() / ap2 - 1.0).abs() < 1e-12);

    let g = GaussianConstellation::paper_default(1.0);
    let f = build_symbols(&RandomSource::from_u64(7), &g, 4000, 20e6).unwrap();
    let q = upsample_shape(&f, &RrcFilter::new(0.2, 32, 50).unwrap(), 1e9).unwrap();
    let with = add_pilot(&q, &pilot, &band).unwrap();
    let before = welch(&q.samples, 1e9, 1 << 14);
    let after = welch(&with.samples, 1e9, 1 << 14);
    let line = after.band_power(59e6, 61e6) - before.band_power(59e6, 61e6);
    assert!((line / ap2 - 1.0).abs() < 0.01);
    let qb = after.band_power(-12e6, 12e6) / before.band_power(-12e6, 12e6);
    assert!((qb - 1.0).abs() < 1e-3);
}

#[test]
fn dac_sqnr_of_full_scale_sine() {
    let n = 1 << 18;
    let step = 1.0 / 32768.0;
    let x = tone(1e9 / 2.0f64.sqrt() / 97.0, 1e9, n, 1.0 - step);
    let d = quantize_dac(&x, 16, Some(1.0)).unwrap();
    assert_eq!(d.clip_fraction, 0.0);
    let (mut sig, mut err) = (0.0, 0.0);
    for (k, z) in x.samples.iter().enumerate() {
        sig += z.re * z.re;
        err += (d.i.samples[k] - z.re).powi(2);
    }
    let sqnr = 10.0 * (sig / err).log10();
    assert!((sqnr - (6.02 * 16.0 + 1.76)).abs() < 1.0, "{sqnr}");
    assert!(quantize_dac(&x, 1, None).is_err());
}

#[test]
fn pilot_and_quantum_stay_disjoint_after_dac() {
    let cfg = TxConfig { hpf: None, ..TxConfig::default() };
    let a = alice_frame(&cfg, 4000, &RandomSource::from_u64(8)).unwrap();
    let v: Vec<Complex64> = a.drive.i.samples.iter().zip(&a.drive.q.samples).map(|(&i, &q)| c(i, q)).collect();
    let psd = welch(&v, 1e9, 1 << 14);
    let pilot = psd.band_power(59.5e6, 60.5e6);
    // quantisation noise density in the quantum band, relative to the pilot
    let stray = psd.band_density(20e6, 40e6) * (24e6 / psd.resolution);
    assert!(10.0 * (stray / pilot).log10() < -60.0);
}

#[test]
fn chain_is_deterministic() {
    let cfg = TxConfig::default();
    let a = alice_frame(&cfg, 500, &RandomSource::from_u64(9)).unwrap();
    let b = alice_frame(&cfg, 500, &RandomSource::from_u64(9)).unwrap();
    assert_eq!(a.drive.i.samples, b.drive.i.samples);
    assert_eq!(a.drive.q.samples, b.drive.q.samples);
    let c2 = alice_frame(&cfg, 500, &RandomSource::from_u64(10)).unwrap();
    assert_ne!(a.drive.i.samples, c2.drive.i.samples);
}

proptest! {
    #[test]
    fn labels_monotone_in_uniform(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let g = GaussianConstellation::paper_default(1.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(g.label_for(lo) <= g.label_for(hi));
        prop_assert!((-32..32).contains(&g.label_for(a)));
    }

    #[test]
    fn dac_passes_grid_values(codes in proptest::collection::vec((-128i32..128, -128i32..128), 1..64)) {
        let step = 1.0 / 128.0;
        let x: Vec<Complex64> = codes.iter().map(|&(a, b)| c(a as f64 * step, b as f64 * step)).collect();
        let buf = ComplexBuffer::new(x.clone(), 1e9).unwrap();
        let d = quantize_dac(&buf, 8, Some(1.0)).unwrap();
        for (k, z) in x.iter().enumerate() {
            prop_assert_eq!(d.i.samples[k], z.re.min(127.0 * step));
            prop_assert_eq!(d.q.samples[k], z.im.min(127.0 * step));
        }
    }
}
