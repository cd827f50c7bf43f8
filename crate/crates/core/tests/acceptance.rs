//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs at full size by default. `CVQKD_ACCEPTANCE_SCALE` shrinks the frame
//! counts of the link criteria, `CVQKD_NIGHTLY=1` adds the full-length FER
//! run and `CVQKD_ACCEPTANCE_STRICT=1` turns any failure into a nonzero exit.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use cvqkd::experiment::*;
use cvqkd::optics::{baseband_approx, ossb_approx, sideband_leakage, IqModulatorParams};
use cvqkd::pa::{derive_seed, toeplitz_hash, toeplitz_hash_dense, ToeplitzSeed};
use cvqkd::recon::*;
use cvqkd::rx::estimate_pilot_frequency;
use cvqkd::security::*;
use cvqkd::tx::{matched_filter, upsample_shape, HighPassSpec, RrcFilter};
use cvqkd::{RandomSource, SymbolFrame};
use num_complex::Complex64;
use rand::Rng;

use common::*;

type Outcome = (bool, String);

fn env_flag(name: &str) -> bool {
    std::env::var(name).map(|v| v == "1").unwrap_or(false)
}

fn scale() -> f64 {
    std::env::var("CVQKD_ACCEPTANCE_SCALE").ok().and_then(|v| v.parse().ok()).unwrap_or(1.0)
}

fn a1() -> Outcome {
    let mut rng = RandomSource::from_u64(0xa1).rng();
    let mut worst_bb = f64::MIN;
    let mut worst_ossb = 0.0f64;
    for i in 0..100u64 {
        let v_pi = rng.random_range(2.5..5.0);
        let p = IqModulatorParams::dark_fringe(v_pi, 3.0).with_bias_phases(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
        let w: f64 = rng.random_range(13e6..240e6);
        let alpha = band_limited(&RandomSource::from_u64(1000 + i), 1 << 15, 1e9, 20e6, 0.2, 0.0);
        let (re, im) = split(&alpha);
        let out = baseband_approx(&re, &im, &p).unwrap();
        let leak = sideband_leakage(&out, (-12e6, 12e6), (2.0 * w - 12e6, 2.0 * w + 12e6)).unwrap().0;
        worst_bb = worst_bb.max(leak);
        for r in [0.03, 0.1, 0.3] {
            let mut q = p;
            q.delta_sideband = r * q.mu1;
            let y = ossb_approx(&alpha, &q, w);
            let leak = sideband_leakage(&y, (-w - 12e6, -w + 12e6), (w - 12e6, w + 12e6)).unwrap().0;
            worst_ossb = worst_ossb.max((leak - 20.0 * f64::log10(r)).abs());
        }
    }
    (worst_bb <= -80.0 && worst_ossb <= 0.5, format!("baseband worst image {worst_bb:.1} dB, OSSB worst deviation {worst_ossb:.3} dB"))
}

fn a2() -> Outcome {
    let row = decoding_threshold(&ExperimentConfig::default()).unwrap();
    let ok = (row.sigma_de - 5.93).abs() <= 0.05 && (row.snr_db + 15.46).abs() <= 0.08 && (row.beta_code - 0.988).abs() <= 0.003;
    (
        ok,
        format!(
            "sigma* {:.4} in ({:.4}, {:.4}), {:.2} dB, beta_code {:.2}%, sigma_Sh {:.3}, bin {}",
            row.sigma_de,
            row.bracket_lo,
            row.bracket_hi,
            row.snr_db,
            100.0 * row.beta_code,
            row.sigma_shannon,
            row.bin_width
        ),
    )
}

const TABLE2: [(usize, f64, f64, f64); 7] = [
    (318_000, 0.0290, 92.77, 0.075),
    (320_000, 0.0291, 93.04, 0.215),
    (325_000, 0.0293, 93.70, 0.378),
    (330_000, 0.0295, 94.37, 0.480),
    (335_000, 0.0297, 95.06, 0.716),
    (340_000, 0.0299, 95.75, 0.850),
    (345_000, 0.0302, 96.46, 0.962),
];

fn a3() -> Outcome {
    let ps: Vec<usize> = TABLE2.iter().map(|r| r.0).collect();
    let rows = efficiency_table(20_480, 1_024_000, &ps, 0.0443).unwrap();
    let mut worst = 0.0f64;
    let mut exact = true;
    for (row, (_, r, beta, _)) in rows.iter().zip(TABLE2) {
        exact &= format!("{:.4}", row.rate_punctured) == format!("{r:.4}");
        worst = worst.max((100.0 * row.beta - beta).abs());
    }
    (exact && worst <= 0.1, format!("R_punc exact: {exact}, worst beta deviation {worst:.3} points"))
}

fn a4() -> Outcome {
    let e = MetEnsemble::rate_002();
    let h = construct_matrix(&e, 10_240, &RandomSource::from_u64(0xa4)).unwrap();
    let plan = plan_puncturing(&h, 0, &RandomSource::from_u64(0xa41)).unwrap();
    let fer = |snr: f64| {
        let cfg = FerConfig { snr, trials: 100, max_iter: 500, channel: FerChannel::Md { dim: 8 } };
        fer_benchmark(&h, &plan, &cfg, &RandomSource::from_u64(0xa42)).unwrap().fer
    };
    let (good, bad) = (fer(0.06), fer(0.018));
    let mut ok = good < 0.01 && bad > 0.9;
    let mut msg = format!("CI tier n=10240: FER {good:.2} at SNR 0.06, {bad:.2} at SNR 0.018");
    if env_flag("CVQKD_NIGHTLY") {
        let mut cfg = ExperimentConfig::default();
        cfg.reconciliation.punctures = vec![318_000, 320_000, 330_000, 345_000];
        let (_, res) = fer_table(&cfg, 1.0, &RandomSource::from_u64(0xa43)).unwrap();
        let f: Vec<f64> = res.iter().map(|r| r.fer).collect();
        let monotone = f.windows(2).all(|w| w[0] <= w[1]);
        ok &= (f[1] - 0.215).abs() <= 0.10 && monotone;
        msg += &format!("; nightly FER {f:?}");
    } else {
        msg += "; full-length tier not run (CVQKD_NIGHTLY=1)";
    }
    (ok, msg)
}

fn a5() -> Outcome {
    let k = KeyInputs::paper_defaults(BlockSize::Finite(1_000_000_000));
    let acc = composable_key_length(&k).unwrap();
    let onset = positive_key_onset(&k, 10_000_000, 100_000_000_000).unwrap();
    let th = null_key_threshold(&k).unwrap().mpnu();
    let ok = (acc.key_fraction / 0.007 - 1.0).abs() <= 0.30 && (3e8..=1.2e9).contains(&(onset as f64)) && (th - 1.8).abs() <= 0.6;
    (ok, format!("key fraction {:.5}, onset N {onset}, null-key threshold {th:.3} mPNU", acc.key_fraction))
}

fn a6(s: f64) -> Outcome {
    let r = end_to_end(&ExperimentConfig::default(), s, &RandomSource::from_u64(0xa6)).unwrap();
    let rows = &r.link.rows;
    let inside = rows.iter().filter(|f| (f.u_mpnu - f.u_injected_mpnu).abs() <= 3.0 * f.u_sigma_mpnu).count() as f64 / rows.len() as f64;
    let zero = r.link.pooled.iter().find(|p| p.u_injected_mpnu == 0.0).unwrap();
    // the floor is resolved when the estimate plus its own spread stays below 1 mPNU
    let floor = zero.u_mpnu + zero.u_sigma_mpnu;
    let pooled: Vec<String> =
        r.link.pooled.iter().map(|p| format!("{}→{:.2}±{:.2}", p.u_injected_mpnu, p.u_mpnu, p.u_sigma_mpnu)).collect();
    (
        inside >= 0.95 && floor < 1.0,
        format!("{:.1}% of {} frames within 3σ; pooled mPNU {}; floor bound {floor:.2} mPNU", 100.0 * inside, rows.len(), pooled.join(", ")),
    )
}

fn a7(s: f64) -> Outcome {
    let (_, summary) = acf_study(&ExperimentConfig::default(), s, &RandomSource::from_u64(0xa7)).unwrap();
    let dips: Vec<f64> = summary.iter().map(|r| r.min_acf_lag_1_5).collect();
    let ordered = dips.windows(2).all(|w| w[0] < w[1]);
    let fifth = summary.iter().find(|r| r.order == 5).unwrap().max_abs_acf;
    (ordered && fifth < 0.01, format!("min ACF lags 1..5 for orders 1/3/5: {dips:.4?}; 5th-order max |ACF| {fifth:.4}"))
}

fn a8(s: f64) -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.fig4 = SweepConfig { suppression_db: (0..6).map(|i| 9.0 + 2.0 * i as f64).collect(), frames: 50 };
    let (rows, _) = suppression_sweep(&cfg, s, &RandomSource::from_u64(0xa8)).unwrap();
    let lo = rows.iter().map(|r| r.total_noise_mean - r.total_noise_std).fold(f64::MIN, f64::max);
    let hi = rows.iter().map(|r| r.total_noise_mean + r.total_noise_std).fold(f64::MAX, f64::min);
    let pts: Vec<String> = rows.iter().map(|r| format!("{}dB:{:.2}±{:.2}", r.suppression_db, r.total_noise_mean, r.total_noise_std)).collect();
    (lo <= hi, format!("common band [{lo:.2}, {hi:.2}] mPNU; {}", pts.join(" ")))
}

fn a9() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut rng = RandomSource::from_u64(0xa9).rng();
    let seed = ToeplitzSeed::new((0..23).map(|_| rng.random::<bool>() as u8).collect(), 16, 8).unwrap();
    let exhaustive = (0u32..1 << 16).all(|x| {
        let b: Vec<u8> = (0..16).map(|i| (x >> i & 1) as u8).collect();
        toeplitz_hash(&b, &seed).unwrap() == toeplitz_hash_dense(&b, &seed).unwrap()
    });
    let randomized = (0..20u64).all(|i| {
        let nin = rng.random_range(1..=1usize << 14);
        let nout = rng.random_range(1..=nin);
        let s = derive_seed(&RandomSource::from_u64(0xa90 + i), nin, nout).unwrap();
        let x: Vec<u8> = (0..nin).map(|_| rng.random::<bool>() as u8).collect();
        toeplitz_hash(&x, &s).unwrap() == toeplitz_hash_dense(&x, &s).unwrap()
    });
    ok &= exhaustive && randomized;
    notes.push(format!("Toeplitz exhaustive {exhaustive}, randomized {randomized}"));

    let rrc = RrcFilter::new(0.2, 32, 50).unwrap();
    let one = SymbolFrame::new(vec![Complex64::new(1.0, 0.0)], 20e6).unwrap();
    let y = matched_filter(&upsample_shape(&one, &rrc, 1e9).unwrap(), &rrc);
    let c = 2 * rrc.delay();
    let isi: f64 = (1..=32).flat_map(|k| [c + 50 * k, c - 50 * k]).map(|i| y.samples[i].norm_sqr()).sum();
    let isi_db = 10.0 * (isi / y.samples[c].norm_sqr()).log10();
    ok &= isi_db < -40.0;
    notes.push(format!("RRC ISI {isi_db:.1} dB"));

    let mut worst = 0.0f64;
    for order in [1, 3, 5] {
        let sos = HighPassSpec::butterworth(order, 190e3, 1e9).design().unwrap();
        for f in [30e3f64, 100e3, 190e3, 400e3, 1e6, 100e6] {
            let want = 1.0 / (1.0 + (190e3 / f).powi(2 * order as i32)).sqrt();
            worst = worst.max((20.0 * (sos.response(f, 1e9).norm() / want).log10()).abs());
        }
    }
    ok &= worst < 0.2;
    notes.push(format!("Butterworth worst {worst:.4} dB"));

    let n = 1 << 18;
    let mut werr = 0.0f64;
    for s in 0..100u64 {
        let mut r = RandomSource::from_u64(0xa9a + s).rng();
        let f0 = 259.5e6 + r.random::<f64>() * 1e6;
        let tone = real_tone(f0, 1e9, n, 1.0, r.random::<f64>() * std::f64::consts::TAU);
        let noise = white(&RandomSource::from_u64(0xa9b + s), n, 1e9, 0.5e-3f64.sqrt());
        let x = tone.with_samples(tone.samples.iter().zip(&noise.samples).map(|(a, b)| a + b).collect());
        werr = werr.max((estimate_pilot_frequency(&x, (240e6, 280e6), 1e6).unwrap() - f0).abs());
    }
    ok &= werr < 10.0;
    notes.push(format!("pilot frequency worst {werr:.2} Hz"));
    (ok, notes.join("; "))
}

fn main() {
    // the test harness passes its own flags; listing asks for no run
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let s = scale();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("A1 leakage-free modulation", Box::new(a1)),
        ("A2 density-evolution threshold", Box::new(a2)),
        ("A3 puncturing efficiency", Box::new(a3)),
        ("A4 frame error rate", Box::new(a4)),
        ("A5 operating point", Box::new(a5)),
        ("A6 end-to-end estimator", Box::new(move || a6(s))),
        ("A7 autocorrelation vs HPF order", Box::new(move || a7(s))),
        ("A8 carrier suppression sweep", Box::new(move || a8(s))),
        ("A9 oracle equivalences", Box::new(a9)),
    ];
    if s != 1.0 {
        println!("link criteria at scale {s}");
    }
    let mut failed = 0;
    for (name, f) in checks {
        let t = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        failed += !ok as usize;
        println!("{} {name} [{:.1} s]: {detail}", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("{} of 9 criteria pass", 9 - failed);
    if failed > 0 && env_flag("CVQKD_ACCEPTANCE_STRICT") {
        std::process::exit(1);
    }
}
