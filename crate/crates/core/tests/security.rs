use cvqkd::security::*;
use cvqkd::{Error, RandomSource, SymbolFrame};
use num_complex::Complex64;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a / b - 1.0).abs() < rel
}

fn gaussian_frame(rng: &mut impl rand::Rng, n: usize, var: f64) -> SymbolFrame {
    let s = var.sqrt();
    let syms = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            Complex64::new(a, b) * s
        })
        .collect();
    SymbolFrame::new(syms, 20e6).unwrap()
}

/// Alice's symbols and Bob's raw symbols for a symbol-level channel, with
/// matching vacuum and electronic frames. `raw` scales all of Bob's data.
struct Fixture {
    alice: SymbolFrame,
    bob: SymbolFrame,
    vacuum: SymbolFrame,
    electronic: SymbolFrame,
}

fn fixture(seed: u64, n: usize, eta_tau: f64, t: f64, u: f64, raw: f64) -> Fixture {
    let mut rng = RandomSource::from_u64(seed).rng();
    let alice = gaussian_frame(&mut rng, n, 0.27);
    let noise = gaussian_frame(&mut rng, n, 1.0 + t + u);
    let g = eta_tau.sqrt();
    let bob: Vec<Complex64> = alice.symbols.iter().zip(&noise.symbols).map(|(a, z)| (a * g + z) * raw).collect();
    let vacuum = gaussian_frame(&mut rng, n, (1.0 + t) * raw * raw);
    let electronic = gaussian_frame(&mut rng, n, t * raw * raw);
    Fixture { alice, bob: SymbolFrame::new(bob, 20e6).unwrap(), vacuum, electronic }
}

#[test]
fn calibration_examples() {
    let clearance = 10f64.powf(-1.5);
    let f = fixture(1, 1_000_000, 0.16, clearance, 0.0, 3.0);
    let cal = calibrate_shot_noise(&[f.vacuum.clone()], &[f.electronic.clone()]).unwrap();
    assert!(close(cal.t.value(), clearance, 0.01));
    // against the reported 31.40 mPNU
    assert!(close(cal.t.mpnu(), 31.40, 0.05));

    let zero = SymbolFrame::new(vec![Complex64::new(0.0, 0.0); 100], 20e6).unwrap();
    let c0 = calibrate_shot_noise(&[f.vacuum.clone()], &[zero]).unwrap();
    assert_eq!(c0.t.value(), 0.0);

    let scale = |fr: &SymbolFrame| SymbolFrame::new(fr.symbols.iter().map(|z| z * 2f64.sqrt()).collect(), 20e6).unwrap();
    let c2 = calibrate_shot_noise(&[scale(&f.vacuum)], &[scale(&f.electronic)]).unwrap();
    assert!(close(c2.t.value(), cal.t.value(), 1e-12));
    assert!(close(c2.snu_scale, cal.snu_scale / 2.0, 1e-12));

    assert!(matches!(calibrate_shot_noise(&[f.electronic.clone()], &[f.vacuum.clone()]), Err(Error::Calibration(_))));
}

#[test]
fn channel_estimates_cover_injection() {
    for (seed, u) in [(10u64, 0.73e-3), (11, 0.0)] {
        let f = fixture(seed, 1_000_000, 0.16, 0.0314, u, 0.37);
        let cal = calibrate_shot_noise(&[f.vacuum], &[f.electronic]).unwrap();
        let est = estimate_channel(&f.alice, &f.bob, &cal, 0.68).unwrap();
        assert!((est.u_raw - u).abs() < 3.0 * est.u_sigma, "u {} ± {}", est.u_raw, est.u_sigma);
        let et_sigma = 2.0 * (0.16f64 * est.noise_var / (1e6 * 0.27)).sqrt();
        assert!((est.eta_tau - 0.16).abs() < 3.0 * et_sigma);
        assert!(close(est.budget.eta, 0.16 / 0.68, 0.02));
    }
}

#[test]
fn estimator_confidence_region_holds() {
    // eps = 1e-2: the two-sided interval must hold in at least 90 % of runs
    let z = 2.5758;
    let runs = 1000;
    let mut inside = 0;
    for i in 0..runs {
        let f = fixture(1000 + i, 10_000, 0.16, 0.0314, 3e-3, 1.0);
        let cal = calibrate_shot_noise(&[f.vacuum], &[f.electronic]).unwrap();
        let est = estimate_channel(&f.alice, &f.bob, &cal, 0.68).unwrap();
        if (est.u_raw - 3e-3).abs() <= z * est.u_sigma {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.9 * runs as f64, "{inside}");
}

#[test]
fn snr_convention() {
    let b = NoiseBudget::paper_operating_point();
    assert!(close(b.snr(), 0.042692, 1e-4));
    assert!(close(b.snr(), 0.0443, 0.10));
}

#[test]
fn worst_case_bounds_shrink() {
    let b = NoiseBudget::paper_operating_point();
    let inf = worst_case_bounds(&b, 1 << 62, 1e-10).unwrap();
    assert!((inf.u.value() - b.u.value()).abs() < 1e-6);
    assert!((inf.eta - b.eta).abs() < 1e-6);
    let gap = |n| worst_case_bounds(&b, n, 1e-10).unwrap().u.value() - b.u.value();
    let ratio = gap(1_000_000) / gap(100_000_000);
    assert!(close(ratio, 10.0, 0.05), "{ratio}");
    let at_1e9 = worst_case_bounds(&b, 987_648_000, 1e-10).unwrap();
    let r = at_1e9.u.value() / b.u.value();
    assert!((1.2..=1.5).contains(&r), "{r}");
    assert!(at_1e9.eta < b.eta);
}

#[test]
fn mutual_information_examples() {
    assert!((mutual_information(0.0443).per_quadrature - 0.03127).abs() < 1e-5);
    assert_eq!(mutual_information(0.0).per_symbol, 0.0);
    assert!((mutual_information(1.0).per_quadrature - 0.5).abs() < 1e-15);
    // beta of the bold Table 2 row
    assert!(close(0.0291 / mutual_information(0.0443).per_quadrature, 0.9306, 1e-3));
}

#[test]
fn holevo_examples() {
    let ideal = NoiseBudget::new(0.27, 1.0, 0.68, 0.0314, 0.0).unwrap();
    assert!(holevo_bound(&ideal).unwrap() < 1e-9);
    let b = NoiseBudget::paper_operating_point();
    let chi = holevo_bound(&b).unwrap();
    assert!(close(chi, 0.029577, 1e-3));
    let up = holevo_bound(&b.with_u(0.74e-3).unwrap()).unwrap();
    assert!(up > chi);
    assert!(0.9304 * mutual_information(b.snr()).per_symbol - chi > 0.0);
}

#[test]
fn holevo_depends_weakly_on_trusted_noise() {
    let b = NoiseBudget::paper_operating_point();
    let chi = holevo_bound(&b).unwrap();
    let mut moved = b;
    moved.t = cvqkd::Pnu::new(b.t.value() * 1.1).unwrap();
    let chi_t = holevo_bound(&moved).unwrap();
    // 10 % more trusted noise moves chi far less than 10 % more untrusted
    let chi_u = holevo_bound(&b.with_u(b.u.value() * 1.1).unwrap()).unwrap();
    let (dt, du) = ((chi_t - chi).abs() / chi, (chi_u - chi).abs() / chi);
    assert!(dt < 0.01, "{dt}");
    assert!(du > 0.0);
}

#[test]
fn operating_point_key() {
    let k = KeyInputs::paper_defaults(BlockSize::Finite(1_000_000_000));
    let acc = composable_key_length(&k).unwrap();
    assert!(close(acc.i_ab, 0.060313, 1e-4));
    assert_eq!(acc.n_after_ir.unwrap().round(), 775_303_680.0);
    assert!(close(acc.key_fraction, 0.0056823, 1e-3));
    assert!(close(acc.key_fraction, 0.007, 0.30));
    assert!(acc.key_length.abs_diff(8_811_092) < 1000);

    let onset = positive_key_onset(&k, 10_000_000, 100_000_000_000).unwrap();
    assert!((3e8..=1.2e9).contains(&(onset as f64)), "{onset}");
    assert!(close(onset as f64, 325_791_278.0, 2e-3));

    let th = null_key_threshold(&k).unwrap();
    assert!((th.mpnu() - 1.8).abs() <= 0.6, "{}", th.mpnu());
    assert!(close(th.mpnu(), 2.1127, 1e-3));
    let asym = null_key_threshold(&KeyInputs::paper_defaults(BlockSize::Asymptotic)).unwrap();
    assert!(asym.value() > th.value());
    assert!(close(asym.mpnu(), 4.168, 1e-3));

    let mut above = k;
    above.budget = above.budget.with_u(th.value() * 1.05).unwrap();
    assert_eq!(composable_key_length(&above).unwrap().key_length, 0);
    let mut noisy = k;
    noisy.budget = noisy.budget.with_u(0.02).unwrap();
    let acc = composable_key_length(&noisy).unwrap();
    assert!(acc.raw_length < 0.0 && acc.key_length == 0 && acc.key_fraction == 0.0);
}

#[test]
fn asymptotic_key_fraction() {
    let acc = composable_key_length(&KeyInputs::paper_defaults(BlockSize::Asymptotic)).unwrap();
    assert!(close(acc.key_fraction, 0.013270, 1e-3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn key_length_monotone(u1 in 0.0f64..3e-3, u2 in 0.0f64..3e-3, b1 in 0.90f64..1.0, b2 in 0.90f64..1.0, e1 in 8.5f64..11.0, e2 in 8.5f64..11.0) {
        let base = KeyInputs::paper_defaults(BlockSize::Finite(1_000_000_000));
        let len = |u: f64, beta: f64, n: f64| {
            let mut k = base;
            k.budget = k.budget.with_u(u).unwrap();
            k.beta = beta;
            k.block = BlockSize::Finite(n as u64);
            match composable_key_length(&k) {
                Ok(a) => a.key_length,
                Err(Error::Unphysical(_)) => 0,
                Err(e) => panic!("{e}"),
            }
        };
        let (ul, uh) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        prop_assert!(len(ul, 0.93, 1e9) >= len(uh, 0.93, 1e9));
        let (bl, bh) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        prop_assert!(len(0.73e-3, bl, 1e9) <= len(0.73e-3, bh, 1e9));
        let (nl, nh) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(len(0.73e-3, 0.93, 10f64.powf(nl)) <= len(0.73e-3, 0.93, 10f64.powf(nh)));
    }
}
