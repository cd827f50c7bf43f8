use cvqkd::recon::*;
use cvqkd::{Error, RandomSource};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

/// (β %, FER, p, R_punc) as tabulated for the n = 1.024e6 code.
const TABLE2: [(f64, f64, usize, f64); 7] = [
    (92.77, 0.075, 318_000, 0.0290),
    (93.04, 0.215, 320_000, 0.0291),
    (93.70, 0.378, 325_000, 0.0293),
    (94.37, 0.480, 330_000, 0.0295),
    (95.06, 0.716, 335_000, 0.0297),
    (95.75, 0.850, 340_000, 0.0299),
    (96.46, 0.962, 345_000, 0.0302),
];

#[test]
fn ensemble_rates() {
    let e = MetEnsemble::rate_002();
    assert!((e.rate() - 0.02).abs() < 1e-6);
    assert_eq!(e.edge_types, 3);
    let r = MetEnsemble::regular(3, 6).unwrap();
    assert!((r.rate() - 0.5).abs() < 1e-12);
    let bad = MetEnsemble::parse("nu = 0.99 r1 x1^3\nrho = 0.5 x1^6");
    assert!(matches!(bad, Err(Error::Ensemble(_))));
    let unbalanced = MetEnsemble::parse("nu = 1 r1 x1^3\nrho = 0.4 x1^6");
    assert!(matches!(unbalanced, Err(Error::Ensemble(_))));
    let round = MetEnsemble::parse(&e.to_text()).unwrap();
    assert_eq!(round, e);
}

#[test]
fn full_length_dimensions() {
    let c = node_counts(&MetEnsemble::rate_002(), 1_024_000).unwrap();
    assert_eq!(c.vars.iter().sum::<usize>(), 1_024_000);
    assert_eq!(1_024_000 - c.check_type.len(), 20_480);
}

#[test]
fn scaled_matrix_follows_ensemble() {
    let e = MetEnsemble::rate_002();
    let n = 10_240;
    let h = construct_matrix(&e, n, &RandomSource::from_u64(1)).unwrap();
    assert_eq!(h.n, n);
    let counts = node_counts(&e, n).unwrap();
    assert_eq!(h.k, n - counts.check_type.len());
    assert!(h.k.abs_diff(204) <= 1);
    let mut by_type = vec![0usize; e.variables.len()];
    for &t in &h.var_type {
        by_type[t as usize] += 1;
    }
    assert_eq!(by_type, counts.vars);
    for (i, v) in e.variables.iter().enumerate() {
        assert!(((by_type[i] as f64 / n as f64) - v.fraction).abs() < 2.0 / n as f64);
    }
    for v in 0..n {
        let want: u32 = e.variables[h.var_type[v] as usize].degrees.iter().sum();
        assert_eq!(h.var_degree(v) as u32, want);
    }
    let mut hist = std::collections::BTreeMap::new();
    for c in 0..h.m {
        *hist.entry(h.check_degree(c)).or_insert(0usize) += 1;
    }
    // checks of degree 3 and 4 come from x2^2 x3 and x2^3 x3 / x1^4
    assert!(hist.keys().all(|d| [3, 4, 9].contains(d) || (2..=10).contains(d)));

    let again = construct_matrix(&e, n, &RandomSource::from_u64(1)).unwrap();
    assert_eq!(again, h);
    let other = construct_matrix(&e, n, &RandomSource::from_u64(2)).unwrap();
    assert_ne!(other.edge_var, h.edge_var);

    let mut rng = RandomSource::from_u64(3).rng();
    for _ in 0..5 {
        let cw = h.random_codeword(&mut rng);
        assert!(h.syndrome_ok(&cw));
    }
}

#[test]
fn table2_efficiencies() {
    for (beta, _, p, r) in TABLE2 {
        let b = efficiency(p, 20_480, 1_024_000, 0.0443).unwrap();
        assert!((b * 100.0 - beta).abs() <= 0.1, "p={p}: {}", b * 100.0);
        let rp = 20_480.0 / (1_024_000 - p) as f64;
        assert_eq!(format!("{rp:.4}"), format!("{r:.4}"));
    }
    let b0 = efficiency(0, 20_480, 1_024_000, 0.0443).unwrap();
    assert!((b0 - 0.6396).abs() < 5e-4);
    assert!(efficiency(1_024_000, 20_480, 1_024_000, 0.0443).is_err());
}

#[test]
fn md_two_dimensional_rotation() {
    // dim 2 is complex multiplication: the map rotates y onto the codeword
    let y = [0.3, -1.2];
    let side = md_encode(&y, &[1, 0], 2).unwrap();
    let u = num_complex::Complex64::new(-1.0, 1.0) / 2f64.sqrt();
    let yc = num_complex::Complex64::new(y[0], y[1]);
    let want = u * yc.conj() / yc.norm();
    assert!((side.maps[0] - want.re).abs() < 1e-15 && (side.maps[1] - want.im).abs() < 1e-15);
}

#[test]
fn md_maps_are_orthogonal_and_exact() {
    let mut rng = RandomSource::from_u64(4).rng();
    for dim in MD_DIMS {
        let y: Vec<f64> = (0..dim * 50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let bits: Vec<u8> = (0..dim * 50).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
        let side = md_encode(&y, &bits, dim).unwrap();
        let mapped = md_apply(&y, &side).unwrap();
        let s = 1.0 / (dim as f64).sqrt();
        for (b, blk) in mapped.chunks(dim).enumerate() {
            for (i, v) in blk.iter().enumerate() {
                let want = if bits[b * dim + i] == 0 { s } else { -s };
                assert!((v / side.norms[b] - want).abs() < 1e-10);
            }
        }
        for r in side.maps.chunks(dim) {
            let m = left_mul(r);
            for i in 0..dim {
                for j in 0..dim {
                    let dot: f64 = (0..dim).map(|k| m[i * dim + k] * m[j * dim + k]).sum();
                    assert!((dot - (i == j) as u8 as f64).abs() < 1e-10);
                }
            }
        }
    }
    assert!(md_encode(&[0.0; 8], &[0; 8], 8).is_err());
    assert!(md_encode(&[1.0; 6], &[0; 6], 3).is_err());
}

fn left_mul(r: &[f64]) -> Vec<f64> {
    cvqkd::recon::md::left_mul_matrix(r)
}

#[test]
fn md_llrs_match_biawgn_at_same_snr() {
    let snr: f64 = 0.0443;
    let n = 100_000;
    let rho = (snr / (1.0 + snr)).sqrt();
    let mut rng = RandomSource::from_u64(5).rng();
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x: Vec<f64> = y
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            rho * v + (1.0 - rho * rho).sqrt() * z
        })
        .collect();
    let bits: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
    let side = md_encode(&y, &bits, 8).unwrap();
    let llr = md_llr(&x, &side, snr).unwrap();
    let signed: Vec<f64> = llr.iter().zip(&bits).map(|(l, b)| if *b == 0 { *l } else { -*l }).collect();
    // a BI-AWGN channel at SNR s gives LLR mean 2s
    let mean = signed.iter().sum::<f64>() / n as f64;
    let var = signed.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n as f64;
    assert!((mean - 2.0 * snr).abs() < 4.0 * (var / n as f64).sqrt(), "{mean}");
    // true LLRs satisfy E[exp(-L)] = 1 given the sent bit
    let cons = signed.iter().map(|l| (-l).exp()).sum::<f64>() / n as f64;
    assert!((cons - 1.0).abs() < 0.01, "{cons}");

    // noiseless blocks decode by sign alone
    let clean = md_llr(&y, &side, 1e6).unwrap();
    assert!(clean.iter().zip(&bits).all(|(l, b)| (*l > 0.0) == (*b == 0)));
}

#[test]
fn punctured_positions_have_zero_llr() {
    let e = MetEnsemble::rate_002();
    let h = construct_matrix(&e, 10_240, &RandomSource::from_u64(6)).unwrap();
    let plan = plan_puncturing(&h, 3_200, &RandomSource::from_u64(7)).unwrap();
    assert_eq!(plan.p(), 3_200);
    assert!((plan.rate() - h.k as f64 / 7_040.0).abs() < 1e-15);
    assert!(plan.positions.iter().all(|&v| h.var_degree(v as usize) == 1));
    let bits = h.random_codeword(&mut RandomSource::from_u64(8).rng());
    let llr = frame_llrs(&bits, &plan, 0.0443, FerChannel::Md { dim: 8 }, &RandomSource::from_u64(9)).unwrap();
    assert!(plan.positions.iter().all(|&v| llr[v as usize] == 0.0));
    assert!(plan_puncturing(&h, h.n - h.k, &RandomSource::from_u64(7)).is_err());
}

#[test]
fn bp_noiseless_and_round_trip() {
    let e = MetEnsemble::rate_002();
    let h = construct_matrix(&e, 10_240, &RandomSource::from_u64(10)).unwrap();
    let mut rng = RandomSource::from_u64(11).rng();
    for _ in 0..3 {
        let bits = h.random_codeword(&mut rng);
        let llr: Vec<f64> = bits.iter().map(|&b| if b == 0 { 30.0 } else { -30.0 }).collect();
        let r = bp_decode(&h, &llr, 500);
        assert!(r.converged && r.iterations <= 2);
        assert_eq!(r.bits, bits);
        // noiseless MD channel, nothing punctured
        let plan = plan_puncturing(&h, 0, &RandomSource::from_u64(12)).unwrap();
        let llr = frame_llrs(&bits, &plan, 1e4, FerChannel::Md { dim: 8 }, &RandomSource::from_u64(13)).unwrap();
        let r = bp_decode(&h, &llr, 500);
        assert_eq!(r.bits, bits);
    }
}

#[test]
fn scaled_code_separates_below_and_above_threshold() {
    let e = MetEnsemble::rate_002();
    let h = construct_matrix(&e, 10_240, &RandomSource::from_u64(14)).unwrap();
    let plan = plan_puncturing(&h, 0, &RandomSource::from_u64(15)).unwrap();
    let run = |snr: f64| {
        let cfg = FerConfig { snr, trials: 100, max_iter: 500, channel: FerChannel::Md { dim: 8 } };
        fer_benchmark(&h, &plan, &cfg, &RandomSource::from_u64(16)).unwrap().fer
    };
    // the design threshold sits near SNR 1/5.93² = 0.0284
    let below = run(0.06);
    let above = run(0.018);
    assert!(below < 0.01, "{below}");
    assert!(above > 0.9, "{above}");
}

#[test]
fn density_evolution_regular_threshold() {
    let r = MetEnsemble::regular(3, 6).unwrap();
    let cfg = DeConfig::default();
    let t = threshold_search(&r, &cfg, DeEngine::Quantized, (0.8, 0.95), 1e-3).unwrap();
    assert!((t.sigma - 0.881).abs() < 0.005, "{}", t.sigma);
    assert!(density_evolution(&r, 0.85, &cfg).unwrap().converged);
    let stalled = density_evolution(&r, 0.92, &cfg).unwrap();
    assert!(!stalled.converged && stalled.final_error > 1e-3);
    let ga = threshold_search(&r, &cfg, DeEngine::Gaussian, (0.8, 0.95), 1e-3).unwrap();
    assert!((ga.sigma - t.sigma).abs() < 0.02);
}

#[test]
fn threshold_invariant_under_relabelling() {
    let e = MetEnsemble::rate_002();
    let cfg = DeConfig::default();
    let a = threshold_search(&e, &cfg, DeEngine::Gaussian, (5.5, 6.5), 1e-3).unwrap();
    let b = threshold_search(&e.relabel(&[2, 0, 1]).unwrap(), &cfg, DeEngine::Gaussian, (5.5, 6.5), 1e-3).unwrap();
    assert!((a.sigma - b.sigma).abs() < 1e-9);
    assert!(e.relabel(&[0, 0, 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn md_mapping_preserves_norms(y in proptest::collection::vec(-3.0f64..3.0, 8), bits in proptest::collection::vec(0u8..2, 8), x in proptest::collection::vec(-3.0f64..3.0, 8)) {
        let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(ny > 1e-3);
        let side = md_encode(&y, &bits, 8).unwrap();
        let r = &side.maps;
        prop_assert!((r.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-10);
        let mx = md_apply(&x, &side).unwrap();
        let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nmx: f64 = mx.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((nx - nmx).abs() < 1e-10);
    }

    #[test]
    fn efficiency_matches_rate_over_capacity(p in 0usize..1_000_000, snr in 0.001f64..1.0) {
        let b = efficiency(p, 20_480, 1_024_000, snr).unwrap();
        let want = 20_480.0 / (1_024_000 - p) as f64 / awgn_capacity(snr);
        prop_assert!((b - want).abs() < 1e-12 * want);
    }
}
