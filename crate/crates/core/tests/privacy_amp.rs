use cvqkd::pa::*;
use cvqkd::RandomSource;
use proptest::prelude::*;
use rand::Rng;

fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random::<bool>() as u8).collect()
}

#[test]
fn exhaustive_small_hash() {
    let mut rng = RandomSource::from_u64(1).rng();
    for _ in 0..8 {
        let seed = ToeplitzSeed::new(random_bits(&mut rng, 23), 16, 8).unwrap();
        for x in 0u32..1 << 16 {
            let bits: Vec<u8> = (0..16).map(|i| (x >> i & 1) as u8).collect();
            assert_eq!(toeplitz_hash(&bits, &seed).unwrap(), toeplitz_hash_dense(&bits, &seed).unwrap());
        }
    }
}

#[test]
fn fast_path_matches_dense() {
    let mut rng = RandomSource::from_u64(2).rng();
    for i in 0..100u64 {
        let nin = rng.random_range(1..=1usize << 14);
        let nout = rng.random_range(1..=nin);
        let seed = derive_seed(&RandomSource::from_u64(100 + i), nin, nout).unwrap();
        let x = random_bits(&mut rng, nin);
        assert_eq!(toeplitz_hash(&x, &seed).unwrap(), toeplitz_hash_dense(&x, &seed).unwrap(), "{nin}→{nout}");
    }
}

#[test]
fn blocked_path_matches_dense() {
    // longer than one FFT block, short output so the dense reference stays cheap
    let mut rng = RandomSource::from_u64(3).rng();
    let (nin, nout) = ((1 << 19) + 123, 40);
    let seed = derive_seed(&RandomSource::from_u64(4), nin, nout).unwrap();
    let x = random_bits(&mut rng, nin);
    assert_eq!(toeplitz_hash(&x, &seed).unwrap(), toeplitz_hash_dense(&x, &seed).unwrap());
}

#[test]
fn hash_is_linear() {
    let mut rng = RandomSource::from_u64(5).rng();
    let seed = derive_seed(&RandomSource::from_u64(6), 5000, 1200).unwrap();
    let (a, b) = (random_bits(&mut rng, 5000), random_bits(&mut rng, 5000));
    let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
    let (ha, hb, hs) = (toeplitz_hash(&a, &seed).unwrap(), toeplitz_hash(&b, &seed).unwrap(), toeplitz_hash(&sum, &seed).unwrap());
    assert!(ha.iter().zip(&hb).zip(&hs).all(|((x, y), s)| x ^ y == *s));
    assert!(toeplitz_hash(&vec![0; 5000], &seed).unwrap().iter().all(|&v| v == 0));
}

#[test]
fn collision_rate_is_universal() {
    let x: Vec<u8> = (0..16).map(|i| (i % 3 == 0) as u8).collect();
    let y: Vec<u8> = (0..16).map(|i| (i % 5 == 1) as u8).collect();
    let trials = 100_000u64;
    let mut hits = 0u64;
    for i in 0..trials {
        let seed = derive_seed(&RandomSource::from_u64(i), 16, 8).unwrap();
        if toeplitz_hash(&x, &seed).unwrap() == toeplitz_hash(&y, &seed).unwrap() {
            hits += 1;
        }
    }
    let p = 1.0 / 256.0;
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((hits as f64 - trials as f64 * p).abs() < 3.0 * sd, "{hits}");
}

#[test]
fn seed_checks_and_key_files() {
    assert!(ToeplitzSeed::new(vec![0; 10], 8, 4).is_err());
    assert!(derive_seed(&RandomSource::from_u64(0), 8, 9).is_err());
    assert!(derive_seed(&RandomSource::from_u64(0), 8, 0).is_err());
    let seed = derive_seed(&RandomSource::from_u64(7), 64, 20).unwrap();
    assert_eq!(seed, derive_seed(&RandomSource::from_u64(7), 64, 20).unwrap());
    assert!(toeplitz_hash(&[0; 63], &seed).is_err());

    let key = toeplitz_hash(&random_bits(&mut RandomSource::from_u64(8).rng(), 64), &seed).unwrap();
    let dir = std::env::temp_dir().join(format!("cvqkd-pa-{}", std::process::id()));
    let m = write_key(&dir, &key, &seed, Some((1e-10, 1e-12))).unwrap();
    assert_eq!((m.input_len, m.output_len), (64, 20));
    assert_eq!(m.seed_commitment, seed.commitment());
    let packed = std::fs::read(dir.join("key.bin")).unwrap();
    assert_eq!(packed.len(), 3);
    assert_eq!(unpack_bits(&packed, 20), key);
    assert!(dir.join("key.manifest.json").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_equals_dense(nin in 1usize..3000, frac in 0.0f64..1.0, s in any::<u64>()) {
        let nout = ((nin as f64 * frac) as usize).max(1);
        let seed = derive_seed(&RandomSource::from_u64(s), nin, nout).unwrap();
        let x = random_bits(&mut RandomSource::from_u64(s ^ 1).rng(), nin);
        prop_assert_eq!(toeplitz_hash(&x, &seed).unwrap(), toeplitz_hash_dense(&x, &seed).unwrap());
    }

    #[test]
    fn packing_round_trips(bits in proptest::collection::vec(0u8..2, 0..200)) {
        prop_assert_eq!(unpack_bits(&pack_bits(&bits), bits.len()), bits);
    }
}
