//! Privacy amplification by Toeplitz hashing.
//!
//! The `out × in` matrix is `T[i][j] = s[i − j + in − 1]`, so `T·x` is a
//! window of the linear convolution `s * x`. Large inputs are cut into
//! blocks; every block pair is a smaller Toeplitz product over a slice of
//! the same seed, evaluated with a floating-point FFT whose results are
//! rounded to integers. Blocks are kept small enough that the rounding
//! margin stays far below one half.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::random::{draw_uniform_bits, RandomSource};
use crate::spectrum::{fft, ifft};

/// Largest block edge for the FFT path.
const BLOCK: usize = 1 << 18;
/// Below this size the direct product is faster.
const DIRECT_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzSeed {
    pub bits: Vec<u8>,
    pub input_len: usize,
    pub output_len: usize,
}

impl ToeplitzSeed {
    pub fn new(bits: Vec<u8>, input_len: usize, output_len: usize) -> Result<Self> {
        check_lengths(input_len, output_len)?;
        if bits.len() != input_len + output_len - 1 {
            return Err(Error::param(
                "seed",
                format!("{} seed bits for a {output_len}×{input_len} matrix", bits.len()),
            ));
        }
        Ok(ToeplitzSeed { bits, input_len, output_len })
    }

    /// SHA-256 over the packed seed, for manifests.
    pub fn commitment(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.input_len as u64).to_le_bytes());
        h.update((self.output_len as u64).to_le_bytes());
        h.update(pack_bits(&self.bits));
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn check_lengths(input_len: usize, output_len: usize) -> Result<()> {
    if output_len == 0 {
        return Err(Error::param("output_len", "must be positive"));
    }
    if output_len > input_len {
        return Err(Error::param("output_len", format!("{output_len} exceeds input length {input_len}")));
    }
    Ok(())
}

pub fn derive_seed(src: &RandomSource, input_len: usize, output_len: usize) -> Result<ToeplitzSeed> {
    check_lengths(input_len, output_len)?;
    let n = input_len + output_len - 1;
    let bits = draw_uniform_bits(&src.child("toeplitz-seed", 0), n).into_iter().map(|b| b as u8).collect();
    ToeplitzSeed::new(bits, input_len, output_len)
}

/// Plain `O(in·out)` product, the reference for the fast path.
pub fn toeplitz_hash_dense(bits: &[u8], seed: &ToeplitzSeed) -> Result<Vec<u8>> {
    if bits.len() != seed.input_len {
        return Err(Error::param("bits", format!("{} bits for input length {}", bits.len(), seed.input_len)));
    }
    Ok(window_direct(&seed.bits, bits, seed.output_len))
}

/// `y[i] = Σ_j s[i − j + in − 1]·x[j]` for `i < out`, with `s.len() = in + out − 1`.
fn window_direct(s: &[u8], x: &[u8], out: usize) -> Vec<u8> {
    let n = x.len();
    (0..out)
        .map(|i| {
            let mut acc = 0u8;
            for (j, &xj) in x.iter().enumerate() {
                acc ^= xj & s[i + n - 1 - j];
            }
            acc
        })
        .collect()
}

fn window_fft(s: &[u8], x: &[u8], out: usize) -> Result<Vec<u8>> {
    let n = x.len();
    let len = (n + out - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    for (i, &b) in s.iter().enumerate() {
        a[i].re = b as f64;
    }
    for (i, &b) in x.iter().enumerate() {
        a[i].im = b as f64;
    }
    fft(&mut a);
    // split the two real spectra and multiply
    let mut p = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..len {
        let c = a[(len - k) % len].conj();
        let fs = (a[k] + c) * 0.5;
        let fx = (a[k] - c) * Complex64::new(0.0, -0.5);
        p[k] = fs * fx;
    }
    ifft(&mut p);
    let mut y = Vec::with_capacity(out);
    for i in 0..out {
        let v = p[(i + n - 1) % len].re;
        let r = v.round();
        if (v - r).abs() > 0.25 {
            return Err(Error::Format(format!("FFT rounding margin exceeded ({v})")));
        }
        y.push((r as i64 & 1) as u8);
    }
    Ok(y)
}

fn window(s: &[u8], x: &[u8], out: usize) -> Result<Vec<u8>> {
    if x.len().saturating_mul(out) <= DIRECT_LIMIT {
        Ok(window_direct(s, x, out))
    } else {
        window_fft(s, x, out)
    }
}

/// Fast Toeplitz product over GF(2).
pub fn toeplitz_hash(bits: &[u8], seed: &ToeplitzSeed) -> Result<Vec<u8>> {
    let (nin, nout) = (seed.input_len, seed.output_len);
    if bits.len() != nin {
        return Err(Error::param("bits", format!("{} bits for input length {nin}", bits.len())));
    }
    let out_blocks: Vec<(usize, usize)> = (0..nout).step_by(BLOCK).map(|i| (i, (i + BLOCK).min(nout))).collect();
    let in_blocks: Vec<(usize, usize)> = (0..nin).step_by(BLOCK).map(|j| (j, (j + BLOCK).min(nin))).collect();
    let parts: Vec<Result<Vec<u8>>> = out_blocks
        .par_iter()
        .map(|&(i0, i1)| {
            let mut acc = vec![0u8; i1 - i0];
            for &(j0, j1) in &in_blocks {
                // seed slice of the sub-Toeplitz block rows i0..i1, cols j0..j1
                let lo = i0 + nin - j1;
                let hi = i1 - 1 + nin - 1 - j0;
                let part = window(&seed.bits[lo..=hi], &bits[j0..j1], i1 - i0)?;
                acc.iter_mut().zip(part).for_each(|(a, b)| *a ^= b);
            }
            Ok(acc)
        })
        .collect();
    let mut y = Vec::with_capacity(nout);
    for p in parts {
        y.extend(p?);
    }
    Ok(y)
}

/// LSB-first packing.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |b, (i, &v)| b | ((v & 1) << i))).collect()
}

pub fn unpack_bits(bytes: &[u8], n: usize) -> Vec<u8> {
    (0..n).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyManifest {
    pub input_len: usize,
    pub output_len: usize,
    pub seed_commitment: String,
    pub key_sha256: String,
    pub eps_sec: Option<f64>,
    pub eps_cor: Option<f64>,
}

/// Writes `key.bin` (packed bits) and `key.manifest.json` into `dir`.
pub fn write_key(dir: &Path, key: &[u8], seed: &ToeplitzSeed, eps: Option<(f64, f64)>) -> Result<KeyManifest> {
    fs::create_dir_all(dir)?;
    let packed = pack_bits(key);
    fs::write(dir.join("key.bin"), &packed)?;
    let m = KeyManifest {
        input_len: seed.input_len,
        output_len: seed.output_len,
        seed_commitment: seed.commitment(),
        key_sha256: hex::encode(Sha256::digest(&packed)),
        eps_sec: eps.map(|e| e.0),
        eps_cor: eps.map(|e| e.1),
    };
    let mut f = fs::File::create(dir.join("key.manifest.json"))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&m).map_err(|e| Error::Format(e.to_string()))?)?;
    Ok(m)
}
