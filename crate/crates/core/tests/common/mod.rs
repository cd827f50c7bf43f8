//! Signal fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use cvqkd::spectrum::{bin_frequency, ifft};
use cvqkd::{ComplexBuffer, RandomSource, RealBuffer};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

/// Raised-cosine power spectrum of a `baud` signal with roll-off `beta`.
pub fn raised_cosine_psd(f: f64, baud: f64, beta: f64) -> f64 {
    let a = f.abs();
    let lo = baud * (1.0 - beta) / 2.0;
    let hi = baud * (1.0 + beta) / 2.0;
    if a <= lo {
        1.0
    } else if a <= hi {
        0.5 * (1.0 + (PI / (beta * baud) * (a - lo)).cos())
    } else {
        0.0
    }
}

/// Complex Gaussian signal whose spectrum is exactly zero outside
/// `centre ± baud (1 + beta) / 2`, built bin by bin. Unit mean power.
pub fn band_limited(src: &RandomSource, n: usize, rate: f64, baud: f64, beta: f64, centre: f64) -> ComplexBuffer {
    let mut rng = src.rng();
    let mut bins: Vec<Complex64> = (0..n)
        .map(|k| {
            let f = bin_frequency(k, n, rate) - centre;
            let g = raised_cosine_psd(f, baud, beta).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * g
        })
        .collect();
    ifft(&mut bins);
    let p = bins.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let s = 1.0 / p.sqrt();
    ComplexBuffer::new(bins.into_iter().map(|z| z * s).collect(), rate).unwrap()
}

pub fn split(x: &ComplexBuffer) -> (RealBuffer, RealBuffer) {
    (x.with_samples(x.samples.iter().map(|z| z.re).collect()), x.with_samples(x.samples.iter().map(|z| z.im).collect()))
}

pub fn real_tone(freq: f64, rate: f64, n: usize, amp: f64, phase: f64) -> RealBuffer {
    let w = 2.0 * PI * freq / rate;
    RealBuffer::new((0..n).map(|k| amp * (w * k as f64 + phase).cos()).collect(), rate).unwrap()
}

pub fn white(src: &RandomSource, n: usize, rate: f64, std: f64) -> RealBuffer {
    let mut rng = src.rng();
    RealBuffer::new((0..n).map(|_| { let v: f64 = StandardNormal.sample(&mut rng); std * v }).collect(), rate).unwrap()
}
