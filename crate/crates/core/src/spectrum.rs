//! FFT helpers: fast convolution, Welch spectra, analytic signals.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// In-place forward DFT, no scaling.
pub fn fft(buf: &mut [Complex64]) {
    if !buf.is_empty() {
        plan(buf.len(), false).process(buf);
    }
}

/// In-place inverse DFT scaled by 1/N.
pub fn ifft(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    plan(buf.len(), true).process(buf);
    let s = 1.0 / buf.len() as f64;
    for x in buf.iter_mut() {
        *x *= s;
    }
}

/// Frequency of DFT bin `k` for an `n`-point transform, in (-rate/2, rate/2].
pub fn bin_frequency(k: usize, n: usize, rate: f64) -> f64 {
    let k = if k > n / 2 { k as f64 - n as f64 } else { k as f64 };
    k * rate / n as f64
}

/// Full linear convolution of `x` with real taps `h`, by overlap-add.
pub fn convolve(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    if h.len() <= 8 || x.len() <= 8 {
        let mut y = vec![Complex64::new(0.0, 0.0); out_len];
        for (i, xi) in x.iter().enumerate() {
            for (j, hj) in h.iter().enumerate() {
                y[i + j] += xi * hj;
            }
        }
        return y;
    }
    let nfft = (4 * h.len()).next_power_of_two().max(8192).min((out_len).next_power_of_two());
    let block = nfft - h.len() + 1;
    let mut hf: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    hf.resize(nfft, Complex64::new(0.0, 0.0));
    fft(&mut hf);
    let fwd = plan(nfft, false);
    let inv = plan(nfft, true);
    let scale = 1.0 / nfft as f64;
    let mut y = vec![Complex64::new(0.0, 0.0); out_len];
    let mut work = vec![Complex64::new(0.0, 0.0); nfft];
    let mut start = 0;
    while start < x.len() {
        let end = (start + block).min(x.len());
        work[..end - start].copy_from_slice(&x[start..end]);
        for w in work[end - start..].iter_mut() {
            *w = Complex64::new(0.0, 0.0);
        }
        fwd.process(&mut work);
        for (w, hv) in work.iter_mut().zip(&hf) {
            *w *= hv;
        }
        inv.process(&mut work);
        let valid = (end - start + h.len() - 1).min(out_len - start);
        for k in 0..valid {
            y[start + k] += work[k] * scale;
        }
        start = end;
    }
    y
}

/// Convolution trimmed to the input length with the filter centre aligned on
/// each input sample (zero delay for symmetric taps).
pub fn convolve_same(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    let full = convolve(x, h);
    let off = (h.len() - 1) / 2;
    full[off..off + x.len()].to_vec()
}

pub fn convolve_real(x: &[f64], h: &[f64]) -> Vec<f64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    convolve(&xc, h).into_iter().map(|c| c.re).collect()
}

/// Power spectrum estimate. `power[k]` is the mean power falling in bin `k`,
/// so summing over all bins gives the mean power of the input.
#[derive(Debug, Clone)]
pub struct Psd {
    /// Ascending, from -rate/2.
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub resolution: f64,
}

impl Psd {
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| p)
            .sum()
    }

    /// Average power per bin inside a band.
    pub fn band_density(&self, lo: f64, hi: f64) -> f64 {
        let (sum, n) = self
            .freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .fold((0.0, 0usize), |(s, n), (_, p)| (s + p, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Four-term Blackman-Harris window, about -92 dB sidelobes.
pub fn blackman_harris(n: usize) -> Vec<f64> {
    let a = [0.35875, 0.48829, 0.14128, 0.01168];
    (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / n as f64;
            a[0] - a[1] * x.cos() + a[2] * (2.0 * x).cos() - a[3] * (3.0 * x).cos()
        })
        .collect()
}

/// Welch estimate with Blackman-Harris segments and 50 % overlap.
pub fn welch(x: &[Complex64], rate: f64, seg_len: usize) -> Psd {
    let seg = seg_len.min(x.len()).max(1);
    let w = blackman_harris(seg);
    let u: f64 = w.iter().map(|v| v * v).sum();
    let step = (seg / 2).max(1);
    let mut acc = vec![0.0; seg];
    let mut count = 0usize;
    let fwd = plan(seg, false);
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut start = 0;
    while start + seg <= x.len() {
        for i in 0..seg {
            buf[i] = x[start + i] * w[i];
        }
        fwd.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += step;
    }
    let norm = 1.0 / (count.max(1) as f64 * seg as f64 * u);
    let half = seg / 2;
    let mut freqs = Vec::with_capacity(seg);
    let mut power = Vec::with_capacity(seg);
    for i in 0..seg {
        let k = (i + seg - half) % seg;
        freqs.push(bin_frequency(k, seg, rate));
        power.push(acc[k] * norm);
    }
    // bin_frequency puts the Nyquist bin at +rate/2; keep the axis ascending
    if seg % 2 == 0 {
        freqs[0] = -rate / 2.0;
    }
    Psd { freqs, power, resolution: rate / seg as f64 }
}

pub fn welch_real(x: &[f64], rate: f64, seg_len: usize) -> Psd {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    welch(&xc, rate, seg_len)
}

/// Analytic signal of a real sequence: negative frequencies removed, positive
/// ones doubled.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == n / 2) {
            continue;
        }
        if k < n.div_ceil(2) {
            *b *= 2.0;
        } else {
            *b = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut buf);
    buf
}

/// Keeps only DFT bins whose frequency lies in `[lo, hi]` (brick wall, whole record).
pub fn brickwall_band(x: &[Complex64], rate: f64, lo: f64, hi: f64) -> Vec<Complex64> {
    let n = x.len();
    let mut buf = x.to_vec();
    fft(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let f = bin_frequency(k, n, rate);
        if f < lo || f > hi {
            *b = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut buf);
    buf
}

/// Windowed-sinc low-pass taps (Blackman window), unit DC gain.
pub fn lowpass_taps(cutoff: f64, rate: f64, len: usize) -> Vec<f64> {
    let len = len | 1;
    let m = (len - 1) as f64 / 2.0;
    let fc = cutoff / rate;
    let mut h: Vec<f64> = (0..len)
        .map(|i| {
            let t = i as f64 - m;
            let sinc = if t == 0.0 { 2.0 * fc } else { (2.0 * PI * fc * t).sin() / (PI * t) };
            let w = 0.42 - 0.5 * (2.0 * PI * i as f64 / (len - 1) as f64).cos()
                + 0.08 * (4.0 * PI * i as f64 / (len - 1) as f64).cos();
            sinc * w
        })
        .collect();
    let s: f64 = h.iter().sum();
    for v in h.iter_mut() {
        *v /= s;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolve_matches_direct() {
        let x: Vec<Complex64> = (0..20000).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let h: Vec<f64> = (0..301).map(|i| ((i as f64) * 0.05).cos() / (1.0 + i as f64)).collect();
        let y = convolve(&x, &h);
        assert_eq!(y.len(), x.len() + h.len() - 1);
        for &n in &[0usize, 150, 9000, 19999, 20299] {
            let mut d = Complex64::new(0.0, 0.0);
            for (j, hj) in h.iter().enumerate() {
                if n >= j && n - j < x.len() {
                    d += x[n - j] * hj;
                }
            }
            assert!((d - y[n]).norm() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn welch_tone_power() {
        let rate = 1e9;
        let x: Vec<Complex64> = (0..1 << 16)
            .map(|i| Complex64::from_polar(0.7, 2.0 * PI * 60.123e6 * i as f64 / rate))
            .collect();
        let p = welch(&x, rate, 4096);
        assert!((p.total() - 0.49).abs() < 1e-3);
        assert!((p.band_power(59e6, 61e6) - 0.49).abs() < 1e-3);
    }

    #[test]
    fn analytic_of_cosine() {
        let n = 1000;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 50.0 * i as f64 / n as f64).cos()).collect();
        let a = analytic_signal(&x);
        for (i, z) in a.iter().enumerate() {
            let want = Complex64::from_polar(1.0, 2.0 * PI * 50.0 * i as f64 / n as f64);
            assert!((z - want).norm() < 1e-9);
        }
    }
}
