//! IIR design by bilinear transform, realised as second-order sections.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::buffer::SampleBuffer;
use crate::error::{Error, Result};

/// Anything a real-coefficient filter can run over.
pub trait Sample: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl Sample for f64 {}
impl Sample for Complex64 {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sos {
    pub sections: Vec<Biquad>,
    pub gain: f64,
}

impl Sos {
    /// Causal filtering, direct form II transposed per section.
    pub fn filter<T: Sample>(&self, x: &[T]) -> Vec<T> {
        let mut y: Vec<T> = x.iter().map(|&v| v * self.gain).collect();
        for s in &self.sections {
            let (b0, b1, b2) = (s.b[0], s.b[1], s.b[2]);
            let (a1, a2) = (s.a[1], s.a[2]);
            let mut z1 = T::default();
            let mut z2 = T::default();
            for v in y.iter_mut() {
                let xin = *v;
                let out = xin * b0 + z1;
                z1 = xin * b1 - out * a1 + z2;
                z2 = xin * b2 - out * a2;
                *v = out;
            }
        }
        y
    }

    pub fn response(&self, freq: f64, rate: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * freq / rate);
        let zi = z.inv();
        let mut h = Complex64::new(self.gain, 0.0);
        for s in &self.sections {
            let num = s.b[0] + s.b[1] * zi + s.b[2] * zi * zi;
            let den = s.a[0] + s.a[1] * zi + s.a[2] * zi * zi;
            h *= num / den;
        }
        h
    }

    pub fn max_pole_magnitude(&self) -> f64 {
        let mut m: f64 = 0.0;
        for s in &self.sections {
            let (a1, a2) = (s.a[1], s.a[2]);
            let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
            let p1 = (-a1 + disc) / 2.0;
            let p2 = (-a1 - disc) / 2.0;
            m = m.max(p1.norm()).max(p2.norm());
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterFamily {
    Butterworth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Low,
    High,
}

fn butterworth(order: usize, cutoff: f64, rate: f64, band: Band) -> Result<Sos> {
    if order == 0 || order > 20 {
        return Err(Error::param("order", format!("{order}")));
    }
    if !(cutoff > 0.0 && cutoff < rate / 2.0) {
        return Err(Error::param("cutoff_hz", format!("{cutoff} outside (0, {})", rate / 2.0)));
    }
    let fs2 = 2.0 * rate;
    let warped = fs2 * (PI * cutoff / rate).tan();
    let zero = match band {
        Band::Low => -1.0,
        Band::High => 1.0,
    };
    let mut sections = Vec::new();
    let n = order as f64;
    for k in 0..order.div_ceil(2) {
        let proto = Complex64::from_polar(1.0, PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n));
        let s = match band {
            Band::Low => proto * warped,
            Band::High => warped / proto,
        };
        let z = (fs2 + s) / (fs2 - s);
        let real_pole = order % 2 == 1 && k == order / 2;
        if real_pole {
            sections.push(Biquad { b: [1.0, -zero, 0.0], a: [1.0, -z.re, 0.0] });
        } else {
            sections.push(Biquad { b: [1.0, -2.0 * zero, 1.0], a: [1.0, -2.0 * z.re, z.norm_sqr()] });
        }
    }
    let mut sos = Sos { sections, gain: 1.0 };
    let ref_freq = match band {
        Band::Low => 0.0,
        Band::High => rate / 2.0,
    };
    sos.gain = 1.0 / sos.response(ref_freq, rate).norm();
    let m = sos.max_pole_magnitude();
    if m >= 1.0 {
        return Err(Error::UnstableFilter(m));
    }
    Ok(sos)
}

pub fn butterworth_lowpass(order: usize, cutoff: f64, rate: f64) -> Result<Sos> {
    butterworth(order, cutoff, rate, Band::Low)
}

/// High-pass used on both sides of the link to define the temporal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighPassSpec {
    pub family: FilterFamily,
    pub order: usize,
    pub cutoff_hz: f64,
    pub rate: f64,
}

impl HighPassSpec {
    pub fn butterworth(order: usize, cutoff_hz: f64, rate: f64) -> Self {
        HighPassSpec { family: FilterFamily::Butterworth, order, cutoff_hz, rate }
    }

    pub fn design(&self) -> Result<Sos> {
        match self.family {
            FilterFamily::Butterworth => butterworth(self.order, self.cutoff_hz, self.rate, Band::High),
        }
    }
}

pub fn highpass<T: Sample>(buffer: &SampleBuffer<T>, spec: &HighPassSpec) -> Result<SampleBuffer<T>> {
    if (buffer.rate - spec.rate).abs() > 1e-6 * spec.rate {
        return Err(Error::param("rate", format!("buffer at {} Hz, filter designed for {} Hz", buffer.rate, spec.rate)));
    }
    let sos = spec.design()?;
    Ok(buffer.with_samples(sos.filter(&buffer.samples)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn highpass_magnitude_matches_butterworth() {
        let spec = HighPassSpec::butterworth(5, 190e3, 1e9);
        let sos = spec.design().unwrap();
        let at_fc = 20.0 * sos.response(190e3, 1e9).norm().log10();
        assert!((at_fc + 3.0103).abs() < 0.01, "{at_fc}");
        for &f in &[20e3, 100e3, 400e3, 2e6] {
            let want = 1.0 / (1.0 + (190e3 / f as f64).powi(10)).sqrt();
            let got = sos.response(f, 1e9).norm();
            assert!((got / want - 1.0).abs() < 1e-3, "f={f} got={got} want={want}");
        }
        assert!(sos.response(0.0, 1e9).norm() < 1e-9);
    }

    #[test]
    fn lowpass_dc_gain() {
        let sos = butterworth_lowpass(2, 365e6, 1e9).unwrap();
        assert!((sos.response(0.0, 1e9).norm() - 1.0).abs() < 1e-12);
        assert!((20.0 * sos.response(365e6, 1e9).norm().log10() + 3.0103).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_cutoff() {
        assert!(HighPassSpec::butterworth(5, 6e8, 1e9).design().is_err());
        assert!(HighPassSpec::butterworth(0, 1e5, 1e9).design().is_err());
    }
}
