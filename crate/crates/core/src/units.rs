//! Noise units and decibel helpers.
//!
//! Variances are per quadrature and referred to shot noise: one PNU equals the
//! vacuum variance at Bob's detector output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance in shot-noise units. Always finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Pnu(f64);

impl Pnu {
    pub const ZERO: Pnu = Pnu(0.0);

    pub fn new(v: f64) -> Result<Self> {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::param("pnu", format!("{v} is not a finite non-negative variance")));
        }
        Ok(Pnu(v))
    }

    pub fn from_mpnu(m: f64) -> Result<Self> {
        Self::new(m * 1e-3)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn mpnu(self) -> f64 {
        self.0 * 1e3
    }
}

impl TryFrom<f64> for Pnu {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Pnu::new(v)
    }
}

impl From<Pnu> for f64 {
    fn from(p: Pnu) -> f64 {
        p.0
    }
}

/// Power ratio in decibels.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Decibel(pub f64);

impl Decibel {
    pub fn from_linear(ratio: f64) -> Self {
        Decibel(10.0 * ratio.log10())
    }

    pub fn linear(self) -> f64 {
        db_to_linear(self)
    }
}

pub fn db_to_linear(x: Decibel) -> f64 {
    10f64.powf(x.0 / 10.0)
}
