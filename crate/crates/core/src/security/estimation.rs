use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::buffer::{quadrature_variance, SymbolFrame};
use crate::error::{Error, Result};
use crate::units::Pnu;

/// Conversion from raw receiver units to shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Multiply a raw variance by this to get PNU.
    pub snu_scale: f64,
    /// Trusted electronic noise.
    pub t: Pnu,
    pub vacuum_var_raw: f64,
    pub electronic_var_raw: f64,
    /// Complex symbols behind the vacuum variance.
    pub vacuum_symbols: usize,
}

pub fn calibrate_shot_noise(vacuum: &[SymbolFrame], electronic: &[SymbolFrame]) -> Result<Calibration> {
    let pooled = |frames: &[SymbolFrame]| -> Result<(f64, usize)> {
        let n: usize = frames.iter().map(|f| f.len()).sum();
        if n < 2 {
            return Err(Error::Calibration("no noise symbols".into()));
        }
        Ok((frames.iter().map(|f| f.quadrature_variance() * f.len() as f64).sum::<f64>() / n as f64, n))
    };
    let (v_vac, n_vac) = pooled(vacuum)?;
    let (v_el, _) = pooled(electronic)?;
    if !(v_vac > v_el) {
        return Err(Error::Calibration(format!("vacuum variance {v_vac} does not exceed electronic {v_el}")));
    }
    let snu_scale = 1.0 / (v_vac - v_el);
    Ok(Calibration {
        snu_scale,
        t: Pnu::new(v_el * snu_scale)?,
        vacuum_var_raw: v_vac,
        electronic_var_raw: v_el,
        vacuum_symbols: n_vac,
    })
}

/// Per-quadrature link parameters. `u` is referred to Bob's detector output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub va: Pnu,
    pub eta: f64,
    pub tau: f64,
    pub t: Pnu,
    pub u: Pnu,
}

impl NoiseBudget {
    pub fn new(va: f64, eta: f64, tau: f64, t: f64, u: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::param("eta", format!("{eta}")));
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::param("tau", format!("{tau}")));
        }
        Ok(NoiseBudget { va: Pnu::new(va)?, eta, tau, t: Pnu::new(t)?, u: Pnu::new(u)? })
    }

    /// The operating point of the 20 km key run.
    pub fn paper_operating_point() -> Self {
        Self::new(0.27, 0.24, 0.68, 31.40e-3, 0.73e-3).expect("valid constants")
    }

    /// Per-quadrature signal-to-noise ratio at Bob.
    pub fn snr(&self) -> f64 {
        self.eta * self.tau * self.va.value() / (1.0 + self.t.value() + self.u.value())
    }

    pub fn total_noise(&self) -> f64 {
        self.t.value() + self.u.value()
    }

    pub fn with_u(mut self, u: f64) -> Result<Self> {
        self.u = Pnu::new(u)?;
        Ok(self)
    }
}

/// Estimation result with the raw (possibly negative) excess noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub budget: NoiseBudget,
    pub u_raw: f64,
    /// Statistical standard deviation of `u_raw`, from the residual and the
    /// vacuum variances (the electronic one enters only through `u` itself).
    pub u_sigma: f64,
    pub eta_tau: f64,
    pub noise_var: f64,
    pub n_symbols: usize,
}

/// Estimates `ητ` and `u` from Alice's symbols (already in PNU, per-quadrature
/// variance `Va`) and Bob's raw symbols. A fixed complex rotation between the
/// two is absorbed in the gain.
pub fn estimate_channel(alice: &SymbolFrame, bob: &SymbolFrame, cal: &Calibration, tau: f64) -> Result<ChannelEstimate> {
    if alice.len() != bob.len() || alice.len() < 16 {
        return Err(Error::param("frames", format!("alice {} vs bob {} symbols", alice.len(), bob.len())));
    }
    let n = alice.len() as f64;
    let s = cal.snu_scale.sqrt();
    let ma = alice.symbols.iter().sum::<Complex64>() / n;
    let mb = bob.symbols.iter().sum::<Complex64>() / n * s;
    let a: Vec<Complex64> = alice.symbols.iter().map(|z| z - ma).collect();
    let b: Vec<Complex64> = bob.symbols.iter().map(|z| z * s - mb).collect();
    let saa: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let sab: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    if !(saa > 0.0) || sab.norm() == 0.0 {
        return Err(Error::Unphysical("zero covariance between Alice and Bob".into()));
    }
    let g = sab / saa;
    let resid: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| y - g * x).collect();
    let noise_var = quadrature_variance(&resid) * (n - 1.0) / (n - 2.0);
    let eta_tau = g.norm_sqr();
    let eta = eta_tau / tau;
    let va = alice.quadrature_variance();
    let t = cal.t.value();
    let u_raw = noise_var - 1.0 - t;
    let budget = NoiseBudget::new(va, eta.min(1.0), tau, t, u_raw.max(0.0))?;
    Ok(ChannelEstimate {
        budget,
        u_raw,
        u_sigma: (noise_var * noise_var / n + (1.0 + t).powi(2) / cal.vacuum_symbols as f64).sqrt(),
        eta_tau,
        noise_var,
        n_symbols: alice.len(),
    })
}
