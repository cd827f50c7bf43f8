use serde::{Deserialize, Serialize};

use super::estimation::NoiseBudget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    pub per_quadrature: f64,
    pub per_symbol: f64,
}

/// Shannon rate of the Gaussian channel seen by heterodyne detection.
pub fn mutual_information(snr: f64) -> MutualInformation {
    let q = 0.5 * (1.0 + snr).log2();
    MutualInformation { per_quadrature: q, per_symbol: 2.0 * q }
}

fn g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

fn symplectic_pair(a: f64, b: f64, what: &str) -> Result<(f64, f64)> {
    let disc = a * a - 4.0 * b;
    if !(disc >= -1e-9 * a * a) || !(b >= 0.0) {
        return Err(Error::Unphysical(format!("{what}: A={a}, B={b}")));
    }
    let r = disc.max(0.0).sqrt();
    let l1 = (0.5 * (a + r)).sqrt();
    let l2 = (0.5 * (a - r)).max(0.0).sqrt();
    if !(l2 >= 1.0 - 1e-6) {
        return Err(Error::Unphysical(format!("{what}: symplectic eigenvalue {l2} < 1")));
    }
    Ok((l1, l2))
}

/// Holevo information between Eve and Bob's heterodyne data, bits per complex
/// symbol. Entangling-cloner model with a trusted noisy detector.
pub fn holevo_bound(b: &NoiseBudget) -> Result<f64> {
    let va = b.va.value();
    let v = 1.0 + 2.0 * va;
    let t = b.eta;
    let tau = b.tau;
    if !(t > 0.0 && tau > 0.0) {
        return Err(Error::Unphysical("zero transmittance".into()));
    }
    let xi = 2.0 * b.u.value() / (t * tau);
    let chi_line = 1.0 / t - 1.0 + xi;
    let chi_het = (1.0 + (1.0 - tau) + 2.0 * b.t.value()) / tau;
    let chi_tot = chi_line + chi_het / t;
    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line).powi(2);
    let bb = t * t * (v * chi_line + 1.0).powi(2);
    let (l1, l2) = symplectic_pair(a, bb, "AB")?;
    let den = (t * (v + chi_tot)).powi(2);
    let c = (a * chi_het * chi_het
        + bb
        + 1.0
        + 2.0 * chi_het * (v * bb.sqrt() + t * (v + chi_line))
        + 2.0 * t * (v * v - 1.0))
        / den;
    let d = ((v + bb.sqrt() * chi_het) / (t * (v + chi_tot))).powi(2);
    let (l3, l4) = symplectic_pair(c, d, "conditional")?;
    let chi = g((l1 - 1.0) / 2.0) + g((l2 - 1.0) / 2.0) - g((l3 - 1.0) / 2.0) - g((l4 - 1.0) / 2.0);
    Ok(chi.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutual_information_examples() {
        assert!((mutual_information(0.0443).per_quadrature - 0.031272).abs() < 1e-5);
        assert!((mutual_information(1.0).per_quadrature - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_loss_free_channel_leaks_nothing() {
        let b = NoiseBudget::new(0.27, 1.0, 0.68, 0.0314, 0.0).unwrap();
        assert!(holevo_bound(&b).unwrap().abs() < 1e-9);
    }
}
