//! Multidimensional reconciliation.
//!
//! Bob normalises each block of `d` Gaussian values, `ŷ = y/‖y‖`, and
//! publishes the element `r = u·conj(ŷ)` of the Cayley–Dickson algebra of
//! dimension `d`, where `u` is his codeword block mapped to `±1/√d`. Left
//! multiplication by a unit element is orthogonal for `d ≤ 8` and, because
//! these algebras are alternative, `r·ŷ = u`. Alice applies the same map to
//! her block and reads off a virtual binary-input AWGN channel.

use crate::error::{Error, Result};

pub const MD_DIMS: [usize; 4] = [1, 2, 4, 8];

/// Blocks with a smaller norm carry no usable direction.
pub const MIN_BLOCK_NORM: f64 = 1e-6;

fn conj_into(a: &[f64], out: &mut [f64]) {
    out[0] = a[0];
    for i in 1..a.len() {
        out[i] = -a[i];
    }
}

/// Cayley–Dickson product, `(a, b)(c, d) = (ac − d̄b, da + bc̄)`.
pub fn cd_mul(x: &[f64], y: &[f64], out: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two() && y.len() == n && out.len() == n);
    if n == 1 {
        out[0] = x[0] * y[0];
        return;
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let mut t1 = [0.0; 8];
    let mut t2 = [0.0; 8];
    let mut cj = [0.0; 8];
    // ac − d̄b
    cd_mul(a, c, &mut t1[..h]);
    conj_into(d, &mut cj[..h]);
    cd_mul(&cj[..h], b, &mut t2[..h]);
    for i in 0..h {
        out[i] = t1[i] - t2[i];
    }
    // da + bc̄
    cd_mul(d, a, &mut t1[..h]);
    conj_into(c, &mut cj[..h]);
    cd_mul(b, &cj[..h], &mut t2[..h]);
    for i in 0..h {
        out[h + i] = t1[i] + t2[i];
    }
}

pub fn cd_conj(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    conj_into(x, &mut out);
    out
}

/// Matrix of `z ↦ r·z` in row-major order.
pub fn left_mul_matrix(r: &[f64]) -> Vec<f64> {
    let d = r.len();
    let mut m = vec![0.0; d * d];
    let mut e = vec![0.0; d];
    let mut col = vec![0.0; d];
    for j in 0..d {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        cd_mul(r, &e, &mut col);
        for i in 0..d {
            m[i * d + j] = col[i];
        }
    }
    m
}

/// Disclosed side information for a sequence of blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MdSideInfo {
    pub dim: usize,
    /// One unit algebra element per block, concatenated.
    pub maps: Vec<f64>,
    pub norms: Vec<f64>,
}

impl MdSideInfo {
    pub fn blocks(&self) -> usize {
        self.norms.len()
    }
}

fn check_dim(dim: usize, len: usize) -> Result<()> {
    if !MD_DIMS.contains(&dim) {
        return Err(Error::param("dim", format!("{dim} is not one of 1, 2, 4, 8")));
    }
    if len % dim != 0 {
        return Err(Error::param("len", format!("{len} values do not split into blocks of {dim}")));
    }
    Ok(())
}

/// Bob's side. `y` holds his unit-variance values, `bits` the codeword bits
/// at the same positions.
pub fn md_encode(y: &[f64], bits: &[u8], dim: usize) -> Result<MdSideInfo> {
    check_dim(dim, y.len())?;
    if bits.len() != y.len() {
        return Err(Error::param("bits", format!("{} bits for {} values", bits.len(), y.len())));
    }
    let s = 1.0 / (dim as f64).sqrt();
    let mut maps = vec![0.0; y.len()];
    let mut norms = Vec::with_capacity(y.len() / dim);
    let mut u = [0.0; 8];
    for (bi, (yb, cb)) in y.chunks(dim).zip(bits.chunks(dim)).enumerate() {
        let norm = yb.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < MIN_BLOCK_NORM {
            return Err(Error::param("y", format!("block {bi} has norm {norm:.2e}")));
        }
        let yc: Vec<f64> = cd_conj(yb).iter().map(|v| v / norm).collect();
        for (ui, &b) in u.iter_mut().zip(cb) {
            *ui = if b == 0 { s } else { -s };
        }
        cd_mul(&u[..dim], &yc, &mut maps[bi * dim..(bi + 1) * dim]);
        norms.push(norm);
    }
    Ok(MdSideInfo { dim, maps, norms })
}

/// Alice's side: LLRs of the virtual channel. `snr` is the per-quadrature
/// signal-to-noise ratio of the underlying Gaussian channel and `x` her
/// unit-variance values.
pub fn md_llr(x: &[f64], side: &MdSideInfo, snr: f64) -> Result<Vec<f64>> {
    let d = side.dim;
    check_dim(d, x.len())?;
    if x.len() != side.maps.len() {
        return Err(Error::param("x", format!("{} values for {} mapped", x.len(), side.maps.len())));
    }
    let gain = 2.0 * (snr * (1.0 + snr)).sqrt() / (d as f64).sqrt();
    let mut out = vec![0.0; x.len()];
    for (i, (xb, r)) in x.chunks(d).zip(side.maps.chunks(d)).enumerate() {
        let o = &mut out[i * d..(i + 1) * d];
        cd_mul(r, xb, o);
        let g = gain * side.norms[i];
        o.iter_mut().for_each(|v| *v *= g);
    }
    Ok(out)
}

/// Mapped values without the LLR scaling, for inspection.
pub fn md_apply(x: &[f64], side: &MdSideInfo) -> Result<Vec<f64>> {
    let d = side.dim;
    check_dim(d, x.len())?;
    let mut out = vec![0.0; x.len()];
    for (i, (xb, r)) in x.chunks(d).zip(side.maps.chunks(d)).enumerate() {
        cd_mul(r, xb, &mut out[i * d..(i + 1) * d]);
    }
    Ok(out)
}
