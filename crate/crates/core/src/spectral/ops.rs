use num_complex::Complex64;

use super::field::{CVec3, SpectralField};
use crate::error::{Error, Result};
use crate::EXP_LIMIT;

/// Fractional power `Λ^r`: mode `k` is multiplied by `|λk|^r`.
///
/// The zero mode is defined to be 0 for every `r`.
pub fn lambda_pow(u: &SpectralField, r: f64) -> SpectralField {
    if r == 0.0 {
        return u.clone();
    }
    let out = u.map_radial(|kk| kk.powf(r));
    out.debug_check();
    out
}

/// `-Δ` with the Laplacian sign convention, i.e. `Λ²`.
pub fn laplacian(u: &SpectralField) -> SpectralField {
    u.map_radial(|kk| kk * kk)
}

/// Largest exponent `phi · |λk|^s` reached on the lattice of `u`.
pub(crate) fn max_exponent(u: &SpectralField, phi: f64, s: f64) -> f64 {
    phi * u.lattice().max_wavenumber().powf(s)
}

pub(crate) fn guard_exponent(exponent: f64) -> Result<()> {
    if exponent > EXP_LIMIT || exponent.is_nan() {
        return Err(Error::AmplificationOverflow {
            exponent,
            limit: EXP_LIMIT,
            time: None,
        });
    }
    Ok(())
}

/// Exponential multiplier `e^{φΛ^s}`: mode `k` is multiplied by
/// `e^{φ |λk|^s}`. Negative `φ` gives the damping direction.
pub fn gevrey_mult(u: &SpectralField, phi: f64, s: f64) -> Result<SpectralField> {
    guard_exponent(max_exponent(u, phi, s))?;
    if phi == 0.0 {
        return Ok(u.clone());
    }
    let out = u.map_radial(|kk| (phi * kk.powf(s)).exp());
    out.debug_check();
    Ok(out)
}

/// `∇×u`: mode `k` becomes `i λk × û(k)`.
pub fn curl(u: &SpectralField) -> SpectralField {
    let lattice = *u.lattice();
    let mut out = u.clone();
    for ((_, k), v) in lattice.modes().zip(out.coeffs_mut().iter_mut()) {
        *v = i_cross(lattice.wavevector(k), v);
    }
    out
}

/// `i k × v`.
pub(crate) fn i_cross(k: [f64; 3], v: &CVec3) -> CVec3 {
    let i = Complex64::i();
    [
        i * (k[1] * v[2] - k[2] * v[1]),
        i * (k[2] * v[0] - k[0] * v[2]),
        i * (k[0] * v[1] - k[1] * v[0]),
    ]
}

/// Fourier coefficients of `∇·u`, `i λk · û(k)`, in lattice order.
pub fn divergence(u: &SpectralField) -> Vec<Complex64> {
    let lattice = u.lattice();
    lattice
        .modes()
        .zip(u.coeffs())
        .map(|((_, k), v)| {
            let kv = lattice.wavevector(k);
            Complex64::i() * (kv[0] * v[0] + kv[1] * v[1] + kv[2] * v[2])
        })
        .collect()
}

/// Leray projection onto divergence-free fields:
/// `û(k) ↦ û(k) - k (k·û(k)) / |k|²`.
pub fn leray_project(u: &SpectralField) -> SpectralField {
    let lattice = *u.lattice();
    let zero = lattice.zero_index();
    let mut out = u.clone();
    for ((i, k), v) in lattice.modes().zip(out.coeffs_mut().iter_mut()) {
        if i == zero {
            continue;
        }
        let kv = lattice.wavevector(k);
        let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        let dot = (kv[0] * v[0] + kv[1] * v[1] + kv[2] * v[2]) / k2;
        for c in 0..3 {
            v[c] -= kv[c] * dot;
        }
    }
    out
}

/// Scaled Euclidean norm of a sequence of nonnegative terms, immune to
/// overflow of the individual squares. Summation order is fixed.
pub(crate) fn stable_norm(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let scale = terms.clone().fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = terms.map(|t| (t / scale) * (t / scale)).sum();
    scale * sum.sqrt()
}

fn mode_magnitude(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Homogeneous Sobolev norm `(Σ_k |λk|^{2r} |û(k)|²)^{1/2}`.
pub fn sobolev_norm(u: &SpectralField, r: f64) -> f64 {
    let lattice = u.lattice();
    let zero = lattice.zero_index();
    let terms = u.coeffs().iter().enumerate().map(move |(i, v)| {
        if i == zero {
            0.0
        } else {
            lattice.wavenumber(i).powf(r) * mode_magnitude(v)
        }
    });
    stable_norm(terms)
}

/// Homogeneous Gevrey norm
/// `(Σ_k e^{2φ|λk|^s} |λk|^{2σs} |û(k)|²)^{1/2}`.
pub fn gevrey_norm(u: &SpectralField, phi: f64, sigma: f64, s: f64) -> Result<f64> {
    guard_exponent(max_exponent(u, phi, s))?;
    let lattice = u.lattice();
    let zero = lattice.zero_index();
    let terms = u.coeffs().iter().enumerate().map(move |(i, v)| {
        if i == zero {
            return 0.0;
        }
        let kk = lattice.wavenumber(i);
        let ks = kk.powf(s);
        (phi * ks).exp() * ks.powf(sigma) * mode_magnitude(v)
    });
    Ok(stable_norm(terms))
}
