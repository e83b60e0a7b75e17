use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{sampling_size, Sampler};

/// Complex Fourier coefficient of a 3-vector field.
pub type CVec3 = [Complex64; 3];

const ZERO3: CVec3 = [Complex64 { re: 0.0, im: 0.0 }; 3];

/// Cube of integer modes `{-N..N}³` with physical wavevector `scale · k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveLattice {
    n: usize,
    scale: f64,
}

impl WaveLattice {
    pub fn new(n: usize, scale: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("truncation radius N must be at least 1"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::config(format!("lattice scale must be positive, got {scale}")));
        }
        Ok(WaveLattice { n, scale })
    }

    /// Integer lattice on `[0, 2π)³`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexicographic index of mode `k` (z fastest), if inside the cube.
    pub fn index(&self, k: [i32; 3]) -> Option<usize> {
        let n = self.n as i32;
        if k.iter().any(|c| c.abs() > n) {
            return None;
        }
        let side = self.side();
        let shift = |c: i32| (c + n) as usize;
        Some((shift(k[0]) * side + shift(k[1])) * side + shift(k[2]))
    }

    pub fn mode(&self, idx: usize) -> [i32; 3] {
        let side = self.side();
        let n = self.n as i32;
        let kz = (idx % side) as i32 - n;
        let ky = ((idx / side) % side) as i32 - n;
        let kx = (idx / (side * side)) as i32 - n;
        [kx, ky, kz]
    }

    /// Index of `-k` given the index of `k`.
    pub fn mirror(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn zero_index(&self) -> usize {
        self.len() / 2
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, [i32; 3])> + '_ {
        (0..self.len()).map(move |i| (i, self.mode(i)))
    }

    pub fn wavevector(&self, k: [i32; 3]) -> [f64; 3] {
        [
            self.scale * k[0] as f64,
            self.scale * k[1] as f64,
            self.scale * k[2] as f64,
        ]
    }

    /// `|λ k|` for the mode at `idx`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        let k = self.mode(idx);
        self.scale * ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt()
    }

    /// Largest `|λ k|` in the cube, `λ N √3`.
    pub fn max_wavenumber(&self) -> f64 {
        self.scale * self.n as f64 * 3f64.sqrt()
    }

    /// Table of `|λ k|` in lattice order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.wavenumber(i)).collect()
    }
}

/// Truncated Fourier coefficients of a real vector field.
///
/// Invariants maintained by every constructor and operator in this crate:
/// `û(-k) = conj(û(k))` and `û(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lattice: WaveLattice,
    coeffs: Vec<CVec3>,
    tag: String,
}

impl SpectralField {
    pub fn zeros(lattice: WaveLattice) -> Self {
        SpectralField {
            lattice,
            coeffs: vec![ZERO3; lattice.len()],
            tag: String::new(),
        }
    }

    /// Wrap raw coefficients. The zero mode is pinned to 0; Hermitian
    /// symmetry is the caller's responsibility (see [`Self::symmetrized`]).
    pub fn from_coeffs(lattice: WaveLattice, mut coeffs: Vec<CVec3>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::config(format!(
                "expected {} coefficients for N = {}, got {}",
                lattice.len(),
                lattice.n(),
                coeffs.len()
            )));
        }
        coeffs[lattice.zero_index()] = ZERO3;
        Ok(SpectralField {
            lattice,
            coeffs,
            tag: String::new(),
        })
    }

    pub(crate) fn from_components(lattice: WaveLattice, comps: [Vec<Complex64>; 3]) -> Self {
        let [x, y, z] = comps;
        let mut coeffs: Vec<CVec3> = x
            .into_iter()
            .zip(y)
            .zip(z)
            .map(|((a, b), c)| [a, b, c])
            .collect();
        coeffs[lattice.zero_index()] = ZERO3;
        SpectralField {
            lattice,
            coeffs,
            tag: String::new(),
        }
    }

    /// Project samples of a real field `f(x)` onto the lattice modes.
    ///
    /// Exact for trigonometric polynomials whose modes fit in the cube.
    pub fn from_physical(lattice: WaveLattice, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let m = sampling_size(lattice.n());
        let sampler = Sampler::new(&lattice, m);
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let mut comps = [vec![0.0; m * m * m], vec![0.0; m * m * m], vec![0.0; m * m * m]];
        for ix in 0..m {
            for iy in 0..m {
                for iz in 0..m {
                    let v = f([ix as f64 * h, iy as f64 * h, iz as f64 * h]);
                    let g = (ix * m + iy) * m + iz;
                    for c in 0..3 {
                        comps[c][g] = v[c];
                    }
                }
            }
        }
        let (x, y) = sampler.to_spectral_pair(&comps[0], &comps[1]);
        let zero = vec![0.0; m * m * m];
        let (z, _) = sampler.to_spectral_pair(&comps[2], &zero);
        Self::from_components(lattice, [x, y, z]).with_tag("sampled")
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn lattice(&self) -> &WaveLattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[CVec3] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [CVec3] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> Vec<Complex64> {
        self.coeffs.iter().map(|v| v[c]).collect()
    }

    pub fn get(&self, k: [i32; 3]) -> Option<CVec3> {
        self.lattice.index(k).map(|i| self.coeffs[i])
    }

    /// Set `û(k) = v` and `û(-k) = conj(v)`. Ignores `k = 0`.
    pub fn set_mode(&mut self, k: [i32; 3], v: CVec3) {
        let Some(i) = self.lattice.index(k) else {
            panic!("mode {k:?} outside the truncation N = {}", self.lattice.n());
        };
        if i == self.lattice.zero_index() {
            return;
        }
        self.coeffs[i] = v;
        self.coeffs[self.lattice.mirror(i)] = conj3(v);
    }

    /// Hermitian part `(û(k) + conj(û(-k))) / 2` with the mean removed.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.coeffs.len() {
            let m = conj3(self.coeffs[self.lattice.mirror(i)]);
            out.coeffs[i] = std::array::from_fn(|c| 0.5 * (self.coeffs[i][c] + m[c]));
        }
        out.coeffs[self.lattice.zero_index()] = ZERO3;
        out
    }

    /// Multiply every mode by `weight(|λk|)`. The zero mode stays 0.
    pub fn map_radial(&self, weight: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for (i, v) in out.coeffs.iter_mut().enumerate() {
            if i == self.lattice.zero_index() {
                continue;
            }
            let w = weight(self.lattice.wavenumber(i));
            for z in v.iter_mut() {
                *z *= w;
            }
        }
        out
    }

    /// Multiply mode `i` by `weights[i]` (lattice order).
    pub fn apply_weights(&self, weights: &[f64]) -> Self {
        assert_eq!(weights.len(), self.coeffs.len());
        let mut out = self.clone();
        for (v, &w) in out.coeffs.iter_mut().zip(weights) {
            for z in v.iter_mut() {
                *z *= w;
            }
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.iter_mut() {
            for z in v.iter_mut() {
                *z *= a;
            }
        }
        out
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Self {
        assert_eq!(self.lattice, other.lattice, "lattice mismatch");
        let mut out = self.clone();
        for (v, w) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for c in 0..3 {
                v[c] += a * w[c];
            }
        }
        out
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        self.axpy(-1.0, other)
    }

    /// Coefficient-space L² norm `(Σ_k |û(k)|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Real L² pairing `Σ_k û(k) · conj(v̂(k))`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.lattice, other.lattice, "lattice mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (0..3).map(|c| (a[c] * b[c].conj()).re).sum::<f64>())
            .sum()
    }

    /// `‖self - other‖ / ‖other‖` (absolute when `other` vanishes).
    pub fn relative_diff(&self, other: &SpectralField) -> f64 {
        let d = self.sub(other).l2_norm();
        let r = other.l2_norm();
        if r > 0.0 {
            d / r
        } else {
            d
        }
    }

    /// `max_k |û(k) - conj(û(-k))|`.
    pub fn reality_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let m = self.coeffs[self.lattice.mirror(i)];
                (0..3)
                    .map(|c| (self.coeffs[i][c] - m[c].conj()).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |λk · û(k)| / (|λk| |û(k)|)` over nonzero coefficients.
    pub fn divergence_residual(&self) -> f64 {
        self.lattice
            .modes()
            .filter(|&(i, _)| i != self.lattice.zero_index())
            .map(|(i, k)| {
                let v = &self.coeffs[i];
                let mag = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if mag == 0.0 {
                    return 0.0;
                }
                let kv = self.lattice.wavevector(k);
                let dot = kv[0] * v[0] + kv[1] * v[1] + kv[2] * v[2];
                dot.norm() / (self.lattice.wavenumber(i) * mag)
            })
            .fold(0.0, f64::max)
    }

    pub fn is_mean_zero(&self) -> bool {
        self.coeffs[self.lattice.zero_index()] == ZERO3
    }

    /// Re-express the field on a lattice with radius `n`, zero-padding or
    /// truncating as needed.
    pub fn resized(&self, n: usize) -> Result<Self> {
        let target = WaveLattice::new(n, self.lattice.scale())?;
        let mut out = SpectralField::zeros(target).with_tag(self.tag.clone());
        for (i, k) in target.modes() {
            if let Some(j) = self.lattice.index(k) {
                out.coeffs[i] = self.coeffs[j];
            }
        }
        Ok(out)
    }

    pub(crate) fn debug_check(&self) {
        debug_assert!(
            self.reality_defect() <= 1e-12 * (1.0 + self.max_abs()),
            "reality symmetry broken"
        );
        debug_assert!(self.is_mean_zero(), "mean mode must vanish");
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|v| v.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn conj3(v: CVec3) -> CVec3 {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_mirror() {
        let l = WaveLattice::unit(3).unwrap();
        for (i, k) in l.modes() {
            assert_eq!(l.index(k), Some(i));
            assert_eq!(l.mode(l.mirror(i)), [-k[0], -k[1], -k[2]]);
        }
        assert_eq!(l.mode(l.zero_index()), [0, 0, 0]);
        assert_eq!(l.index([4, 0, 0]), None);
    }

    #[test]
    fn rejects_bad_lattices() {
        assert!(WaveLattice::new(0, 1.0).is_err());
        assert!(WaveLattice::new(2, 0.0).is_err());
        assert!(WaveLattice::new(2, f64::NAN).is_err());
    }

    #[test]
    fn set_mode_keeps_reality() {
        let l = WaveLattice::unit(2).unwrap();
        let mut u = SpectralField::zeros(l);
        u.set_mode([1, 2, -1], [Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.5)]);
        assert_eq!(u.reality_defect(), 0.0);
        assert_eq!(u.get([-1, -2, 1]).unwrap()[0], Complex64::new(1.0, -2.0));
    }

    #[test]
    fn sampling_cos_x_gives_half_coefficients() {
        let l = WaveLattice::unit(2).unwrap();
        let u = SpectralField::from_physical(l, |x| [x[0].cos(), 0.0, 0.0]);
        assert!((u.get([1, 0, 0]).unwrap()[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((u.get([-1, 0, 0]).unwrap()[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((u.l2_norm() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn resize_pads_and_truncates() {
        let l = WaveLattice::unit(2).unwrap();
        let mut u = SpectralField::zeros(l);
        u.set_mode([2, 0, 0], [Complex64::new(1.0, 0.0); 3]);
        u.set_mode([1, 0, 0], [Complex64::new(0.5, 0.0); 3]);
        let big = u.resized(4).unwrap();
        assert_eq!(big.get([2, 0, 0]), u.get([2, 0, 0]));
        let small = u.resized(1).unwrap();
        assert_eq!(small.get([1, 0, 0]), u.get([1, 0, 0]));
        assert!((small.l2_norm() - (6.0 * 0.25f64).sqrt()).abs() < 1e-15);
    }
}
