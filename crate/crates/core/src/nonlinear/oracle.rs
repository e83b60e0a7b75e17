//! Brute-force double sum over mode pairs. Slow and simple; the reference
//! every fast path is checked against.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{CVec3, SpectralField, WaveLattice};

/// Contribution of the pair `(j, l)` to the output mode `j + l`, given the
/// coefficient `a` of the first factor at `j` and `c` of the second at `l`.
pub trait BilinearStencil: Sync {
    fn term(&self, j: [f64; 3], a: &CVec3, l: [f64; 3], c: &CVec3) -> CVec3;
}

impl<F> BilinearStencil for F
where
    F: Fn([f64; 3], &CVec3, [f64; 3], &CVec3) -> CVec3 + Sync,
{
    fn term(&self, j: [f64; 3], a: &CVec3, l: [f64; 3], c: &CVec3) -> CVec3 {
        self(j, a, l, c)
    }
}

fn i_cross(k: [f64; 3], v: &CVec3) -> CVec3 {
    let i = Complex64::i();
    [
        i * (k[1] * v[2] - k[2] * v[1]),
        i * (k[2] * v[0] - k[0] * v[2]),
        i * (k[0] * v[1] - k[1] * v[0]),
    ]
}

fn cross(p: &CVec3, r: &CVec3) -> CVec3 {
    [
        p[1] * r[2] - p[2] * r[1],
        p[2] * r[0] - p[0] * r[2],
        p[0] * r[1] - p[1] * r[0],
    ]
}

fn i_dot(k: [f64; 3], v: &CVec3) -> Complex64 {
    Complex64::i() * (k[0] * v[0] + k[1] * v[1] + k[2] * v[2])
}

/// `∇×((∇×A)×C)`: `i(j+l) × ((i j × a) × c)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CurlStencil;

impl BilinearStencil for CurlStencil {
    fn term(&self, j: [f64; 3], a: &CVec3, l: [f64; 3], c: &CVec3) -> CVec3 {
        let k = [j[0] + l[0], j[1] + l[1], j[2] + l[2]];
        i_cross(k, &cross(&i_cross(j, a), c))
    }
}

/// `(A·∇)(∇×C) − ((∇×A)·∇)C`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TransportStencil;

impl BilinearStencil for TransportStencil {
    fn term(&self, j: [f64; 3], a: &CVec3, l: [f64; 3], c: &CVec3) -> CVec3 {
        let jc = i_cross(l, c);
        let a_grad = i_dot(l, a);
        let ja = i_cross(j, a);
        let ja_grad = i_dot(l, &ja);
        std::array::from_fn(|m| a_grad * jc[m] - ja_grad * c[m])
    }
}

/// Componentwise product `(A_x C_x, A_y C_y, A_z C_z)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComponentProduct;

impl BilinearStencil for ComponentProduct {
    fn term(&self, _j: [f64; 3], a: &CVec3, _l: [f64; 3], c: &CVec3) -> CVec3 {
        [a[0] * c[0], a[1] * c[1], a[2] * c[2]]
    }
}

fn oracle_sum<S: BilinearStencil + ?Sized>(
    a: &SpectralField,
    c: &SpectralField,
    out: WaveLattice,
    stencil: &S,
) -> Result<SpectralField> {
    if a.lattice() != c.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let lattice = *a.lattice();
    let nonzero = |f: &SpectralField| -> Vec<([i32; 3], [f64; 3], CVec3)> {
        lattice
            .modes()
            .zip(f.coeffs())
            .filter(|(_, v)| v.iter().any(|z| z.norm_sqr() > 0.0))
            .map(|((_, k), v)| (k, lattice.wavevector(k), *v))
            .collect()
    };
    let (aa, cc) = (nonzero(a), nonzero(c));
    let mut sums = vec![[Complex64::default(); 3]; out.len()];
    for (jk, jv, av) in &aa {
        for (lk, lv, cv) in &cc {
            let k = [jk[0] + lk[0], jk[1] + lk[1], jk[2] + lk[2]];
            if let Some(idx) = out.index(k) {
                let t = stencil.term(*jv, av, *lv, cv);
                for m in 0..3 {
                    sums[idx][m] += t[m];
                }
            }
        }
    }
    SpectralField::from_coeffs(out, sums)
}

/// Exact truncated bilinear sum `Σ_{j+l=k} stencil(j, a_j, l, c_l)` for
/// every `k` in the input cube. The mean mode of the result is discarded.
pub fn convolution_oracle<S: BilinearStencil + ?Sized>(
    a: &SpectralField,
    c: &SpectralField,
    stencil: &S,
) -> Result<SpectralField> {
    oracle_sum(a, c, *a.lattice(), stencil)
}

/// [`convolution_oracle`] on the doubled cube `|k|∞ ≤ 2N`, which holds the
/// complete product of two fields truncated at `N`.
pub fn convolution_oracle_padded<S: BilinearStencil + ?Sized>(
    a: &SpectralField,
    c: &SpectralField,
    stencil: &S,
) -> Result<SpectralField> {
    let l = a.lattice();
    let out = WaveLattice::new(2 * l.n(), l.scale())?;
    oracle_sum(a, c, out, stencil)
}
