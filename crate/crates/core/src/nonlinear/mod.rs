//! The quasilinear Hall term of electron MHD and its noise-shifted form.
//!
//! For a divergence-free field `B` with current `J = ∇×B` the nonlinearity is
//!
//! ```text
//! P(B) = ∇×(J×B) = (B·∇)J − (J·∇)B
//! ```
//!
//! and the transformed equation for `U = e^{-θΛ^s}B` carries
//! `Q(U) = e^{-θΛ^s} P(e^{θΛ^s} U)`. In Fourier variables `Q` is a double sum
//! over pairs `(j, l = k − j)` whose weight
//! `e^{θ(|j|^s + |l|^s − |k|^s)}` does not grow with `|k|` alone; see
//! [`q_weighted`] for the two evaluation strategies.

mod direct;
mod oracle;

use num_complex::Complex64;

pub use direct::DEFAULT_PRUNE_TOLERANCE;
pub use oracle::{
    convolution_oracle, convolution_oracle_padded, BilinearStencil, ComponentProduct,
    CurlStencil, TransportStencil,
};

use crate::error::Result;
use crate::fft::Sampler;
use crate::spectral::ops::{guard_exponent, i_cross};
use crate::spectral::{CVec3, SpectralField};

/// Which algebraic form of the nonlinearity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearForm {
    /// `∇×((∇×B)×B)`
    Curl,
    /// `(B·∇)J − (J·∇)B`
    Transport,
}

/// Evaluation strategy for the shifted nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evaluation {
    /// FFT when its roundoff is not amplified by more than
    /// [`FFT_GAIN_LIMIT`], direct summation otherwise.
    Auto,
    /// Dealiased pseudo-spectral products with separable weights.
    Fft,
    /// Pair-by-pair summation with the combined weight. Pairs whose weight
    /// bound times coefficient product falls below `prune` times the largest
    /// such bound are skipped; `prune = 0` sums every pair.
    Direct { prune: f64 },
}

/// Largest outer exponent for which [`Evaluation::Auto`] still picks the
/// FFT path: roundoff is then amplified by at most `e^8 ≈ 3·10³`.
pub const FFT_GAIN_LIMIT: f64 = 8.0;

/// Exponential pair weights of the shifted nonlinearity, possibly expressed
/// in a Gevrey frame `Y = e^{ψΛ^r} U`.
///
/// The weight attached to the pair `(j, l)` contributing to `k = j + l` is
/// `exp(θ(b_j + b_l − b_k) − ψ(a_j + a_l − a_k))` with `b = |λk|^shift_exp`
/// and `a = |λk|^frame_exp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairWeights {
    pub theta: f64,
    pub shift_exp: f64,
    pub frame: f64,
    pub frame_exp: f64,
}

impl PairWeights {
    /// Plain shift `Γ = e^{-θΛ^s}` with no frame.
    pub fn shift(theta: f64, s: f64) -> Self {
        PairWeights {
            theta,
            shift_exp: s,
            frame: 0.0,
            frame_exp: s,
        }
    }

    pub fn in_frame(mut self, frame: f64, frame_exp: f64) -> Self {
        self.frame = frame;
        self.frame_exp = frame_exp;
        self
    }

    /// Inner exponent of mode `kk`: `θ b − ψ a`.
    fn inner_exponent(&self, kk: f64) -> f64 {
        self.theta * kk.powf(self.shift_exp) - self.frame * kk.powf(self.frame_exp)
    }

    fn is_identity(&self) -> bool {
        self.theta == 0.0 && self.frame == 0.0
    }
}

/// `P(B)` on the truncated lattice, evaluated alias-free.
///
/// The curl form is a curl and therefore divergence-free and mean-zero
/// mode by mode. Both forms coincide for divergence-free `B`.
pub fn p_nonlinear(b: &SpectralField, form: NonlinearForm) -> SpectralField {
    let out = match form {
        NonlinearForm::Curl => curl_form_fft(b, None, None),
        NonlinearForm::Transport => transport_form_fft(b),
    };
    out.debug_check();
    out
}

/// `Q(U) = Γ P(Γ⁻¹U)` with `Γ = e^{-θΛ^s}`.
///
/// `θ = 0` reduces bit for bit to [`p_nonlinear`] in curl form.
pub fn q_shifted(u: &SpectralField, theta: f64, s: f64) -> Result<SpectralField> {
    q_weighted(u, &PairWeights::shift(theta, s), Evaluation::Auto)
}

/// [`q_shifted`] summed pair by pair with the combined weight, no pruning.
pub fn q_shifted_direct(u: &SpectralField, theta: f64, s: f64) -> Result<SpectralField> {
    q_weighted(u, &PairWeights::shift(theta, s), Evaluation::Direct { prune: 0.0 })
}

/// Curl-form nonlinearity with exponential pair weights.
///
/// With `weights.frame = ψ` and input `Y = e^{ψΛ^r}U` this returns
/// `e^{ψΛ^r} Q(U)`.
pub fn q_weighted(
    y: &SpectralField,
    weights: &PairWeights,
    eval: Evaluation,
) -> Result<SpectralField> {
    let lattice = *y.lattice();
    let zero = lattice.zero_index();
    let inner: Vec<f64> = (0..lattice.len())
        .map(|i| if i == zero { 0.0 } else { weights.inner_exponent(lattice.wavenumber(i)) })
        .collect();
    let max_inner = inner.iter().copied().fold(0.0, f64::max);
    let max_outer = inner.iter().map(|e| -e).fold(0.0, f64::max);

    let eval = match eval {
        Evaluation::Auto if max_outer <= FFT_GAIN_LIMIT => Evaluation::Fft,
        Evaluation::Auto => Evaluation::Direct {
            prune: DEFAULT_PRUNE_TOLERANCE,
        },
        e => e,
    };
    let out = match eval {
        Evaluation::Fft => {
            // inner weights multiply both factors of every product
            guard_exponent(2.0 * max_inner)?;
            guard_exponent(max_outer)?;
            if weights.is_identity() {
                curl_form_fft(y, None, None)
            } else {
                let w_in: Vec<f64> = inner.iter().map(|e| e.exp()).collect();
                let w_out: Vec<f64> = inner.iter().map(|e| (-e).exp()).collect();
                curl_form_fft(y, Some(&w_in), Some(&w_out))
            }
        }
        Evaluation::Direct { prune } => direct::curl_form_direct(y, weights, prune)?,
        Evaluation::Auto => unreachable!(),
    };
    out.debug_check();
    Ok(out)
}

fn zero3() -> CVec3 {
    [Complex64::default(); 3]
}

fn curl_form_fft(
    u: &SpectralField,
    inner: Option<&[f64]>,
    outer: Option<&[f64]>,
) -> SpectralField {
    let lattice = *u.lattice();
    let sampler = Sampler::dealiased(&lattice);
    let b = match inner {
        Some(w) => u.apply_weights(w),
        None => u.clone(),
    };
    let j: Vec<CVec3> = lattice
        .modes()
        .zip(b.coeffs())
        .map(|((_, k), v)| i_cross(lattice.wavevector(k), v))
        .collect();
    let comp = |f: &[CVec3], c: usize| f.iter().map(|v| v[c]).collect::<Vec<_>>();
    let mut bp = Vec::with_capacity(3);
    let mut jp = Vec::with_capacity(3);
    for c in 0..3 {
        let (x, y) = sampler.to_physical_pair(&comp(b.coeffs(), c), &comp(&j, c));
        bp.push(x);
        jp.push(y);
    }
    let n = sampler.grid_len();
    let mut cross = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for g in 0..n {
        cross[0][g] = jp[1][g] * bp[2][g] - jp[2][g] * bp[1][g];
        cross[1][g] = jp[2][g] * bp[0][g] - jp[0][g] * bp[2][g];
        cross[2][g] = jp[0][g] * bp[1][g] - jp[1][g] * bp[0][g];
    }
    let (cx, cy) = sampler.to_spectral_pair(&cross[0], &cross[1]);
    let (cz, _) = sampler.to_spectral_pair(&cross[2], &vec![0.0; n]);
    let mut coeffs: Vec<CVec3> = lattice
        .modes()
        .map(|(i, k)| i_cross(lattice.wavevector(k), &[cx[i], cy[i], cz[i]]))
        .collect();
    if let Some(w) = outer {
        for (v, &wk) in coeffs.iter_mut().zip(w) {
            for z in v.iter_mut() {
                *z *= wk;
            }
        }
    }
    coeffs[lattice.zero_index()] = zero3();
    SpectralField::from_coeffs(lattice, coeffs).expect("lattice-sized coefficients")
}

/// `(B·∇)J − (J·∇)B` from explicit gradients of both factors.
fn transport_form_fft(b: &SpectralField) -> SpectralField {
    let lattice = *b.lattice();
    let sampler = Sampler::dealiased(&lattice);
    let i = Complex64::i();
    let j: Vec<CVec3> = lattice
        .modes()
        .zip(b.coeffs())
        .map(|((_, k), v)| i_cross(lattice.wavevector(k), v))
        .collect();
    // scalar spectral fields: B_c, J_c, ∂_d B_c, ∂_d J_c
    let spectral = |f: &[CVec3], c: usize, d: Option<usize>| -> Vec<Complex64> {
        lattice
            .modes()
            .zip(f)
            .map(|((_, k), v)| match d {
                None => v[c],
                Some(d) => i * lattice.wavevector(k)[d] * v[c],
            })
            .collect()
    };
    let phys_pair = |x: Vec<Complex64>, y: Vec<Complex64>| sampler.to_physical_pair(&x, &y);

    let mut bp = Vec::new();
    let mut jp = Vec::new();
    for c in 0..3 {
        let (x, y) = phys_pair(spectral(b.coeffs(), c, None), spectral(&j, c, None));
        bp.push(x);
        jp.push(y);
    }
    // grad_b[d][c] = ∂_d B_c, grad_j[d][c] = ∂_d J_c
    let mut grad_b = vec![Vec::new(); 9];
    let mut grad_j = vec![Vec::new(); 9];
    for d in 0..3 {
        for c in 0..3 {
            let (x, y) = phys_pair(spectral(b.coeffs(), c, Some(d)), spectral(&j, c, Some(d)));
            grad_b[3 * d + c] = x;
            grad_j[3 * d + c] = y;
        }
    }
    let n = sampler.grid_len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for g in 0..n {
        for c in 0..3 {
            let mut acc = 0.0;
            for d in 0..3 {
                acc += bp[d][g] * grad_j[3 * d + c][g] - jp[d][g] * grad_b[3 * d + c][g];
            }
            out[c][g] = acc;
        }
    }
    let (x, y) = sampler.to_spectral_pair(&out[0], &out[1]);
    let (z, _) = sampler.to_spectral_pair(&out[2], &vec![0.0; n]);
    SpectralField::from_components(lattice, [x, y, z])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        beltrami_z, divergence, gevrey_mult, random_divfree_field, single_shell_beltrami,
        WaveLattice,
    };

    #[test]
    fn beltrami_fields_are_steady() {
        let l = WaveLattice::unit(3).unwrap();
        let b = beltrami_z(l);
        for form in [NonlinearForm::Curl, NonlinearForm::Transport] {
            assert!(p_nonlinear(&b, form).l2_norm() <= 1e-12 * b.l2_norm().powi(2));
        }
        let shell = single_shell_beltrami(4, l, 2, 1.0).unwrap();
        for theta in [0.0, 0.3, -0.5] {
            let q = q_shifted(&shell, theta, 0.9).unwrap();
            assert!(q.l2_norm() <= 1e-12 * shell.l2_norm().powi(2));
        }
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let z = SpectralField::zeros(WaveLattice::unit(2).unwrap());
        assert_eq!(p_nonlinear(&z, NonlinearForm::Curl).l2_norm(), 0.0);
        assert_eq!(p_nonlinear(&z, NonlinearForm::Transport).l2_norm(), 0.0);
    }

    #[test]
    fn curl_form_is_solenoidal_and_mean_free() {
        let b = random_divfree_field(12, 5, 1.5, 1.0);
        let p = p_nonlinear(&b, NonlinearForm::Curl);
        let div = divergence(&p).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(div <= 1e-12 * p.max_abs());
        assert!(p.is_mean_zero());
        assert_eq!(p.reality_defect(), 0.0);
    }

    #[test]
    fn quadratic_homogeneity() {
        let b = random_divfree_field(2, 4, 1.5, 1.0);
        let p1 = p_nonlinear(&b, NonlinearForm::Curl);
        let p3 = p_nonlinear(&b.scaled(3.0), NonlinearForm::Curl);
        assert!(p3.sub(&p1.scaled(9.0)).l2_norm() <= 1e-13 * p3.l2_norm());
    }

    #[test]
    fn energy_pairing_vanishes() {
        let b = random_divfree_field(8, 5, 1.5, 1.0);
        let p = p_nonlinear(&b, NonlinearForm::Curl);
        assert!(p.inner(&b).abs() <= 1e-12 * b.l2_norm().powi(3) * 25.0);
    }

    #[test]
    fn zero_shift_is_bitwise_p() {
        let b = random_divfree_field(5, 4, 1.5, 1.0);
        assert_eq!(q_shifted(&b, 0.0, 0.9).unwrap(), p_nonlinear(&b, NonlinearForm::Curl));
    }

    #[test]
    fn fft_and_direct_agree_with_shift() {
        let u = random_divfree_field(6, 4, 2.0, 1.0);
        for theta in [0.2, -0.2] {
            let w = PairWeights::shift(theta, 0.95);
            let fft = q_weighted(&u, &w, Evaluation::Fft).unwrap();
            let direct = q_weighted(&u, &w, Evaluation::Direct { prune: 0.0 }).unwrap();
            assert!(fft.relative_diff(&direct) < 1e-12, "theta {theta}");
        }
    }

    #[test]
    fn frame_weights_match_conjugated_shift() {
        // e^{ψΛ} Q(e^{-ψΛ} Y) == q_weighted(Y, frame ψ)
        let y = random_divfree_field(10, 4, 2.0, 1.0);
        let (theta, psi, s) = (0.1, 0.4, 1.0);
        let u = gevrey_mult(&y, -psi, s).unwrap();
        let expect = gevrey_mult(&q_shifted(&u, theta, s).unwrap(), psi, s).unwrap();
        let w = PairWeights::shift(theta, s).in_frame(psi, s);
        for eval in [Evaluation::Fft, Evaluation::Direct { prune: 0.0 }] {
            let got = q_weighted(&y, &w, eval).unwrap();
            assert!(got.relative_diff(&expect) < 1e-12);
        }
    }

    #[test]
    fn overflow_guard_trips() {
        let u = random_divfree_field(1, 4, 2.0, 1.0);
        let err = q_weighted(&u, &PairWeights::shift(60.0, 1.0), Evaluation::Fft).unwrap_err();
        assert!(matches!(err, crate::Error::AmplificationOverflow { .. }));
        assert!(q_shifted(&u, 60.0, 1.0).is_err());
    }

    #[test]
    fn pruning_error_is_bounded_per_mode() {
        use crate::spectral::random_gevrey_field;
        // strongly decaying frame variables, as in late Gevrey-frame steps
        let y = random_gevrey_field(3, 6, 3.0, 1.0, 2.0, 1.0);
        let w = PairWeights::shift(0.5, 1.0).in_frame(1.5, 1.0);
        let exact = q_weighted(&y, &w, Evaluation::Direct { prune: 0.0 }).unwrap();
        let prune = 1e-12;
        let pruned = q_weighted(&y, &w, Evaluation::Direct { prune }).unwrap();
        assert_ne!(exact, pruned);
        // every skipped pair is below prune·max|P|·max|Y| (weights ≤ 1 here)
        let lattice = y.lattice();
        let kmax = lattice.max_wavenumber();
        let max_y = y.coeffs().iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
        let max_p = kmax * max_y;
        let pairs = lattice.len() as f64;
        let bound = kmax * pairs * prune * max_p * max_y;
        for (a, b) in exact.coeffs().iter().zip(pruned.coeffs()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).norm() <= bound);
            }
        }
        assert!(exact.relative_diff(&pruned) < 1e-9);
    }
}
