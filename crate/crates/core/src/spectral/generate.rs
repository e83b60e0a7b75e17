//! Initial data and test ensembles.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::field::{CVec3, SpectralField, WaveLattice};
use super::ops::{gevrey_mult, leray_project};
use crate::error::{Error, Result};
use crate::seeds;

fn normal_cvec3(rng: &mut impl Rng) -> CVec3 {
    std::array::from_fn(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn unit(v: CVec3) -> CVec3 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

/// Random reality-symmetric, mean-zero field (not projected) with
/// `|û(k)| = amplitude · |k|^{-decay}`.
pub fn random_field(seed: u64, n: usize, decay: f64, amplitude: f64) -> SpectralField {
    let lattice = WaveLattice::unit(n).expect("N must be at least 1");
    let mut rng = seeds::rng(seed);
    let mut u = SpectralField::zeros(lattice);
    for (i, k) in lattice.modes().skip(lattice.zero_index() + 1) {
        let w = amplitude * lattice.wavenumber(i).powf(-decay);
        let v = unit(normal_cvec3(&mut rng)).map(|z| z * w);
        u.set_mode(k, v);
    }
    u.with_tag(format!("random(seed={seed},decay={decay})"))
}

/// Random divergence-free field: [`random_field`] followed by the Leray
/// projection. Deterministic in `seed`.
pub fn random_divfree_field(seed: u64, n: usize, decay: f64, amplitude: f64) -> SpectralField {
    assert!(decay > 0.0, "decay must be positive");
    leray_project(&random_field(seed, n, decay, amplitude))
        .with_tag(format!("divfree(seed={seed},decay={decay})"))
}

/// Random divergence-free field with Gevrey-class decay
/// `|û(k)| ∝ e^{-radius |λk|^s} |k|^{-decay}`, rescaled so that its
/// plain L² norm equals `amplitude`.
pub fn random_gevrey_field(
    seed: u64,
    n: usize,
    radius: f64,
    s: f64,
    decay: f64,
    amplitude: f64,
) -> SpectralField {
    assert!(radius >= 0.0, "radius must be nonnegative");
    let u = random_divfree_field(seed, n, decay, 1.0);
    let u = gevrey_mult(&u, -radius, s).expect("damping never overflows");
    let norm = u.l2_norm();
    u.scaled(amplitude / norm)
        .with_tag(format!("gevrey(seed={seed},radius={radius},decay={decay})"))
}

/// The Beltrami field `(sin z, cos z, 0)`, which satisfies `∇×B = B`.
pub fn beltrami_z(lattice: WaveLattice) -> SpectralField {
    let mut b = SpectralField::zeros(lattice);
    // sin z = (e^{iz} - e^{-iz}) / 2i, cos z = (e^{iz} + e^{-iz}) / 2
    b.set_mode(
        [0, 0, 1],
        [Complex64::new(0.0, -0.5), Complex64::new(0.5, 0.0), Complex64::default()],
    );
    b.with_tag("beltrami(sin z, cos z, 0)")
}

/// Random curl eigenfield supported on the shell `|k|² = shell_sq`:
/// every coefficient lies in the positive-helicity eigenspace of
/// `v ↦ i k × v`, so `∇×B = λ√shell_sq · B`.
pub fn single_shell_beltrami(
    seed: u64,
    lattice: WaveLattice,
    shell_sq: i32,
    amplitude: f64,
) -> Result<SpectralField> {
    let mut rng = seeds::rng(seed);
    let mut b = SpectralField::zeros(lattice);
    let mut count = 0;
    for (_, k) in lattice.modes().skip(lattice.zero_index() + 1) {
        if k[0] * k[0] + k[1] * k[1] + k[2] * k[2] != shell_sq {
            continue;
        }
        count += 1;
        let norm = (shell_sq as f64).sqrt();
        let kh = [k[0] as f64 / norm, k[1] as f64 / norm, k[2] as f64 / norm];
        // random real unit vector orthogonal to k
        let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let d = g[0] * kh[0] + g[1] * kh[1] + g[2] * kh[2];
        let mut a = [g[0] - d * kh[0], g[1] - d * kh[1], g[2] - d * kh[2]];
        let an = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        a.iter_mut().for_each(|x| *x /= an);
        let kxa = [
            kh[1] * a[2] - kh[2] * a[1],
            kh[2] * a[0] - kh[0] * a[2],
            kh[0] * a[1] - kh[1] * a[0],
        ];
        let phase = Complex64::from_polar(amplitude * rng.random::<f64>(), rng.random::<f64>() * std::f64::consts::TAU);
        let h: CVec3 = std::array::from_fn(|c| Complex64::new(a[c], kxa[c]) * phase / 2f64.sqrt());
        b.set_mode(k, h);
    }
    if count == 0 {
        return Err(Error::config(format!(
            "no lattice modes with |k|^2 = {shell_sq} inside N = {}",
            lattice.n()
        )));
    }
    Ok(b.with_tag(format!("shell_beltrami(|k|^2={shell_sq},seed={seed})")))
}
