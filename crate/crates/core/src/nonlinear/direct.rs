//! Pair-by-pair evaluation of the weighted curl form.
//!
//! Each pair `(j, l)` is multiplied by its own combined exponential weight,
//! so no factor is ever amplified on its own and the result carries
//! roundoff relative to the terms that actually meet at `k`.
//!
//! Output modes are processed independently (half of them; the other half
//! follows from reality). For a given `k` the sum runs over rows
//! `(j_x, j_y)`. Rows are bucketed by decades below the largest row maximum.
//! For a row pair whose product of maxima clears the threshold, only the
//! `j_z` window matching the partner row's decade is visited.

use num_complex::Complex64;
use rayon::prelude::*;

use super::PairWeights;
use crate::error::Result;
use crate::spectral::ops::{guard_exponent, i_cross};
use crate::spectral::{CVec3, SpectralField};

/// Default relative pruning threshold for [`super::Evaluation::Auto`].
/// A pair is skipped only if its weight bound times the product of its
/// coefficient magnitudes is below `10⁻²⁴` of the largest such product.
pub const DEFAULT_PRUNE_TOLERANCE: f64 = 1e-24;

fn magnitude(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn cross(p: &CVec3, r: &CVec3) -> CVec3 {
    [
        p[1] * r[2] - p[2] * r[1],
        p[2] * r[0] - p[0] * r[2],
        p[0] * r[1] - p[1] * r[0],
    ]
}

/// Inclusive `z` window of the significant entries of each row, shifted
/// coordinates `0..side`.
fn row_windows(significant: &[bool], side: usize) -> Vec<Option<(usize, usize)>> {
    significant
        .chunks_exact(side)
        .map(|row| {
            let first = row.iter().position(|&s| s)?;
            let last = row.iter().rposition(|&s| s)?;
            Some((first, last))
        })
        .collect()
}

pub(super) fn curl_form_direct(
    y: &SpectralField,
    w: &PairWeights,
    prune: f64,
) -> Result<SpectralField> {
    let lattice = *y.lattice();
    let n = lattice.n() as i64;
    let side = lattice.side();
    let zero = lattice.zero_index();
    let kk = lattice.wavenumbers();
    let power = |r: f64| -> Vec<f64> {
        kk.iter().map(|k| if *k == 0.0 { 0.0 } else { k.powf(r) }).collect()
    };
    let a = power(w.frame_exp);
    let b = power(w.shift_exp);

    // w(j,l,k) <= g_j g_l for every k; exact when the exponents coincide
    let log_g: Vec<f64> = if w.shift_exp == w.frame_exp {
        a.iter().map(|ai| (w.theta - w.frame).max(0.0) * ai).collect()
    } else {
        a.iter()
            .zip(&b)
            .map(|(ai, bi)| w.theta.max(0.0) * bi + (-w.frame).max(0.0) * ai)
            .collect()
    };
    guard_exponent(2.0 * log_g.iter().copied().fold(0.0, f64::max))?;

    let p: Vec<CVec3> = lattice
        .modes()
        .zip(y.coeffs())
        .map(|((_, k), v)| i_cross(lattice.wavevector(k), v))
        .collect();
    let r = y.coeffs();
    let bound = |f: &[CVec3]| -> Vec<f64> {
        f.iter()
            .zip(&log_g)
            .map(|(v, lg)| lg.exp() * magnitude(v))
            .collect()
    };
    let (bp, br) = (bound(&p), bound(r));
    let max_p = bp.iter().copied().fold(0.0, f64::max);
    let max_r = br.iter().copied().fold(0.0, f64::max);
    let tau = prune * max_p * max_r;
    let levels = if prune > 0.0 { (-prune.log10()).floor() as usize + 1 } else { 1 };
    let row_max = |bounds: &[f64]| -> Vec<f64> {
        bounds.chunks_exact(side).map(|row| row.iter().copied().fold(0.0, f64::max)).collect()
    };
    let (row_p, row_r) = (row_max(&bp), row_max(&br));
    // decades by which a row's largest bound falls short of the global one
    let row_level = |rows: &[f64], max: f64| -> Vec<usize> {
        rows.iter()
            .map(|&m| {
                if m <= 0.0 || levels == 1 {
                    0
                } else {
                    ((max / m).log10().floor().max(0.0) as usize).min(levels - 1)
                }
            })
            .collect()
    };
    let (level_p, level_r) = (row_level(&row_p, max_p), row_level(&row_r, max_r));
    // window at level ℓ holds every entry with bound ≥ prune·10^ℓ·max, which
    // contains every partner of a row whose own bound is 10^ℓ below its max
    let windows = |bounds: &[f64], max: f64| -> Vec<Vec<Option<(usize, usize)>>> {
        let per_level: Vec<Vec<Option<(usize, usize)>>> = (0..levels)
            .map(|l| {
                let threshold = prune * 10f64.powi(l as i32) * max;
                let keep: Vec<bool> = bounds
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| i != zero && m > 0.0 && m >= threshold)
                    .collect();
                row_windows(&keep, side)
            })
            .collect();
        (0..side * side).map(|row| per_level.iter().map(|w| w[row]).collect()).collect()
    };
    let (win_p, win_r) = (windows(&bp, max_p), windows(&br, max_r));
    let plain = w.theta == 0.0 && w.frame == 0.0;
    // w = e^{e_j + e_l - e_k} with e = θb − ψa. When every |e| is moderate
    // the weight is assembled from tables as (x_j z_k)(x_l z_k), z_k = e^{-e_k/2},
    // which never leaves the floating-point range; otherwise per-pair exp.
    let e: Vec<f64> = a.iter().zip(&b).map(|(ai, bi)| w.theta * bi - w.frame * ai).collect();
    let tabulated = e.iter().all(|v| v.abs() <= 450.0);
    let x: Vec<f64> = e.iter().map(|v| v.exp()).collect();

    let row = |x: i64, y: i64| ((x + n) as usize) * side + (y + n) as usize;
    let sum_at = |idx: usize| -> CVec3 {
        let k = lattice.mode(idx);
        let (kx, ky, kz) = (k[0] as i64, k[1] as i64, k[2] as i64);
        let mut acc = [Complex64::default(); 3];
        let z = (-0.5 * e[idx]).exp();
        for jx in (kx - n).max(-n)..=(kx + n).min(n) {
            for jy in (ky - n).max(-n)..=(ky + n).min(n) {
                let (jr, lr) = (row(jx, jy), row(kx - jx, ky - jy));
                if row_p[jr] * row_r[lr] < tau {
                    continue;
                }
                let (Some((p0, p1)), Some((r0, r1))) = (win_p[jr][level_r[lr]], win_r[lr][level_p[jr]])
                else {
                    continue;
                };
                // jz = zj - n with zj in [p0, p1]; lz = kz - jz with lz + n in [r0, r1]
                let lo = (p0 as i64 - n).max(kz - (r1 as i64 - n));
                let hi = (p1 as i64 - n).min(kz - (r0 as i64 - n));
                let (j_row, l_row) = (jr * side, lr * side);
                for jz in lo..=hi {
                    let ji = j_row + (jz + n) as usize;
                    let li = l_row + (kz - jz + n) as usize;
                    let term = cross(&p[ji], &r[li]);
                    if plain {
                        for c in 0..3 {
                            acc[c] += term[c];
                        }
                    } else {
                        let weight = if tabulated {
                            (x[ji] * z) * (x[li] * z)
                        } else {
                            (e[ji] + e[li] - e[idx]).exp()
                        };
                        for c in 0..3 {
                            acc[c] += term[c] * weight;
                        }
                    }
                }
            }
        }
        i_cross(lattice.wavevector(k), &acc)
    };

    let upper: Vec<CVec3> = (zero + 1..lattice.len()).into_par_iter().map(sum_at).collect();
    let mut coeffs = vec![[Complex64::default(); 3]; lattice.len()];
    for (offset, v) in upper.into_iter().enumerate() {
        let idx = zero + 1 + offset;
        coeffs[lattice.mirror(idx)] = [v[0].conj(), v[1].conj(), v[2].conj()];
        coeffs[idx] = v;
    }
    SpectralField::from_coeffs(lattice, coeffs)
}
