//! Three-dimensional complex FFTs on an `m³` grid and the sampling maps
//! between truncated mode sets and physical grids.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::spectral::WaveLattice;

/// Smallest 5-smooth size that resolves products of two fields truncated at
/// `n` without aliasing onto the retained modes (`m ≥ 3n + 1`).
pub(crate) fn dealiased_size(n: usize) -> usize {
    smooth_at_least(3 * n + 1)
}

/// Smallest 5-smooth size able to hold the modes `-n..=n` (`m ≥ 2n + 1`).
pub(crate) fn sampling_size(n: usize) -> usize {
    smooth_at_least(2 * n + 1)
}

fn smooth_at_least(min: usize) -> usize {
    (min..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("5-smooth numbers are unbounded")
}

/// Grids with fewer points are transformed without rayon.
const PARALLEL_GRID: usize = 1 << 12;

pub(crate) struct Plan3 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

pub(crate) fn plan(m: usize) -> Arc<Plan3> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plan3>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan3 {
                m,
                fwd: planner.plan_fft_forward(m),
                inv: planner.plan_fft_inverse(m),
            })
        })
        .clone()
}

impl Plan3 {
    /// Unnormalized `Σ_n x_n e^{-2πi kn/m}` along all three axes.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
    }

    /// Unnormalized `Σ_k x_k e^{+2πi kn/m}` along all three axes.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m);
        // small grids stay on the calling thread
        let min_len = if m * m * m < PARALLEL_GRID { usize::MAX } else { 1 };
        // z lines are contiguous
        data.par_chunks_mut(m * m).with_min_len(min_len).for_each(|plane| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for line in plane.chunks_mut(m) {
                fft.process_with_scratch(line, &mut scratch);
            }
        });
        // y lines: stride m inside each x plane
        data.par_chunks_mut(m * m).with_min_len(min_len).for_each(|plane| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            let mut line = vec![Complex64::default(); m];
            for iz in 0..m {
                for iy in 0..m {
                    line[iy] = plane[iy * m + iz];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for iy in 0..m {
                    plane[iy * m + iz] = line[iy];
                }
            }
        });
        // x lines: stride m², gathered per (y, z) column then scattered back
        let lines: Vec<Vec<Complex64>> = (0..m * m)
            .into_par_iter()
            .with_min_len(min_len)
            .map_init(
                || vec![Complex64::default(); fft.get_inplace_scratch_len()],
                |scratch, yz| {
                    let mut line: Vec<Complex64> = (0..m).map(|ix| data[ix * m * m + yz]).collect();
                    fft.process_with_scratch(&mut line, scratch);
                    line
                },
            )
            .collect();
        for (yz, line) in lines.into_iter().enumerate() {
            for (ix, v) in line.into_iter().enumerate() {
                data[ix * m * m + yz] = v;
            }
        }
    }
}

/// Maps between the modes of a [`WaveLattice`] and an `m³` periodic grid
/// with nodes `x_n = 2π n / m`.
pub(crate) struct Sampler {
    plan: Arc<Plan3>,
    m: usize,
    /// grid index of mode `k` for each lattice index
    pos: Vec<usize>,
    /// grid index of mode `-k` for each lattice index
    neg: Vec<usize>,
}

impl Sampler {
    pub(crate) fn new(lattice: &WaveLattice, m: usize) -> Self {
        assert!(m > 2 * lattice.n(), "grid too small for the lattice");
        let wrap = |c: i32| c.rem_euclid(m as i32) as usize;
        let to_grid = |k: [i32; 3]| (wrap(k[0]) * m + wrap(k[1])) * m + wrap(k[2]);
        let (pos, neg) = lattice
            .modes()
            .map(|(_, k)| (to_grid(k), to_grid([-k[0], -k[1], -k[2]])))
            .unzip();
        Sampler {
            plan: plan(m),
            m,
            pos,
            neg,
        }
    }

    pub(crate) fn dealiased(lattice: &WaveLattice) -> Self {
        Self::new(lattice, dealiased_size(lattice.n()))
    }

    pub(crate) fn grid_len(&self) -> usize {
        self.m * self.m * self.m
    }

    /// Physical samples of the two real scalar fields with mode coefficients
    /// `a` and `b`, computed with a single complex transform.
    pub(crate) fn to_physical_pair(
        &self,
        a: &[Complex64],
        b: &[Complex64],
    ) -> (Vec<f64>, Vec<f64>) {
        let mut grid = vec![Complex64::default(); self.grid_len()];
        let i = Complex64::i();
        for (idx, &g) in self.pos.iter().enumerate() {
            grid[g] = a[idx] + i * b[idx];
        }
        self.plan.inverse(&mut grid);
        grid.into_iter().map(|z| (z.re, z.im)).unzip()
    }

    /// Mode coefficients (restricted to the lattice) of two real sampled
    /// fields. Outputs are exactly Hermitian.
    pub(crate) fn to_spectral_pair(
        &self,
        a: &[f64],
        b: &[f64],
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut grid: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.plan.forward(&mut grid);
        let norm = 1.0 / self.grid_len() as f64;
        let half = 0.5 * norm;
        let i = Complex64::i();
        self.pos
            .iter()
            .zip(&self.neg)
            .map(|(&p, &n)| {
                let z = grid[p];
                let zc = grid[n].conj();
                ((z + zc) * half, (z - zc) * (-i * half))
            })
            .unzip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_are_smooth_and_large_enough() {
        assert_eq!(dealiased_size(6), 20);
        assert_eq!(dealiased_size(8), 25);
        assert_eq!(dealiased_size(16), 50);
        assert_eq!(sampling_size(1), 3);
        for n in 1..40 {
            assert!(dealiased_size(n) > 3 * n);
        }
    }

    #[test]
    fn forward_inverse_roundtrip() {
        let m = 6;
        let p = plan(m);
        let orig: Vec<Complex64> = (0..m * m * m)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        p.forward(&mut data);
        p.inverse(&mut data);
        let scale = (m * m * m) as f64;
        for (x, y) in data.iter().zip(&orig) {
            assert!((x / scale - y).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_matches_direct_evaluation() {
        let lattice = WaveLattice::unit(2).unwrap();
        let s = Sampler::new(&lattice, 7);
        let mut a = vec![Complex64::default(); lattice.len()];
        let b = vec![Complex64::default(); lattice.len()];
        let k = [1, -2, 1];
        a[lattice.index(k).unwrap()] = Complex64::new(0.5, 0.25);
        a[lattice.index([-1, 2, -1]).unwrap()] = Complex64::new(0.5, -0.25);
        let (phys, _) = s.to_physical_pair(&a, &b);
        let m = 7;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        for ix in 0..m {
            for iy in 0..m {
                for iz in 0..m {
                    let arg = h * (k[0] * ix as i32 + k[1] * iy as i32 + k[2] * iz as i32) as f64;
                    let expect = arg.cos() - 0.5 * arg.sin();
                    assert!((phys[(ix * m + iy) * m + iz] - expect).abs() < 1e-13);
                }
            }
        }
    }
}
