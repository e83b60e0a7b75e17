//! Truncated Fourier representation of real, mean-zero vector fields on the
//! torus `[0, 2π)³`, together with the multiplier operators and norms that
//! act on them.
//!
//! A field is stored densely over the cube of integer modes
//! `k ∈ {-N..N}³`; the physical wavevector of mode `k` is `λ k` where `λ`
//! is the lattice scale. All norms are taken directly on coefficients:
//! `‖u‖² = Σ_k |û(k)|²`.

mod field;
mod generate;
pub(crate) mod ops;
mod params;
pub mod snapshot;

pub use field::{CVec3, SpectralField, WaveLattice};
pub use generate::{
    beltrami_z, random_divfree_field, random_field, random_gevrey_field, single_shell_beltrami,
};
pub use ops::{
    curl, divergence, gevrey_mult, gevrey_norm, lambda_pow, laplacian, leray_project,
    sobolev_norm,
};
pub use params::{GevreyParams, NoiseModel, NoiseVariant};
