//! Pseudo-spectral laboratory for the three-dimensional electron MHD
//! equations on the periodic torus driven by pseudo-differential
//! multiplicative noise.
//!
//! The crate is organised around the objects one needs to study the
//! regularizing effect of the noise numerically:
//!
//! - [`spectral`]: truncated Fourier fields, multiplier operators
//!   (`Λ^r`, `e^{φΛ^s}`), curl, Leray projection, Sobolev/Gevrey norms and
//!   the `.sfld` snapshot format.
//! - [`nonlinear`]: the Hall term `∇×((∇×B)×B)` in curl and transport form,
//!   its noise-shifted version `Q(U) = Γ P(Γ⁻¹U)`, and a brute-force
//!   convolution oracle.
//! - [`paths`]: seeded Brownian paths, stopping times, first passage of a
//!   linear barrier in closed form and by bridge-corrected Monte Carlo.
//! - [`evolution`]: exact dissipative propagator, Duhamel/Picard fixed
//!   point, exponential integrators for the transformed random PDE and
//!   Itô steppers for the original SPDE, and the `Γ` bridge between them.
//! - [`verification`]: numerical checks of the inequalities behind the
//!   well-posedness theory.
//! - [`harness`]: configuration, orchestration and reproducible output for
//!   the `emhd` binary.

pub mod error;
pub mod evolution;
mod fft;
pub mod harness;
pub mod nonlinear;
pub mod paths;
pub mod record;
pub mod seeds;
pub mod spectral;
pub mod verification;

pub use error::{Error, Result};
pub use spectral::{GevreyParams, NoiseModel, NoiseVariant, SpectralField, WaveLattice};

/// Largest exponent argument accepted by the exponential multipliers.
///
/// `e^x` overflows an `f64` near `x = 709.78`.
pub const EXP_LIMIT: f64 = 700.0;
