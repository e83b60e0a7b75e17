//! Mild solution by Picard iteration of the Duhamel map.

use emhd::evolution::{picard_solve, PicardConfig};
use emhd::paths::{sample_conditioned, CrossingQuery};
use emhd::spectral::{gevrey_norm, random_divfree_field};
use emhd::{GevreyParams, NoiseModel};

fn main() -> emhd::Result<()> {
    let params = GevreyParams::new(1.8, 1.0, 1.0, 0.25, 0.0)?;
    let noise = NoiseModel::fractional(1.0, 1.0)?;
    let cfg = PicardConfig {
        horizon: 0.5,
        n_iter: 30,
        quad_points: 50,
        tol: 1e-13,
    };
    let (path, _) = sample_conditioned(&CrossingQuery::new(1.0, 0.25, 1.0)?, 4, 1e-3, cfg.horizon, 1000)?;
    let u = random_divfree_field(2, 6, 2.0, 1.0);
    let u0 = u.scaled(1e-2 / gevrey_norm(&u, params.alpha, params.sigma, params.s)?);

    let (traj, report) = picard_solve(&u0, &path, &noise, &params, &cfg)?;
    println!("converged: {} after {} iterations", report.converged, report.iterations);
    for (m, (d, r)) in report.differences.iter().zip(std::iter::once(&f64::NAN).chain(&report.ratios)).enumerate() {
        println!("  m = {:2}  sup distance {d:.3e}  ratio {r:.3e}", m + 1);
    }
    println!("residual {:.3e}, {} time nodes", report.residual, traj.len());
    Ok(())
}
