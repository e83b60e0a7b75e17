//! Small data under strengthened noise: the Gevrey energy at the growing
//! radius decreases along a path that stays below the barrier.

use emhd::paths::{sample_conditioned, CrossingQuery};
use emhd::spectral::{gevrey_norm, random_gevrey_field};
use emhd::verification::{check_energy_monotonicity, estimate_bilinear_constant, BilinearEnsemble, MonotonicityConfig};
use emhd::{GevreyParams, NoiseModel};

fn main() -> emhd::Result<()> {
    let params = GevreyParams::new(1.8, 1.0, 1.0, 4.0, 0.1)?;
    let noise = NoiseModel::strengthened(4.0, 1.0)?;
    let phi = params.alpha + params.delta;
    let ensemble = BilinearEnsemble {
        n_fields: 4,
        n_list: vec![4, 8],
        decay: 2.0,
        seed: 11,
        phi,
        thetas: vec![0.0, phi],
        radius: 3.0,
    };
    let c_hat = estimate_bilinear_constant(&params, &noise, &ensemble)?.parameters["c_hat"];
    let margin = 2.0;
    let bound = (noise.mu * noise.mu - 2.0 * params.beta) / (margin * c_hat);
    println!("c_hat {c_hat:.4}, smallness bound {bound:.3}");

    let u = random_gevrey_field(600, 8, 5.0, 1.0, 2.0, 1.0);
    let u0 = u.scaled(0.5 * bound / gevrey_norm(&u, phi, params.sigma, params.s)?);
    let q = CrossingQuery::new(params.alpha, params.beta, noise.mu)?;
    let (path, _) = sample_conditioned(&q, 12, 1e-3, 1.0, 1000)?;
    let cfg = MonotonicityConfig {
        t_final: 1.0,
        dt: 0.05,
        c_hat,
        margin,
    };
    let r = check_energy_monotonicity(&u0, &path, &noise, &params, &cfg)?;
    println!("monotone: {} (worst relative step change {:.3e})", r.pass, r.observed);
    for rec in r.per_n.iter().step_by(4) {
        println!("  {:?}", rec);
    }
    Ok(())
}
