//! The Itô equation for B and the random PDE for U = e^{-μW_tΛ^s} B,
//! integrated along the same path and compared through Γ.

use emhd::evolution::{gamma_bridge, integrate_rpde, integrate_spde, Scheme, StepperConfig};
use emhd::paths::{sample_conditioned, CrossingQuery};
use emhd::spectral::random_divfree_field;
use emhd::{GevreyParams, NoiseModel};

fn main() -> emhd::Result<()> {
    let params = GevreyParams::new(1.8, 1.0, 1.0, 0.25, 0.0)?;
    let noise = NoiseModel::fractional(1.0, 1.0)?;
    let (path, draws) = sample_conditioned(&CrossingQuery::new(1.0, 0.25, 1.0)?, 9, 1.25e-3, 0.5, 1000)?;
    println!("conditioned path after {draws} draw(s)");

    let b0 = random_divfree_field(1, 6, 2.0, 1e-6);
    let t_final = 0.5;
    for dt in [0.01, 0.005, 0.0025] {
        let spde = integrate_spde(&b0, &path, &noise, &params, &StepperConfig::new(dt, Scheme::ExponentialIto), t_final)?;
        let rpde = integrate_rpde(&b0, &path, &noise, &params, &StepperConfig::new(dt, Scheme::Etdrk2), t_final)?;
        let mapped = gamma_bridge(&rpde.trajectory, &path, &noise)?;
        let diff = spde.trajectory.last().unwrap().relative_diff(mapped.last().unwrap());
        println!("dt = {dt:<7} final-time relative difference {diff:.3e}");
    }
    Ok(())
}
