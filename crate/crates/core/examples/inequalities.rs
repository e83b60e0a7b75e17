//! Numerical checks of the inequalities used in the well-posedness theory.

use emhd::verification::{check_propagator_bound, check_triangle, estimate_bilinear_constant, BilinearEnsemble};
use emhd::{GevreyParams, NoiseModel};

fn main() -> emhd::Result<()> {
    for s in [0.5, 0.9, 1.0] {
        let r = check_triangle(s, 100_000, 1)?;
        println!("triangle s={s}: pass={} largest relative excess {:.6}", r.pass, r.observed);
    }

    let params = GevreyParams::new(1.8, 1.0, 1.0, 0.25, 0.0)?;
    let noise = NoiseModel::fractional(1.0, 1.0)?;
    let lags: Vec<f64> = (1..=200).map(|i| 0.05 * i as f64).collect();
    let r = check_propagator_bound(&params, &noise, &[16, 32, 64], &lags)?;
    println!("propagator bound: pass={}", r.pass);
    for rec in &r.per_n {
        println!("  N={:3} sup f1 {:.6} sup f2 {:?}", rec.n, rec.value, rec.secondary);
    }

    let ensemble = BilinearEnsemble {
        n_fields: 10,
        n_list: vec![4, 8],
        decay: 2.0,
        seed: 10,
        phi: 0.2,
        thetas: vec![0.1],
        radius: 0.0,
    };
    let r = estimate_bilinear_constant(&params, &noise, &ensemble)?;
    println!("bilinear constant: pass={} c_hat={:.4e}", r.pass, r.parameters["c_hat"]);
    Ok(())
}
