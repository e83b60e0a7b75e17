//! Sobolev norm histories with and without the regularizing noise.

use emhd::paths::sample_path;
use emhd::spectral::random_divfree_field;
use emhd::verification::inflation_comparison;
use emhd::{GevreyParams, NoiseModel};

fn main() -> emhd::Result<()> {
    let params = GevreyParams::new(1.8, 1.0, 1.0, 0.25, 0.0)?;
    let noise = NoiseModel::fractional(1.0, 1.0)?;
    let b0 = random_divfree_field(5, 6, 1.0, 0.5);
    let paths = (0..4).map(|i| sample_path(100 + i, 1e-4, 0.1)).collect::<emhd::Result<Vec<_>>>()?;
    let r = inflation_comparison(&b0, &noise, &params, &paths, 0.1, 1e-4)?;
    if let Some(t) = r.arm_a_terminated_at {
        println!("noiseless arm stopped at t = {t}");
    }
    println!("{:>6} {:>12} {:>12} {:>10}", "t", "noiseless", "noisy mean", "ratio");
    for i in (0..r.times.len()).step_by(100) {
        let a = r.arm_a.get(i).copied().unwrap_or(f64::NAN);
        let ratio = r.ratio.get(i).copied().unwrap_or(f64::NAN);
        println!("{:6.3} {:12.4e} {:12.4e} {:10.3e}", r.times[i], a, r.arm_b_mean[i], ratio);
    }
    Ok(())
}
