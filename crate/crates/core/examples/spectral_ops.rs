//! Multipliers, curl, Leray projection and norms on a random field.

use emhd::spectral::{
    curl, gevrey_mult, gevrey_norm, lambda_pow, leray_project, random_field, sobolev_norm,
};

fn main() -> emhd::Result<()> {
    let u = random_field(7, 8, 2.0, 1.0);
    println!("lattice N = {}, modes = {}", u.lattice().n(), u.lattice().len());
    println!("reality defect      {:.3e}", u.reality_defect());
    println!("div residual (raw)  {:.3e}", u.divergence_residual());

    let p = leray_project(&u);
    println!("div residual (P u)  {:.3e}", p.divergence_residual());
    println!("|P P u - P u|       {:.3e}", leray_project(&p).sub(&p).l2_norm());
    println!("div of curl         {:.3e}", curl(&u).divergence_residual());

    let lhs = lambda_pow(&lambda_pow(&u, 0.7), 1.3);
    println!("Λ^0.7 Λ^1.3 vs Λ^2  {:.3e}", lhs.relative_diff(&lambda_pow(&u, 2.0)));
    let g = gevrey_mult(&gevrey_mult(&u, 0.3, 1.0)?, -0.3, 1.0)?;
    println!("e^{{φΛ}} e^{{-φΛ}} u   {:.3e}", g.relative_diff(&u));

    for r in [0.0, 1.0, 2.0] {
        println!("H^{r} norm          {:.6}", sobolev_norm(&p, r));
    }
    for phi in [0.0, 0.2, 0.5] {
        println!("Gevrey norm φ={phi}   {:.6}", gevrey_norm(&p, phi, 1.0, 1.0)?);
    }
    Ok(())
}
