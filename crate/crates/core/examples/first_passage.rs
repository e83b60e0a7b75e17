//! Probability that μW_t ever exceeds α + βt: closed form against a
//! bridge-corrected Monte Carlo estimate.

use emhd::paths::{crossing_probability, mc_crossing, sample_path, stopping_time, CrossingQuery};

fn main() -> emhd::Result<()> {
    let q = CrossingQuery::new(1.0, 1.0, 1.0)?;
    println!("closed form          {:.10}", crossing_probability(&q));
    for bridge in [false, true] {
        let mc = mc_crossing(&q, 20_000, 0.01, 25.0, bridge, 2024)?;
        println!(
            "MC bridge={bridge:5}     {:.5} ± {:.5} (z = {:+.2})",
            mc.estimate, mc.stderr, mc.z_score
        );
    }

    let scaled = CrossingQuery::new(2.0, 0.5, 2.0)?;
    let unit = CrossingQuery::new(1.0, 0.25, 1.0)?;
    println!(
        "scaling (2,.5,2) vs (1,.25,1): {} vs {}",
        crossing_probability(&scaled),
        crossing_probability(&unit)
    );

    let path = sample_path(5, 1e-3, 10.0)?;
    println!("T_omega on one path  {}", stopping_time(&path, &q));
    Ok(())
}
