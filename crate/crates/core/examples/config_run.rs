//! Load a TOML experiment, validate it and run it as the `emhd` binary would.
//!
//! `cargo run --example config_run -- montecarlo configs/montecarlo.toml out/mc`

use std::path::Path;

use emhd::harness::{run_experiment, validate_config, ExperimentConfig, ExperimentKind};

fn main() -> emhd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind = match args.first().map(String::as_str).unwrap_or("simulate") {
        "picard" => ExperimentKind::Picard,
        "montecarlo" => ExperimentKind::Montecarlo,
        "verify" => ExperimentKind::Verify,
        "inflate" => ExperimentKind::Inflate,
        _ => ExperimentKind::Simulate,
    };
    let default_config = format!("configs/{}.toml", kind.name());
    let config = args.get(1).unwrap_or(&default_config);
    let default_out = format!("out/{}", kind.name());
    let out = args.get(2).unwrap_or(&default_out);

    let cfg = ExperimentConfig::load(Path::new(config))?;
    let check = validate_config(&cfg, kind);
    for w in &check.warnings {
        println!("warning: {w}");
    }
    println!("config hash {}", cfg.hash()?);
    let outcome = run_experiment(&cfg, kind, Path::new(out))?;
    println!("passed: {}", outcome.passed);
    for a in &outcome.artifacts {
        println!("  {}", a.display());
    }
    Ok(())
}
