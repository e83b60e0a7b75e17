//! Dispatch of a validated configuration to the experiment pipelines and
//! output of their artifacts.
//!
//! Every file is written atomically. CSV outputs depend only on the
//! configuration; wall-clock time appears in `summary.json` alone.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{CheckKind, ExperimentConfig, ExperimentKind, InitialConfig, InitialKind};
use super::io::write_atomic;
use crate::error::{Error, Result};
use crate::evolution::{self, require_inside, PicardConfig, Scheme, StepperConfig};
use crate::paths::{mc_crossing, sample_conditioned, sample_path, BrownianPath, CrossingQuery};
use crate::record::{fmt_f64, RunRecord, RunRow, RunStatus};
use crate::seeds;
use crate::spectral::{
    beltrami_z, gevrey_norm, random_divfree_field, random_field, random_gevrey_field,
    single_shell_beltrami, snapshot, GevreyParams, NoiseModel, SpectralField,
};
use crate::verification::{
    check_energy_monotonicity, check_propagator_bound, check_triangle, estimate_bilinear_constant,
    inflation_comparison, BilinearEnsemble, InequalityReport, MonotonicityConfig,
};

use super::config::validate_config;

/// Independent random streams derived from the master seed.
mod stream {
    pub const INITIAL: u64 = 0;
    pub const PATH: u64 = 1;
    pub const MONTECARLO: u64 = 2;
    pub const TRIANGLE: u64 = 3;
    pub const ENSEMBLE: u64 = 4;
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    /// False only when a `verify` check failed.
    pub passed: bool,
    pub warnings: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Builds the initial field described by the `[initial]` section.
pub fn initial_field(cfg: &ExperimentConfig) -> Result<SpectralField> {
    let init: &InitialConfig = cfg
        .initial
        .as_ref()
        .ok_or_else(|| Error::config("missing [initial] section"))?;
    let lattice = cfg.wave_lattice()?;
    let n = lattice.n();
    let seed = init.seed.unwrap_or_else(|| seeds::derive(cfg.seed, stream::INITIAL));
    let scaled = lattice.scale() != 1.0;
    let random_kind = matches!(init.kind, InitialKind::Random | InitialKind::Divfree | InitialKind::Gevrey);
    if scaled && random_kind {
        return Err(Error::config("random initial data is generated on the unit lattice only"));
    }
    let u = match init.kind {
        InitialKind::Random => random_field(seed, n, init.decay, init.amplitude),
        InitialKind::Divfree => random_divfree_field(seed, n, init.decay, init.amplitude),
        InitialKind::Gevrey => random_gevrey_field(seed, n, init.radius, cfg.gevrey.s, init.decay, init.amplitude),
        InitialKind::Beltrami => beltrami_z(lattice).scaled(init.amplitude),
        InitialKind::Shell => single_shell_beltrami(seed, lattice, init.shell_sq, init.amplitude)?,
        InitialKind::Zero => SpectralField::zeros(lattice),
        InitialKind::Snapshot => {
            let path = init.path.as_ref().ok_or_else(|| Error::config("snapshot initial data needs a path"))?;
            let u = snapshot::load(path)?;
            if u.lattice() != &lattice {
                return Err(Error::LatticeMismatch);
            }
            u
        }
    };
    match init.gevrey_norm {
        None => Ok(u),
        Some(target) => {
            let p = &cfg.gevrey;
            let g = gevrey_norm(&u, p.shifted_radius(0.0), p.sigma, p.s)?;
            if g == 0.0 {
                return Err(Error::config("cannot rescale a zero field to a Gevrey norm"));
            }
            Ok(u.scaled(target / g))
        }
    }
}

/// Path `index` of the run; conditioned on staying below the radius when
/// the configuration asks for it and the noise is active.
fn driving_path(
    cfg: &ExperimentConfig,
    noise: &NoiseModel,
    index: u64,
    horizon: f64,
    condition: bool,
) -> Result<BrownianPath> {
    let seed = seeds::derive(seeds::derive(cfg.seed, stream::PATH), index);
    let horizon = horizon.max(cfg.path.dt);
    let p = &cfg.gevrey;
    if condition && noise.mu > 0.0 && p.beta > 0.0 && p.alpha > 0.0 {
        let q = CrossingQuery::new(p.alpha, p.beta, noise.mu)?;
        Ok(sample_conditioned(&q, seed, cfg.path.dt, horizon, cfg.path.max_draws)?.0)
    } else {
        sample_path(seed, cfg.path.dt, horizon)
    }
}

/// Validates `cfg` for `kind`, runs the experiment and writes its
/// artifacts to `out`.
///
/// A run that fails part-way still writes whatever it produced, with status
/// `terminated`, before the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, kind: ExperimentKind, out: &Path) -> Result<RunOutcome> {
    let validation = validate_config(cfg, kind);
    if !validation.is_valid() {
        return Err(Error::Config(validation.violations.join("; ")));
    }
    let start = Instant::now();
    let hash = cfg.hash()?;
    let mut output = Output {
        dir: out,
        written: Vec::new(),
    };
    let mut summary = json!({
        "kind": kind.name(),
        "config_hash": hash,
        "warnings": validation.warnings,
        "exploratory": cfg.exploratory,
    });
    let result = match kind {
        ExperimentKind::Simulate => simulate(cfg, &mut output, &mut summary),
        ExperimentKind::Picard => picard(cfg, &mut output, &mut summary),
        ExperimentKind::Montecarlo => montecarlo(cfg, &mut output, &mut summary),
        ExperimentKind::Verify => verify(cfg, &mut output, &mut summary),
        ExperimentKind::Inflate => inflate(cfg, &mut output, &mut summary),
    };
    let wall = start.elapsed().as_secs_f64();
    let (mut record, passed, failure) = match result {
        Ok((record, passed)) => (record, passed, None),
        Err(Failed { record, error }) => (record, false, Some(error)),
    };
    record.config_hash = hash;
    record.wall_time_s = wall;
    if failure.is_some() && record.status == RunStatus::Ok {
        record.status = RunStatus::Failed;
    }
    summary["status"] = serde_json::to_value(record.status)?;
    summary["wall_time_s"] = json!(wall);
    if let Some(err) = &failure {
        summary["error"] = json!(err.to_string());
    }
    if !matches!(failure, Some(Error::Config(_))) {
        output.json("summary.json", &summary)?;
    }
    match failure {
        Some(err) => Err(err),
        None => Ok(RunOutcome {
            record,
            passed,
            warnings: validation.warnings,
            artifacts: output.written,
        }),
    }
}

struct Failed {
    record: RunRecord,
    error: Error,
}

impl From<Error> for Failed {
    fn from(error: Error) -> Self {
        Failed {
            record: RunRecord::new(Vec::new()),
            error,
        }
    }
}

type Stage = std::result::Result<(RunRecord, bool), Failed>;

fn simulate(cfg: &ExperimentConfig, out: &mut Output, summary: &mut Value) -> Stage {
    let st = cfg.stepper.as_ref().expect("validated");
    let noise = cfg.noise_model()?;
    let u0 = initial_field(cfg)?;
    let path = driving_path(cfg, &noise, 0, st.t_final, cfg.path.condition)?;
    let stepper = StepperConfig::new(st.dt, st.scheme).every(st.output_every).in_frame(st.frame);
    let (evo, failure) = if st.scheme.is_random_pde() {
        evolution::run_rpde(&u0, &path, &noise, &cfg.gevrey, &stepper, st.t_final)?
    } else {
        evolution::run_spde(&u0, &path, &noise, &cfg.gevrey, &stepper, st.t_final)?
    };
    out.write("run.csv", &evo.record.to_csv_bytes()?)?;
    let traj = &evo.trajectory;
    let mut written = Vec::new();
    for (i, &ts) in st.snapshots.iter().enumerate() {
        let hit = traj.times.iter().position(|&t| (t - ts).abs() <= 0.5 * st.dt);
        if let Some(j) = hit {
            let mut bytes = Vec::new();
            snapshot::write_to(&traj.fields[j], &mut bytes)?;
            out.write(&format!("snapshot_{i:03}.{}", snapshot::EXTENSION), &bytes)?;
            written.push(traj.times[j]);
        }
    }
    summary["snapshot_times"] = json!(written);
    summary["path_seed"] = json!(path.seed());
    summary["rows"] = json!(evo.record.rows.len());
    match failure {
        None => Ok((evo.record, true)),
        Some(error) => Err(Failed {
            record: evo.record,
            error,
        }),
    }
}

fn picard(cfg: &ExperimentConfig, out: &mut Output, summary: &mut Value) -> Stage {
    let pc = cfg.picard.expect("validated");
    let noise = cfg.noise_model()?;
    let u0 = initial_field(cfg)?;
    let path = driving_path(cfg, &noise, 0, pc.horizon, cfg.path.condition)?;
    let picard_cfg = PicardConfig {
        horizon: pc.horizon,
        n_iter: pc.n_iter,
        quad_points: pc.quad_points,
        tol: pc.tol,
    };
    let (traj, report) = evolution::picard_solve(&u0, &path, &noise, &cfg.gevrey, &picard_cfg)?;
    let rows = traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, u)| RunRow::measure(u, t, path.value_at(t), &cfg.gevrey))
        .collect();
    let record = RunRecord::new(rows);
    out.write("run.csv", &record.to_csv_bytes()?)?;
    summary["picard"] = serde_json::to_value(&report).map_err(Error::from)?;
    if let Some(dt) = pc.compare_dt {
        let diff = picard_vs_etdrk2(&u0, &path, &noise, &cfg.gevrey, &traj, pc.horizon, dt)?;
        summary["etdrk2_relative_difference"] = json!(diff);
    }
    Ok((record, true))
}

/// Relative Gevrey distance between the Picard fixed point and ETDRK2 at
/// the horizon.
pub fn picard_vs_etdrk2(
    u0: &SpectralField,
    path: &BrownianPath,
    noise: &NoiseModel,
    params: &GevreyParams,
    picard: &evolution::Trajectory,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    let cfg = StepperConfig::new(dt, Scheme::Etdrk2);
    let evo = evolution::integrate_rpde(u0, path, noise, params, &cfg, horizon)?;
    let a = picard.last().expect("nonempty trajectory");
    let b = evo.trajectory.last().expect("nonempty trajectory");
    let r = params.radius(horizon);
    let norm = gevrey_norm(b, r, params.sigma, params.s)?;
    let diff = gevrey_norm(&a.sub(b), r, params.sigma, params.s)?;
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

fn montecarlo(cfg: &ExperimentConfig, out: &mut Output, summary: &mut Value) -> Stage {
    let mc = cfg.montecarlo.expect("validated");
    let q = CrossingQuery::new(cfg.gevrey.alpha, cfg.gevrey.beta, cfg.noise.mu)?;
    let seed = seeds::derive(cfg.seed, stream::MONTECARLO);
    let est = mc_crossing(&q, mc.n_paths, mc.dt, mc.horizon, mc.bridge, seed)?;
    let rows = est.records.iter().map(|r| {
        vec![
            r.seed.to_string(),
            r.crossed.to_string(),
            fmt_f64(r.t_omega),
            fmt_f64(r.horizon),
        ]
    });
    out.write("paths.csv", &csv_bytes(&["seed", "crossed", "T_omega", "horizon"], rows)?)?;
    summary["estimate"] = json!(est.estimate);
    summary["stderr"] = json!(est.stderr);
    summary["closed_form"] = json!(est.closed_form);
    summary["z_score"] = json!(est.z_score);
    summary["n_paths"] = json!(est.n_paths);
    summary["bridge"] = json!(est.bridge);
    Ok((RunRecord::new(Vec::new()), true))
}

fn verify(cfg: &ExperimentConfig, out: &mut Output, summary: &mut Value) -> Stage {
    let v = cfg.verify.as_ref().expect("validated");
    let noise = cfg.noise_model()?;
    let p = &cfg.gevrey;
    let mut reports: Vec<InequalityReport> = Vec::new();
    let mut c_hat = v.c_hat;
    for check in &v.checks {
        match check {
            CheckKind::Triangle => {
                let seed = seeds::derive(cfg.seed, stream::TRIANGLE);
                for &s in &v.triangle_s {
                    reports.push(check_triangle(s, v.triangle_samples, seed)?);
                }
            }
            CheckKind::Propagator => {
                let lags: Vec<f64> = (1..=v.lag_count)
                    .map(|i| v.lag_max * i as f64 / v.lag_count as f64)
                    .collect();
                reports.push(check_propagator_bound(p, &noise, &v.propagator_n, &lags)?);
            }
            CheckKind::Bilinear => {
                let phi = v.bilinear_phi.unwrap_or(p.shifted_radius(0.0));
                let ensemble = BilinearEnsemble {
                    n_fields: v.bilinear_fields,
                    n_list: v.bilinear_n.clone(),
                    decay: v.bilinear_decay,
                    seed: seeds::derive(cfg.seed, stream::ENSEMBLE),
                    phi,
                    thetas: v.bilinear_thetas.clone().unwrap_or_else(|| vec![0.0, 0.5 * phi, phi]),
                    radius: v.bilinear_radius,
                };
                let rep = estimate_bilinear_constant(p, &noise, &ensemble)?;
                c_hat = c_hat.or(Some(rep.parameters["c_hat"]));
                reports.push(rep);
            }
            CheckKind::Monotonicity => {
                let st = cfg.stepper.as_ref().expect("validated");
                let c = c_hat.ok_or_else(|| {
                    Error::config("monotonicity needs c_hat or a preceding bilinear check")
                })?;
                let mono = MonotonicityConfig {
                    t_final: st.t_final,
                    dt: st.dt,
                    c_hat: c,
                    margin: v.margin,
                };
                let u0 = initial_field(cfg)?;
                for i in 0..v.monotonicity_paths {
                    let path = driving_path(cfg, &noise, i as u64, st.t_final, true)?;
                    require_inside(&path, &noise, p, st.t_final)?;
                    let rep = match check_energy_monotonicity(&u0, &path, &noise, p, &mono) {
                        Ok(rep) => rep,
                        Err(Error::MonotonicityViolation { t, previous, current }) => {
                            let mut rep = violation_report(t, previous, current);
                            rep.parameters.insert("path".into(), i as f64);
                            rep
                        }
                        Err(e) => return Err(e.into()),
                    };
                    reports.push(rep);
                }
            }
        }
    }
    let passed = reports.iter().all(|r| r.pass);
    out.json("reports.json", &reports)?;
    out.write("matrix.csv", &matrix_csv(&reports)?)?;
    summary["passed"] = json!(passed);
    summary["failed_checks"] = json!(reports.iter().filter(|r| !r.pass).map(|r| &r.name).collect::<Vec<_>>());
    Ok((RunRecord::new(Vec::new()), passed))
}

fn violation_report(t: f64, previous: f64, current: f64) -> InequalityReport {
    let mut parameters = std::collections::BTreeMap::new();
    parameters.insert("t".into(), t);
    parameters.insert("previous".into(), previous);
    parameters.insert("current".into(), current);
    InequalityReport {
        name: "energy_monotonicity".into(),
        parameters,
        observed: (current - previous) / previous,
        samples: 0,
        pass: false,
        per_n: Vec::new(),
        notes: vec![format!("Gevrey norm increased at t = {t}")],
    }
}

/// One row per truncation level of each report, or one row per report
/// without truncation levels.
fn matrix_csv(reports: &[InequalityReport]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let base = |n: String, value: f64, secondary: Option<f64>| {
            vec![
                i.to_string(),
                r.name.clone(),
                n,
                fmt_f64(value),
                secondary.map(fmt_f64).unwrap_or_default(),
                r.pass.to_string(),
            ]
        };
        if r.per_n.is_empty() {
            rows.push(base(String::new(), r.observed, None));
        } else {
            for t in &r.per_n {
                rows.push(base(t.n.to_string(), t.value, t.secondary));
            }
        }
    }
    csv_bytes(&["report", "check", "n", "value", "secondary", "pass"], rows)
}

fn inflate(cfg: &ExperimentConfig, out: &mut Output, summary: &mut Value) -> Stage {
    let inf = cfg.inflate.expect("validated");
    let noise = cfg.noise_model()?;
    let b0 = initial_field(cfg)?;
    let paths = (0..inf.n_paths as u64)
        .map(|i| driving_path(cfg, &noise, i, inf.t_final, false))
        .collect::<Result<Vec<_>>>()?;
    let rep = inflation_comparison(&b0, &noise, &cfg.gevrey, &paths, inf.t_final, inf.dt)?;
    let rows = rep.times.iter().enumerate().map(|(i, &t)| {
        let a = rep.arm_a.get(i).copied();
        vec![
            fmt_f64(t),
            a.map(fmt_f64).unwrap_or_default(),
            fmt_f64(rep.arm_b_mean[i]),
            rep.ratio.get(i).copied().map(fmt_f64).unwrap_or_default(),
        ]
    });
    out.write("inflation.csv", &csv_bytes(&["t", "arm_a", "arm_b_mean", "ratio"], rows)?)?;
    summary["arm_a_terminated_at"] = json!(rep.arm_a_terminated_at);
    summary["n_paths"] = json!(paths.len());
    Ok((RunRecord::new(Vec::new()), true))
}
