//! Experiment configuration: a single TOML file, validated before any work
//! starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolution::{Frame, Scheme};
use crate::spectral::{GevreyParams, NoiseModel, NoiseVariant, WaveLattice};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Picard,
    Montecarlo,
    Verify,
    Inflate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Picard => "picard",
            ExperimentKind::Montecarlo => "montecarlo",
            ExperimentKind::Verify => "verify",
            ExperimentKind::Inflate => "inflate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub mu: f64,
    #[serde(default = "fractional")]
    pub variant: NoiseVariant,
}

fn fractional() -> NoiseVariant {
    NoiseVariant::Fractional
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Random field, not projected.
    Random,
    /// Random divergence-free field with polynomial decay.
    Divfree,
    /// Random divergence-free field with exponential decay.
    Gevrey,
    /// `(sin z, cos z, 0)`.
    Beltrami,
    /// Random curl eigenfield on one shell.
    Shell,
    Zero,
    /// Read from a `.sfld` file.
    Snapshot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    /// L² norm for `random`, `divfree`, `gevrey` and `shell` unless
    /// `gevrey_norm` is given.
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Rescale to this Gevrey norm at radius `α + δ` instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gevrey_norm: Option<f64>,
    #[serde(default = "two")]
    pub decay: f64,
    /// Exponential decay radius of `gevrey` data.
    #[serde(default = "two")]
    pub radius: f64,
    #[serde(default = "two_i")]
    pub shell_sq: i32,
    /// Defaults to a seed derived from the master seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn two() -> f64 {
    2.0
}

fn two_i() -> i32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    #[serde(default = "one_u")]
    pub output_every: usize,
    #[serde(default)]
    pub frame: Frame,
    /// Times at which `.sfld` snapshots are written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn one_u() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    /// Resolution of the Brownian path.
    pub dt: f64,
    /// Redraw the path until it stays below the Gevrey radius.
    pub condition: bool,
    pub max_draws: usize,
}

fn max_draws() -> usize {
    1000
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            dt: 1e-3,
            condition: false,
            max_draws: max_draws(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSection {
    pub horizon: f64,
    pub n_iter: usize,
    pub quad_points: usize,
    pub tol: f64,
    /// Compare the fixed point with ETDRK2 at this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_dt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "yes")]
    pub bridge: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Triangle,
    Propagator,
    Bilinear,
    Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub checks: Vec<CheckKind>,
    #[serde(default = "triangle_s")]
    pub triangle_s: Vec<f64>,
    #[serde(default = "triangle_samples")]
    pub triangle_samples: u64,
    #[serde(default = "n_pair")]
    pub propagator_n: Vec<usize>,
    #[serde(default = "lag_max")]
    pub lag_max: f64,
    #[serde(default = "lag_count")]
    pub lag_count: usize,
    #[serde(default = "bilinear_fields")]
    pub bilinear_fields: usize,
    #[serde(default = "bilinear_n")]
    pub bilinear_n: Vec<usize>,
    #[serde(default = "two")]
    pub bilinear_decay: f64,
    /// Radius `φ` of the pairing; defaults to `α + δ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bilinear_phi: Option<f64>,
    /// Defaults to `[0, φ/2, φ]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bilinear_thetas: Option<Vec<f64>>,
    #[serde(default)]
    pub bilinear_radius: f64,
    /// Use this constant instead of the bilinear estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_hat: Option<f64>,
    #[serde(default = "two")]
    pub margin: f64,
    #[serde(default = "monotonicity_paths")]
    pub monotonicity_paths: usize,
}

fn triangle_s() -> Vec<f64> {
    vec![0.76, 0.875, 0.9, 1.0]
}
fn triangle_samples() -> u64 {
    1_000_000
}
fn n_pair() -> Vec<usize> {
    vec![32, 64]
}
fn lag_max() -> f64 {
    10.0
}
fn lag_count() -> usize {
    200
}
fn bilinear_fields() -> usize {
    20
}
fn bilinear_n() -> Vec<usize> {
    vec![4, 8, 12]
}
fn monotonicity_paths() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflateSection {
    pub n_paths: usize,
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub seed: u64,
    /// Accept parameters outside the well-posedness ranges, with warnings.
    #[serde(default)]
    pub exploratory: bool,
    pub lattice: LatticeConfig,
    pub gevrey: GevreyParams,
    pub noise: NoiseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepper: Option<StepperSection>,
    #[serde(default)]
    pub path: PathConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflate: Option<InflateSection>,
}

fn format_version() -> u32 {
    FORMAT_VERSION
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.noise.mu, self.noise.variant, self.gevrey.s)
    }

    pub fn wave_lattice(&self) -> Result<WaveLattice> {
        WaveLattice::new(self.lattice.n, self.lattice.scale)
    }

    /// SHA-256 of the canonical JSON form (keys sorted, no whitespace).
    pub fn hash(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let canonical = serde_json::to_string(&value)?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }
}

/// Outcome of [`validate_config`]. Violations are fatal unless the
/// configuration is marked exploratory, in which case they are reported as
/// warnings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_config(cfg: &ExperimentConfig, kind: ExperimentKind) -> Validation {
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    let mut range = Vec::new();

    if cfg.format_version != FORMAT_VERSION {
        hard.push(format!(
            "format_version {} is not supported (expected {FORMAT_VERSION})",
            cfg.format_version
        ));
    }
    if let Err(e) = cfg.wave_lattice() {
        hard.push(e.to_string());
    }
    if let Err(e) = cfg.gevrey.validate() {
        hard.push(e.to_string());
    }
    match cfg.noise_model() {
        Err(e) => hard.push(e.to_string()),
        Ok(noise) => {
            if let Err(e) = cfg.gevrey.check_growth_rate(&noise) {
                // the deterministic limit with a fixed radius
                let frozen = noise.mu == 0.0 && cfg.gevrey.beta == 0.0;
                if kind == ExperimentKind::Montecarlo || frozen {
                    soft.push(e.to_string());
                } else {
                    hard.push(e.to_string());
                }
            }
        }
    }

    let p = &cfg.gevrey;
    match kind {
        ExperimentKind::Picard if !p.in_local_range() => range.push(format!(
            "(sigma, s) = ({}, {}) outside the local range s in (7/8, 1], sigma in (7/(4s), 2)",
            p.sigma, p.s
        )),
        ExperimentKind::Verify
            if !p.in_global_range()
                && cfg.verify.as_ref().is_some_and(|v| {
                    v.checks.iter().any(|c| matches!(c, CheckKind::Bilinear | CheckKind::Monotonicity))
                }) =>
        {
            range.push(format!(
                "(sigma, s) = ({}, {}) outside the global range s in (3/4, 1], sigma in (7/(4s), 2)",
                p.sigma, p.s
            ))
        }
        _ => {}
    }

    let section = |present: bool, name: &str, hard: &mut Vec<String>| {
        if !present {
            hard.push(format!("experiment {} needs a [{name}] section", kind.name()));
        }
    };
    match kind {
        ExperimentKind::Simulate => {
            section(cfg.initial.is_some(), "initial", &mut hard);
            section(cfg.stepper.is_some(), "stepper", &mut hard);
        }
        ExperimentKind::Picard => {
            section(cfg.initial.is_some(), "initial", &mut hard);
            section(cfg.picard.is_some(), "picard", &mut hard);
        }
        ExperimentKind::Montecarlo => section(cfg.montecarlo.is_some(), "montecarlo", &mut hard),
        ExperimentKind::Verify => {
            section(cfg.verify.is_some(), "verify", &mut hard);
            if cfg.verify.as_ref().is_some_and(|v| v.checks.contains(&CheckKind::Monotonicity)) {
                section(cfg.initial.is_some(), "initial", &mut hard);
                section(cfg.stepper.is_some(), "stepper", &mut hard);
            }
        }
        ExperimentKind::Inflate => {
            section(cfg.initial.is_some(), "initial", &mut hard);
            section(cfg.inflate.is_some(), "inflate", &mut hard);
        }
    }
    if let Some(st) = &cfg.stepper {
        if kind == ExperimentKind::Simulate && st.frame == Frame::Gevrey && !st.scheme.is_random_pde() {
            hard.push("the Gevrey frame applies to the random PDE schemes only".into());
        }
    }
    if let Some(init) = &cfg.initial {
        if init.kind == InitialKind::Snapshot && init.path.is_none() {
            hard.push("initial kind snapshot needs a path".into());
        }
    }
    if !(cfg.path.dt > 0.0 && cfg.path.dt.is_finite()) {
        hard.push(format!("path dt must be positive, got {}", cfg.path.dt));
    }

    if cfg.exploratory {
        soft.extend(range.into_iter().map(|r| format!("exploratory: {r}")));
    } else {
        hard.extend(range);
    }
    Validation {
        violations: hard,
        warnings: soft,
    }
}
