//! Time evolution of the transformed random PDE
//!
//! ```text
//! ∂_t U + Q(U; μW_t) = −½μ² Λ^{d} U
//! ```
//!
//! and of the original Itô equation `dB + P(B) dt = μ Λ^r B dW_t`, linked by
//! `U = e^{−μW_t Λ^r} B` (`r` the noise exponent, `d = 2r`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinear::{p_nonlinear, q_weighted, Evaluation, NonlinearForm, PairWeights};
use crate::paths::BrownianPath;
use crate::record::{RunRecord, RunRow, RunStatus};
use crate::spectral::{gevrey_mult, gevrey_norm, lambda_pow, GevreyParams, NoiseModel, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Integrating-factor Euler for the random PDE.
    ExponentialEuler,
    /// Second-order exponential time differencing for the random PDE.
    Etdrk2,
    /// Explicit Euler–Maruyama for the Itô equation.
    EulerMaruyama,
    /// Euler step for the drift followed by the exact linear stochastic
    /// flow `e^{−½μ²dtΛ^d} e^{μΔW Λ^r}`.
    ExponentialIto,
}

impl Scheme {
    pub fn is_random_pde(self) -> bool {
        matches!(self, Scheme::ExponentialEuler | Scheme::Etdrk2)
    }
}

/// Variables in which the random PDE is stepped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `U` itself.
    #[default]
    Plain,
    /// `Y = e^{(φ(t)+δ)Λ^s} U`, whose Sobolev `σs`-norm is the Gevrey norm
    /// of `U` at the growing radius. High modes of `Y` are `O(1)`-scaled,
    /// so roundoff stays relative to what the Gevrey norm sees.
    Gevrey,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Record every this many steps (the final time is always recorded).
    pub output_every: usize,
    pub frame: Frame,
}

impl StepperConfig {
    pub fn new(dt: f64, scheme: Scheme) -> Self {
        StepperConfig {
            dt,
            scheme,
            output_every: 1,
            frame: Frame::Plain,
        }
    }

    pub fn every(mut self, n: usize) -> Self {
        self.output_every = n;
        self
    }

    pub fn in_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    fn steps(&self, t_final: f64) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.output_every == 0 {
            return Err(Error::config("output_every must be at least 1"));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::config(format!("final time must be nonnegative, got {t_final}")));
        }
        let n = (t_final / self.dt).round();
        if (n * self.dt - t_final).abs() > 1e-9 * t_final.max(self.dt) {
            return Err(Error::config(format!(
                "final time {t_final} is not a multiple of dt = {}",
                self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Fields at the recorded output times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, u: SpectralField) {
        self.times.push(t);
        self.fields.push(u);
    }

    pub fn last(&self) -> Option<&SpectralField> {
        self.fields.last()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub trajectory: Trajectory,
    pub record: RunRecord,
}

/// Exact dissipative flow: mode `k` is multiplied by
/// `e^{−½μ² τ |λk|^d}`.
pub fn propagator(u: &SpectralField, tau: f64, noise: &NoiseModel) -> SpectralField {
    assert!(tau >= 0.0, "propagator needs tau >= 0");
    if tau == 0.0 || noise.mu == 0.0 {
        return u.clone();
    }
    u.map_radial(|kk| (-tau * noise.damping_rate(kk)).exp())
}

fn check_path(path: &BrownianPath, t_final: f64) -> Result<()> {
    if path.grid_end() < t_final * (1.0 - 1e-12) {
        return Err(Error::config(format!(
            "path ends at {} before the final time {t_final}",
            path.grid_end()
        )));
    }
    Ok(())
}

/// First time on the path grid at which `μW` exceeds `φ`, located on the
/// interpolant, if it happens before `t_final`.
fn exit_time(path: &BrownianPath, noise: &NoiseModel, params: &GevreyParams, t_final: f64) -> Option<f64> {
    let dt = path.dt();
    let gap = |i: usize| params.radius(i as f64 * dt) - noise.mu * path.values()[i];
    let mut prev = gap(0);
    for i in 1..path.values().len() {
        let t = i as f64 * dt;
        if t - dt > t_final {
            break;
        }
        let g = gap(i);
        if g < 0.0 {
            let crossing = t - dt + dt * prev / (prev - g);
            return (crossing < t_final).then_some(crossing);
        }
        prev = g;
    }
    None
}

pub(crate) fn require_inside(
    path: &BrownianPath,
    noise: &NoiseModel,
    params: &GevreyParams,
    t_final: f64,
) -> Result<()> {
    match exit_time(path, noise, params, t_final) {
        Some(stopping_time) => Err(Error::BeyondStoppingTime {
            stopping_time,
            horizon: t_final,
        }),
        None => Ok(()),
    }
}

/// `φ₁(z) = (e^z − 1)/z` and `φ₂(z) = (e^z − 1 − z)/z²`.
fn phi_functions(z: f64) -> (f64, f64) {
    if z.abs() < 1e-2 {
        let phi1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z.powi(4) / 120.0;
        let phi2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z.powi(4) / 720.0;
        (phi1, phi2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

/// Linear symbol of the random PDE in the chosen frame, per mode.
struct RandomPde<'a> {
    path: &'a BrownianPath,
    noise: NoiseModel,
    params: GevreyParams,
    frame: Frame,
    symbol: Vec<f64>,
}

impl<'a> RandomPde<'a> {
    fn new(u0: &SpectralField, path: &'a BrownianPath, noise: &NoiseModel, params: &GevreyParams, frame: Frame) -> Self {
        let drift = match frame {
            Frame::Plain => 0.0,
            Frame::Gevrey => params.beta,
        };
        let symbol = u0
            .lattice()
            .wavenumbers()
            .into_iter()
            .map(|kk| if kk == 0.0 { 0.0 } else { drift * kk.powf(params.s) - noise.damping_rate(kk) })
            .collect();
        RandomPde {
            path,
            noise: *noise,
            params: *params,
            frame,
            symbol,
        }
    }

    fn frame_radius(&self, t: f64) -> f64 {
        match self.frame {
            Frame::Plain => 0.0,
            Frame::Gevrey => self.params.shifted_radius(t),
        }
    }

    fn enter(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        gevrey_mult(u, self.frame_radius(t), self.params.s).map_err(|e| e.at_time(t))
    }

    fn leave(&self, x: &SpectralField, t: f64) -> SpectralField {
        gevrey_mult(x, -self.frame_radius(t), self.params.s).expect("damping never overflows")
    }

    /// `−e^{ψΛ^s} Q(U; μW_t)` expressed in frame variables.
    fn nonlinear(&self, x: &SpectralField, t: f64) -> Result<SpectralField> {
        let theta = self.noise.mu * self.path.value_at(t);
        let w = PairWeights::shift(theta, self.noise.noise_exp)
            .in_frame(self.frame_radius(t), self.params.s);
        Ok(q_weighted(x, &w, Evaluation::Auto)
            .map_err(|e| e.at_time(t))?
            .scaled(-1.0))
    }

    fn factors(&self, h: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.symbol.iter().map(|l| f(l * h)).collect()
    }
}

fn growth_guard(prev: f64, next: &SpectralField, t: f64) -> Result<()> {
    let now = next.l2_norm();
    if !now.is_finite() || (prev > 0.0 && now > 10.0 * prev) {
        return Err(Error::StepRejected {
            t,
            growth: if prev > 0.0 { now / prev } else { f64::INFINITY },
        });
    }
    Ok(())
}

/// Records rows and trajectory snapshots; keeps whatever was produced
/// before an error.
struct Recorder<'a> {
    path: &'a BrownianPath,
    params: GevreyParams,
    every: usize,
    trajectory: Trajectory,
    rows: Vec<RunRow>,
}

impl<'a> Recorder<'a> {
    fn new(path: &'a BrownianPath, params: &GevreyParams, every: usize) -> Self {
        Recorder {
            path,
            params: *params,
            every,
            trajectory: Trajectory::default(),
            rows: Vec::new(),
        }
    }

    fn wants(&self, step: usize, last: usize) -> bool {
        step.is_multiple_of(self.every) || step == last
    }

    fn record(&mut self, t: f64, u: SpectralField) {
        self.rows.push(RunRow::measure(&u, t, self.path.value_at(t), &self.params));
        self.trajectory.push(t, u);
    }

    fn finish(self, failure: Option<Error>) -> (Evolution, Option<Error>) {
        let mut record = RunRecord::new(self.rows);
        if failure.is_some() {
            record.status = RunStatus::Terminated;
        }
        (
            Evolution {
                trajectory: self.trajectory,
                record,
            },
            failure,
        )
    }
}

/// Random PDE stepping that returns everything computed before a failure.
pub(crate) fn run_rpde(
    u0: &SpectralField,
    path: &BrownianPath,
    noise: &NoiseModel,
    params: &GevreyParams,
    cfg: &StepperConfig,
    t_final: f64,
) -> Result<(Evolution, Option<Error>)> {
    if !cfg.scheme.is_random_pde() {
        return Err(Error::config(format!("{:?} does not step the random PDE", cfg.scheme)));
    }
    let steps = cfg.steps(t_final)?;
    check_path(path, t_final)?;
    require_inside(path, noise, params, t_final)?;

    let pde = RandomPde::new(u0, path, noise, params, cfg.frame);
    let h = cfg.dt;
    let e = pde.factors(h, f64::exp);
    let (p1, p2): (Vec<f64>, Vec<f64>) = pde.symbol.iter().map(|l| phi_functions(l * h)).unzip();
    let hp1: Vec<f64> = p1.iter().map(|v| h * v).collect();
    let hp2: Vec<f64> = p2.iter().map(|v| h * v).collect();

    let mut rec = Recorder::new(path, params, cfg.output_every);
    rec.record(0.0, u0.clone());
    let mut x = pde.enter(u0, 0.0)?;
    let mut failure = None;
    for n in 0..steps {
        let t = n as f64 * h;
        let t_next = (n + 1) as f64 * h;
        let step = || -> Result<SpectralField> {
            let nl = pde.nonlinear(&x, t)?;
            match cfg.scheme {
                Scheme::ExponentialEuler => Ok(x.axpy(h, &nl).apply_weights(&e)),
                Scheme::Etdrk2 => {
                    let a = x.apply_weights(&e).add(&nl.apply_weights(&hp1));
                    let nl_a = pde.nonlinear(&a, t_next)?;
                    Ok(a.add(&nl_a.sub(&nl).apply_weights(&hp2)))
                }
                _ => unreachable!(),
            }
        };
        match step().and_then(|next| growth_guard(x.l2_norm(), &next, t_next).map(|_| next)) {
            Ok(next) => x = next,
            Err(err) => {
                failure = Some(err);
                break;
            }
        }
        if rec.wants(n + 1, steps) {
            rec.record(t_next, pde.leave(&x, t_next));
        }
    }
    Ok(rec.finish(failure))
}

/// Integrate the random PDE for `U` along `path` up to `t_final`.
///
/// Requires `μW_t ≤ φ(t)` on `[0, t_final]`.
pub fn integrate_rpde(
    u0: &SpectralField,
    path: &BrownianPath,
    noise: &NoiseModel,
    params: &GevreyParams,
    cfg: &StepperConfig,
    t_final: f64,
) -> Result<Evolution> {
    match run_rpde(u0, path, noise, params, cfg, t_final)? {
        (evo, None) => Ok(evo),
        (_, Some(err)) => Err(err),
    }
}

pub(crate) fn run_spde(
    b0: &SpectralField,
    path: &BrownianPath,
    noise: &NoiseModel,
    params: &GevreyParams,
    cfg: &StepperConfig,
    t_final: f64,
) -> Result<(Evolution, Option<Error>)> {
    if cfg.scheme.is_random_pde() {
        return Err(Error::config(format!("{:?} does not step the Itô equation", cfg.scheme)));
    }
    let steps = cfg.steps(t_final)?;
    check_path(path, t_final)?;
    let h = cfg.dt;
    let mut rec = Recorder::new(path, params, cfg.output_every);
    rec.record(0.0, b0.clone());
    let mut b = b0.clone();
    let mut failure = None;
    for n in 0..steps {
        let t = n as f64 * h;
        let t_next = (n + 1) as f64 * h;
        let dw = path.increment(t, t_next);
        let drift = b.axpy(-h, &p_nonlinear(&b, NonlinearForm::Curl));
        let next = match cfg.scheme {
            Scheme::EulerMaruyama => Ok(drift.axpy(noise.mu * dw, &lambda_pow(&b, noise.noise_exp))),
            Scheme::ExponentialIto => {
                gevrey_mult(&propagator(&drift, h, noise), noise.mu * dw, noise.noise_exp)
                    .map_err(|e| e.at_time(t_next))
            }
            _ => unreachable!(),
        };
        match next.and_then(|next| growth_guard(b.l2_norm(), &next, t_next).map(|_| next)) {
            Ok(next) => b = next,
            Err(err) => {
                failure = Some(err);
                break;
            }
        }
        if rec.wants(n + 1, steps) {
            rec.record(t_next, b.clone());
        }
    }
    Ok(rec.finish(failure))
}

/// Integrate the Itô equation for `B` along `path` up to `t_final`.
///
/// `params` only enters the recorded diagnostics.
pub fn integrate_spde(
    b0: &SpectralField,
    path: &BrownianPath,
    noise: &NoiseModel,
    params: &GevreyParams,
    cfg: &StepperConfig,
    t_final: f64,
) -> Result<Evolution> {
    match run_spde(b0, path, noise, params, cfg, t_final)? {
        (evo, None) => Ok(evo),
        (_, Some(err)) => Err(err),
    }
}

/// `B(t) = e^{μW_t Λ^r} U(t)` at every time of the trajectory.
pub fn gamma_bridge(u: &Trajectory, path: &BrownianPath, noise: &NoiseModel) -> Result<Trajectory> {
    shift_trajectory(u, path, noise, 1.0)
}

/// `U(t) = e^{−μW_t Λ^r} B(t)`, the inverse of [`gamma_bridge`].
pub fn gamma_inverse(b: &Trajectory, path: &BrownianPath, noise: &NoiseModel) -> Result<Trajectory> {
    shift_trajectory(b, path, noise, -1.0)
}

fn shift_trajectory(x: &Trajectory, path: &BrownianPath, noise: &NoiseModel, sign: f64) -> Result<Trajectory> {
    let mut out = Trajectory::default();
    for (&t, f) in x.times.iter().zip(&x.fields) {
        let theta = sign * noise.mu * path.value_at(t);
        out.push(t, gevrey_mult(f, theta, noise.noise_exp).map_err(|e| e.at_time(t))?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    /// Local time horizon `T`.
    pub horizon: f64,
    pub n_iter: usize,
    /// Number `M` of uniform sub-intervals of `[0, T]`.
    pub quad_points: usize,
    /// Stop once successive iterates differ by less than this in
    /// `sup_t ‖·‖_{G^{σ,s}_{φ(t)}}`.
    pub tol: f64,
}

impl PicardConfig {
    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("Picard horizon must be positive"));
        }
        if self.quad_points < 2 {
            return Err(Error::config("Picard needs at least 2 quadrature points"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.n_iter == 0 {
            return Err(Error::config("Picard needs tol > 0 and n_iter >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    /// `sup_t` Gevrey distance between iterate `m` and `m − 1`.
    pub differences: Vec<f64>,
    /// `differences[m] / differences[m − 1]`.
    pub ratios: Vec<f64>,
    /// `sup_t` Gevrey norm of `U − Φ(U)` for the returned iterate.
    pub residual: f64,
    pub converged: bool,
}

/// Fixed point of the Duhamel map
///
/// ```text
/// Φ(U)(t) = e^{−½μ²tΛ^d} U₀ − ∫₀ᵗ e^{−½μ²(t−τ)Λ^d} Q(U(τ); μW_τ) dτ
/// ```
///
/// on the grid `t_i = iT/M`. The integral uses the composite midpoint rule
/// with `U` at midpoints taken as the mean of the neighbouring nodes. The
/// iteration starts from the free evolution of `U₀`.
pub fn picard_solve(
    u0: &SpectralField,
    path: &BrownianPath,
    noise: &NoiseModel,
    params: &GevreyParams,
    cfg: &PicardConfig,
) -> Result<(Trajectory, PicardReport)> {
    cfg.validate()?;
    check_path(path, cfg.horizon)?;
    require_inside(path, noise, params, cfg.horizon)?;
    let m = cfg.quad_points;
    let h = cfg.horizon / m as f64;
    let times: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();

    let lattice = *u0.lattice();
    let decay = |tau: f64| -> Vec<f64> {
        lattice
            .wavenumbers()
            .into_iter()
            .map(|kk| (-tau * noise.damping_rate(kk)).exp())
            .collect()
    };
    let (e_full, e_half) = (decay(h), decay(0.5 * h));
    let free: Vec<SpectralField> = times.iter().map(|&t| propagator(u0, t, noise)).collect();

    let apply = |u: &[SpectralField]| -> Result<Vec<SpectralField>> {
        // D_i = Σ_{m<i} e^{−L(i−m−½)h} Q_m, built recursively
        let mut out = Vec::with_capacity(m + 1);
        out.push(free[0].clone());
        let mut duhamel = SpectralField::zeros(lattice);
        for i in 1..=m {
            let tau = times[i - 1] + 0.5 * h;
            let mid = u[i - 1].add(&u[i]).scaled(0.5);
            let theta = noise.mu * path.value_at(tau);
            let q = q_weighted(&mid, &PairWeights::shift(theta, noise.noise_exp), Evaluation::Auto)
                .map_err(|e| e.at_time(tau))?;
            duhamel = duhamel.apply_weights(&e_full).add(&q.apply_weights(&e_half));
            out.push(free[i].axpy(-h, &duhamel));
        }
        Ok(out)
    };
    let distance = |a: &[SpectralField], b: &[SpectralField]| -> Result<f64> {
        let mut sup: f64 = 0.0;
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            sup = sup.max(gevrey_norm(&x.sub(y), params.radius(times[i]), params.sigma, params.s)?);
        }
        Ok(sup)
    };

    let mut current = free.clone();
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut rising = 0;
    let mut converged = false;
    for iteration in 1..=cfg.n_iter {
        let next = apply(&current)?;
        let diff = distance(&next, &current)?;
        if let Some(&prev) = differences.last() {
            let r: f64 = if prev > 0.0 { diff / prev } else { 0.0 };
            ratios.push(r);
            rising = if r > 1.0 { rising + 1 } else { 0 };
            if rising >= 3 {
                return Err(Error::NoContraction { iteration, ratios });
            }
        }
        differences.push(diff);
        current = next;
        if diff < cfg.tol {
            converged = true;
            break;
        }
    }
    let residual = distance(&apply(&current)?, &current)?;
    let mut trajectory = Trajectory::default();
    for (t, u) in times.into_iter().zip(current) {
        trajectory.push(t, u);
    }
    Ok((
        trajectory,
        PicardReport {
            iterations: differences.len(),
            differences,
            ratios,
            residual,
            converged,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::sample_path;
    use crate::spectral::{random_divfree_field, single_shell_beltrami, WaveLattice};
    use approx::assert_relative_eq;

    fn params() -> GevreyParams {
        GevreyParams::new(1.8, 1.0, 1.0, 0.25, 0.0).unwrap()
    }

    #[test]
    fn propagator_basics() {
        let noise = NoiseModel::fractional(1.0, 1.0).unwrap();
        let u = random_divfree_field(1, 4, 1.5, 1.0);
        assert_eq!(propagator(&u, 0.0, &noise), u);
        let mut e = SpectralField::zeros(WaveLattice::unit(1).unwrap());
        e.set_mode([1, 0, 0], [num_complex::Complex64::new(1.0, 0.0); 3]);
        let f = propagator(&e, 1.0, &noise);
        assert_relative_eq!(f.get([1, 0, 0]).unwrap()[0].re, 0.606_530_66, epsilon = 1e-8);
        let two = propagator(&propagator(&u, 0.3, &noise), 0.4, &noise);
        assert!(two.relative_diff(&propagator(&u, 0.7, &noise)) < 1e-14);
    }

    #[test]
    fn phi_functions_are_continuous() {
        for z in [-1e-2, 1e-2, -0.5] {
            let (a, b) = phi_functions(z);
            let (c, d) = phi_functions(z * (1.0 - 1e-9));
            assert!((a - c).abs() < 1e-9 && (b - d).abs() < 1e-9);
        }
        assert_eq!(phi_functions(0.0), (1.0, 0.5));
    }

    #[test]
    fn beltrami_evolves_by_propagator() {
        let noise = NoiseModel::fractional(1.0, 1.0).unwrap();
        let l = WaveLattice::unit(2).unwrap();
        let u0 = single_shell_beltrami(3, l, 2, 0.5).unwrap();
        let path = sample_path(2, 0.01, 0.5).unwrap();
        for scheme in [Scheme::ExponentialEuler, Scheme::Etdrk2] {
            let evo = integrate_rpde(&u0, &path, &noise, &params(), &StepperConfig::new(0.05, scheme), 0.5).unwrap();
            let exact = propagator(&u0, 0.5, &noise);
            assert!(evo.trajectory.last().unwrap().sub(&exact).l2_norm() <= 1e-13 * u0.l2_norm());
            assert_eq!(evo.record.rows.len(), 11);
        }
    }

    #[test]
    fn rejects_paths_outside_the_radius() {
        let noise = NoiseModel::fractional(1.0, 1.0).unwrap();
        let path = BrownianPath::from_values(0.1, vec![0.0, 0.5, 2.0, 3.0]).unwrap();
        let u0 = random_divfree_field(1, 2, 2.0, 0.01);
        let err = integrate_rpde(&u0, &path, &noise, &params(), &StepperConfig::new(0.1, Scheme::Etdrk2), 0.3)
            .unwrap_err();
        assert!(matches!(err, Error::BeyondStoppingTime { .. }));
    }

    #[test]
    fn picard_trivial_fixed_points() {
        let noise = NoiseModel::fractional(1.0, 1.0).unwrap();
        let path = sample_path(5, 0.01, 0.1).unwrap();
        let cfg = PicardConfig {
            horizon: 0.05,
            n_iter: 10,
            quad_points: 8,
            tol: 1e-12,
        };
        let zero = SpectralField::zeros(WaveLattice::unit(3).unwrap());
        let (traj, rep) = picard_solve(&zero, &path, &noise, &params(), &cfg).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(traj.last().unwrap().l2_norm(), 0.0);

        let b = single_shell_beltrami(1, WaveLattice::unit(3).unwrap(), 3, 0.1).unwrap();
        let (traj, rep) = picard_solve(&b, &path, &noise, &params(), &cfg).unwrap();
        assert!(rep.converged);
        for (t, u) in traj.times.iter().zip(&traj.fields) {
            assert!(u.sub(&propagator(&b, *t, &noise)).l2_norm() <= 1e-14);
        }
    }

    #[test]
    fn exponential_ito_is_exact_on_a_shell() {
        let noise = NoiseModel::fractional(0.7, 1.0).unwrap();
        let l = WaveLattice::unit(1).unwrap();
        let b0 = single_shell_beltrami(9, l, 2, 1.0).unwrap();
        let path = sample_path(4, 0.01, 1.0).unwrap();
        let evo = integrate_spde(&b0, &path, &noise, &params(), &StepperConfig::new(0.01, Scheme::ExponentialIto), 1.0).unwrap();
        let rho = 2f64.sqrt();
        for (t, b) in evo.trajectory.times.iter().zip(&evo.trajectory.fields) {
            let g = (0.7 * path.value_at(*t) * rho - 0.5 * 0.49 * t * rho * rho).exp();
            assert!(b.sub(&b0.scaled(g)).l2_norm() <= 1e-12 * b.l2_norm());
        }
    }

    #[test]
    fn bridge_roundtrip() {
        let noise = NoiseModel::fractional(1.0, 1.0).unwrap();
        let path = sample_path(3, 0.05, 0.2).unwrap();
        let mut traj = Trajectory::default();
        for i in 0..4 {
            traj.push(i as f64 * 0.05, random_divfree_field(i, 4, 2.0, 1.0));
        }
        let back = gamma_inverse(&gamma_bridge(&traj, &path, &noise).unwrap(), &path, &noise).unwrap();
        for (a, b) in back.fields.iter().zip(&traj.fields) {
            assert!(a.relative_diff(b) < 1e-13);
        }
        let flat = BrownianPath::zero(0.05, 0.2).unwrap();
        assert_eq!(gamma_bridge(&traj, &flat, &noise).unwrap(), traj);
    }
}
