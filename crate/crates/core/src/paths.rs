//! Brownian paths, the stopping time `T_ω = inf{t : μW_t > α + βt}` and
//! the probability of ever crossing the linear barrier.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// A sampled Brownian path on the uniform grid `t_i = i·dt`.
///
/// Off-grid values are linear interpolants of the neighbouring samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    seed: Option<u64>,
    dt: f64,
    horizon: f64,
    values: Vec<f64>,
}

fn grid_steps(horizon: f64, dt: f64) -> usize {
    // tolerate representation error in horizon/dt
    (horizon / dt * (1.0 + 1e-12)).floor() as usize
}

impl BrownianPath {
    /// Gaussian increments `N(0, dt)` drawn from a ChaCha stream seeded by
    /// `seed`. The path holds `floor(horizon/dt) + 1` values.
    pub fn sample(seed: u64, dt: f64, horizon: f64) -> Result<Self> {
        check_grid(dt, horizon)?;
        let steps = grid_steps(horizon, dt);
        let mut rng = seeds::rng(seed);
        let sd = dt.sqrt();
        let mut values = Vec::with_capacity(steps + 1);
        let mut w = 0.0;
        values.push(w);
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            w += sd * z;
            values.push(w);
        }
        Ok(BrownianPath {
            seed: Some(seed),
            dt,
            horizon,
            values,
        })
    }

    /// A path given by explicit samples; `values[0]` must be 0.
    pub fn from_values(dt: f64, values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&0.0) {
            return Err(Error::config("a Brownian path must start at 0"));
        }
        if values.len() < 2 {
            return Err(Error::config("a path needs at least one step"));
        }
        check_grid(dt, dt)?;
        let horizon = dt * (values.len() - 1) as f64;
        Ok(BrownianPath {
            seed: None,
            dt,
            horizon,
            values,
        })
    }

    /// The identically zero path.
    pub fn zero(dt: f64, horizon: f64) -> Result<Self> {
        check_grid(dt, horizon)?;
        let values = vec![0.0; grid_steps(horizon, dt) + 1];
        Ok(BrownianPath {
            seed: None,
            dt,
            horizon,
            values,
        })
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Time of the last grid sample.
    pub fn grid_end(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    /// `W(t)` by linear interpolation; constant past the last sample.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t / self.dt;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().expect("nonempty path");
        }
        let frac = x - i as f64;
        if frac == 0.0 {
            return self.values[i];
        }
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// `W(t₂) − W(t₁)` under the interpolation contract.
    pub fn increment(&self, t1: f64, t2: f64) -> f64 {
        self.value_at(t2) - self.value_at(t1)
    }
}

fn check_grid(dt: f64, horizon: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!("path step must be positive, got {dt}")));
    }
    if !(horizon >= dt && horizon.is_finite()) {
        return Err(Error::config(format!(
            "path horizon {horizon} must be at least one step {dt}"
        )));
    }
    Ok(())
}

/// Seeded path with step `dt` up to `horizon`.
pub fn sample_path(seed: u64, dt: f64, horizon: f64) -> Result<BrownianPath> {
    BrownianPath::sample(seed, dt, horizon)
}

/// Barrier `α + βt` against the scaled path `μW_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingQuery {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl CrossingQuery {
    pub fn new(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        let q = CrossingQuery { alpha, beta, mu };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.alpha, self.beta, self.mu]
            .iter()
            .all(|x| *x > 0.0 && x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "alpha, beta and mu must be positive, got ({}, {}, {})",
                self.alpha, self.beta, self.mu
            )))
        }
    }

    /// Distance to the barrier, `α + βt − μw`.
    pub fn gap(&self, t: f64, w: f64) -> f64 {
        self.alpha + self.beta * t - self.mu * w
    }
}

/// How crossings between grid points are located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingRule {
    /// First grid time with `μW > α + βt`.
    Grid,
    /// Exact first crossing of the linearly interpolated path.
    Interpolated,
}

/// `T_ω` of the interpolated path, `+∞` if no crossing up to the horizon.
pub fn stopping_time(path: &BrownianPath, q: &CrossingQuery) -> f64 {
    stopping_time_with(path, q, CrossingRule::Interpolated)
}

pub fn stopping_time_with(path: &BrownianPath, q: &CrossingQuery, rule: CrossingRule) -> f64 {
    let dt = path.dt;
    let mut prev = q.gap(0.0, path.values[0]);
    for (i, &w) in path.values.iter().enumerate().skip(1) {
        let t = i as f64 * dt;
        let gap = q.gap(t, w);
        if gap < 0.0 {
            return match rule {
                CrossingRule::Grid => t,
                // prev ≥ 0 > gap, so the interpolant crosses inside the step
                CrossingRule::Interpolated => t - dt + dt * prev / (prev - gap),
            };
        }
        prev = gap;
    }
    f64::INFINITY
}

/// Membership of a path in the global set `{α + βt ≥ μW_t ∀t}` as far as
/// the path reaches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalSetCheck {
    pub inside: bool,
    /// Only `[0, checked_until]` was inspected.
    pub checked_until: f64,
}

pub fn in_global_set(path: &BrownianPath, q: &CrossingQuery) -> GlobalSetCheck {
    GlobalSetCheck {
        inside: stopping_time(path, q).is_infinite(),
        checked_until: path.grid_end(),
    }
}

/// Rejection sampling of a path that stays below the barrier on
/// `[0, horizon]`. Draw `i` uses the seed `seeds::derive(seed, i)`; returns
/// the first accepted path and the number of draws it took.
pub fn sample_conditioned(
    q: &CrossingQuery,
    seed: u64,
    dt: f64,
    horizon: f64,
    max_draws: usize,
) -> Result<(BrownianPath, usize)> {
    q.validate()?;
    let mut last = f64::INFINITY;
    for i in 0..max_draws {
        let path = sample_path(seeds::derive(seed, i as u64), dt, horizon)?;
        last = stopping_time(&path, q);
        if last.is_infinite() {
            return Ok((path, i + 1));
        }
    }
    Err(Error::BeyondStoppingTime {
        stopping_time: last,
        horizon,
    })
}

/// `P(∃t ≥ 0: μW_t > α + βt) = e^{−2αβ/μ²}`.
///
/// Evaluated in the scaled variables `α/μ`, `β/μ`, so that
/// `(α, β, μ)` and `(α/μ, β/μ, 1)` give bitwise identical results.
pub fn crossing_probability(q: &CrossingQuery) -> f64 {
    (-2.0 * (q.alpha / q.mu) * (q.beta / q.mu)).exp()
}

/// One simulated path of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub seed: u64,
    pub crossed: bool,
    #[serde(rename = "T_omega")]
    pub t_omega: f64,
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    pub z_score: f64,
    pub n_paths: usize,
    pub bridge: bool,
    #[serde(skip)]
    pub records: Vec<McRecord>,
}

/// Crossing of one path simulated step by step.
///
/// With `bridge` set, a step whose endpoints both lie below the barrier
/// still counts as crossed with the Brownian-bridge probability
/// `exp(−2 d₀ d₁ / (μ² dt))`, `d` the gap to the barrier; the crossing
/// time is then reported as the step midpoint.
fn simulate_crossing(q: &CrossingQuery, seed: u64, dt: f64, horizon: f64, bridge: bool) -> McRecord {
    let mut rng = seeds::rng(seed);
    let steps = grid_steps(horizon, dt);
    let sd = dt.sqrt();
    let var = q.mu * q.mu * dt;
    let mut w = 0.0;
    let mut prev = q.alpha;
    let mut t_omega = f64::INFINITY;
    for i in 1..=steps {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        let t = i as f64 * dt;
        let gap = q.gap(t, w);
        if gap < 0.0 {
            t_omega = t - dt + dt * prev / (prev - gap);
            break;
        }
        if bridge {
            let u: f64 = rng.random();
            if u < (-2.0 * prev * gap / var).exp() {
                t_omega = t - 0.5 * dt;
                break;
            }
        }
        prev = gap;
    }
    McRecord {
        seed,
        crossed: t_omega.is_finite(),
        t_omega,
        horizon,
    }
}

/// Monte Carlo estimate of the crossing probability over `[0, horizon]`.
///
/// Path `i` uses the seed `seeds::derive(seed, i)`, so the estimate does
/// not depend on how the work is scheduled.
pub fn mc_crossing(
    q: &CrossingQuery,
    n_paths: usize,
    dt: f64,
    horizon: f64,
    bridge: bool,
    seed: u64,
) -> Result<McEstimate> {
    q.validate()?;
    check_grid(dt, horizon)?;
    if n_paths == 0 {
        return Err(Error::config("n_paths must be at least 1"));
    }
    let records: Vec<McRecord> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_crossing(q, seeds::derive(seed, i), dt, horizon, bridge))
        .collect();
    let hits = records.iter().filter(|r| r.crossed).count();
    let p = hits as f64 / n_paths as f64;
    let stderr = (p * (1.0 - p) / n_paths as f64).sqrt();
    let closed_form = crossing_probability(q);
    let z_score = if stderr > 0.0 {
        (p - closed_form) / stderr
    } else if p == closed_form {
        0.0
    } else {
        f64::INFINITY.copysign(p - closed_form)
    };
    Ok(McEstimate {
        estimate: p,
        stderr,
        closed_form,
        z_score,
        n_paths,
        bridge,
        records,
    })
}
