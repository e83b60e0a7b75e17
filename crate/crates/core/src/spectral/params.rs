use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gevrey weight parameters with linearly growing radius `φ(t) = α + βt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub sigma: f64,
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Extra radius offset used by the global decay statement.
    #[serde(default)]
    pub delta: f64,
}

impl GevreyParams {
    pub fn new(sigma: f64, s: f64, alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        let p = GevreyParams {
            sigma,
            s,
            alpha,
            beta,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.sigma, self.s, self.alpha, self.beta, self.delta]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::config("Gevrey parameters must be finite"));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::config(format!("s must lie in (0, 1], got {}", self.s)));
        }
        if self.alpha < 0.0 || self.beta < 0.0 || self.delta < 0.0 {
            return Err(Error::config("alpha, beta and delta must be nonnegative"));
        }
        Ok(())
    }

    /// `φ(t) = α + βt`.
    pub fn radius(&self, t: f64) -> f64 {
        self.alpha + self.beta * t
    }

    /// `φ(t) + δ`, the radius at which global decay is measured.
    pub fn shifted_radius(&self, t: f64) -> f64 {
        self.radius(t) + self.delta
    }

    /// Radius growth must stay below the noise-induced dissipation rate:
    /// `β < μ²/2`.
    pub fn check_growth_rate(&self, noise: &NoiseModel) -> Result<()> {
        if self.beta < 0.5 * noise.mu * noise.mu {
            Ok(())
        } else {
            Err(Error::config(format!(
                "radius growth beta = {} must be below mu^2/2 = {}",
                self.beta,
                0.5 * noise.mu * noise.mu
            )))
        }
    }

    /// Local well-posedness range: `s ∈ (7/8, 1]`, `σ ∈ (7/(4s), 2)`.
    pub fn in_local_range(&self) -> bool {
        self.s > 7.0 / 8.0 && self.s <= 1.0 && self.sigma_in_range()
    }

    /// Global small-data range: `s ∈ (3/4, 1]`, `σ ∈ (7/(4s), 2)`.
    pub fn in_global_range(&self) -> bool {
        self.s > 0.75 && self.s <= 1.0 && self.sigma_in_range()
    }

    fn sigma_in_range(&self) -> bool {
        self.sigma > 7.0 / (4.0 * self.s) && self.sigma < 2.0
    }
}

/// Which stochastic system is being modelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseVariant {
    /// Noise `μ Λ^s B dW`, transformed dissipation `½μ²Λ^{2s}`.
    Fractional,
    /// Noise `μ Λ^{(s+1)/2} B dW`, transformed dissipation `½μ²Λ^{s+1}`.
    Strengthened,
}

/// Amplitude and exponents of the multiplicative noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub mu: f64,
    pub noise_exp: f64,
    pub dissipation_exp: f64,
}

impl NoiseModel {
    pub fn new(mu: f64, variant: NoiseVariant, s: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::config(format!("mu must be finite and nonnegative, got {mu}")));
        }
        let noise_exp = match variant {
            NoiseVariant::Fractional => s,
            NoiseVariant::Strengthened => 0.5 * (s + 1.0),
        };
        Ok(NoiseModel {
            mu,
            noise_exp,
            dissipation_exp: 2.0 * noise_exp,
        })
    }

    pub fn fractional(mu: f64, s: f64) -> Result<Self> {
        Self::new(mu, NoiseVariant::Fractional, s)
    }

    pub fn strengthened(mu: f64, s: f64) -> Result<Self> {
        Self::new(mu, NoiseVariant::Strengthened, s)
    }

    /// Deterministic, non-resistive limit.
    pub fn silent(s: f64) -> Self {
        NoiseModel {
            mu: 0.0,
            noise_exp: s,
            dissipation_exp: 2.0 * s,
        }
    }

    /// Dissipation rate of a mode with wavenumber `kk`: `½μ²|k|^{2·noise_exp}`.
    pub fn damping_rate(&self, kk: f64) -> f64 {
        0.5 * self.mu * self.mu * kk.powf(self.dissipation_exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let p = GevreyParams::new(1.95, 0.9, 1.0, 0.1, 0.0).unwrap();
        assert!(p.in_local_range());
        let q = GevreyParams::new(1.95, 0.8, 1.0, 0.1, 0.0).unwrap();
        assert!(!q.in_local_range());
        assert!(q.in_global_range() == (1.95 > 7.0 / 3.2));
        assert!(GevreyParams::new(1.8, 1.2, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn noise_exponents() {
        let a = NoiseModel::fractional(1.0, 0.9).unwrap();
        assert_eq!(a.dissipation_exp, 1.8);
        let b = NoiseModel::strengthened(1.0, 0.8).unwrap();
        assert!((b.noise_exp - 0.9).abs() < 1e-15);
        assert_eq!(b.dissipation_exp, 2.0 * b.noise_exp);
        let s1 = NoiseModel::strengthened(2.0, 1.0).unwrap();
        assert_eq!(s1, NoiseModel::fractional(2.0, 1.0).unwrap());
    }

    #[test]
    fn growth_rate_condition() {
        let noise = NoiseModel::fractional(1.0, 1.0).unwrap();
        let ok = GevreyParams::new(1.8, 1.0, 1.0, 0.25, 0.0).unwrap();
        assert!(ok.check_growth_rate(&noise).is_ok());
        let bad = GevreyParams::new(1.8, 1.0, 1.0, 0.6, 0.0).unwrap();
        assert!(bad.check_growth_rate(&noise).is_err());
    }
}
