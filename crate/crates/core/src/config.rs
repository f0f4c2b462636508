//! Noise densities, initial uncertainty and filter options, all JSON-serializable with
//! complete defaults.

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuous-time noise densities and the initial covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Gyroscope white noise, rad/s/√Hz.
    pub sigma_gyro: f64,
    /// Accelerometer white noise, m/s²/√Hz.
    pub sigma_acc: f64,
    /// Gyroscope bias random walk, rad/s²/√Hz.
    pub sigma_bg_walk: f64,
    /// Accelerometer bias random walk, m/s³/√Hz.
    pub sigma_ba_walk: f64,
    /// Lever-arm random walk, m/s/√Hz. A small regularizer; lever arms are constant.
    pub sigma_calib_walk: f64,
    /// Initial standard deviations per error block.
    pub initial: InitialSigma,
    /// Gravity in the global frame, m/s².
    pub gravity: Vector3<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_gyro: 5e-4,
            sigma_acc: 5e-3,
            sigma_bg_walk: 1e-4,
            sigma_ba_walk: 1e-3,
            sigma_calib_walk: 1e-4,
            initial: InitialSigma::default(),
            gravity: Vector3::new(0.0, 0.0, 9.81),
        }
    }
}

impl NoiseConfig {
    /// Noise-free model with the same initial uncertainty.
    pub fn noiseless() -> Self {
        Self { sigma_gyro: 0.0, sigma_acc: 0.0, sigma_bg_walk: 0.0, sigma_ba_walk: 0.0, sigma_calib_walk: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.sigma_gyro, self.sigma_acc, self.sigma_bg_walk, self.sigma_ba_walk, self.sigma_calib_walk];
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Config("noise densities must be finite and non-negative".into()));
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::Config("gravity must be finite".into()));
        }
        self.initial.validate()
    }

    /// Diagonal of the initial covariance for `n` antennas.
    pub fn p0_diag(&self, n: usize) -> DVector<f64> {
        let s = &self.initial;
        let blocks = [s.attitude, s.velocity, s.position, s.gyro_bias, s.acc_bias];
        DVector::from_iterator(15 + 3 * n, blocks.into_iter().chain(std::iter::repeat_n(s.calib, n)).flat_map(|v| [v * v; 3]))
    }
}

/// Initial one-sigma uncertainty per 3-vector block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSigma {
    /// rad
    pub attitude: f64,
    /// m/s
    pub velocity: f64,
    /// m
    pub position: f64,
    /// rad/s
    pub gyro_bias: f64,
    /// m/s²
    pub acc_bias: f64,
    /// m
    pub calib: f64,
}

impl Default for InitialSigma {
    fn default() -> Self {
        Self { attitude: 0.2, velocity: 2.0, position: 1.0, gyro_bias: 0.02, acc_bias: 0.2, calib: 0.5 }
    }
}

impl InitialSigma {
    fn validate(&self) -> Result<()> {
        let v = [self.attitude, self.velocity, self.position, self.gyro_bias, self.acc_bias, self.calib];
        if v.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::Config("initial standard deviations must be positive".into()));
        }
        Ok(())
    }
}

/// How the mean is carried between IMU samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// Exact flow for an input held over the sample interval.
    #[default]
    Exact,
    /// `X̂ ← X̂ exp(dt Λ(ξ̂, u))` with the lift frozen at the start of the interval.
    FirstOrder,
}

/// How the IMU and random-walk densities enter the local-coordinate process noise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMapping {
    /// Densities placed directly on the diagonal of the local-coordinate covariance.
    #[default]
    Diagonal,
    /// Densities transported into the error frame by the estimate (Ad_Ĉ, Ad_B̂, Â).
    Adjoint,
}

/// Options shared by both filters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub noise: NoiseConfig,
    /// Default isotropic GNSS standard deviation, m, when samples carry no variance.
    pub gnss_sigma: f64,
    /// Innovations with squared Mahalanobis distance above this are rejected.
    pub gate: f64,
    /// Innovation covariances with a larger condition number are rejected.
    pub max_condition: f64,
    pub propagation: Propagation,
    pub noise_mapping: NoiseMapping,
    /// Use exp(A dt) instead of I + A dt for the Riccati transition.
    pub exact_transition: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            noise: NoiseConfig::default(),
            gnss_sigma: 0.05,
            gate: 1000.0,
            max_condition: 1e12,
            propagation: Propagation::default(),
            noise_mapping: NoiseMapping::default(),
            exact_transition: false,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if !(self.gnss_sigma.is_finite() && self.gnss_sigma > 0.0) {
            return Err(Error::Config("gnss_sigma must be positive".into()));
        }
        if !(self.gate > 0.0 && self.max_condition > 1.0) {
            return Err(Error::Config("gate and max_condition must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_layout() {
        let cfg = NoiseConfig::default();
        let d = cfg.p0_diag(2);
        assert_eq!(d.len(), 21);
        assert!((d[0] - 0.04).abs() < 1e-15);
        assert_eq!(d[6], 1.0);
        assert_eq!(d[20], 0.25);
    }

    #[test]
    fn json_defaults_fill_missing_fields() {
        let cfg: FilterConfig = serde_json::from_str(r#"{"gnss_sigma": 0.1, "noise": {"sigma_gyro": 0.01}}"#).unwrap();
        assert_eq!(cfg.gnss_sigma, 0.1);
        assert_eq!(cfg.noise.sigma_gyro, 0.01);
        assert_eq!(cfg.noise.sigma_acc, NoiseConfig::default().sigma_acc);
        assert!(serde_json::from_str::<FilterConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut cfg = FilterConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.noise.sigma_acc = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = FilterConfig::default();
        cfg.noise.initial.calib = 0.0;
        assert!(cfg.validate().is_err());
    }
}
