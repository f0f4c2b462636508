//! Interface shared by the equivariant filter and the MEKF baseline, plus the covariance
//! helpers both use.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ImuSample, NavState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Eqf,
    Mekf,
}

impl FilterKind {
    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Eqf => "eqf",
            FilterKind::Mekf => "mekf",
        }
    }
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eqf" => Ok(FilterKind::Eqf),
            "mekf" => Ok(FilterKind::Mekf),
            other => Err(Error::Config(format!("unknown filter '{other}'"))),
        }
    }
}

/// A navigation filter driven by IMU samples and per-antenna GNSS positions.
///
/// Both implementations order their (15+3N)-dimensional error as
/// (attitude, velocity, position, gyro bias, accelerometer bias, lever arms).
pub trait Estimator: Send {
    fn kind(&self) -> FilterKind;

    fn sensor_count(&self) -> usize;

    /// Time of the last propagation, s.
    fn time(&self) -> f64;

    fn set_time(&mut self, t: f64);

    fn propagate(&mut self, u: &ImuSample, dt: f64) -> Result<()>;

    /// Fuses the global antenna-`i` position `y` with covariance `r_meas`.
    fn update(&mut self, i: usize, y: &Vector3<f64>, r_meas: &Matrix3<f64>) -> Result<()>;

    fn state_estimate(&self) -> NavState;

    fn covariance(&self) -> &DMatrix<f64>;
}

/// Indices of the attitude, position and lever-arm blocks, the states with ground truth.
pub fn energy_indices(n: usize) -> Vec<usize> {
    (0..3).chain(6..9).chain(15..15 + 3 * n).collect()
}

pub fn sub_matrix(p: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| p[(idx[r], idx[c])])
}

pub fn sub_vector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

pub fn symmetrize(p: &mut DMatrix<f64>) {
    let t = p.transpose();
    *p += t;
    *p *= 0.5;
}

/// Ratio of extreme eigenvalues of a symmetric matrix; infinite when not positive definite.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

/// Checks that a measurement covariance is finite and positive definite.
pub fn check_measurement(y: &Vector3<f64>, r_meas: &Matrix3<f64>) -> Result<()> {
    if !y.iter().chain(r_meas.iter()).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("GNSS measurement"));
    }
    if r_meas.cholesky().is_none() {
        return Err(Error::Config("measurement covariance must be positive definite".into()));
    }
    Ok(())
}

/// Shared innovation bookkeeping: S, its condition check, gain and Mahalanobis gate.
pub(crate) struct Innovation {
    pub s: DMatrix<f64>,
    pub s_inv: DMatrix<f64>,
    pub gain: DMatrix<f64>,
}

pub(crate) fn innovation(
    p: &DMatrix<f64>,
    c: &DMatrix<f64>,
    noise: &DMatrix<f64>,
    residual: &DVector<f64>,
    max_condition: f64,
    gate: f64,
) -> Result<Innovation> {
    let pct = p * c.transpose();
    let mut s = c * &pct + noise;
    symmetrize(&mut s);
    let cond = condition_number(&s);
    if cond > max_condition {
        return Err(Error::UpdateRejected(format!("innovation covariance condition number {cond:.3e}")));
    }
    let s_inv = s.clone().cholesky().ok_or(Error::Singular("innovation covariance"))?.inverse();
    let d2 = (residual.transpose() * &s_inv * residual)[(0, 0)];
    if d2 > gate {
        return Err(Error::UpdateRejected(format!("Mahalanobis distance² {d2:.3e} exceeds gate {gate}")));
    }
    let gain = pct * &s_inv;
    Ok(Innovation { s, s_inv, gain })
}
