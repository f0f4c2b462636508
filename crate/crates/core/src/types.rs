//! Navigation state and sensor samples.

use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{Rot3, SE23Element};

/// Full system state: extended pose, IMU biases and one lever arm per GNSS antenna.
#[derive(Clone, Debug, PartialEq)]
pub struct NavState {
    pub rot: Rot3,
    pub vel: Vector3<f64>,
    pub pos: Vector3<f64>,
    pub b_gyro: Vector3<f64>,
    pub b_acc: Vector3<f64>,
    /// Body-frame IMU-to-antenna translations.
    pub calib: Vec<Vector3<f64>>,
}

impl NavState {
    /// The origin: identity pose, zero biases and zero lever arms.
    pub fn origin(n: usize) -> Self {
        Self {
            rot: Rot3::identity(),
            vel: Vector3::zeros(),
            pos: Vector3::zeros(),
            b_gyro: Vector3::zeros(),
            b_acc: Vector3::zeros(),
            calib: vec![Vector3::zeros(); n],
        }
    }

    pub fn sensor_count(&self) -> usize {
        self.calib.len()
    }

    pub fn pose(&self) -> SE23Element {
        SE23Element::new(self.rot, self.vel, self.pos)
    }

    pub fn set_pose(&mut self, pose: &SE23Element) {
        self.rot = pose.rot;
        self.vel = pose.v_col;
        self.pos = pose.p_col;
    }

    /// Biases stacked as (gyro, accelerometer).
    pub fn bias(&self) -> Vector6<f64> {
        let mut b = Vector6::zeros();
        b.fixed_rows_mut::<3>(0).copy_from(&self.b_gyro);
        b.fixed_rows_mut::<3>(3).copy_from(&self.b_acc);
        b
    }

    pub fn set_bias(&mut self, b: &Vector6<f64>) {
        self.b_gyro = b.fixed_rows::<3>(0).into_owned();
        self.b_acc = b.fixed_rows::<3>(3).into_owned();
    }

    /// Global position of antenna `i`: p + R tᵢ.
    pub fn antenna_position(&self, i: usize) -> Result<Vector3<f64>> {
        let t = self.calib.get(i).ok_or(Error::SensorIndex { index: i, count: self.calib.len() })?;
        Ok(self.pos + self.rot * *t)
    }

    pub fn is_finite(&self) -> bool {
        self.rot.matrix().iter().all(|x| x.is_finite())
            && self.vel.iter().chain(self.pos.iter()).all(|x| x.is_finite())
            && self.b_gyro.iter().chain(self.b_acc.iter()).all(|x| x.is_finite())
            && self.calib.iter().all(|t| t.iter().all(|x| x.is_finite()))
    }
}

/// One IMU reading, held constant until the next sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    /// Body angular rate, rad/s.
    pub gyro: Vector3<f64>,
    /// Body specific force, m/s².
    pub acc: Vector3<f64>,
}

impl ImuSample {
    pub fn new(t: f64, gyro: Vector3<f64>, acc: Vector3<f64>) -> Self {
        Self { t, gyro, acc }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.gyro.iter().chain(self.acc.iter()).all(|x| x.is_finite())
    }
}

/// Global-frame antenna position reported by one GNSS receiver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnssSample {
    pub t: f64,
    pub pos: Vector3<f64>,
    /// Per-axis variance (m²), when the receiver reports it.
    pub var: Option<Vector3<f64>>,
}

impl GnssSample {
    pub fn new(t: f64, pos: Vector3<f64>) -> Self {
        Self { t, pos, var: None }
    }
}
