//! Continuous-time biased INS dynamics and their exact discretization for a held input.

use nalgebra::{Matrix3, Vector3};

use crate::lie::so3::{self, skew, Rot3};
use crate::types::{ImuSample, NavState};

/// Time derivative of a [`NavState`], with the rotation derivative kept as a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct NavDerivative {
    pub rot: Matrix3<f64>,
    pub vel: Vector3<f64>,
    pub pos: Vector3<f64>,
    pub b_gyro: Vector3<f64>,
    pub b_acc: Vector3<f64>,
    pub calib: Vec<Vector3<f64>>,
}

/// Ṙ = R(ω − b_ω)∧, v̇ = R(a − b_a) + g, ṗ = v; biases and lever arms are constant.
pub fn vector_field(x: &NavState, gyro: &Vector3<f64>, acc: &Vector3<f64>, gravity: &Vector3<f64>) -> NavDerivative {
    NavDerivative {
        rot: x.rot.matrix() * skew(&(gyro - x.b_gyro)),
        vel: x.rot * (acc - x.b_acc) + gravity,
        pos: x.vel,
        b_gyro: Vector3::zeros(),
        b_acc: Vector3::zeros(),
        calib: vec![Vector3::zeros(); x.calib.len()],
    }
}

/// Integrates the dynamics over `dt` with the input held constant.
///
/// Exact for a zero-order-hold input: the rotation follows the SO(3) exponential and the
/// velocity and position use the first and second rotation-integral Jacobians.
pub fn flow(x: &NavState, gyro: &Vector3<f64>, acc: &Vector3<f64>, gravity: &Vector3<f64>, dt: f64) -> NavState {
    let phi = (gyro - x.b_gyro) * dt;
    let a = acc - x.b_acc;
    let rel_vel = so3::left_jacobian(&phi) * a * dt;
    let rel_pos = so3::second_jacobian(&phi) * a * (dt * dt);
    NavState {
        rot: x.rot * Rot3::exp(&phi),
        vel: x.vel + gravity * dt + x.rot * rel_vel,
        pos: x.pos + x.vel * dt + gravity * (0.5 * dt * dt) + x.rot * rel_pos,
        b_gyro: x.b_gyro,
        b_acc: x.b_acc,
        calib: x.calib.clone(),
    }
}

pub fn flow_sample(x: &NavState, u: &ImuSample, gravity: &Vector3<f64>, dt: f64) -> NavState {
    flow(x, &u.gyro, &u.acc, gravity, dt)
}
