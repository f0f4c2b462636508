//! 5×5 matrix embeddings of the biased inertial navigation dynamics.
//!
//! With T = (R, v, p) as a 5×5 matrix the deterministic dynamics read
//! `Ṫ = T (W − B + D) + (G − D) T`.

use nalgebra::{Matrix4, Matrix5, Vector3, Vector6};

use super::so3::skew;
use super::Vector9;

#[derive(Clone, Debug, PartialEq)]
pub struct InsMatrices {
    /// Input embedding: ω∧ in the rotation block, a in the velocity column.
    pub w: Matrix5<f64>,
    /// Bias embedding, laid out like `w`.
    pub b: Matrix5<f64>,
    /// Gravity in the velocity column.
    pub g: Matrix5<f64>,
    /// Constant selector with a single unit entry at row 4, column 5 (one-indexed).
    pub d: Matrix5<f64>,
    /// Upper-left 4×4 block of `g`, an element of se(3).
    pub g_avg: Matrix4<f64>,
}

fn embed(rot: &Vector3<f64>, vel: &Vector3<f64>) -> Matrix5<f64> {
    let mut m = Matrix5::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(rot));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(vel);
    m
}

/// The constant selector D.
pub fn selector() -> Matrix5<f64> {
    let mut d = Matrix5::zeros();
    d[(3, 4)] = 1.0;
    d
}

impl InsMatrices {
    /// `bias` is ordered (gyro, accelerometer).
    pub fn new(omega: &Vector3<f64>, acc: &Vector3<f64>, bias: &Vector6<f64>, gravity: &Vector3<f64>) -> Self {
        let b_gyro = bias.fixed_rows::<3>(0).into_owned();
        let b_acc = bias.fixed_rows::<3>(3).into_owned();
        let g = embed(&Vector3::zeros(), gravity);
        Self { w: embed(omega, acc), b: embed(&b_gyro, &b_acc), g_avg: g.fixed_view::<4, 4>(0, 0).into_owned(), g, d: selector() }
    }
}

/// Π: se₂(3) → se(3), dropping the position column.
pub fn pi_map(v: &Vector9<f64>) -> Vector6<f64> {
    v.fixed_rows::<6>(0).into_owned()
}
