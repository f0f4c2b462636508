//! SE(3) with algebra coordinates ordered (rotation, translation).

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};

use super::so3::{self, skew, Coeffs, Rot3};
use crate::error::Result;

pub fn wedge(v: &Vector6<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&v.fixed_rows::<3>(0).into_owned()));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&v.fixed_rows::<3>(3));
    m
}

pub fn vee(m: &Matrix4<f64>) -> Vector6<f64> {
    let w = so3::unskew(&m.fixed_view::<3, 3>(0, 0).into_owned());
    let t = m.fixed_view::<3, 1>(0, 3);
    Vector6::new(w.x, w.y, w.z, t[0], t[1], t[2])
}

/// adjoint matrix: ad_u v = vee(u∧v∧ − v∧u∧).
pub fn ad(u: &Vector6<f64>) -> Matrix6<f64> {
    let w = skew(&u.fixed_rows::<3>(0).into_owned());
    let t = skew(&u.fixed_rows::<3>(3).into_owned());
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&t);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    m
}

/// The lower-left block Q of the SE(3) left Jacobian for coordinates (ω, ρ).
fn jacobian_coupling(w: &Vector3<f64>, rho: &Vector3<f64>) -> Matrix3<f64> {
    let k = Coeffs::new(w.norm());
    let p = skew(w);
    let r = skew(rho);
    let pr = p * r;
    let rp = r * p;
    let prp = pr * p;
    0.5 * r + k.c * (pr + rp + prp) + k.d * (p * pr + rp * p - 3.0 * prp) + k.e * (prp * p + p * prp)
}

/// Left Jacobian Σ (ad_u)ᵏ/(k+1)!, equal to ∫₀¹ Ad_{exp(su)} ds.
pub fn left_jacobian(u: &Vector6<f64>) -> Matrix6<f64> {
    let w = u.fixed_rows::<3>(0).into_owned();
    let rho = u.fixed_rows::<3>(3).into_owned();
    let jl = so3::left_jacobian(&w);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&jl);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&jl);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&jacobian_coupling(&w, &rho));
    m
}

pub fn left_jacobian_inv(u: &Vector6<f64>) -> Matrix6<f64> {
    let w = u.fixed_rows::<3>(0).into_owned();
    let rho = u.fixed_rows::<3>(3).into_owned();
    let jinv = so3::left_jacobian_inv(&w);
    let q = jacobian_coupling(&w, &rho);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&jinv);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&jinv);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-jinv * q * jinv));
    m
}

/// Rigid transform (A, a).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SE3Element {
    pub rot: Rot3,
    pub trans: Vector3<f64>,
}

impl SE3Element {
    pub fn new(rot: Rot3, trans: Vector3<f64>) -> Self {
        Self { rot, trans }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rot.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.trans);
        m
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self { rot: rt, trans: -(rt * self.trans) }
    }

    pub fn exp(u: &Vector6<f64>) -> Self {
        let w = u.fixed_rows::<3>(0).into_owned();
        let rho = u.fixed_rows::<3>(3).into_owned();
        Self { rot: Rot3::exp(&w), trans: so3::left_jacobian(&w) * rho }
    }

    pub fn log(&self) -> Result<Vector6<f64>> {
        let w = self.rot.log()?;
        let rho = so3::left_jacobian_inv(&w) * self.trans;
        Ok(Vector6::new(w.x, w.y, w.z, rho.x, rho.y, rho.z))
    }

    /// Adjoint matrix in (rotation, translation) coordinates.
    pub fn adjoint(&self) -> Matrix6<f64> {
        let r = self.rot.matrix();
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(&self.trans) * r));
        m
    }
}

impl std::ops::Mul for SE3Element {
    type Output = SE3Element;
    fn mul(self, rhs: SE3Element) -> SE3Element {
        SE3Element { rot: self.rot * rhs.rot, trans: self.trans + self.rot * rhs.trans }
    }
}
