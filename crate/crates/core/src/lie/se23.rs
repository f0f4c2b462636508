//! SE₂(3), the extended pose group. Algebra coordinates are ordered
//! (rotation, velocity column, position column).

use nalgebra::{Matrix5, Vector3};

use super::so3::{self, skew, Rot3};
use super::{Matrix9, Vector9};
use crate::error::Result;

fn block(v: &Vector9<f64>, i: usize) -> Vector3<f64> {
    v.fixed_rows::<3>(3 * i).into_owned()
}

pub fn wedge(v: &Vector9<f64>) -> Matrix5<f64> {
    let mut m = Matrix5::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&block(v, 0)));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&block(v, 1));
    m.fixed_view_mut::<3, 1>(0, 4).copy_from(&block(v, 2));
    m
}

/// Inverse of [`wedge`]. Entries outside the algebra pattern are ignored.
pub fn vee(m: &Matrix5<f64>) -> Vector9<f64> {
    let mut v = Vector9::zeros();
    v.fixed_rows_mut::<3>(0).copy_from(&so3::unskew(&m.fixed_view::<3, 3>(0, 0).into_owned()));
    v.fixed_rows_mut::<3>(3).copy_from(&m.fixed_view::<3, 1>(0, 3));
    v.fixed_rows_mut::<3>(6).copy_from(&m.fixed_view::<3, 1>(0, 4));
    v
}

pub fn ad(u: &Vector9<f64>) -> Matrix9<f64> {
    let w = skew(&block(u, 0));
    let mut m = Matrix9::zeros();
    for i in 0..3 {
        m.fixed_view_mut::<3, 3>(3 * i, 3 * i).copy_from(&w);
    }
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&block(u, 1)));
    m.fixed_view_mut::<3, 3>(6, 0).copy_from(&skew(&block(u, 2)));
    m
}

/// Extended pose (R, v, p).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SE23Element {
    pub rot: Rot3,
    pub v_col: Vector3<f64>,
    pub p_col: Vector3<f64>,
}

impl SE23Element {
    pub fn new(rot: Rot3, v_col: Vector3<f64>, p_col: Vector3<f64>) -> Self {
        Self { rot, v_col, p_col }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn matrix(&self) -> Matrix5<f64> {
        let mut m = Matrix5::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rot.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.v_col);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.p_col);
        m
    }

    /// Reads a 5×5 matrix; the rotation block is taken as is.
    pub fn from_matrix_unchecked(m: &Matrix5<f64>) -> Self {
        Self {
            rot: Rot3::from_matrix_unchecked(m.fixed_view::<3, 3>(0, 0).into_owned()),
            v_col: m.fixed_view::<3, 1>(0, 3).into_owned(),
            p_col: m.fixed_view::<3, 1>(0, 4).into_owned(),
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self { rot: rt, v_col: -(rt * self.v_col), p_col: -(rt * self.p_col) }
    }

    pub fn exp(u: &Vector9<f64>) -> Self {
        let w = block(u, 0);
        let jl = so3::left_jacobian(&w);
        Self { rot: Rot3::exp(&w), v_col: jl * block(u, 1), p_col: jl * block(u, 2) }
    }

    pub fn log(&self) -> Result<Vector9<f64>> {
        let w = self.rot.log()?;
        let jinv = so3::left_jacobian_inv(&w);
        let mut v = Vector9::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&w);
        v.fixed_rows_mut::<3>(3).copy_from(&(jinv * self.v_col));
        v.fixed_rows_mut::<3>(6).copy_from(&(jinv * self.p_col));
        Ok(v)
    }

    pub fn adjoint(&self) -> Matrix9<f64> {
        let r = self.rot.matrix();
        let mut m = Matrix9::zeros();
        for i in 0..3 {
            m.fixed_view_mut::<3, 3>(3 * i, 3 * i).copy_from(r);
        }
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(&self.v_col) * r));
        m.fixed_view_mut::<3, 3>(6, 0).copy_from(&(skew(&self.p_col) * r));
        m
    }

    /// The SE(3) factor (A, a) made of the rotation and the velocity column.
    pub fn se3_part(&self) -> super::SE3Element {
        super::SE3Element::new(self.rot, self.v_col)
    }
}

impl std::ops::Mul for SE23Element {
    type Output = SE23Element;
    fn mul(self, rhs: SE23Element) -> SE23Element {
        SE23Element {
            rot: self.rot * rhs.rot,
            v_col: self.v_col + self.rot * rhs.v_col,
            p_col: self.p_col + self.rot * rhs.p_col,
        }
    }
}
