//! SO(3): skew map, exponential, logarithm and left Jacobians.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Angles closer than this to π are rejected by [`Rot3::log`].
pub const BRANCH_TOLERANCE: f64 = 1e-6;

// Below this angle the trigonometric coefficients are evaluated by their Taylor series.
// The third- and fourth-order coefficients lose all precision to cancellation well above
// 1e-8, so the cutoff is set where a 4-term series is exact to machine precision.
const SERIES_ANGLE: f64 = 1e-2;

/// Trigonometric coefficients shared by the SO(3), SE(3) and SE₂(3) closed forms.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Coeffs {
    /// sin θ / θ
    pub a: f64,
    /// (1 − cos θ) / θ²
    pub b: f64,
    /// (θ − sin θ) / θ³
    pub c: f64,
    /// (θ²/2 + cos θ − 1) / θ⁴
    pub d: f64,
    /// (2θ − 3 sin θ + θ cos θ) / (2θ⁵)
    pub e: f64,
}

impl Coeffs {
    pub fn new(theta: f64) -> Self {
        let t2 = theta * theta;
        if theta < SERIES_ANGLE {
            let t4 = t2 * t2;
            let t6 = t4 * t2;
            Self {
                a: 1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0,
                b: 0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0,
                c: 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362_880.0,
                d: 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0 - t6 / 3_628_800.0,
                e: 1.0 / 120.0 - t2 / 2520.0 + t4 / 120_960.0 - t6 / 9_979_200.0,
            }
        } else {
            let (s, co) = theta.sin_cos();
            let t3 = t2 * theta;
            let t4 = t2 * t2;
            Self {
                a: s / theta,
                b: (1.0 - co) / t2,
                c: (theta - s) / t3,
                d: (0.5 * t2 + co - 1.0) / t4,
                e: (2.0 * theta - 3.0 * s + theta * co) / (2.0 * t4 * theta),
            }
        }
    }
}

/// Coefficient of Φ² in the inverse left Jacobian: 1/θ² − (1 + cos θ)/(2θ sin θ).
fn inv_jacobian_coeff(theta: f64) -> f64 {
    if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2 * t2 * t2 / 1_209_600.0
    } else {
        let (s, c) = theta.sin_cos();
        1.0 / (theta * theta) - (1.0 + c) / (2.0 * theta * s)
    }
}

/// Skew-symmetric (cross-product) matrix of `v`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`]; reads the antisymmetric part of `m`.
pub fn unskew(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Left Jacobian of SO(3): Σ (ω∧)ᵏ/(k+1)!.
pub fn left_jacobian(w: &Vector3<f64>) -> Matrix3<f64> {
    let k = Coeffs::new(w.norm());
    let s = skew(w);
    Matrix3::identity() + k.b * s + k.c * s * s
}

pub fn left_jacobian_inv(w: &Vector3<f64>) -> Matrix3<f64> {
    let s = skew(w);
    Matrix3::identity() - 0.5 * s + inv_jacobian_coeff(w.norm()) * s * s
}

/// Σ (ω∧)ᵏ/(k+2)!, the double integral of the rotation flow.
pub fn second_jacobian(w: &Vector3<f64>) -> Matrix3<f64> {
    let k = Coeffs::new(w.norm());
    let s = skew(w);
    0.5 * Matrix3::identity() + k.c * s + k.d * s * s
}

/// A rotation matrix. Construction through [`Rot3::exp`] or the product of rotations keeps
/// it on the manifold; [`Rot3::from_matrix`] re-orthonormalizes arbitrary input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rot3(Matrix3<f64>);

impl Default for Rot3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rot3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps `m` without checks. The caller guarantees orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Projects `m` onto SO(3) (closest rotation in Frobenius norm).
    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut d = Matrix3::identity();
        if (u * v_t).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        Self(u * d * v_t)
    }

    /// Rotation of `angle` radians about the unit vector `axis`.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        Self::exp(&(axis.normalize() * angle))
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::exp(&Vector3::new(angle, 0.0, 0.0))
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::exp(&Vector3::new(0.0, angle, 0.0))
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::exp(&Vector3::new(0.0, 0.0, angle))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// Rodrigues formula.
    pub fn exp(w: &Vector3<f64>) -> Self {
        let k = Coeffs::new(w.norm());
        let s = skew(w);
        Self(Matrix3::identity() + k.a * s + k.b * s * s)
    }

    /// Principal logarithm. Fails within [`BRANCH_TOLERANCE`] of a half-turn, where the
    /// rotation axis is not unique.
    pub fn log(&self) -> Result<Vector3<f64>> {
        let m = &self.0;
        let half_skew = 0.5 * unskew(&(m - m.transpose()));
        let sin = half_skew.norm();
        let cos = 0.5 * (m.trace() - 1.0);
        let theta = sin.atan2(cos);
        if std::f64::consts::PI - theta < BRANCH_TOLERANCE {
            return Err(Error::Branch { angle: theta });
        }
        // θ / sin θ = 1 / Coeffs::a
        Ok(half_skew / Coeffs::new(theta).a)
    }

    /// Geodesic angle of the rotation, in [0, π].
    pub fn angle(&self) -> f64 {
        let half_skew = 0.5 * unskew(&(self.0 - self.0.transpose()));
        half_skew.norm().atan2(0.5 * (self.0.trace() - 1.0))
    }

    /// Geodesic distance to `other`.
    pub fn angle_to(&self, other: &Rot3) -> f64 {
        (self.transpose() * *other).angle()
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let m = &self.0;
        (m.transpose() * m - Matrix3::identity()).amax() < tol && (m.determinant() - 1.0).abs() < tol
    }
}

impl std::ops::Mul for Rot3 {
    type Output = Rot3;
    fn mul(self, rhs: Rot3) -> Rot3 {
        Rot3(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vector3<f64>> for Rot3 {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl std::ops::Mul<&Vector3<f64>> for &Rot3 {
    type Output = Vector3<f64>;
    fn mul(self, rhs: &Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}
