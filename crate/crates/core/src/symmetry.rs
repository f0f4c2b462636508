//! The symmetry group `G = (SE₂(3) ⋉ se(3)) ⋉ (ℝ³)ᴺ` of the biased INS with N lever arms.
//!
//! An element `X = (C, c, d₁…d_N)` carries an extended pose `C = (B, b)` with
//! `B = (A, a) ∈ SE(3)`, a bias-transport slot `c ∈ ℝ⁶` and one calibration-transport slot
//! `dᵢ ∈ ℝ³` per antenna. The group acts on the right of the state space:
//!
//! ```text
//! φ(X, ξ) = (T·C, Ad_{B⁻¹}(b_I − c), Aᵀ(tᵢ − dᵢ))
//! ```
//!
//! and the product compatible with that action is
//! `X₁X₂ = (C₁C₂, c₁ + Ad_{B₁}c₂, d₁ᵢ + A₁d₂ᵢ)`.

use nalgebra::{DVector, Matrix5, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::lie::{self, pi_map, se23, se3, so3, InsMatrices, Rot3, SE23Element, Vector9};
use crate::types::NavState;

/// Dimension of the local error for `n` antennas.
pub const fn error_dim(n: usize) -> usize {
    15 + 3 * n
}

fn check_sensors(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub pose: SE23Element,
    pub bias: Vector6<f64>,
    pub calib: Vec<Vector3<f64>>,
}

impl GroupElement {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("at least one GNSS sensor is required".into()));
        }
        Ok(Self { pose: SE23Element::identity(), bias: Vector6::zeros(), calib: vec![Vector3::zeros(); n] })
    }

    pub fn sensor_count(&self) -> usize {
        self.calib.len()
    }

    /// A, the rotation of the element.
    pub fn rot(&self) -> &Rot3 {
        &self.pose.rot
    }

    /// B = (A, a).
    pub fn b_part(&self) -> lie::SE3Element {
        self.pose.se3_part()
    }

    pub fn compose(&self, rhs: &GroupElement) -> Result<GroupElement> {
        check_sensors(self.sensor_count(), rhs.sensor_count())?;
        let a = self.pose.rot;
        Ok(GroupElement {
            pose: self.pose * rhs.pose,
            bias: self.bias + self.b_part().adjoint() * rhs.bias,
            calib: self.calib.iter().zip(&rhs.calib).map(|(d1, d2)| d1 + a * *d2).collect(),
        })
    }

    /// X⁻¹ = (C⁻¹, −Ad_{B⁻¹}c, −Aᵀdᵢ).
    pub fn inverse(&self) -> GroupElement {
        let at = self.pose.rot.transpose();
        GroupElement {
            pose: self.pose.inverse(),
            bias: -(self.b_part().inverse().adjoint() * self.bias),
            calib: self.calib.iter().map(|d| -(at * *d)).collect(),
        }
    }

    /// Group exponential, the time-one flow of `Ẋ = X·λ` from the identity.
    pub fn exp(tangent: &GroupTangent) -> GroupElement {
        let w = tangent.pose.fixed_rows::<3>(0).into_owned();
        let jl = so3::left_jacobian(&w);
        GroupElement {
            pose: SE23Element::exp(&tangent.pose),
            bias: se3::left_jacobian(&pi_map(&tangent.pose)) * tangent.bias,
            calib: tangent.calib.iter().map(|d| jl * d).collect(),
        }
    }

    pub fn log(&self) -> Result<GroupTangent> {
        let pose = self.pose.log()?;
        let w = pose.fixed_rows::<3>(0).into_owned();
        let jinv = so3::left_jacobian_inv(&w);
        Ok(GroupTangent {
            bias: se3::left_jacobian_inv(&pi_map(&pose)) * self.bias,
            calib: self.calib.iter().map(|d| jinv * d).collect(),
            pose,
        })
    }

    /// The unique element with `φ(X, ξ₀) = state`, where ξ₀ is the origin.
    pub fn from_origin(state: &NavState) -> GroupElement {
        let pose = state.pose();
        let a = pose.rot;
        GroupElement {
            bias: -(pose.se3_part().adjoint() * state.bias()),
            calib: state.calib.iter().map(|t| -(a * *t)).collect(),
            pose,
        }
    }

    /// Maximum absolute difference over all components.
    pub fn distance_max(&self, other: &GroupElement) -> f64 {
        let mut d = (self.pose.matrix() - other.pose.matrix()).amax().max((self.bias - other.bias).amax());
        for (x, y) in self.calib.iter().zip(&other.calib) {
            d = d.max((x - y).amax());
        }
        d
    }
}

/// Element of the Lie algebra of G in coordinates: se₂(3) ⊕ ℝ⁶ ⊕ (ℝ³)ᴺ.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupTangent {
    pub pose: Vector9<f64>,
    pub bias: Vector6<f64>,
    pub calib: Vec<Vector3<f64>>,
}

impl GroupTangent {
    pub fn zeros(n: usize) -> Self {
        Self { pose: Vector9::zeros(), bias: Vector6::zeros(), calib: vec![Vector3::zeros(); n] }
    }

    pub fn sensor_count(&self) -> usize {
        self.calib.len()
    }

    pub fn dim(&self) -> usize {
        error_dim(self.calib.len())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { pose: self.pose * s, bias: self.bias * s, calib: self.calib.iter().map(|d| d * s).collect() }
    }

    /// Flattens into the fixed order (pose, bias, calib₁…calib_N).
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v.fixed_rows_mut::<9>(0).copy_from(&self.pose);
        v.fixed_rows_mut::<6>(9).copy_from(&self.bias);
        for (i, d) in self.calib.iter().enumerate() {
            v.fixed_rows_mut::<3>(15 + 3 * i).copy_from(d);
        }
        v
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() < 18 || !(v.len() - 15).is_multiple_of(3) {
            return Err(Error::Dimension { expected: 18, found: v.len() });
        }
        let n = (v.len() - 15) / 3;
        Ok(Self {
            pose: v.fixed_rows::<9>(0).into_owned(),
            bias: v.fixed_rows::<6>(9).into_owned(),
            calib: (0..n).map(|i| v.fixed_rows::<3>(15 + 3 * i).into_owned()).collect(),
        })
    }
}

/// Equivariant error in normal coordinates, blocks (ε_R, ε_v, ε_p, ε_bω, ε_ba, ε_t1…ε_tN).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalError(pub DVector<f64>);

impl LocalError {
    pub const ROT: usize = 0;
    pub const VEL: usize = 3;
    pub const POS: usize = 6;
    pub const GYRO_BIAS: usize = 9;
    pub const ACC_BIAS: usize = 12;

    pub fn calib_offset(i: usize) -> usize {
        15 + 3 * i
    }

    pub fn block(&self, offset: usize) -> Vector3<f64> {
        self.0.fixed_rows::<3>(offset).into_owned()
    }

    pub fn sensor_count(&self) -> usize {
        (self.0.len() - 15) / 3
    }
}

/// φ(X, ξ).
pub fn act(x: &GroupElement, state: &NavState) -> Result<NavState> {
    check_sensors(x.sensor_count(), state.sensor_count())?;
    let at = x.pose.rot.transpose();
    let bias = x.b_part().inverse().adjoint() * (state.bias() - x.bias);
    let mut out = NavState {
        rot: state.rot,
        vel: state.vel,
        pos: state.pos,
        b_gyro: Vector3::zeros(),
        b_acc: Vector3::zeros(),
        calib: state.calib.iter().zip(&x.calib).map(|(t, d)| at * (t - d)).collect(),
    };
    out.set_pose(&(state.pose() * x.pose));
    out.set_bias(&bias);
    Ok(out)
}

/// Measurement of antenna `i` expressed in the body frame relative to a known point δ:
/// `hᵢ(ξ) = Rᵀ(δ − (p + R tᵢ))`.
pub fn output_h(i: usize, state: &NavState, known: &Vector3<f64>) -> Result<Vector3<f64>> {
    let antenna = state.antenna_position(i)?;
    Ok(state.rot.transpose() * (known - antenna))
}

/// Output action `ρᵢ(X, y) = Aᵀ(y − b + dᵢ)`.
pub fn output_rho(i: usize, x: &GroupElement, y: &Vector3<f64>) -> Result<Vector3<f64>> {
    let d = x.calib.get(i).ok_or(Error::SensorIndex { index: i, count: x.sensor_count() })?;
    Ok(x.pose.rot.transpose() * (y - x.pose.p_col + d))
}

/// The 5×5 matrix `(W − B + D) + T⁻¹(G − D)T` whose vee is the pose part of the lift.
/// Its lower two rows vanish for every state and input.
pub fn lift_pose_matrix(state: &NavState, gyro: &Vector3<f64>, acc: &Vector3<f64>, gravity: &Vector3<f64>) -> Matrix5<f64> {
    let m = InsMatrices::new(gyro, acc, &state.bias(), gravity);
    let t = state.pose();
    (m.w - m.b + m.d) + t.inverse().matrix() * (m.g - m.d) * t.matrix()
}

/// The lift Λ(ξ, u) into the Lie algebra of G.
pub fn lift(state: &NavState, gyro: &Vector3<f64>, acc: &Vector3<f64>, gravity: &Vector3<f64>) -> Result<GroupTangent> {
    if !state.is_finite() || !gyro.iter().chain(acc.iter()).chain(gravity.iter()).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("lift input"));
    }
    let pose = se23::vee(&lift_pose_matrix(state, gyro, acc, gravity));
    let bias = se3::ad(&state.bias()) * pi_map(&pose);
    let rate = so3::skew(&(gyro - state.b_gyro));
    Ok(GroupTangent { pose, bias, calib: state.calib.iter().map(|t| -(rate * t)).collect() })
}

/// Normal coordinates of a state about the origin: ϑ(e) = log(φ_{ξ₀}⁻¹(e)).
pub fn coords(e: &NavState) -> Result<LocalError> {
    Ok(LocalError(GroupElement::from_origin(e).log()?.to_vector()))
}

/// ϑ⁻¹(ε) = φ(exp(ε), ξ₀).
pub fn coords_inv(eps: &LocalError) -> Result<NavState> {
    let x = GroupElement::exp(&GroupTangent::from_vector(&eps.0)?);
    act(&x, &NavState::origin(x.sensor_count()))
}

/// Equivariant error e = φ(X̂⁻¹, ξ) between a group estimate and a state.
pub fn equivariant_error(estimate: &GroupElement, state: &NavState) -> Result<NavState> {
    act(&estimate.inverse(), state)
}
