//! The equivariant filter.
//!
//! The estimate is a group element X̂ with ξ̂ = φ(X̂, ξ₀), and P is the covariance of the
//! equivariant error in normal coordinates about the origin ξ₀. Corrections are applied
//! on the left, `X̂ ← exp(Kδ) X̂`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};

use crate::config::{FilterConfig, NoiseMapping, Propagation};
use crate::dynamics;
use crate::error::{Error, Result};
use crate::estimator::{self, Estimator, FilterKind};
use crate::lie::{se3, skew};
use crate::symmetry::{self, error_dim, GroupElement, GroupTangent, LocalError};
use crate::types::{ImuSample, NavState};

/// Intermediate quantities of one GNSS update.
#[derive(Clone, Debug)]
pub struct UpdateQuantities {
    pub s: DMatrix<f64>,
    pub gain: DMatrix<f64>,
    /// ρᵢ(X̂⁻¹, 0) − y: predicted minus measured antenna position.
    pub residual: Vector3<f64>,
    pub correction: GroupTangent,
    /// Output gain (measurement noise in the residual space).
    pub output_gain: Matrix3<f64>,
}

#[derive(Clone, Debug)]
pub struct Eqf {
    xhat: GroupElement,
    p: DMatrix<f64>,
    t_last: f64,
    cfg: FilterConfig,
}

impl Eqf {
    /// Starts at the origin, X̂ = id, with P = diag(P₀).
    pub fn new(n: usize, cfg: FilterConfig) -> Result<Self> {
        cfg.validate()?;
        let xhat = GroupElement::identity(n)?;
        let p = DMatrix::from_diagonal(&cfg.noise.p0_diag(n));
        Ok(Self { xhat, p, t_last: 0.0, cfg })
    }

    /// Starts at an arbitrary state estimate.
    pub fn with_initial_state(state: &NavState, cfg: FilterConfig) -> Result<Self> {
        let mut f = Self::new(state.sensor_count(), cfg)?;
        f.xhat = GroupElement::from_origin(state);
        Ok(f)
    }

    pub fn group_estimate(&self) -> &GroupElement {
        &self.xhat
    }

    pub fn set_group_estimate(&mut self, x: GroupElement) -> Result<()> {
        if x.sensor_count() != self.sensor_count() {
            return Err(Error::Dimension { expected: self.sensor_count(), found: x.sensor_count() });
        }
        self.xhat = x;
        Ok(())
    }

    pub fn set_covariance(&mut self, p: DMatrix<f64>) -> Result<()> {
        let d = error_dim(self.sensor_count());
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::Dimension { expected: d, found: p.nrows() });
        }
        self.p = p;
        Ok(())
    }

    pub fn config(&self) -> &FilterConfig {
        &self.cfg
    }

    /// Linearized error dynamics, ε̇ ≈ A ε, about the current estimate for input `u`.
    pub fn build_a(&self, u: &ImuSample) -> DMatrix<f64> {
        let n = self.sensor_count();
        let g = self.cfg.noise.gravity;
        let x = &self.xhat;
        let mut a = DMatrix::zeros(error_dim(n), error_dim(n));

        a.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&g));
        a.fixed_view_mut::<3, 3>(6, 3).copy_from(&Matrix3::identity());

        a.fixed_view_mut::<6, 6>(0, 9).copy_from(&nalgebra::Matrix6::identity());
        a.fixed_view_mut::<3, 3>(6, 9).copy_from(&skew(&x.pose.p_col));

        let mut input = Vector6::zeros();
        input.fixed_rows_mut::<3>(0).copy_from(&u.gyro);
        input.fixed_rows_mut::<3>(3).copy_from(&u.acc);
        let mut g_avg = Vector6::zeros();
        g_avg.fixed_rows_mut::<3>(3).copy_from(&g);
        let transported = x.b_part().adjoint() * input + x.bias + g_avg;
        a.fixed_view_mut::<6, 6>(9, 9).copy_from(&se3::ad(&transported));

        let gamma = skew(&(x.pose.rot * u.gyro + x.bias.fixed_rows::<3>(0)));
        for i in 0..n {
            let o = LocalError::calib_offset(i);
            a.fixed_view_mut::<3, 3>(o, o).copy_from(&gamma);
        }
        a
    }

    /// Output matrix for antenna `i` given its current reading `y`.
    pub fn build_c(&self, i: usize, y: &Vector3<f64>) -> Result<DMatrix<f64>> {
        let n = self.sensor_count();
        let d = self.xhat.calib.get(i).ok_or(Error::SensorIndex { index: i, count: n })?;
        let mut c = DMatrix::zeros(3, error_dim(n));
        c.fixed_view_mut::<3, 3>(0, LocalError::ROT).copy_from(&(0.5 * skew(&(y + self.xhat.pose.p_col - d))));
        c.fixed_view_mut::<3, 3>(0, LocalError::POS).copy_from(&(-Matrix3::identity()));
        c.fixed_view_mut::<3, 3>(0, LocalError::calib_offset(i)).copy_from(&Matrix3::identity());
        Ok(c)
    }

    /// Continuous process noise in local coordinates.
    pub fn process_noise(&self) -> DMatrix<f64> {
        let n = self.sensor_count();
        let nc = &self.cfg.noise;
        let raw = DVector::from_iterator(
            error_dim(n),
            [nc.sigma_gyro, nc.sigma_acc, 0.0, nc.sigma_bg_walk, nc.sigma_ba_walk]
                .into_iter()
                .chain(std::iter::repeat_n(nc.sigma_calib_walk, n))
                .flat_map(|s| [s * s; 3]),
        );
        let q = DMatrix::from_diagonal(&raw);
        match self.cfg.noise_mapping {
            NoiseMapping::Diagonal => q,
            NoiseMapping::Adjoint => {
                let mut m = DMatrix::zeros(error_dim(n), error_dim(n));
                m.fixed_view_mut::<9, 9>(0, 0).copy_from(&self.xhat.pose.adjoint());
                m.fixed_view_mut::<6, 6>(9, 9).copy_from(&self.xhat.b_part().adjoint());
                for i in 0..n {
                    let o = LocalError::calib_offset(i);
                    m.fixed_view_mut::<3, 3>(o, o).copy_from(self.xhat.pose.rot.matrix());
                }
                &m * q * m.transpose()
            }
        }
    }

    fn propagate_mean(&mut self, u: &ImuSample, dt: f64) -> Result<()> {
        let g = self.cfg.noise.gravity;
        self.xhat = match self.cfg.propagation {
            Propagation::Exact => {
                let next = dynamics::flow_sample(&self.state_estimate(), u, &g, dt);
                GroupElement::from_origin(&next)
            }
            Propagation::FirstOrder => {
                let lambda = symmetry::lift(&self.state_estimate(), &u.gyro, &u.acc, &g)?;
                self.xhat.compose(&GroupElement::exp(&lambda.scale(dt)))?
            }
        };
        Ok(())
    }

    /// Full update that also reports its intermediate quantities.
    pub fn update_detailed(&mut self, i: usize, y: &Vector3<f64>, r_meas: &Matrix3<f64>) -> Result<UpdateQuantities> {
        estimator::check_measurement(y, r_meas)?;
        let c = self.build_c(i, y)?;
        let residual = symmetry::output_rho(i, &self.xhat.inverse(), &Vector3::zeros())? - y;
        // The residual is a global-frame position difference, so the receiver covariance
        // applies unchanged.
        let output_gain = *r_meas;
        let r = DVector::from_column_slice(residual.as_slice());
        let inn = estimator::innovation(
            &self.p,
            &c,
            &DMatrix::from_column_slice(3, 3, output_gain.as_slice()),
            &r,
            self.cfg.max_condition,
            self.cfg.gate,
        )?;
        let correction = GroupTangent::from_vector(&(&inn.gain * &r))?;
        self.xhat = GroupElement::exp(&correction).compose(&self.xhat)?;
        let dim = self.p.nrows();
        self.p = (DMatrix::identity(dim, dim) - &inn.gain * &c) * &self.p;
        estimator::symmetrize(&mut self.p);
        let _ = inn.s_inv;
        Ok(UpdateQuantities { s: inn.s, gain: inn.gain, residual, correction, output_gain })
    }
}

impl Estimator for Eqf {
    fn kind(&self) -> FilterKind {
        FilterKind::Eqf
    }

    fn sensor_count(&self) -> usize {
        self.xhat.sensor_count()
    }

    fn time(&self) -> f64 {
        self.t_last
    }

    fn set_time(&mut self, t: f64) {
        self.t_last = t;
    }

    fn propagate(&mut self, u: &ImuSample, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::TimeStep(dt));
        }
        if !u.is_finite() {
            return Err(Error::NonFinite("IMU sample"));
        }
        let a = self.build_a(u);
        let q = self.process_noise();
        self.propagate_mean(u, dt)?;
        let dim = a.nrows();
        let phi = if self.cfg.exact_transition { (&a * dt).exp() } else { DMatrix::identity(dim, dim) + &a * dt };
        self.p = &phi * &self.p * phi.transpose() + q * dt;
        estimator::symmetrize(&mut self.p);
        self.t_last += dt;
        Ok(())
    }

    fn update(&mut self, i: usize, y: &Vector3<f64>, r_meas: &Matrix3<f64>) -> Result<()> {
        self.update_detailed(i, y, r_meas).map(|_| ())
    }

    fn state_estimate(&self) -> NavState {
        let origin = NavState::origin(self.sensor_count());
        symmetry::act(&self.xhat, &origin).expect("sensor counts agree by construction")
    }

    fn covariance(&self) -> &DMatrix<f64> {
        &self.p
    }
}

/// Error of an EqF estimate against a reference state, in the filter's normal coordinates.
pub fn local_error(estimate: &NavState, truth: &NavState) -> Result<LocalError> {
    let xhat = GroupElement::from_origin(estimate);
    symmetry::coords(&symmetry::equivariant_error(&xhat, truth)?)
}
