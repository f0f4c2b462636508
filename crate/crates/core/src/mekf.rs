//! Multiplicative error-state EKF over the same state and measurements, used as the baseline.
//!
//! Attitude error is body-frame, `R = R̂ exp(δθ∧)`; every other error is additive.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::config::FilterConfig;
use crate::dynamics;
use crate::error::{Error, Result};
use crate::estimator::{self, Estimator, FilterKind};
use crate::lie::{skew, Rot3};
use crate::symmetry::{error_dim, LocalError};
use crate::types::{ImuSample, NavState};

#[derive(Clone, Debug)]
pub struct Mekf {
    nominal: NavState,
    p: DMatrix<f64>,
    t_last: f64,
    cfg: FilterConfig,
}

impl Mekf {
    pub fn new(n: usize, cfg: FilterConfig) -> Result<Self> {
        cfg.validate()?;
        if n == 0 {
            return Err(Error::Config("at least one GNSS antenna is required".into()));
        }
        let p = DMatrix::from_diagonal(&cfg.noise.p0_diag(n));
        Ok(Self { nominal: NavState::origin(n), p, t_last: 0.0, cfg })
    }

    pub fn with_initial_state(state: &NavState, cfg: FilterConfig) -> Result<Self> {
        let mut f = Self::new(state.sensor_count(), cfg)?;
        f.nominal = state.clone();
        Ok(f)
    }

    pub fn set_covariance(&mut self, p: DMatrix<f64>) -> Result<()> {
        let d = error_dim(self.sensor_count());
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::Dimension { expected: d, found: p.nrows() });
        }
        self.p = p;
        Ok(())
    }

    /// Continuous error-state Jacobian.
    pub fn build_f(&self, u: &ImuSample) -> DMatrix<f64> {
        let n = self.sensor_count();
        let x = &self.nominal;
        let r = *x.rot.matrix();
        let mut f = DMatrix::zeros(error_dim(n), error_dim(n));
        f.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-skew(&(u.gyro - x.b_gyro))));
        f.fixed_view_mut::<3, 3>(0, 9).copy_from(&(-Matrix3::identity()));
        f.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-r * skew(&(u.acc - x.b_acc))));
        f.fixed_view_mut::<3, 3>(3, 12).copy_from(&(-r));
        f.fixed_view_mut::<3, 3>(6, 3).copy_from(&Matrix3::identity());
        f
    }

    /// Measurement Jacobian of the global antenna-`i` position.
    pub fn build_h(&self, i: usize) -> Result<DMatrix<f64>> {
        let n = self.sensor_count();
        let t = self.nominal.calib.get(i).ok_or(Error::SensorIndex { index: i, count: n })?;
        let r = *self.nominal.rot.matrix();
        let mut h = DMatrix::zeros(3, error_dim(n));
        h.fixed_view_mut::<3, 3>(0, LocalError::ROT).copy_from(&(-r * skew(t)));
        h.fixed_view_mut::<3, 3>(0, LocalError::POS).copy_from(&Matrix3::identity());
        h.fixed_view_mut::<3, 3>(0, LocalError::calib_offset(i)).copy_from(&r);
        Ok(h)
    }

    fn process_noise(&self) -> DMatrix<f64> {
        let nc = &self.cfg.noise;
        let diag = DVector::from_iterator(
            error_dim(self.sensor_count()),
            [nc.sigma_gyro, nc.sigma_acc, 0.0, nc.sigma_bg_walk, nc.sigma_ba_walk]
                .into_iter()
                .chain(std::iter::repeat_n(nc.sigma_calib_walk, self.sensor_count()))
                .flat_map(|s| [s * s; 3]),
        );
        DMatrix::from_diagonal(&diag)
    }

    fn inject(&mut self, dx: &DVector<f64>) {
        let b = |o: usize| Vector3::new(dx[o], dx[o + 1], dx[o + 2]);
        let x = &mut self.nominal;
        x.rot = x.rot * Rot3::exp(&b(LocalError::ROT));
        x.vel += b(LocalError::VEL);
        x.pos += b(LocalError::POS);
        x.b_gyro += b(LocalError::GYRO_BIAS);
        x.b_acc += b(LocalError::ACC_BIAS);
        for (i, t) in x.calib.iter_mut().enumerate() {
            *t += b(LocalError::calib_offset(i));
        }
    }

    /// Update returning the applied error-state correction.
    pub fn update_detailed(&mut self, i: usize, y: &Vector3<f64>, r_meas: &Matrix3<f64>) -> Result<DVector<f64>> {
        estimator::check_measurement(y, r_meas)?;
        let h = self.build_h(i)?;
        let residual = y - self.nominal.antenna_position(i)?;
        let r = DVector::from_column_slice(residual.as_slice());
        let noise = DMatrix::from_column_slice(3, 3, r_meas.as_slice());
        let inn = estimator::innovation(&self.p, &h, &noise, &r, self.cfg.max_condition, self.cfg.gate)?;
        let dx = &inn.gain * &r;
        self.inject(&dx);
        let dim = self.p.nrows();
        let ikh = DMatrix::identity(dim, dim) - &inn.gain * &h;
        self.p = &ikh * &self.p * ikh.transpose() + &inn.gain * noise * inn.gain.transpose();
        estimator::symmetrize(&mut self.p);
        Ok(dx)
    }
}

impl Estimator for Mekf {
    fn kind(&self) -> FilterKind {
        FilterKind::Mekf
    }

    fn sensor_count(&self) -> usize {
        self.nominal.sensor_count()
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
        let f = self.build_f(u);
        self.nominal = dynamics::flow_sample(&self.nominal, u, &self.cfg.noise.gravity, dt);
        let dim = f.nrows();
        let phi = if self.cfg.exact_transition { (&f * dt).exp() } else { DMatrix::identity(dim, dim) + &f * dt };
        self.p = &phi * &self.p * phi.transpose() + self.process_noise() * dt;
        estimator::symmetrize(&mut self.p);
        self.t_last += dt;
        Ok(())
    }

    fn update(&mut self, i: usize, y: &Vector3<f64>, r_meas: &Matrix3<f64>) -> Result<()> {
        self.update_detailed(i, y, r_meas).map(|_| ())
    }

    fn state_estimate(&self) -> NavState {
        self.nominal.clone()
    }

    fn covariance(&self) -> &DMatrix<f64> {
        &self.p
    }
}

/// Native MEKF error of an estimate against a reference state.
pub fn local_error(estimate: &NavState, truth: &NavState) -> Result<LocalError> {
    let n = estimate.sensor_count();
    if truth.sensor_count() != n {
        return Err(Error::Dimension { expected: n, found: truth.sensor_count() });
    }
    let mut e = DVector::zeros(error_dim(n));
    let mut put = |o: usize, v: Vector3<f64>| e.fixed_rows_mut::<3>(o).copy_from(&v);
    put(LocalError::ROT, (estimate.rot.transpose() * truth.rot).log()?);
    put(LocalError::VEL, truth.vel - estimate.vel);
    put(LocalError::POS, truth.pos - estimate.pos);
    put(LocalError::GYRO_BIAS, truth.b_gyro - estimate.b_gyro);
    put(LocalError::ACC_BIAS, truth.b_acc - estimate.b_acc);
    for i in 0..n {
        put(LocalError::calib_offset(i), truth.calib[i] - estimate.calib[i]);
    }
    Ok(LocalError(e))
}
