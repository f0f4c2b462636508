//! Ground-truth trajectories and synthetic IMU / multi-antenna GNSS streams.
//!
//! Each profile is a closed-form curve for position and Z-Y-X Euler angles, differentiated
//! analytically. The IMU stream samples the resulting body rates and specific forces at the
//! midpoint of every sample interval; the stored truth is the exact flow of those held
//! inputs, so a filter given noise-free data reproduces it to round-off.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::NoiseConfig;
use crate::dynamics;
use crate::error::{Error, Result};
use crate::lie::Rot3;
use crate::types::{GnssSample, ImuSample, NavState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Hover,
    Circle,
    Figure8,
    LowExcitation,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hover" => Ok(Profile::Hover),
            "circle" => Ok(Profile::Circle),
            "figure8" => Ok(Profile::Figure8),
            "low_excitation" => Ok(Profile::LowExcitation),
            other => Err(Error::Config(format!("unknown profile '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimScenario {
    pub profile: Profile,
    /// s
    pub duration: f64,
    /// Hz
    pub imu_rate: f64,
    /// Hz, one entry per antenna.
    pub gnss_rates: Vec<f64>,
    /// Body-frame antenna positions, m.
    pub lever_arms: Vec<Vector3<f64>>,
    pub seed: u64,
    pub noise: NoiseConfig,
    /// Isotropic GNSS standard deviation, m.
    pub gnss_sigma: f64,
    /// Initial true gyroscope bias, rad/s.
    pub b_gyro: Vector3<f64>,
    /// Initial true accelerometer bias, m/s².
    pub b_acc: Vector3<f64>,
}

impl Default for SimScenario {
    fn default() -> Self {
        Self {
            profile: Profile::Figure8,
            duration: 60.0,
            imu_rate: 200.0,
            gnss_rates: vec![5.0, 5.0],
            lever_arms: vec![Vector3::new(0.35, 0.41, 0.0), Vector3::new(-0.47, -0.41, 0.0)],
            seed: 0,
            noise: NoiseConfig::default(),
            gnss_sigma: 0.05,
            b_gyro: Vector3::new(0.01, -0.01, 0.005),
            b_acc: Vector3::new(0.05, 0.02, -0.03),
        }
    }
}

impl SimScenario {
    pub fn sensor_count(&self) -> usize {
        self.lever_arms.len()
    }

    /// Switches off every noise source and both biases.
    pub fn noiseless(mut self) -> Self {
        self.noise = NoiseConfig { gravity: self.noise.gravity, ..NoiseConfig::noiseless() };
        self.gnss_sigma = 0.0;
        self.b_gyro = Vector3::zeros();
        self.b_acc = Vector3::zeros();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.duration) || !positive(self.imu_rate) {
            return Err(Error::Config("duration and imu_rate must be positive".into()));
        }
        if self.lever_arms.is_empty() || self.gnss_rates.len() != self.lever_arms.len() {
            return Err(Error::Config("need one GNSS rate per lever arm and at least one antenna".into()));
        }
        if !self.gnss_rates.iter().all(|r| positive(*r)) {
            return Err(Error::Config("GNSS rates must be positive".into()));
        }
        if !(self.gnss_sigma.is_finite() && self.gnss_sigma >= 0.0) {
            return Err(Error::Config("gnss_sigma must be non-negative".into()));
        }
        self.noise.validate()
    }
}

/// Closed-form kinematics at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Kinematics {
    pub rot: Rot3,
    pub vel: Vector3<f64>,
    pub pos: Vector3<f64>,
    pub acc: Vector3<f64>,
    pub omega_body: Vector3<f64>,
}

/// `amp · sin(freq t + phase) + offset + rate t`.
#[derive(Clone, Copy, Debug)]
struct Wave {
    amp: f64,
    freq: f64,
    phase: f64,
    offset: f64,
    rate: f64,
}

impl Wave {
    fn sin(amp: f64, freq: f64) -> Self {
        Self { amp, freq, phase: 0.0, offset: 0.0, rate: 0.0 }
    }

    fn ramp(rate: f64) -> Self {
        Self { rate, ..Self::zero() }
    }

    /// `amp (cos(freq t) − 1)`, zero at t = 0.
    fn cos_from_zero(amp: f64, freq: f64) -> Self {
        Self { amp, freq, phase: std::f64::consts::FRAC_PI_2, offset: -amp, rate: 0.0 }
    }

    fn zero() -> Self {
        Self::sin(0.0, 0.0)
    }

    /// Value and first two derivatives.
    fn eval(&self, t: f64) -> [f64; 3] {
        let arg = self.freq * t + self.phase;
        let (s, c) = arg.sin_cos();
        [self.amp * s + self.offset + self.rate * t, self.amp * self.freq * c + self.rate, -self.amp * self.freq * self.freq * s]
    }
}

struct Curve {
    pos: [Wave; 3],
    /// roll, pitch, yaw
    euler: [Wave; 3],
}

fn curve(profile: Profile) -> Curve {
    use std::f64::consts::PI;
    match profile {
        Profile::Hover => Curve { pos: [Wave::zero(); 3], euler: [Wave::zero(); 3] },
        Profile::Circle => {
            let w = 2.0 * PI / 20.0;
            Curve {
                pos: [Wave::cos_from_zero(5.0, w), Wave::sin(5.0, w), Wave::zero()],
                euler: [Wave::zero(), Wave::zero(), Wave::ramp(w)],
            }
        }
        Profile::Figure8 => {
            let w = 2.0 * PI / 20.0;
            Curve {
                pos: [Wave::sin(10.0, w), Wave::sin(4.0, 2.0 * w), Wave::sin(1.0, 1.5 * w)],
                euler: [Wave::sin(0.35, 3.0 * w), Wave::sin(0.3, 2.5 * w), Wave::sin(1.5, w)],
            }
        }
        Profile::LowExcitation => {
            let w = 2.0 * PI / 40.0;
            Curve {
                pos: [Wave::sin(2.0, w), Wave::sin(1.0, 2.0 * w), Wave::sin(0.2, w)],
                euler: [Wave::sin(0.02, 1.3 * w), Wave::sin(0.02, 0.9 * w), Wave::sin(0.03, w)],
            }
        }
    }
}

impl Profile {
    /// Closed-form pose, velocity, acceleration and body rate at time `t`.
    pub fn kinematics(&self, t: f64) -> Kinematics {
        let c = curve(*self);
        let p = c.pos.map(|w| w.eval(t));
        let [roll, pitch, yaw] = c.euler.map(|w| w.eval(t));
        let mut k = Kinematics {
            rot: Rot3::rot_z(yaw[0]) * Rot3::rot_y(pitch[0]) * Rot3::rot_x(roll[0]),
            vel: Vector3::new(p[0][1], p[1][1], p[2][1]),
            pos: Vector3::new(p[0][0], p[1][0], p[2][0]),
            acc: Vector3::new(p[0][2], p[1][2], p[2][2]),
            omega_body: Vector3::zeros(),
        };
        let (sr, cr) = roll[0].sin_cos();
        let (sp, cp) = pitch[0].sin_cos();
        k.omega_body = Vector3::new(roll[1] - yaw[1] * sp, pitch[1] * cr + yaw[1] * sr * cp, -pitch[1] * sr + yaw[1] * cr * cp);
        k
    }
}

/// Truth at one IMU timestamp, with the inputs held until the next one.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    /// Pose, velocity, current biases and lever arms.
    pub state: NavState,
    /// Bias-free body rate held over the following interval, rad/s.
    pub omega_body: Vector3<f64>,
    /// Bias-free specific force held over the following interval, m/s².
    pub acc_body: Vector3<f64>,
}

#[derive(Clone, Debug)]
pub struct SimData {
    pub scenario: SimScenario,
    pub truth: Vec<TruthSample>,
    pub imu: Vec<ImuSample>,
    pub gnss: Vec<Vec<GnssSample>>,
}

impl SimData {
    /// Truth at an arbitrary time inside the run, by exact flow from the preceding sample.
    pub fn truth_at(&self, t: f64) -> Option<NavState> {
        truth_at(&self.truth, &self.scenario.noise.gravity, t)
    }
}

/// Independent noise streams derived from one seed.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gaussian3(rng: &mut ChaCha8Rng, sigma: f64) -> Vector3<f64> {
    Vector3::from_fn(|_, _| {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    })
}

/// Truth sampled at the IMU rate with biases following their random walks.
pub fn gen_trajectory(sc: &SimScenario) -> Result<Vec<TruthSample>> {
    sc.validate()?;
    let dt = 1.0 / sc.imu_rate;
    let count = (sc.duration * sc.imu_rate).round() as usize;
    let g = sc.noise.gravity;
    let mut walk = stream(sc.seed, 1);
    let start = sc.profile.kinematics(0.0);
    let mut state = NavState {
        rot: start.rot,
        vel: start.vel,
        pos: start.pos,
        b_gyro: sc.b_gyro,
        b_acc: sc.b_acc,
        calib: sc.lever_arms.clone(),
    };
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let t = k as f64 * dt;
        let mid = sc.profile.kinematics(t + 0.5 * dt);
        let acc_body = mid.rot.transpose() * (mid.acc - g);
        out.push(TruthSample { t, state: state.clone(), omega_body: mid.omega_body, acc_body });

        let mut bias_free = state.clone();
        bias_free.b_gyro = Vector3::zeros();
        bias_free.b_acc = Vector3::zeros();
        let next = dynamics::flow(&bias_free, &mid.omega_body, &acc_body, &g, dt);
        state.rot = next.rot;
        state.vel = next.vel;
        state.pos = next.pos;
        state.b_gyro += gaussian3(&mut walk, sc.noise.sigma_bg_walk * dt.sqrt());
        state.b_acc += gaussian3(&mut walk, sc.noise.sigma_ba_walk * dt.sqrt());
    }
    Ok(out)
}

/// Truth at `t` by flowing the last sample at or before `t` with its held inputs.
pub fn truth_at(truth: &[TruthSample], gravity: &Vector3<f64>, t: f64) -> Option<NavState> {
    let k = truth.partition_point(|s| s.t <= t).checked_sub(1)?;
    let s = &truth[k];
    let h = t - s.t;
    if h == 0.0 {
        return Some(s.state.clone());
    }
    let mut x = s.state.clone();
    x.b_gyro = Vector3::zeros();
    x.b_acc = Vector3::zeros();
    let mut y = dynamics::flow(&x, &s.omega_body, &s.acc_body, gravity, h);
    y.b_gyro = s.state.b_gyro;
    y.b_acc = s.state.b_acc;
    Some(y)
}

/// Biased, noisy IMU readings, one per truth sample.
pub fn synth_imu(truth: &[TruthSample], noise: &NoiseConfig, imu_rate: f64, seed: u64) -> Vec<ImuSample> {
    let mut rng = stream(seed, 0);
    let sd_gyro = noise.sigma_gyro * imu_rate.sqrt();
    let sd_acc = noise.sigma_acc * imu_rate.sqrt();
    truth
        .iter()
        .map(|s| {
            let gyro = s.omega_body + s.state.b_gyro + gaussian3(&mut rng, sd_gyro);
            let acc = s.acc_body + s.state.b_acc + gaussian3(&mut rng, sd_acc);
            ImuSample::new(s.t, gyro, acc)
        })
        .collect()
}

/// Antenna-`i` positions `p + R tᵢ` plus isotropic noise at the antenna's rate.
pub fn synth_gnss(truth: &[TruthSample], i: usize, sc: &SimScenario, seed: u64) -> Result<Vec<GnssSample>> {
    let rate = *sc.gnss_rates.get(i).ok_or(Error::SensorIndex { index: i, count: sc.sensor_count() })?;
    let mut rng = stream(seed, 2 + i as u64);
    let count = (sc.duration * rate).round() as usize;
    let end = truth.last().map_or(0.0, |s| s.t);
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let t = j as f64 / rate;
        if t > end {
            break;
        }
        let state = truth_at(truth, &sc.noise.gravity, t).ok_or(Error::Data("truth does not cover GNSS time".into()))?;
        let y = state.antenna_position(i)? + gaussian3(&mut rng, sc.gnss_sigma);
        out.push(GnssSample::new(t, y));
    }
    Ok(out)
}

/// Runs the whole scenario.
pub fn simulate(sc: &SimScenario) -> Result<SimData> {
    let truth = gen_trajectory(sc)?;
    let imu = synth_imu(&truth, &sc.noise, sc.imu_rate, sc.seed);
    let gnss = (0..sc.sensor_count()).map(|i| synth_gnss(&truth, i, sc, sc.seed)).collect::<Result<_>>()?;
    Ok(SimData { scenario: sc.clone(), truth, imu, gnss })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(profile: Profile) -> SimScenario {
        SimScenario { profile, duration: 5.0, ..SimScenario::default() }
    }

    #[test]
    fn hover_balances_gravity() {
        let sc = scenario(Profile::Hover).noiseless();
        let truth = gen_trajectory(&sc).unwrap();
        for s in &truth {
            assert_eq!(s.state.pos, Vector3::zeros());
            assert_eq!(s.acc_body, -sc.noise.gravity);
        }
    }

    #[test]
    fn circle_centripetal_acceleration() {
        for t in [0.0, 3.7, 12.0] {
            let k = Profile::Circle.kinematics(t);
            let expected = (2.0 * std::f64::consts::PI / 20.0f64).powi(2) * 5.0;
            assert!((k.acc.norm() - expected).abs() < 1e-12);
            assert!((expected - 0.4935).abs() < 1e-4);
        }
    }

    #[test]
    fn profiles_start_at_origin() {
        for p in [Profile::Hover, Profile::Circle, Profile::Figure8, Profile::LowExcitation] {
            let k = p.kinematics(0.0);
            assert!(k.pos.amax() < 1e-12);
            assert!((k.rot.matrix() - nalgebra::Matrix3::identity()).amax() < 1e-12);
        }
    }

    #[test]
    fn noiseless_imu_passes_truth_through() {
        let sc = scenario(Profile::Figure8).noiseless();
        let truth = gen_trajectory(&sc).unwrap();
        let imu = synth_imu(&truth, &sc.noise, sc.imu_rate, 3);
        for (s, u) in truth.iter().zip(&imu) {
            assert_eq!(u.gyro, s.omega_body);
            assert_eq!(u.acc, s.acc_body);
            assert_eq!(u.t, s.t);
        }
    }

    #[test]
    fn hover_gnss_is_the_lever_arm() {
        let sc = scenario(Profile::Hover).noiseless();
        let truth = gen_trajectory(&sc).unwrap();
        for i in 0..2 {
            let g = synth_gnss(&truth, i, &sc, 1).unwrap();
            assert_eq!(g.len(), 25);
            assert!(g.iter().all(|y| y.pos == sc.lever_arms[i]));
        }
        assert!(synth_gnss(&truth, 2, &sc, 1).is_err());
    }

    #[test]
    fn antenna_separation_matches_lever_arms() {
        let sc = scenario(Profile::Figure8).noiseless();
        let data = simulate(&sc).unwrap();
        let sep = (sc.lever_arms[0] - sc.lever_arms[1]).norm();
        assert!((sep - 0.82 * 2f64.sqrt()).abs() < 1e-15);
        for (a, b) in data.gnss[0].iter().zip(&data.gnss[1]) {
            assert!(((a.pos - b.pos).norm() - sep).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_streams_are_deterministic() {
        let sc = scenario(Profile::Figure8);
        let (a, b) = (simulate(&sc).unwrap(), simulate(&sc).unwrap());
        assert_eq!(a.imu, b.imu);
        assert_eq!(a.gnss, b.gnss);
        let other = simulate(&SimScenario { seed: 1, ..sc }).unwrap();
        assert_ne!(a.imu, other.imu);
    }

    #[test]
    fn validation() {
        assert!(SimScenario { duration: 0.0, ..SimScenario::default() }.validate().is_err());
        assert!(SimScenario { gnss_rates: vec![5.0], ..SimScenario::default() }.validate().is_err());
        assert!("spiral".parse::<Profile>().is_err());
        assert_eq!("low_excitation".parse::<Profile>().unwrap(), Profile::LowExcitation);
    }
}
