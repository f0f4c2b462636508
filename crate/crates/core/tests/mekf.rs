mod common;

use common::*;
use equinav::mekf::local_error;
use equinav::{Estimator, FilterConfig, ImuSample, LocalError, Mekf};
use nalgebra::DVector;
use rand::Rng;

const N: usize = 2;

#[test]
fn nominal_step_matches_ode_oracle() {
    let mut rng = rng(41);
    let g = FilterConfig::default().noise.gravity;
    for _ in 0..100 {
        let xi = rand_state(&mut rng, N);
        let (w, a) = (rand_vec3(&mut rng, 1.0), rand_vec3(&mut rng, 10.0));
        let mut m = Mekf::with_initial_state(&xi, FilterConfig::default()).unwrap();
        m.propagate(&ImuSample::new(0.0, w, a), 1e-3).unwrap();
        assert!(state_diff(&m.state_estimate(), &nav_rk4(&xi, &w, &a, &g, 1e-3, 10)) < 1e-12);
    }
}

/// Applies a native MEKF error to a state.
fn perturb(x: &equinav::NavState, dx: &DVector<f64>) -> equinav::NavState {
    let b = |o: usize| nalgebra::Vector3::new(dx[o], dx[o + 1], dx[o + 2]);
    let mut y = x.clone();
    y.rot = x.rot * equinav::lie::Rot3::exp(&b(LocalError::ROT));
    y.vel += b(LocalError::VEL);
    y.pos += b(LocalError::POS);
    y.b_gyro += b(LocalError::GYRO_BIAS);
    y.b_acc += b(LocalError::ACC_BIAS);
    for i in 0..N {
        y.calib[i] += b(LocalError::calib_offset(i));
    }
    y
}

#[test]
fn error_jacobian_matches_flow_linearization() {
    let mut rng = rng(42);
    let g = FilterConfig::default().noise.gravity;
    let dt = 1e-5;
    for _ in 0..100 {
        let est = rand_state(&mut rng, N);
        let (w, a) = (rand_vec3(&mut rng, 1.0), rand_vec3(&mut rng, 10.0));
        let dx0 = DVector::from_fn(21, |_, _| rng.random_range(-1.0..1.0)).normalize() * 1e-3;
        let truth = perturb(&est, &dx0);
        let e0 = local_error(&est, &truth).unwrap().0;
        let e1 = local_error(&nav_rk4(&est, &w, &a, &g, dt, 4), &nav_rk4(&truth, &w, &a, &g, dt, 4)).unwrap().0;
        let m = Mekf::with_initial_state(&est, FilterConfig::default()).unwrap();
        let predicted = m.build_f(&ImuSample::new(0.0, w, a)) * &e0;
        let fd = (e1 - &e0) / dt;
        assert!((&fd - &predicted).norm() <= 0.05 * predicted.norm() + 1e-8, "{fd} vs {predicted}");
    }
}
