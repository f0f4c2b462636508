mod common;

use equinav::lie::skew;
use equinav::sim::{gen_trajectory, simulate, synth_imu, Profile, SimScenario};

const PROFILES: [Profile; 4] = [Profile::Hover, Profile::Circle, Profile::Figure8, Profile::LowExcitation];

#[test]
fn analytic_kinematics_are_consistent() {
    let h = 1e-4;
    for p in PROFILES {
        for k in 0..600 {
            let t = 0.1 * k as f64 + 0.05;
            let (a, b, c) = (p.kinematics(t - h), p.kinematics(t), p.kinematics(t + h));
            assert!(((c.pos - a.pos) / (2.0 * h) - b.vel).amax() < 1e-6, "{p:?} ṗ at {t}");
            assert!(((c.vel - a.vel) / (2.0 * h) - b.acc).amax() < 1e-6, "{p:?} v̇ at {t}");
            let rdot = (c.rot.matrix() - a.rot.matrix()) / (2.0 * h);
            assert!((rdot - b.rot.matrix() * skew(&b.omega_body)).amax() < 1e-6, "{p:?} Ṙ at {t}");
        }
    }
}

#[test]
fn held_input_truth_tracks_the_analytic_curve() {
    for p in PROFILES {
        let sc = SimScenario { profile: p, ..SimScenario::default() }.noiseless();
        let truth = gen_trajectory(&sc).unwrap();
        assert_eq!(truth.len(), 12_000);
        let worst = truth
            .iter()
            .map(|s| {
                let k = p.kinematics(s.t);
                (s.state.pos - k.pos).amax().max(s.state.rot.angle_to(&k.rot))
            })
            .fold(0.0, f64::max);
        // the held inputs differ from the curve by O(dt²) per step, accumulated over a minute
        assert!(worst < 1e-2, "{p:?}: truth drifts {worst:e} from the curve");
        let g = sc.noise.gravity;
        for s in truth.iter().step_by(97) {
            let k = p.kinematics(s.t + 0.0025);
            assert!((k.rot * s.acc_body + g - k.acc).amax() < 1e-12);
        }
    }
}

#[test]
fn imu_noise_has_the_configured_variance() {
    let sc = SimScenario { duration: 50.0, ..SimScenario::default() };
    let truth = gen_trajectory(&sc).unwrap();
    let imu = synth_imu(&truth, &sc.noise, sc.imu_rate, 11);
    assert_eq!(imu.len(), 10_000);
    let var = |f: &dyn Fn(usize) -> f64| {
        let xs: Vec<f64> = (0..imu.len()).map(f).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    for axis in 0..3 {
        let vg = var(&|k| imu[k].gyro[axis] - truth[k].omega_body[axis] - truth[k].state.b_gyro[axis]);
        let va = var(&|k| imu[k].acc[axis] - truth[k].acc_body[axis] - truth[k].state.b_acc[axis]);
        let eg = sc.noise.sigma_gyro.powi(2) * sc.imu_rate;
        let ea = sc.noise.sigma_acc.powi(2) * sc.imu_rate;
        assert!((vg / eg - 1.0).abs() < 0.1, "gyro variance ratio {}", vg / eg);
        assert!((va / ea - 1.0).abs() < 0.1, "acc variance ratio {}", va / ea);
    }
}

#[test]
fn streams_are_ordered_and_rate_consistent() {
    let data = simulate(&SimScenario { seed: 7, ..SimScenario::default() }).unwrap();
    assert_eq!(data.imu.len(), 12_000);
    assert!(data.imu.windows(2).all(|w| w[1].t > w[0].t));
    for g in &data.gnss {
        assert_eq!(g.len(), 300);
        assert!(g.windows(2).all(|w| (w[1].t - w[0].t - 0.2).abs() < 1e-9));
    }
}

#[test]
fn biases_random_walk_from_their_initial_values() {
    let sc = SimScenario::default();
    let truth = gen_trajectory(&sc).unwrap();
    assert_eq!(truth[0].state.b_gyro, sc.b_gyro);
    assert_eq!(truth[0].state.b_acc, sc.b_acc);
    let last = &truth.last().unwrap().state;
    assert_ne!(last.b_acc, sc.b_acc);
    // 60 s of walk at 1e-3 m/s³/√Hz stays well below 0.05 m/s²
    assert!((last.b_acc - sc.b_acc).amax() < 0.05);
}
