mod common;

use common::*;
use equinav::lie::{se23, se3, skew, Rot3, SE23Element, SE3Element, Vector9};
use nalgebra::{DMatrix, Matrix3, Vector3, Vector6};
use proptest::prelude::*;

fn rand_vec9(rng: &mut impl rand::Rng, rot_norm: f64, scale: f64) -> Vector9<f64> {
    let mut v = Vector9::zeros();
    v.fixed_rows_mut::<3>(0).copy_from(&rand_ball3(rng, rot_norm));
    v.fixed_rows_mut::<3>(3).copy_from(&rand_vec3(rng, scale));
    v.fixed_rows_mut::<3>(6).copy_from(&rand_vec3(rng, scale));
    v
}

#[test]
fn wedge_examples() {
    assert_eq!(skew(&Vector3::new(1.0, 2.0, 3.0)), Matrix3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0));
    assert_eq!(se23::wedge(&Vector9::zeros()), nalgebra::Matrix5::zeros());
}

#[test]
fn quarter_turn_about_x_matches_truncated_series() {
    let w = Vector3::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
    let oracle = expm_series(&DMatrix::from_column_slice(3, 3, skew(&w).as_slice()), 20);
    let r = Rot3::exp(&w);
    assert!((DMatrix::from_column_slice(3, 3, r.matrix().as_slice()) - oracle).amax() < 1e-12);
}

#[test]
fn exp_log_roundtrip_all_groups() {
    let mut rng = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let w = rand_ball3(&mut rng, 3.0);
        worst = worst.max((Rot3::exp(&w).log().unwrap() - w).amax());

        let mut u = Vector6::zeros();
        u.fixed_rows_mut::<3>(0).copy_from(&w);
        u.fixed_rows_mut::<3>(3).copy_from(&rand_vec3(&mut rng, 3.0));
        worst = worst.max((SE3Element::exp(&u).log().unwrap() - u).amax());

        let v = rand_vec9(&mut rng, 3.0, 3.0);
        worst = worst.max((SE23Element::exp(&v).log().unwrap() - v).amax());
    }
    assert!(worst < 1e-9, "worst roundtrip error {worst:e}");
}

#[test]
fn se23_exp_matches_matrix_series() {
    let mut rng = rng(12);
    for _ in 0..1000 {
        let v = rand_vec9(&mut rng, 2.0, 1.0);
        let lambda = v.normalize() * v.norm().min(2.0);
        let x = SE23Element::exp(&lambda);
        let oracle = expm_series(&DMatrix::from_column_slice(5, 5, se23::wedge(&lambda).as_slice()), 40);
        let m = DMatrix::from_column_slice(5, 5, x.matrix().as_slice());
        assert!((m - oracle).amax() < 1e-9);
        assert!((x.log().unwrap() - lambda).amax() < 1e-9);
    }
}

#[test]
fn adjoint_is_a_homomorphism() {
    let mut rng = rng(13);
    for _ in 0..1000 {
        let (x, y) = (rand_pose(&mut rng), rand_pose(&mut rng));
        assert!(((x * y).adjoint() - x.adjoint() * y.adjoint()).amax() < 1e-10);
        let (a, b) = (x.se3_part(), y.se3_part());
        assert!(((a * b).adjoint() - a.adjoint() * b.adjoint()).amax() < 1e-10);
    }
    assert_eq!(SE23Element::identity().adjoint(), equinav::lie::Matrix9::identity());
    assert_eq!(SE3Element::identity().adjoint(), nalgebra::Matrix6::identity());
}

#[test]
fn adjoint_matches_conjugation() {
    let mut rng = rng(14);
    for _ in 0..100 {
        let x = rand_pose(&mut rng);
        let v = rand_vec9(&mut rng, 2.0, 2.0);
        let conj = se23::vee(&(x.matrix() * se23::wedge(&v) * x.inverse().matrix()));
        assert!((x.adjoint() * v - conj).amax() < 1e-10);

        let b = x.se3_part();
        let u = rand_vec6(&mut rng, 2.0);
        let conj = se3::vee(&(b.matrix() * se3::wedge(&u) * b.inverse().matrix()));
        assert!((b.adjoint() * u - conj).amax() < 1e-10);
    }
}

#[test]
fn little_adjoint_matches_commutator() {
    let mut rng = rng(15);
    assert_eq!(se23::ad(&Vector9::zeros()), equinav::lie::Matrix9::zeros());
    assert_eq!(se3::ad(&Vector6::zeros()), nalgebra::Matrix6::zeros());
    for _ in 0..100 {
        let (u, v) = (rand_vec9(&mut rng, 2.0, 2.0), rand_vec9(&mut rng, 2.0, 2.0));
        let (wu, wv) = (se23::wedge(&u), se23::wedge(&v));
        assert!((se23::ad(&u) * v - se23::vee(&(wu * wv - wv * wu))).amax() < 1e-12);
        assert!((se23::ad(&u) * u).amax() < 1e-12);

        let (p, q) = (rand_vec6(&mut rng, 2.0), rand_vec6(&mut rng, 2.0));
        let (wp, wq) = (se3::wedge(&p), se3::wedge(&q));
        assert!((se3::ad(&p) * q - se3::vee(&(wp * wq - wq * wp))).amax() < 1e-12);
        assert!((se3::ad(&p) * p).amax() < 1e-12);
    }
}

#[test]
fn exp_derivative_at_zero_is_wedge() {
    let mut rng = rng(16);
    let h = 1e-5;
    for _ in 0..50 {
        let lambda = rand_vec9(&mut rng, 1.0, 1.0);
        let fd = (SE23Element::exp(&(lambda * h)).matrix() - SE23Element::exp(&(lambda * -h)).matrix()) / (2.0 * h);
        let exact = se23::wedge(&lambda);
        assert!((fd - exact).norm() / exact.norm() < 1e-6);
    }
}

#[test]
fn little_adjoint_is_differential_of_adjoint() {
    let mut rng = rng(17);
    let t = 1e-6;
    for _ in 0..50 {
        let u = rand_vec9(&mut rng, 1.0, 1.0);
        let fd = (SE23Element::exp(&(u * t)).adjoint() - equinav::lie::Matrix9::identity()) / t;
        let exact = se23::ad(&u);
        assert!((fd - exact).norm() / exact.norm() < 1e-5);
    }
}

proptest! {
    #[test]
    fn se3_vee_inverts_wedge(v in proptest::array::uniform6(-10.0f64..10.0)) {
        let v = Vector6::from_row_slice(&v);
        prop_assert_eq!(se3::vee(&se3::wedge(&v)), v);
    }

    #[test]
    fn so3_log_inverts_exp(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, s in 0.0f64..3.0) {
        let v = Vector3::new(x, y, z);
        prop_assume!(v.norm() > 1e-6);
        let w = v.normalize() * s;
        prop_assert!((Rot3::exp(&w).log().unwrap() - w).amax() < 1e-9);
    }
}
