mod common;

use common::*;
use equinav::dynamics::vector_field;
use equinav::symmetry::{act, coords, coords_inv, lift, lift_pose_matrix, output_h, output_rho};
use equinav::{GroupElement, GroupTangent, LocalError, NavState};
use nalgebra::{DVector, Vector3};

const N: usize = 2;

fn gravity() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, 9.81)
}

#[test]
fn group_axioms() {
    let mut rng = rng(21);
    let id = GroupElement::identity(N).unwrap();
    for _ in 0..100 {
        let (x1, x2, x3) = (rand_element(&mut rng, N), rand_element(&mut rng, N), rand_element(&mut rng, N));
        assert!(x1.compose(&x1.inverse()).unwrap().distance_max(&id) < 1e-10);
        assert!(x1.inverse().compose(&x1).unwrap().distance_max(&id) < 1e-10);
        assert!(id.compose(&x1).unwrap().distance_max(&x1) < 1e-15);
        assert!(x1.inverse().inverse().distance_max(&x1) < 1e-12);
        let left = x1.compose(&x2).unwrap().compose(&x3).unwrap();
        let right = x1.compose(&x2.compose(&x3).unwrap()).unwrap();
        assert!(left.distance_max(&right) < 1e-10);
    }
}

#[test]
fn action_is_a_right_action() {
    let mut rng = rng(22);
    for _ in 0..100 {
        let xi = rand_state(&mut rng, N);
        assert_eq!(act(&GroupElement::identity(N).unwrap(), &xi).unwrap(), xi);
        let (x1, x2) = (rand_element(&mut rng, N), rand_element(&mut rng, N));
        let lhs = act(&x1.compose(&x2).unwrap(), &xi).unwrap();
        let rhs = act(&x2, &act(&x1, &xi).unwrap()).unwrap();
        assert!(state_diff(&lhs, &rhs) < 1e-10);
    }
}

#[test]
fn action_is_transitive_from_origin() {
    let mut rng = rng(23);
    let origin = NavState::origin(N);
    for _ in 0..100 {
        let xi = rand_state(&mut rng, N);
        let x = GroupElement::from_origin(&xi);
        assert!(state_diff(&act(&x, &origin).unwrap(), &xi) < 1e-10);
    }
}

#[test]
fn output_is_equivariant() {
    let mut rng = rng(24);
    let zero = Vector3::zeros();
    for _ in 0..100 {
        let (x, xi) = (rand_element(&mut rng, N), rand_state(&mut rng, N));
        for i in 0..N {
            let lhs = output_rho(i, &x, &output_h(i, &xi, &zero).unwrap()).unwrap();
            let rhs = output_h(i, &act(&x, &xi).unwrap(), &zero).unwrap();
            assert!((lhs - rhs).amax() < 1e-10);
            // ρᵢ(X⁻¹, 0) expands to b − dᵢ
            let pred = output_rho(i, &x.inverse(), &zero).unwrap();
            assert!((pred - (x.pose.p_col - x.calib[i])).amax() < 1e-10);
        }
    }
}

#[test]
fn exponential_roundtrip() {
    let mut rng = rng(25);
    assert_eq!(GroupElement::exp(&GroupTangent::zeros(N)), GroupElement::identity(N).unwrap());
    for _ in 0..1000 {
        let l = rand_tangent(&mut rng, N, 1.5);
        let back = GroupElement::exp(&l).log().unwrap();
        assert!((back.to_vector() - l.to_vector()).amax() < 1e-9);
    }
}

#[test]
fn exponential_matches_flow_oracle() {
    let mut rng = rng(26);
    for _ in 0..50 {
        let l = rand_tangent(&mut rng, N, 1.5);
        let oracle = group_flow_rk4(&l, 10_000);
        let d = GroupElement::exp(&l).distance_max(&oracle);
        assert!(d < 1e-7, "exp_G vs flow: {d:e}");
    }
}

#[test]
fn normal_coordinates_roundtrip() {
    let mut rng = rng(27);
    assert_eq!(coords(&NavState::origin(N)).unwrap().0, DVector::zeros(21));
    for _ in 0..1000 {
        let eps = LocalError(rand_tangent(&mut rng, N, 1.0).to_vector());
        let back = coords(&coords_inv(&eps).unwrap()).unwrap();
        assert!((back.0 - eps.0).amax() < 1e-9);
    }
}

/// Relative error of a finite-difference block against the vector field, with a floor of 1
/// on the denominator for blocks whose exact derivative vanishes.
fn rel(fd: f64, exact: f64) -> f64 {
    fd / exact.max(1.0)
}

#[test]
fn lift_reproduces_system_vector_field() {
    let mut rng = rng(28);
    let t = 1e-6;
    for _ in 0..200 {
        let xi = rand_state(&mut rng, N);
        let (w, a) = (rand_vec3(&mut rng, 1.0), rand_vec3(&mut rng, 10.0));
        let lam = lift(&xi, &w, &a, &gravity()).unwrap();
        let moved = act(&GroupElement::exp(&lam.scale(t)), &xi).unwrap();
        let f = vector_field(&xi, &w, &a, &gravity());
        let fd_rot = (moved.rot.matrix() - xi.rot.matrix()) / t;
        assert!(rel((fd_rot - f.rot).norm(), f.rot.norm()) < 1e-4);
        assert!(rel(((moved.vel - xi.vel) / t - f.vel).norm(), f.vel.norm()) < 1e-4);
        assert!(rel(((moved.pos - xi.pos) / t - f.pos).norm(), f.pos.norm()) < 1e-4);
        assert!(rel(((moved.bias() - xi.bias()) / t).norm(), 0.0) < 1e-4);
        for i in 0..N {
            assert!(rel(((moved.calib[i] - xi.calib[i]) / t).norm(), 0.0) < 1e-4);
        }
        let m = lift_pose_matrix(&xi, &w, &a, &gravity());
        assert!(m.fixed_view::<2, 5>(3, 0).amax() < 1e-12);
    }
}
