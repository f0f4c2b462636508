//! Independent numerical oracles and random fixtures shared by the integration tests.
//!
//! The integration oracles never call the closed-form exponentials or Jacobians they are
//! compared with; they only use matrix products, the Adjoint matrices and the vector field.
#![allow(dead_code)]

use equinav::dynamics::vector_field;
use equinav::lie::{Rot3, SE23Element};
use equinav::symmetry::{act, coords, coords_inv, equivariant_error};
use equinav::{Eqf, FilterConfig, LocalError};
use equinav::{GroupElement, GroupTangent, NavState};
use nalgebra::{DMatrix, DVector, Matrix3, Matrix5, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec3(rng: &mut impl Rng, scale: f64) -> Vector3<f64> {
    Vector3::from_fn(|_, _| rng.random_range(-scale..scale))
}

pub fn rand_vec6(rng: &mut impl Rng, scale: f64) -> Vector6<f64> {
    Vector6::from_fn(|_, _| rng.random_range(-scale..scale))
}

/// Uniform direction with norm uniform in [0, max_norm].
pub fn rand_ball3(rng: &mut impl Rng, max_norm: f64) -> Vector3<f64> {
    loop {
        let v = rand_vec3(rng, 1.0);
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n * rng.random_range(0.0..max_norm);
        }
    }
}

pub fn rand_rot(rng: &mut impl Rng) -> Rot3 {
    Rot3::exp(&rand_ball3(rng, 3.0))
}

pub fn rand_pose(rng: &mut impl Rng) -> SE23Element {
    SE23Element::new(rand_rot(rng), rand_vec3(rng, 5.0), rand_vec3(rng, 10.0))
}

pub fn rand_element(rng: &mut impl Rng, n: usize) -> GroupElement {
    GroupElement { pose: rand_pose(rng), bias: rand_vec6(rng, 1.0), calib: (0..n).map(|_| rand_vec3(rng, 1.0)).collect() }
}

pub fn rand_state(rng: &mut impl Rng, n: usize) -> NavState {
    NavState {
        rot: rand_rot(rng),
        vel: rand_vec3(rng, 5.0),
        pos: rand_vec3(rng, 10.0),
        b_gyro: rand_vec3(rng, 0.1),
        b_acc: rand_vec3(rng, 0.5),
        calib: (0..n).map(|_| rand_vec3(rng, 1.0)).collect(),
    }
}

/// Random tangent with total Euclidean norm at most `max_norm`.
pub fn rand_tangent(rng: &mut impl Rng, n: usize, max_norm: f64) -> GroupTangent {
    let dim = 15 + 3 * n;
    let v = nalgebra::DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
    let v = v.normalize() * rng.random_range(0.0..max_norm);
    GroupTangent::from_vector(&v).unwrap()
}

/// Truncated power series of the matrix exponential.
pub fn expm_series(m: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut acc = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..terms {
        term = &term * m / k as f64;
        acc += &term;
    }
    acc
}

/// Integrates the left-invariant flow `Ẋ = X·λ` from the identity over unit time with
/// classical RK4 applied componentwise:
/// `Ċ = C λ_C∧`, `ċ = Ad_B λ_c`, `ḋᵢ = A λ_dᵢ`.
pub fn group_flow_rk4(lambda: &GroupTangent, steps: usize) -> GroupElement {
    let n = lambda.sensor_count();
    let xi = equinav::lie::se23::wedge(&lambda.pose);
    let h = 1.0 / steps as f64;

    struct S {
        c: Matrix5<f64>,
        bias: Vector6<f64>,
        calib: Vec<Vector3<f64>>,
    }
    let deriv = |s: &S| -> S {
        let b = SE23Element::from_matrix_unchecked(&s.c).se3_part();
        let a = s.c.fixed_view::<3, 3>(0, 0).into_owned();
        S { c: s.c * xi, bias: b.adjoint() * lambda.bias, calib: lambda.calib.iter().map(|d| a * d).collect() }
    };
    let axpy = |s: &S, k: &S, w: f64| S {
        c: s.c + k.c * w,
        bias: s.bias + k.bias * w,
        calib: s.calib.iter().zip(&k.calib).map(|(x, y)| x + y * w).collect(),
    };
    let mut s = S { c: Matrix5::identity(), bias: Vector6::zeros(), calib: vec![Vector3::zeros(); n] };
    for _ in 0..steps {
        let k1 = deriv(&s);
        let k2 = deriv(&axpy(&s, &k1, 0.5 * h));
        let k3 = deriv(&axpy(&s, &k2, 0.5 * h));
        let k4 = deriv(&axpy(&s, &k3, h));
        s = S {
            c: s.c + (k1.c + k2.c * 2.0 + k3.c * 2.0 + k4.c) * (h / 6.0),
            bias: s.bias + (k1.bias + k2.bias * 2.0 + k3.bias * 2.0 + k4.bias) * (h / 6.0),
            calib: (0..n)
                .map(|i| s.calib[i] + (k1.calib[i] + k2.calib[i] * 2.0 + k3.calib[i] * 2.0 + k4.calib[i]) * (h / 6.0))
                .collect(),
        };
    }
    GroupElement { pose: SE23Element::from_matrix_unchecked(&s.c), bias: s.bias, calib: s.calib }
}

fn nav_axpy(x: &NavState, rot: &Matrix3<f64>, d: &equinav::dynamics::NavDerivative, w: f64) -> NavState {
    NavState {
        rot: Rot3::from_matrix_unchecked(rot + d.rot * w),
        vel: x.vel + d.vel * w,
        pos: x.pos + d.pos * w,
        b_gyro: x.b_gyro + d.b_gyro * w,
        b_acc: x.b_acc + d.b_acc * w,
        calib: x.calib.iter().zip(&d.calib).map(|(t, dt)| t + dt * w).collect(),
    }
}

/// Classical RK4 on the ambient (matrix) representation of the state with a held input.
pub fn nav_rk4(x: &NavState, gyro: &Vector3<f64>, acc: &Vector3<f64>, g: &Vector3<f64>, dt: f64, steps: usize) -> NavState {
    let h = dt / steps as f64;
    let mut s = x.clone();
    for _ in 0..steps {
        let r = *s.rot.matrix();
        let k1 = vector_field(&s, gyro, acc, g);
        let k2 = vector_field(&nav_axpy(&s, &r, &k1, 0.5 * h), gyro, acc, g);
        let k3 = vector_field(&nav_axpy(&s, &r, &k2, 0.5 * h), gyro, acc, g);
        let k4 = vector_field(&nav_axpy(&s, &r, &k3, h), gyro, acc, g);
        let rot = r + (k1.rot + k2.rot * 2.0 + k3.rot * 2.0 + k4.rot) * (h / 6.0);
        s = NavState {
            rot: Rot3::from_matrix_unchecked(rot),
            vel: s.vel + (k1.vel + k2.vel * 2.0 + k3.vel * 2.0 + k4.vel) * (h / 6.0),
            pos: s.pos + (k1.pos + k2.pos * 2.0 + k3.pos * 2.0 + k4.pos) * (h / 6.0),
            b_gyro: s.b_gyro,
            b_acc: s.b_acc,
            calib: s.calib.clone(),
        };
    }
    s
}

/// Largest absolute componentwise difference between two states.
pub fn state_diff(a: &NavState, b: &NavState) -> f64 {
    let mut d = (a.rot.matrix() - b.rot.matrix()).amax();
    d = d.max((a.vel - b.vel).amax()).max((a.pos - b.pos).amax());
    d = d.max((a.b_gyro - b.b_gyro).amax()).max((a.b_acc - b.b_acc).amax());
    for (x, y) in a.calib.iter().zip(&b.calib) {
        d = d.max((x - y).amax());
    }
    d
}

/// Outcome of one linearization check: the finite-difference error derivative, the
/// linear prediction A ε and their discrepancy.
pub struct LinearizationCase {
    pub fd: DVector<f64>,
    pub predicted: DVector<f64>,
}

impl LinearizationCase {
    pub fn error(&self) -> f64 {
        (&self.fd - &self.predicted).norm()
    }

    pub fn within(&self, rel: f64, abs: f64) -> bool {
        self.error() <= rel * self.predicted.norm() + abs
    }
}

/// Perturbs a random estimate by a local error of norm `eps_norm`, flows truth and observer
/// with RK4 for `dt`, and differentiates the equivariant error.
pub fn linearization_case(rng: &mut impl Rng, n: usize, eps_norm: f64, dt: f64) -> LinearizationCase {
    let g = Vector3::new(0.0, 0.0, 9.81);
    let xhat = rand_element(rng, n);
    let (w, a) = (rand_vec3(rng, 1.0), rand_vec3(rng, 10.0));
    let dim = 15 + 3 * n;
    let eps0 = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)).normalize() * eps_norm;
    let truth = act(&xhat, &coords_inv(&LocalError(eps0.clone())).unwrap()).unwrap();
    let estimate = act(&xhat, &NavState::origin(n)).unwrap();

    let truth1 = nav_rk4(&truth, &w, &a, &g, dt, 4);
    let xhat1 = GroupElement::from_origin(&nav_rk4(&estimate, &w, &a, &g, dt, 4));
    let eps_start = coords(&equivariant_error(&xhat, &truth).unwrap()).unwrap().0;
    let eps1 = coords(&equivariant_error(&xhat1, &truth1).unwrap()).unwrap().0;

    let mut f = Eqf::new(n, FilterConfig::default()).unwrap();
    f.set_group_estimate(xhat).unwrap();
    let big_a = f.build_a(&equinav::ImuSample::new(0.0, w, a));
    LinearizationCase { fd: (eps1 - &eps_start) / dt, predicted: big_a * eps_start }
}

/// Prints and records one acceptance line.
pub struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self { lines: Vec::new() }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((name.to_string(), pass, detail));
    }

    pub fn assert_all(&self) {
        let failed: Vec<_> = self.lines.iter().filter(|l| !l.1).map(|l| l.0.clone()).collect();
        assert!(failed.is_empty(), "failed checks: {failed:?}");
    }
}
