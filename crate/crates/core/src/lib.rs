//! Equivariant filtering for an IMU aided by several GNSS antennas with unknown lever arms.
//!
//! The estimator lives on the symmetry group `(SE₂(3) ⋉ se(3)) ⋉ (ℝ³)ᴺ` acting on the
//! biased inertial navigation state space. A multiplicative EKF over the same state is
//! provided as a baseline, together with a trajectory simulator and evaluation metrics.

pub mod config;
pub mod dynamics;
pub mod eqf;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod io;
pub mod lie;
pub mod mekf;
pub mod report;
pub mod runner;
pub mod sim;
pub mod symmetry;
pub mod types;

pub use config::{FilterConfig, NoiseConfig};
pub use eqf::Eqf;
pub use error::{Error, Result};
pub use estimator::{Estimator, FilterKind};
pub use mekf::Mekf;
pub use symmetry::{GroupElement, GroupTangent, LocalError};
pub use types::{GnssSample, ImuSample, NavState};
