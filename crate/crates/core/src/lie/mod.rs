//! Matrix Lie group primitives for SO(3), SE(3) and SE₂(3).
//!
//! Everything is fixed-size and copyable. Algebra coordinates are ordered rotation first:
//! (ω, ρ) for se(3) and (ω, v, p) for se₂(3).

pub mod ins;
pub mod se23;
pub mod se3;
pub mod so3;

use nalgebra::{SMatrix, SVector};

pub use ins::{pi_map, InsMatrices};
pub use se23::SE23Element;
pub use se3::SE3Element;
pub use so3::{skew, unskew, Rot3};

pub type Vector9<T> = SVector<T, 9>;
pub type Matrix9<T> = SMatrix<T, 9, 9>;
