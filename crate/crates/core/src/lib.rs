//! First-order system least-squares (FOSLS) finite elements for the
//! two-dimensional Helmholtz equation with a Robin boundary condition.
//!
//! The unknowns are the scalar field `u` and the flux `φ = i k⁻¹ ∇u`,
//! discretized with continuous `P_{p+1}` and Raviart-Thomas `RT_{p+1}`
//! elements on uniform triangulations of a rectangle. The discrete problem is
//! a Hermitian positive definite sparse system.

pub mod assembly;
pub mod error;
pub mod harness;
pub mod manufactured;
pub mod mesh;
pub mod metrics;
pub mod refelem;
pub mod solve;
pub mod space;
pub mod sparse;

pub use error::{Error, Result};
