//! Exact solutions and their data.

pub mod bessel;
pub mod exact;

pub use bessel::{bessel_j0, bessel_j1};
pub use exact::{bessel_exact, polynomial_exact, polynomial_exact_scaled, ExactSolution, RobinSign};
