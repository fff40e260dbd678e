//! Reference-triangle machinery: quadrature, nodal and Raviart-Thomas bases,
//! and the Piola transform.

pub mod lagrange;
pub mod piola;
pub mod poly;
pub mod quadrature;
pub mod rt;

pub use lagrange::{LagrangeBasis, NodeKind};
pub use piola::{lagrange_interpolate, piola_push, rt_interpolate, PiolaMap, PushedField};
pub use quadrature::{edge_quadrature, triangle_quadrature, EdgeQuadratureRule, QuadratureRule};
pub use rt::{Functional, RTBasis};

/// Highest supported order `p + 1`.
pub const MAX_ORDER: usize = 4;

/// Quadrature degree used for assembly and error integrals at order `p + 1`.
pub fn quadrature_degree(p_plus_1: usize) -> usize {
    2 * (p_plus_1 + 1) + 4
}

/// Convenience constructor matching the order labels RT1..RT4.
pub fn rt_basis(p_plus_1: usize) -> crate::Result<RTBasis> {
    RTBasis::new(p_plus_1)
}

pub fn lagrange_basis(p_plus_1: usize) -> crate::Result<LagrangeBasis> {
    LagrangeBasis::new(p_plus_1)
}
