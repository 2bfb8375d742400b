//! Reference-element machinery: bases, quadrature and affine maps.

pub mod affine;
pub mod basis;
pub mod quadrature;

pub use affine::{AffineMap, DegenerateTriangle, FACE_VERTICES};
pub use basis::{dim_pk, Domain, EdgeBasis, Tabulation, TriangleBasis};
pub use quadrature::{edge_rule, triangle_rule, OrderTooHigh, QuadRule, MAX_ORDER};
