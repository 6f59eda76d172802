//! Polygonal finite element spaces whose basis functions are evaluated through
//! second-kind boundary integral equations.
//!
//! Every local function is a polynomial particular solution plus a harmonic
//! correction. The harmonic part is a double-layer potential whose density is
//! computed by a Nyström method on a corner-graded boundary rule.

pub mod error;
pub mod geometry;
pub mod interpolation;
pub mod layer_potential;
pub mod linalg;
pub mod mesh;
pub mod poisson_space;
pub mod poly;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{Element, EdgeKind, Point2};
