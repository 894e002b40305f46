//! Numerical machinery for the elliptic system
//!
//! ```text
//!   -Δu = v^q + α·g,   -Δv = |∇u|^p + λ·f,   u = v = 0 on the boundary,
//! ```
//!
//! on the unit box, together with the algebra that decides when the
//! fixed-point construction applies and the dual functionals that bound the
//! nonexistence thresholds in (λ, α).
//!
//! The crate is `no_std` + `alloc`; everything here is pure computation on
//! nodal fields. IO, the experiment runner, and file formats live in the
//! companion `gradsys-cli` crate.
//!
//! Module map:
//! - [`grid`]: uniform tensor grids, nodal fields, quadrature, stencils, norms
//! - [`poisson`]: matrix-free conjugate-gradient Dirichlet solver
//! - [`exponents`]: conjugate/Sobolev exponent algebra and admissibility
//! - [`schauder`]: the two-solve fixed-point map and its iteration
//! - [`thresholds`]: dual/capacity functionals and the radial witness
//! - [`bilaplacian`]: Δ²u = |∇u|^p + λf under Navier conditions via splitting
//! - [`radial`]: one-dimensional radial calculus and quadrature in dimension N

#![cfg_attr(not(test), no_std)]
// validation guards are written as `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bilaplacian;
pub mod error;
pub mod exponents;
pub mod grid;
mod math;
pub mod poisson;
pub mod radial;
pub mod schauder;
pub mod thresholds;

pub use error::{Error, Result};
