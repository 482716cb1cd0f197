//! Quadrature-surface laboratory for a segment source in the plane.
//!
//! The source is the uniform density `a δ_C` on the segment
//! `C = [-1, 1] × {0}`. Given a constant `k > 0`, a quadrature surface is a
//! bounded domain `Ω ⊃ C` whose Dirichlet potential `u` (with `-Δu = a δ_C`,
//! `u = 0` on `∂Ω`) also satisfies `|∇u| = k` on `∂Ω`. This crate provides:
//!
//! * [`geometry`] — y-convex graph domains, the normal geometric property
//!   (GNP) and its cone form, Steiner symmetrization, arc classification;
//! * [`potential`] — the explicit segment potential and a method-of-
//!   fundamental-solutions Dirichlet solver;
//! * [`shape_opt`] — the shape functional, its Hadamard boundary gradient,
//!   GNP projection, and projected gradient descent;
//! * [`analysis`] — verification of the perimeter identity, axis symmetry,
//!   arc optimality, and the existence-threshold sweep.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod potential;
pub mod presets;
pub mod quad;
pub mod shape_opt;

pub use error::{Error, Result};
pub use geometry::{GraphDomain, Vec2};
pub use potential::{HarmonicSolution, LineSource, SolveOptions};
pub use shape_opt::{BoundaryField, MinimizeOptions, MinimizeResult, MinimizeStatus};
