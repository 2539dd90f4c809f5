//! Polytopal approximation laboratory for smooth convex bodies in d = 2, 3.
//!
//! The crate provides:
//!
//! - [`bodies`]: evaluable convex bodies (balls, ellipses/ellipsoids, support
//!   curves) with support functions, boundary parametrizations, curvature
//!   data and reference intrinsic volumes;
//! - [`sampling`]: curvature-weighted probability densities on the boundary
//!   and reproducible i.i.d. sampling from them;
//! - [`polytope`]: robust convex hulls, halfspace intersections via polarity,
//!   and intrinsic volumes of polygons and polyhedra;
//! - [`functionals`]: quadrature evaluation of curvature-weighted quantization
//!   functionals, their lower bounds, closed-form minimizers and density-gap
//!   diagnostics;
//! - [`experiments`]: Monte Carlo harnesses, rate fits, ratio experiments and
//!   dynamic-programming best-polygon construction.
//!
//! All numeric kernels are generic over the scalar type through [`real::Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which is what the experiment
//! harness and the CLI use.

pub mod bodies;
pub mod experiments;
pub mod fixtures;
pub mod functionals;
pub mod geom;
pub mod polytope;
pub mod quad;
pub mod real;
pub mod sampling;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad spec strings, non-unit directions, out-of-range
    /// indices, invalid configuration values.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The requested operation is not available for this body family.
    #[error("unsupported operation: {0}")]
    Capability(String),
    /// Hull input was collinear (d = 2) or coplanar (d = 3).
    #[error("degenerate hull: {0}")]
    DegenerateHull(String),
    /// Halfspace intersection is unbounded: the origin is not interior to the
    /// dual hull. Reported distinctly so the experiment layer can record a
    /// miss instead of aborting.
    #[error("unbounded polytope: origin not interior to the dual hull")]
    UnboundedPolytope,
    /// A geometric precondition failed (containment, orientation, ...).
    #[error("geometry violation: {0}")]
    Geometry(String),
    /// Numerical failure: envelope violation, divergent quadrature,
    /// non-convergent minimization, excessive miss rates.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A discretization is too coarse for the requested computation.
    #[error("grid resolution too low: {0}")]
    Resolution(String),
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

// Concrete f64 aliases for the generic core types.
pub type Body = bodies::ConvexBody<f64>;
pub type Boundary = bodies::BoundaryPoint<f64>;
pub type Density = sampling::DensitySpec<f64>;
pub type Samples = sampling::SampleBatch<f64>;
pub type Polygon = polytope::Polygon<f64>;
pub type Polyhedron = polytope::Polyhedron<f64>;
pub type Polytope = polytope::Polytope<f64>;
