//! Small fixed-dimension vector helpers and exact-sign orientation predicates.
//!
//! Points are plain arrays (`[R; 2]`, `[R; 3]`). The orientation predicates
//! lower coordinates to `f64` (exact for both `f32` and `f64`) and delegate to
//! the adaptive-precision determinants of the `robust` crate, so all sign
//! decisions made by the hull code are exact for the given coordinates.

use robust::{Coord, Coord3D};

use crate::real::Real;

#[inline]
pub fn dot2<R: Real>(a: [R; 2], b: [R; 2]) -> R {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross2<R: Real>(a: [R; 2], b: [R; 2]) -> R {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn sub2<R: Real>(a: [R; 2], b: [R; 2]) -> [R; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn norm2<R: Real>(a: [R; 2]) -> R {
    dot2(a, a).sqrt()
}

#[inline]
pub fn scale2<R: Real>(a: [R; 2], s: R) -> [R; 2] {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn unit2<R: Real>(a: [R; 2]) -> [R; 2] {
    scale2(a, R::one() / norm2(a))
}

#[inline]
pub fn dot3<R: Real>(a: [R; 3], b: [R; 3]) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3<R: Real>(a: [R; 3], b: [R; 3]) -> [R; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn sub3<R: Real>(a: [R; 3], b: [R; 3]) -> [R; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add3<R: Real>(a: [R; 3], b: [R; 3]) -> [R; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn norm3<R: Real>(a: [R; 3]) -> R {
    dot3(a, a).sqrt()
}

#[inline]
pub fn scale3<R: Real>(a: [R; 3], s: R) -> [R; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn unit3<R: Real>(a: [R; 3]) -> [R; 3] {
    scale3(a, R::one() / norm3(a))
}

/// Drop the (zero) z-coordinate of an embedded planar point.
#[inline]
pub fn xy<R: Real>(a: [R; 3]) -> [R; 2] {
    [a[0], a[1]]
}

#[inline]
fn coord<R: Real>(p: [R; 2]) -> Coord<f64> {
    Coord {
        x: p[0].as_f64(),
        y: p[1].as_f64(),
    }
}

#[inline]
fn coord3<R: Real>(p: [R; 3]) -> Coord3D<f64> {
    Coord3D {
        x: p[0].as_f64(),
        y: p[1].as_f64(),
        z: p[2].as_f64(),
    }
}

/// Exact sign of `cross(b - a, c - a)`: > 0 iff `a, b, c` are counterclockwise.
#[inline]
pub fn orient2d<R: Real>(a: [R; 2], b: [R; 2], c: [R; 2]) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

/// Exact sign of `det[b - a, c - a, d - a]`: > 0 iff `d` lies on the side of
/// plane `abc` pointed to by `(b - a) x (c - a)`.
#[inline]
pub fn orient3d<R: Real>(a: [R; 3], b: [R; 3], c: [R; 3], d: [R; 3]) -> f64 {
    // robust::orient3d computes det[a - d, b - d, c - d] = -det[b-a, c-a, d-a].
    -robust::orient3d(coord3(a), coord3(b), coord3(c), coord3(d))
}
