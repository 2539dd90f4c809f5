//! Convex hulls, halfspace intersections, and intrinsic volumes of polytopes
//! in d = 2, 3.
//!
//! All orientation decisions go through the exact-sign predicates in
//! [`crate::geom`]; incremental hulls on near-cospherical inputs are exactly
//! the workload where naive floating-point predicates break.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::bodies::ConvexBody;
use crate::geom::{
    add3, cross2, cross3, dot2, dot3, norm2, norm3, orient2d, orient3d, scale3, sub2, sub3, unit3,
    xy,
};
use crate::real::{Accumulator, Real};
use crate::{Error, Result};

/// Convex polygon; vertices in counterclockwise cyclic order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<R: Real> {
    pub vertices: Vec<[R; 2]>,
}

/// An edge of a polyhedron with its two incident facets.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub facets: [usize; 2],
}

/// Convex polyhedron as a watertight, outward-oriented triangulated surface.
#[derive(Clone, Debug)]
pub struct Polyhedron<R: Real> {
    pub vertices: Vec<[R; 3]>,
    /// Outward-oriented triangles (counterclockwise seen from outside).
    pub facets: Vec<[usize; 3]>,
    /// Undirected edge list with the two adjacent facets per edge.
    pub edges: Vec<Edge>,
}

/// A polytope of either dimension.
#[derive(Clone, Debug)]
pub enum Polytope<R: Real> {
    Gon(Polygon<R>),
    Hedron(Polyhedron<R>),
}

/// Which side of the body a polytope approximates from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inscribed,
    Circumscribed,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Inscribed => write!(f, "inscribed"),
            Side::Circumscribed => write!(f, "circumscribed"),
        }
    }
}

/// Intrinsic-volume deviation of a polytope from its reference body.
#[derive(Clone, Copy, Debug)]
pub struct DeviationReport<R: Real> {
    pub j: usize,
    /// `V_j(K) - V_j(P)` inscribed, `V_j(Q) - V_j(K)` circumscribed; for
    /// j = 1 the value is reported in mean-width units.
    pub value: R,
    pub side: Side,
}

/// Intrinsic volumes of a polytope, with the native quantities alongside.
#[derive(Clone, Copy, Debug)]
pub struct IntrinsicVolumes<R: Real> {
    pub dim: usize,
    /// `V_1..V_d` (V_1 in the Steiner normalization).
    pub v: [R; 3],
    pub volume: R,
    /// Perimeter in d = 2, surface area in d = 3.
    pub boundary_measure: R,
    pub mean_width: R,
}

impl<R: Real> IntrinsicVolumes<R> {
    /// `V_j` for `1 <= j <= dim`.
    pub fn v_j(&self, j: usize) -> R {
        self.v[j - 1]
    }
}

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

impl<R: Real> Polygon<R> {
    /// Signed (positive) area by the shoelace formula, compensated.
    pub fn area(&self) -> R {
        let n = self.vertices.len();
        let mut acc = Accumulator::new();
        for i in 0..n {
            acc.add(cross2(self.vertices[i], self.vertices[(i + 1) % n]));
        }
        acc.value() * R::of(0.5)
    }

    pub fn perimeter(&self) -> R {
        let n = self.vertices.len();
        let mut acc = Accumulator::new();
        for i in 0..n {
            acc.add(norm2(sub2(self.vertices[(i + 1) % n], self.vertices[i])));
        }
        acc.value()
    }

    pub fn intrinsic_volumes(&self) -> IntrinsicVolumes<R> {
        let area = self.area();
        let per = self.perimeter();
        IntrinsicVolumes {
            dim: 2,
            v: [per * R::of(0.5), area, R::zero()],
            volume: area,
            boundary_measure: per,
            mean_width: per / R::PI(),
        }
    }

    /// Strict convexity and counterclockwise order, exact-sign checked.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::Geometry(format!("polygon with {n} vertices")));
        }
        for i in 0..n {
            let (a, b, c) = (
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.vertices[(i + 2) % n],
            );
            if orient2d(a, b, c) <= 0.0 {
                return Err(Error::Geometry(format!(
                    "vertex sequence not strictly convex at index {i}"
                )));
            }
        }
        Ok(())
    }

    /// Support function of the polygon (max over vertices).
    pub fn support(&self, u: [R; 2]) -> R {
        self.vertices
            .iter()
            .map(|v| dot2(*v, u))
            .fold(R::neg_infinity(), R::max)
    }

    /// OFF text (z = 0 plane, one face).
    pub fn to_off(&self) -> String {
        let n = self.vertices.len();
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{n} 1 {n}");
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} 0", v[0], v[1]);
        }
        let _ = write!(s, "{n}");
        for i in 0..n {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
        s
    }
}

/// Counterclockwise convex hull by monotone chain with exact orientation
/// tests; collinear points are dropped, so the result is strictly convex.
pub fn hull2d<R: Real>(points: &[[R; 2]]) -> Result<Polygon<R>> {
    if points.len() < 3 {
        return Err(Error::DegenerateHull(format!("{} points", points.len())));
    }
    let mut pts: Vec<[R; 2]> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });
    pts.dedup();
    let build = |iter: &mut dyn Iterator<Item = [R; 2]>| -> Vec<[R; 2]> {
        let mut chain: Vec<[R; 2]> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && orient2d(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain
    };
    let mut lower = build(&mut pts.iter().copied());
    let mut upper = build(&mut pts.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.append(&mut upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateHull("all points collinear".into()));
    }
    Ok(Polygon { vertices: lower })
}

// ---------------------------------------------------------------------------
// 3D
// ---------------------------------------------------------------------------

impl<R: Real> Polyhedron<R> {
    pub fn volume(&self) -> R {
        let mut acc = Accumulator::new();
        for f in &self.facets {
            let (a, b, c) = (
                self.vertices[f[0]],
                self.vertices[f[1]],
                self.vertices[f[2]],
            );
            acc.add(dot3(a, cross3(b, c)));
        }
        acc.value() / R::of(6.0)
    }

    pub fn surface_area(&self) -> R {
        let mut acc = Accumulator::new();
        for f in &self.facets {
            acc.add(norm3(self.facet_cross(f)) * R::of(0.5));
        }
        acc.value()
    }

    fn facet_cross(&self, f: &[usize; 3]) -> [R; 3] {
        let (a, b, c) = (
            self.vertices[f[0]],
            self.vertices[f[1]],
            self.vertices[f[2]],
        );
        cross3(sub3(b, a), sub3(c, a))
    }

    /// Outward unit normal of a facet.
    pub fn facet_normal(&self, idx: usize) -> [R; 3] {
        unit3(self.facet_cross(&self.facets[idx]))
    }

    /// Mean width by the edge formula
    /// `w = (1 / 4 pi) sum_e len(e) * theta_ext(e)`; coplanar edges
    /// (angle below 1e-12) contribute zero.
    pub fn mean_width(&self) -> R {
        let mut acc = Accumulator::new();
        for e in &self.edges {
            let n1 = self.facet_normal(e.facets[0]);
            let n2 = self.facet_normal(e.facets[1]);
            let theta = norm3(cross3(n1, n2)).atan2(dot3(n1, n2)).max(R::zero());
            if theta < R::of(1e-12) {
                continue;
            }
            let len = norm3(sub3(
                self.vertices[e.vertices[1]],
                self.vertices[e.vertices[0]],
            ));
            acc.add(len * theta);
        }
        acc.value() / (R::of(4.0) * R::PI())
    }

    pub fn intrinsic_volumes(&self) -> IntrinsicVolumes<R> {
        let vol = self.volume();
        let area = self.surface_area();
        let mw = self.mean_width();
        IntrinsicVolumes {
            dim: 3,
            // V_1 = 2 w in d = 3.
            v: [R::of(2.0) * mw, area * R::of(0.5), vol],
            volume: vol,
            boundary_measure: area,
            mean_width: mw,
        }
    }

    /// Max over vertices of `<v, u>`.
    pub fn support(&self, u: [R; 3]) -> R {
        self.vertices
            .iter()
            .map(|v| dot3(*v, u))
            .fold(R::neg_infinity(), R::max)
    }

    /// Euler relation, watertightness, outward orientation.
    pub fn validate(&self) -> Result<()> {
        let f0 = self.vertices.len() as i64;
        let f1 = self.edges.len() as i64;
        let f2 = self.facets.len() as i64;
        if f0 - f1 + f2 != 2 {
            return Err(Error::Geometry(format!(
                "Euler relation violated: {f0} - {f1} + {f2} != 2"
            )));
        }
        let centroid = self
            .vertices
            .iter()
            .fold([R::zero(); 3], |acc, v| add3(acc, *v));
        let centroid = scale3(centroid, R::one() / R::of_usize(self.vertices.len()));
        for (i, f) in self.facets.iter().enumerate() {
            let n = self.facet_cross(f);
            let to_facet = sub3(self.vertices[f[0]], centroid);
            if dot3(n, to_facet) <= R::zero() {
                return Err(Error::Geometry(format!("facet {i} not outward oriented")));
            }
        }
        Ok(())
    }

    /// OFF text.
    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let _ = writeln!(
            s,
            "{} {} {}",
            self.vertices.len(),
            self.facets.len(),
            self.edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.facets {
            let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
        }
        s
    }
}

/// Working facet of the incremental hull.
#[derive(Clone, Copy)]
struct HullFacet {
    verts: [usize; 3],
    /// Neighbor facet across edge `(verts[i], verts[i+1])`.
    nbrs: [usize; 3],
    alive: bool,
}

/// Incremental convex hull with exact orientation predicates.
///
/// Every point is tested against every live facet (the visible region is
/// collected by a full scan, not a BFS, so no connectivity assumption is
/// needed); the horizon is then stitched in one cycle. Expected cost is
/// O(n * F) predicate calls, which is fine at the N <= 4096 used here.
pub fn hull3d<R: Real>(points: &[[R; 3]]) -> Result<Polyhedron<R>> {
    if points.len() < 4 {
        return Err(Error::DegenerateHull(format!("{} points", points.len())));
    }
    let mut pts: Vec<[R; 3]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let n = pts.len();
    if n < 4 {
        return Err(Error::DegenerateHull("fewer than 4 distinct points".into()));
    }

    // Initial simplex: a point, the farthest second point, the point
    // maximizing triangle area, the point maximizing |orientation|.
    let p0 = 0usize;
    let p1 = (1..n)
        .max_by(|&i, &j| {
            norm3(sub3(pts[i], pts[p0]))
                .partial_cmp(&norm3(sub3(pts[j], pts[p0])))
                .unwrap()
        })
        .unwrap();
    let p2 = (0..n)
        .filter(|&i| i != p0 && i != p1)
        .max_by(|&i, &j| {
            let ai = norm3(cross3(sub3(pts[p1], pts[p0]), sub3(pts[i], pts[p0])));
            let aj = norm3(cross3(sub3(pts[p1], pts[p0]), sub3(pts[j], pts[p0])));
            ai.partial_cmp(&aj).unwrap()
        })
        .ok_or_else(|| Error::DegenerateHull("no third point".into()))?;
    if norm3(cross3(sub3(pts[p1], pts[p0]), sub3(pts[p2], pts[p0]))) == R::zero() {
        return Err(Error::DegenerateHull("all points collinear".into()));
    }
    let p3 = (0..n)
        .filter(|&i| i != p0 && i != p1 && i != p2)
        .max_by(|&i, &j| {
            orient3d(pts[p0], pts[p1], pts[p2], pts[i])
                .abs()
                .partial_cmp(&orient3d(pts[p0], pts[p1], pts[p2], pts[j]).abs())
                .unwrap()
        })
        .ok_or_else(|| Error::DegenerateHull("no fourth point".into()))?;
    let o = orient3d(pts[p0], pts[p1], pts[p2], pts[p3]);
    if o == 0.0 {
        return Err(Error::DegenerateHull("all points coplanar".into()));
    }
    // Orient the base so p3 is below it.
    let (a, b, c) = if o > 0.0 { (p0, p2, p1) } else { (p0, p1, p2) };

    let mut facets: Vec<HullFacet> = Vec::with_capacity(2 * n);
    // Tetrahedron a, b, c, p3 with outward orientation.
    facets.push(HullFacet {
        verts: [a, b, c],
        nbrs: [0; 3],
        alive: true,
    });
    facets.push(HullFacet {
        verts: [b, a, p3],
        nbrs: [0; 3],
        alive: true,
    });
    facets.push(HullFacet {
        verts: [c, b, p3],
        nbrs: [0; 3],
        alive: true,
    });
    facets.push(HullFacet {
        verts: [a, c, p3],
        nbrs: [0; 3],
        alive: true,
    });
    rebuild_adjacency(&mut facets)?;

    let mut visible: Vec<usize> = Vec::new();
    let mut visible_mask: Vec<bool> = Vec::with_capacity(2 * n);
    for idx in 0..n {
        if idx == p0 || idx == p1 || idx == p2 || idx == p3 {
            continue;
        }
        let p = pts[idx];
        visible.clear();
        visible_mask.clear();
        visible_mask.resize(facets.len(), false);
        for (fi, f) in facets.iter().enumerate() {
            if f.alive && orient3d(pts[f.verts[0]], pts[f.verts[1]], pts[f.verts[2]], p) > 0.0 {
                visible.push(fi);
                visible_mask[fi] = true;
            }
        }
        if visible.is_empty() {
            continue; // inside or on the hull
        }
        attach_point(&mut facets, &visible, &visible_mask, idx)?;
    }

    finish_hull(pts, facets)
}

fn rebuild_adjacency(facets: &mut [HullFacet]) -> Result<()> {
    let mut by_edge: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (fi, f) in facets.iter().enumerate() {
        if !f.alive {
            continue;
        }
        for k in 0..3 {
            let (u, v) = (f.verts[k], f.verts[(k + 1) % 3]);
            by_edge.insert((u, v), (fi, k));
        }
    }
    let entries: Vec<_> = by_edge.iter().map(|(k, v)| (*k, *v)).collect();
    for ((u, v), (fi, k)) in entries {
        let (fj, _) = by_edge
            .get(&(v, u))
            .ok_or_else(|| Error::Geometry("open edge in hull".into()))?;
        facets[fi].nbrs[k] = *fj;
    }
    Ok(())
}

/// Replace the visible region by the cone from point `idx` over the horizon.
fn attach_point(
    facets: &mut Vec<HullFacet>,
    visible: &[usize],
    visible_mask: &[bool],
    idx: usize,
) -> Result<()> {
    // Horizon: directed edges (u, v) of visible facets whose neighbor across
    // the edge survives. Map u -> (v, surviving neighbor, its edge slot).
    let mut horizon: HashMap<usize, (usize, usize, usize)> = HashMap::new();
    for &fi in visible {
        let f = facets[fi];
        for k in 0..3 {
            let nb = f.nbrs[k];
            if !visible_mask[nb] {
                let (u, v) = (f.verts[k], f.verts[(k + 1) % 3]);
                // Slot of the reversed edge (v, u) in the neighbor.
                let g = &facets[nb];
                let slot = (0..3)
                    .find(|&s| g.verts[s] == v && g.verts[(s + 1) % 3] == u)
                    .ok_or_else(|| Error::Geometry("inconsistent adjacency".into()))?;
                if horizon.insert(u, (v, nb, slot)).is_some() {
                    return Err(Error::Geometry("horizon is not a simple cycle".into()));
                }
            }
        }
    }
    if horizon.is_empty() {
        return Err(Error::Geometry("visible region has empty horizon".into()));
    }
    for &fi in visible {
        facets[fi].alive = false;
    }
    // Walk the cycle, creating cone facets and stitching neighbors.
    let start = *horizon.keys().next().unwrap();
    let mut cone: Vec<(usize, usize)> = Vec::new(); // (facet index, surviving neighbor)
    let mut u = start;
    loop {
        let (v, nb, slot) = *horizon
            .get(&u)
            .ok_or_else(|| Error::Geometry("broken horizon cycle".into()))?;
        let fi = facets.len();
        facets.push(HullFacet {
            verts: [u, v, idx],
            nbrs: [0; 3],
            alive: true,
        });
        facets[nb].nbrs[slot] = fi;
        cone.push((fi, nb));
        u = v;
        if u == start {
            break;
        }
        if cone.len() > horizon.len() {
            return Err(Error::Geometry("horizon walk does not close".into()));
        }
    }
    if cone.len() != horizon.len() {
        return Err(Error::Geometry("horizon has multiple cycles".into()));
    }
    let m = cone.len();
    for (i, &(fi, nb)) in cone.iter().enumerate() {
        let next = cone[(i + 1) % m].0;
        let prev = cone[(i + m - 1) % m].0;
        // Edges of [u, v, idx]: (u,v) -> nb, (v,idx) -> next cone, (idx,u) -> prev.
        facets[fi].nbrs = [nb, next, prev];
    }
    Ok(())
}

fn finish_hull<R: Real>(pts: Vec<[R; 3]>, facets: Vec<HullFacet>) -> Result<Polyhedron<R>> {
    let mut vmap: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    for f in facets.iter().filter(|f| f.alive) {
        let mut tri = [0usize; 3];
        for (slot, &vi) in f.verts.iter().enumerate() {
            let id = *vmap.entry(vi).or_insert_with(|| {
                vertices.push(pts[vi]);
                vertices.len() - 1
            });
            tri[slot] = id;
        }
        tris.push(tri);
    }
    let mut edges = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (u, v) = (t[k], t[(k + 1) % 3]);
            let key = (u.min(v), u.max(v));
            match seen.get(&key) {
                None => {
                    seen.insert(key, fi);
                }
                Some(&fj) => edges.push(Edge {
                    vertices: [key.0, key.1],
                    facets: [fj, fi],
                }),
            }
        }
    }
    let hull = Polyhedron {
        vertices,
        facets: tris,
        edges,
    };
    hull.validate()?;
    Ok(hull)
}

// ---------------------------------------------------------------------------
// Polarity and circumscription
// ---------------------------------------------------------------------------

/// Tolerance for declaring the dual hull unbounded (origin on a facet plane).
const ORIGIN_INTERIOR_TOL: f64 = 1e-12;

/// Polar polytope of a polygon containing the origin: each edge with outer
/// normal `n` and offset `c` maps to the vertex `n / c`.
pub fn polar_polygon<R: Real>(p: &Polygon<R>) -> Result<Polygon<R>> {
    let n = p.vertices.len();
    let mut dual = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (p.vertices[i], p.vertices[(i + 1) % n]);
        let e = sub2(b, a);
        let normal = [e[1], -e[0]];
        let c = dot2(normal, a);
        if c <= R::of(ORIGIN_INTERIOR_TOL) * norm2(normal) {
            return Err(Error::UnboundedPolytope);
        }
        dual.push([normal[0] / c, normal[1] / c]);
    }
    hull2d(&dual)
}

/// Polar polytope of a polyhedron containing the origin: facet planes
/// `<x, v> = 1` map to vertices `v`; coincident vertices from coplanar facet
/// triangles are merged.
pub fn polar_polyhedron<R: Real>(p: &Polyhedron<R>) -> Result<Polyhedron<R>> {
    let mut dual: Vec<[R; 3]> = Vec::with_capacity(p.facets.len());
    for f in &p.facets {
        let a = p.vertices[f[0]];
        let normal = cross3(sub3(p.vertices[f[1]], a), sub3(p.vertices[f[2]], a));
        let c = dot3(normal, a);
        if c <= R::of(ORIGIN_INTERIOR_TOL) * norm3(normal) {
            return Err(Error::UnboundedPolytope);
        }
        dual.push(scale3(normal, R::one() / c));
    }
    dedup_close(&mut dual);
    hull3d(&dual)
}

/// Merge points closer than 1e-12 relative to the coordinate scale
/// (coplanar facet triangles of the dual hull produce duplicates up to
/// roundoff).
fn dedup_close<R: Real>(pts: &mut Vec<[R; 3]>) {
    let scale = pts
        .iter()
        .map(|p| norm3(*p))
        .fold(R::zero(), R::max)
        .max(R::of(1e-300));
    let tol = R::of(1e-12) * scale;
    let mut out: Vec<[R; 3]> = Vec::with_capacity(pts.len());
    for &p in pts.iter() {
        if !out.iter().any(|q| norm3(sub3(p, *q)) <= tol) {
            out.push(p);
        }
    }
    *pts = out;
}

/// Intersection of the supporting halfspaces `{x : <x, u_i> <= h_K(u_i)}`,
/// computed through polarity: hull the points `u_i / h(u_i)`, then map facets
/// of the dual hull to vertices of the intersection.
pub fn circumscribe<R: Real>(body: &ConvexBody<R>, normals: &[[R; 3]]) -> Result<Polytope<R>> {
    match body.dim() {
        2 => {
            let mut dual = Vec::with_capacity(normals.len());
            for u in normals {
                let h = body.support(*u)?;
                dual.push([u[0] / h, u[1] / h]);
            }
            let dual_hull = match hull2d(&dual) {
                Err(Error::DegenerateHull(_)) => return Err(Error::UnboundedPolytope),
                other => other?,
            };
            Ok(Polytope::Gon(polar_polygon(&dual_hull)?))
        }
        _ => {
            let mut dual = Vec::with_capacity(normals.len());
            for u in normals {
                let h = body.support(*u)?;
                dual.push(scale3(*u, R::one() / h));
            }
            let dual_hull = match hull3d(&dual) {
                Err(Error::DegenerateHull(_)) => return Err(Error::UnboundedPolytope),
                other => other?,
            };
            Ok(Polytope::Hedron(polar_polyhedron(&dual_hull)?))
        }
    }
}

impl<R: Real> Polytope<R> {
    pub fn dim(&self) -> usize {
        match self {
            Polytope::Gon(_) => 2,
            Polytope::Hedron(_) => 3,
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Polytope::Gon(p) => p.vertices.len(),
            Polytope::Hedron(p) => p.vertices.len(),
        }
    }

    pub fn intrinsic_volumes(&self) -> IntrinsicVolumes<R> {
        match self {
            Polytope::Gon(p) => p.intrinsic_volumes(),
            Polytope::Hedron(p) => p.intrinsic_volumes(),
        }
    }

    pub fn support(&self, u: [R; 3]) -> R {
        match self {
            Polytope::Gon(p) => p.support(xy(u)),
            Polytope::Hedron(p) => p.support(u),
        }
    }

    pub fn to_off(&self) -> String {
        match self {
            Polytope::Gon(p) => p.to_off(),
            Polytope::Hedron(p) => p.to_off(),
        }
    }
}

/// Deviation `Delta_j` between a body and a nested polytope.
///
/// For `j = d` this is the volume difference, for `j = 1` the mean width
/// difference, and for `j = d - 1` (d = 3) the `V_2` difference. Containment
/// is verified: inscribed vertices must lie on the boundary (gauge within
/// 1e-9), circumscribed polytopes must contain 1024 sampled boundary points
/// with 1e-9 slack.
pub fn deviation<R: Real>(
    body: &ConvexBody<R>,
    p: &Polytope<R>,
    j: usize,
    side: Side,
) -> Result<DeviationReport<R>> {
    let d = body.dim();
    if p.dim() != d {
        return Err(Error::InvalidInput(
            "body and polytope dimensions differ".into(),
        ));
    }
    if j == 0 || j > d {
        return Err(Error::InvalidInput(format!("j = {j} not in 1..={d}")));
    }
    check_containment(body, p, side)?;
    let reference = reference_value(body, j)?;
    deviation_with_reference(reference, p, j, side)
}

/// The body-side quantity entering the deviation for index `j`
/// (mean width for j = 1, `V_j` otherwise).
pub fn reference_value<R: Real>(body: &ConvexBody<R>, j: usize) -> Result<R> {
    if j == 1 {
        Ok(body.mean_width())
    } else {
        body.intrinsic_volume(j)
    }
}

/// Deviation from a precomputed reference value; the harness uses this to
/// avoid re-running the reference quadrature per trial.
pub fn deviation_with_reference<R: Real>(
    reference: R,
    p: &Polytope<R>,
    j: usize,
    side: Side,
) -> Result<DeviationReport<R>> {
    let iv = p.intrinsic_volumes();
    let poly_val = if j == 1 { iv.mean_width } else { iv.v_j(j) };
    let value = match side {
        Side::Inscribed => reference - poly_val,
        Side::Circumscribed => poly_val - reference,
    };
    if value < R::of(-1e-9) {
        return Err(Error::Geometry(format!(
            "deviation {value} is negative: containment must be violated"
        )));
    }
    Ok(DeviationReport { j, value, side })
}

/// Containment preconditions for the two nested cases.
pub fn check_containment<R: Real>(
    body: &ConvexBody<R>,
    p: &Polytope<R>,
    side: Side,
) -> Result<()> {
    match side {
        Side::Inscribed => {
            let on_boundary = |x: [R; 3]| (body.gauge(x) - R::one()).abs() <= R::of(1e-9);
            let bad = match p {
                Polytope::Gon(poly) => poly
                    .vertices
                    .iter()
                    .any(|v| !on_boundary([v[0], v[1], R::zero()])),
                Polytope::Hedron(poly) => poly.vertices.iter().any(|v| !on_boundary(*v)),
            };
            if bad {
                return Err(Error::Geometry(
                    "inscribed polytope has a vertex off the boundary".into(),
                ));
            }
        }
        Side::Circumscribed => {
            for param in body.param_grid(1024) {
                let x = body.boundary(param).position;
                let inside = match p {
                    Polytope::Gon(poly) => polygon_contains(poly, xy(x), R::of(1e-9)),
                    Polytope::Hedron(poly) => polyhedron_contains(poly, x, R::of(1e-9)),
                };
                if !inside {
                    return Err(Error::Geometry(
                        "circumscribed polytope does not contain the body".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn polygon_contains<R: Real>(p: &Polygon<R>, x: [R; 2], slack: R) -> bool {
    let n = p.vertices.len();
    (0..n).all(|i| {
        let (a, b) = (p.vertices[i], p.vertices[(i + 1) % n]);
        let e = sub2(b, a);
        cross2(e, sub2(x, a)) >= -slack * norm2(e)
    })
}

fn polyhedron_contains<R: Real>(p: &Polyhedron<R>, x: [R; 3], slack: R) -> bool {
    p.facets.iter().all(|f| {
        let a = p.vertices[f[0]];
        let nrm = cross3(sub3(p.vertices[f[1]], a), sub3(p.vertices[f[2]], a));
        dot3(nrm, sub3(x, a)) <= slack * norm3(nrm)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn regular_ngon(n: usize) -> Polygon<f64> {
        Polygon {
            vertices: (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                    [t.cos(), t.sin()]
                })
                .collect(),
        }
    }

    #[test]
    fn hull2d_basics() {
        let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let hull = hull2d(&square).unwrap();
        assert_eq!(hull.vertices.len(), 4);
        assert_relative_eq!(hull.area(), 1.0);
        hull.validate().unwrap();

        let tri = hull2d(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_relative_eq!(tri.area(), 0.5);

        assert!(matches!(
            hull2d(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]),
            Err(Error::DegenerateHull(_))
        ));
    }

    #[test]
    fn hull2d_circle_points_monotone() {
        // Monte Carlo sanity oracle: area below pi, increasing in N on average.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut draw = |n: usize| -> f64 {
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| {
                    let t = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                    [t.cos(), t.sin()]
                })
                .collect();
            hull2d(&pts).unwrap().area()
        };
        let mut prev = 0.0;
        for n in [16, 64, 256, 1024, 10_000] {
            let a: f64 = (0..8).map(|_| draw(n)).sum::<f64>() / 8.0;
            assert!(a < std::f64::consts::PI);
            assert!(a > prev, "not increasing at {n}");
            prev = a;
        }
    }

    #[test]
    fn regular_polygon_closed_forms() {
        for n in [3usize, 6, 17, 100] {
            let p = regular_ngon(n);
            let nf = n as f64;
            let exact_area = nf / 2.0 * (2.0 * std::f64::consts::PI / nf).sin();
            let exact_per = 2.0 * nf * (std::f64::consts::PI / nf).sin();
            assert_relative_eq!(p.area(), exact_area, max_relative = 1e-14);
            assert_relative_eq!(p.perimeter(), exact_per, max_relative = 1e-14);
        }
        let sq = hull2d(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let iv = sq.intrinsic_volumes();
        assert_relative_eq!(iv.boundary_measure, 4.0);
        assert_relative_eq!(iv.volume, 1.0);
    }

    fn cube_corners() -> Vec<[f64; 3]> {
        let mut v = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    v.push([x, y, z]);
                }
            }
        }
        v
    }

    #[test]
    fn hull3d_tetrahedron() {
        // Regular tetrahedron on alternating cube corners: edge sqrt(2).
        let pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        let h = hull3d(&pts).unwrap();
        assert_eq!(h.facets.len(), 4);
        let edge = 2.0f64.sqrt();
        assert_relative_eq!(
            h.volume(),
            edge.powi(3) / (6.0 * 2.0f64.sqrt()),
            max_relative = 1e-14
        );
        h.validate().unwrap();
    }

    #[test]
    fn hull3d_cube() {
        let h = hull3d(&cube_corners()).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_relative_eq!(h.volume(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(h.surface_area(), 6.0, max_relative = 1e-14);
        h.validate().unwrap();
        // Interior and face-coplanar extra points are discarded.
        let mut pts = cube_corners();
        pts.push([0.5, 0.5, 0.5]);
        pts.push([0.5, 0.5, 1.0]);
        let h2 = hull3d(&pts).unwrap();
        assert_eq!(h2.vertices.len(), 8);
        assert_relative_eq!(h2.volume(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn hull3d_coplanar_rejected() {
        let pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.3, 0.7, 0.0],
        ];
        assert!(matches!(hull3d(&pts), Err(Error::DegenerateHull(_))));
    }

    #[test]
    fn hull3d_sphere_points_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<[f64; 3]> = (0..1000)
            .map(|_| {
                let z: f64 = 1.0 - 2.0 * rng.random::<f64>();
                let t = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                let r = (1.0f64 - z * z).sqrt();
                [r * t.cos(), r * t.sin(), z]
            })
            .collect();
        let h = hull3d(&pts).unwrap();
        // Every point on a sphere is extreme.
        assert_eq!(h.vertices.len(), 1000);
        assert!(h.volume() < 4.0 / 3.0 * std::f64::consts::PI);
        h.validate().unwrap();
        for p in &pts {
            assert!(polyhedron_contains(&h, *p, 1e-9));
        }
    }

    #[test]
    fn cube_mean_width_edge_formula() {
        let h = hull3d(&cube_corners()).unwrap();
        // 12 edges of length 1, each with exterior angle pi/2.
        assert_relative_eq!(h.mean_width(), 1.5, epsilon = 1e-13);
        let iv = h.intrinsic_volumes();
        assert_relative_eq!(iv.v_j(1), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn deviation_regular_polygon() {
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let p = Polytope::Gon(regular_ngon(6));
        let d2 = deviation(&ball, &p, 2, Side::Inscribed).unwrap();
        let exact = std::f64::consts::PI - 3.0 * (3.0f64).sqrt() / 2.0;
        assert_relative_eq!(d2.value, exact, epsilon = 1e-13);
        let d1 = deviation(&ball, &p, 1, Side::Inscribed).unwrap();
        let exact_mw = (2.0 * std::f64::consts::PI - 12.0 * (std::f64::consts::PI / 6.0).sin())
            / std::f64::consts::PI;
        assert_relative_eq!(d1.value, exact_mw, epsilon = 1e-12);
    }

    #[test]
    fn deviation_rejects_outsiders() {
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let mut gon = regular_ngon(5);
        gon.vertices[0] = [1.1, 0.0];
        assert!(deviation(&ball, &Polytope::Gon(gon), 2, Side::Inscribed).is_err());
    }

    #[test]
    fn circumscribe_square_about_disc() {
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        let normals: Vec<[f64; 3]> = (0..4)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_2 * k as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        let q = circumscribe(&ball, &normals).unwrap();
        assert_relative_eq!(q.intrinsic_volumes().volume, 4.0, epsilon = 1e-12);
        let d = deviation(&ball, &q, 2, Side::Circumscribed).unwrap();
        assert_relative_eq!(d.value, 4.0 - std::f64::consts::PI, epsilon = 1e-12);
        // Regular circumscribed N-gon area: N tan(pi/N).
        for n in [3usize, 5, 12, 64] {
            let normals: Vec<[f64; 3]> = (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                    [t.cos(), t.sin(), 0.0]
                })
                .collect();
            let q = circumscribe(&ball, &normals).unwrap();
            let exact = (n as f64) * (std::f64::consts::PI / n as f64).tan();
            assert_relative_eq!(q.intrinsic_volumes().volume, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn circumscribe_cube_about_ball() {
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let normals = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let q = circumscribe(&ball, &normals).unwrap();
        assert_eq!(q.vertex_count(), 8);
        assert_relative_eq!(q.intrinsic_volumes().volume, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn circumscribe_halfspace_unbounded() {
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        // Normals spanning only part of a halfplane.
        let normals: Vec<[f64; 3]> = (0..6)
            .map(|k| {
                let t = 0.1 + 2.5 * (k as f64) / 6.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        assert!(matches!(
            circumscribe(&ball, &normals),
            Err(Error::UnboundedPolytope)
        ));
        let d3 = ConvexBody::ball(3, 1.0).unwrap();
        let up: Vec<[f64; 3]> = (0..8)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64) / 8.0;
                [0.7 * t.cos(), 0.7 * t.sin(), (1.0f64 - 0.49).sqrt()]
            })
            .collect();
        assert!(matches!(
            circumscribe(&d3, &up),
            Err(Error::UnboundedPolytope)
        ));
    }

    #[test]
    fn polar_round_trip_on_ball_normals() {
        // circumscribe(B, {u_i}) = polar(hull({u_i})) since h = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 4 + (rng.random::<f64>() * 20.0) as usize;
            let normals: Vec<[f64; 3]> = (0..n)
                .map(|_| {
                    let t = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                    [t.cos(), t.sin(), 0.0]
                })
                .collect();
            let ball = ConvexBody::ball(2, 1.0).unwrap();
            let direct = circumscribe(&ball, &normals);
            let via_polar = hull2d(&normals.iter().map(|u| [u[0], u[1]]).collect::<Vec<_>>())
                .map_err(|_| Error::UnboundedPolytope)
                .and_then(|h| polar_polygon(&h));
            match (direct, via_polar) {
                (Ok(Polytope::Gon(a)), Ok(b)) => {
                    assert_eq!(a.vertices.len(), b.vertices.len());
                    for v in &a.vertices {
                        assert!(b.vertices.iter().any(|w| norm2(sub2(*v, *w)) < 1e-9));
                    }
                }
                (Err(Error::UnboundedPolytope), Err(Error::UnboundedPolytope)) => {}
                other => panic!("mismatch: {other:?}"),
            }
        }
    }

    #[test]
    fn off_output_shape() {
        let h = hull3d(&cube_corners()).unwrap();
        let off = h.to_off();
        assert!(off.starts_with("OFF\n8 12 18\n"), "{}", &off[..24]);
        let p = regular_ngon(5).to_off();
        assert!(p.starts_with("OFF\n5 1 5\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Hull idempotence: hulling the hull vertices reproduces them.
        #[test]
        fn hull2d_idempotent(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<[f64; 2]> = (0..40)
                .map(|_| [rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0])
                .collect();
            if let Ok(h) = hull2d(&pts) {
                let h2 = hull2d(&h.vertices).unwrap();
                prop_assert_eq!(h.vertices.len(), h2.vertices.len());
                for v in &h.vertices {
                    prop_assert!(h2.vertices.iter().any(|w| norm2(sub2(*v, *w)) < 1e-12));
                }
            }
        }

        /// Inclusion monotonicity of intrinsic volumes under adding points.
        #[test]
        fn hull_inclusion_monotone(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<[f64; 2]> = (0..30)
                .map(|_| [rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0])
                .collect();
            let sub = &pts[..20];
            if let (Ok(hs), Ok(ht)) = (hull2d(sub), hull2d(&pts)) {
                let a = hs.intrinsic_volumes();
                let b = ht.intrinsic_volumes();
                prop_assert!(a.volume <= b.volume + 1e-9);
                prop_assert!(a.boundary_measure <= b.boundary_measure + 1e-9);
                prop_assert!(a.mean_width <= b.mean_width + 1e-9);
            }
        }

        /// 3D hull idempotence and Euler validity on random sphere points.
        #[test]
        fn hull3d_idempotent(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<[f64; 3]> = (0..30)
                .map(|_| {
                    let z: f64 = 1.0 - 2.0 * rng.random::<f64>();
                    let t = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                    let r = (1.0f64 - z * z).sqrt();
                    [r * t.cos(), r * t.sin(), z]
                })
                .collect();
            let h = hull3d(&pts).unwrap();
            let h2 = hull3d(&h.vertices).unwrap();
            prop_assert_eq!(h.vertices.len(), h2.vertices.len());
            prop_assert!((h.volume() - h2.volume()).abs() < 1e-12);
        }
    }
}
