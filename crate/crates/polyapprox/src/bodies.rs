//! Smooth strictly convex bodies in d = 2, 3.
//!
//! Every body exposes a support function, a boundary parametrization with
//! curvature data, reference intrinsic volumes (closed form where available,
//! adaptive quadrature otherwise) and a polar body. The catalog covers balls,
//! ellipses/ellipsoids (closed-form curvature) and general 2D bodies given by
//! a trigonometric support function; that is enough to separate constant from
//! non-constant curvature, which is what the rigidity diagnostics need.
//!
//! Parametrization conventions (the densities elsewhere are always taken with
//! respect to the surface measure `dS`, never the parameter measure):
//!
//! - d = 2: one angle `t in [0, 2 pi)`. Balls and ellipses use the
//!   trigonometric position parametrization; support curves use the normal
//!   angle.
//! - d = 3: spherical angles `(phi, lambda) in [0, pi] x [0, 2 pi)` with
//!   position `(a sin phi cos lambda, b sin phi sin lambda, c cos phi)`.

use arrayvec::ArrayVec;

use crate::geom::{dot2, dot3, norm2, norm3, unit3, xy};
use crate::quad::{adaptive, sphere_adaptive};
use crate::real::Real;
use crate::{Error, Result};

/// Angular grid used when constructing the support table of a numeric polar.
const POLAR_TABLE: usize = 4096;
/// Angular grid used by the variational gauge evaluation.
const GAUGE_SCAN: usize = 4096;

/// A point of the boundary with first- and second-order data.
#[derive(Clone, Debug)]
pub struct BoundaryPoint<R: Real> {
    /// Parameter; `[t, 0]` in d = 2, `[phi, lambda]` in d = 3.
    pub param: [R; 2],
    /// Position in ambient coordinates (z = 0 in d = 2).
    pub position: [R; 3],
    /// Outer unit normal (z = 0 in d = 2).
    pub outer_normal: [R; 3],
    /// Gauss curvature, the product of the principal curvatures.
    pub kappa: R,
    /// Principal curvatures in nonincreasing order (one entry in d = 2).
    pub principal_curvatures: ArrayVec<R, 2>,
    /// Surface density with respect to the parameter measure.
    pub area_element: R,
}

/// A smooth strictly convex body with the origin in its interior.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody<R: Real> {
    Ball {
        dim: usize,
        radius: R,
    },
    Ellipse {
        a: R,
        b: R,
    },
    Ellipsoid {
        a: R,
        b: R,
        c: R,
    },
    /// 2D body given by a trigonometric support function
    /// `h(t) = cos[0] + sum_k cos[k] cos(kt) + sin[k] sin(kt)`.
    SupportCurve {
        cos: Vec<R>,
        sin: Vec<R>,
    },
    /// Numeric polar of a 2D body: the support function is the gauge of the
    /// inner body, evaluated variationally. The table caches the support
    /// values on a uniform normal-angle grid.
    Polar2 {
        inner: Box<ConvexBody<R>>,
        table: Vec<R>,
    },
}

impl<R: Real> ConvexBody<R> {
    pub fn ball(dim: usize, radius: R) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidInput(format!("ball dimension {dim} not in {{2,3}}")));
        }
        if radius <= R::zero() {
            return Err(Error::InvalidInput("ball radius must be positive".into()));
        }
        Ok(Self::Ball { dim, radius })
    }

    pub fn ellipse(a: R, b: R) -> Result<Self> {
        if a <= R::zero() || b <= R::zero() {
            return Err(Error::InvalidInput("ellipse semi-axes must be positive".into()));
        }
        Ok(Self::Ellipse { a, b })
    }

    pub fn ellipsoid(a: R, b: R, c: R) -> Result<Self> {
        if a <= R::zero() || b <= R::zero() || c <= R::zero() {
            return Err(Error::InvalidInput("ellipsoid semi-axes must be positive".into()));
        }
        Ok(Self::Ellipsoid { a, b, c })
    }

    /// Construct a support curve, validating `h > 0` (origin interior) and
    /// `h + h'' > 0` (strict convexity) on a 4096-point grid.
    pub fn support_curve(cos: Vec<R>, sin: Vec<R>) -> Result<Self> {
        if cos.is_empty() || cos[0] <= R::zero() {
            return Err(Error::InvalidInput(
                "support curve needs a positive constant coefficient c0".into(),
            ));
        }
        let body = Self::SupportCurve { cos, sin };
        let n = 4096;
        let two_pi = R::of(2.0) * R::PI();
        for i in 0..n {
            let t = two_pi * R::of_usize(i) / R::of_usize(n);
            let (h, _, hpp) = body.support_series(t);
            if h <= R::zero() {
                return Err(Error::InvalidInput(format!(
                    "support curve has h(t) <= 0 at t = {t}; origin not interior"
                )));
            }
            if h + hpp <= R::zero() {
                return Err(Error::InvalidInput(format!(
                    "support curve violates h + h'' > 0 at t = {t}; not strictly convex"
                )));
            }
        }
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { dim, .. } => *dim,
            Self::Ellipse { .. } | Self::SupportCurve { .. } | Self::Polar2 { .. } => 2,
            Self::Ellipsoid { .. } => 3,
        }
    }

    /// Canonical spec string (`ball:r=1`, `ellipse:a=2,b=1`, ...).
    pub fn label(&self) -> String {
        match self {
            Self::Ball { dim: 2, radius } => format!("ball:r={radius}"),
            Self::Ball { dim, radius } => format!("ball:r={radius},d={dim}"),
            Self::Ellipse { a, b } => format!("ellipse:a={a},b={b}"),
            Self::Ellipsoid { a, b, c } => format!("ellipsoid:a={a},b={b},c={c}"),
            Self::SupportCurve { cos, sin } => {
                let mut parts = Vec::new();
                for (k, v) in cos.iter().enumerate() {
                    if k == 0 || *v != R::zero() {
                        parts.push(format!("c{k}={v}"));
                    }
                }
                for (k, v) in sin.iter().enumerate() {
                    if *v != R::zero() {
                        parts.push(format!("s{k}={v}"));
                    }
                }
                format!("support2d:{}", parts.join(","))
            }
            Self::Polar2 { inner, .. } => format!("polar({})", inner.label()),
        }
    }

    /// Parse the body grammar: `ball:r=1.0`, `ellipse:a=2,b=1`,
    /// `ellipsoid:a=1,b=1,c=2`, `support2d:c0=1,c2=0.1,s3=0.05`.
    /// Balls take an optional `d=3` (default 2).
    pub fn parse(spec: &str) -> Result<Self> {
        let (family, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("body spec `{spec}` missing `:`")))?;
        let mut kv = Vec::new();
        for part in rest.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("body spec field `{part}` is not key=value"))
            })?;
            let x: f64 = v
                .parse()
                .map_err(|_| Error::InvalidInput(format!("cannot parse number `{v}`")))?;
            kv.push((k.trim().to_string(), x));
        }
        let get = |key: &str| -> Result<R> {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| R::of(*v))
                .ok_or_else(|| Error::InvalidInput(format!("body spec missing `{key}`")))
        };
        match family {
            "ball" => {
                let r = get("r")?;
                let dim = kv
                    .iter()
                    .find(|(k, _)| k == "d")
                    .map(|(_, v)| *v as usize)
                    .unwrap_or(2);
                Self::ball(dim, r)
            }
            "ellipse" => Self::ellipse(get("a")?, get("b")?),
            "ellipsoid" => Self::ellipsoid(get("a")?, get("b")?, get("c")?),
            "support2d" => {
                let mut cos = Vec::new();
                let mut sin = Vec::new();
                for (k, v) in &kv {
                    let (list, idx) = if let Some(i) = k.strip_prefix('c') {
                        (&mut cos, i)
                    } else if let Some(i) = k.strip_prefix('s') {
                        (&mut sin, i)
                    } else {
                        return Err(Error::InvalidInput(format!(
                            "support2d key `{k}` is not c<k> or s<k>"
                        )));
                    };
                    let idx: usize = idx
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad harmonic index in `{k}`")))?;
                    if list.len() <= idx {
                        list.resize(idx + 1, R::zero());
                    }
                    list[idx] = R::of(*v);
                }
                Self::support_curve(cos, sin)
            }
            other => Err(Error::InvalidInput(format!("unknown body family `{other}`"))),
        }
    }

    /// Support function `h(u) = max_{x in K} <x, u>` for a unit direction.
    pub fn support(&self, u: [R; 3]) -> Result<R> {
        let n = norm3(u);
        if (n - R::one()).abs() > R::of(1e-9) {
            return Err(Error::InvalidInput(format!("direction has norm {n}, expected 1")));
        }
        Ok(self.support_unchecked(u))
    }

    fn support_unchecked(&self, u: [R; 3]) -> R {
        match self {
            Self::Ball { radius, .. } => *radius,
            Self::Ellipse { a, b } => ((*a * u[0]).powi(2) + (*b * u[1]).powi(2)).sqrt(),
            Self::Ellipsoid { a, b, c } => {
                ((*a * u[0]).powi(2) + (*b * u[1]).powi(2) + (*c * u[2]).powi(2)).sqrt()
            }
            Self::SupportCurve { .. } => {
                let t = u[1].atan2(u[0]);
                self.support_series(t).0
            }
            // Support of the polar is the gauge of the inner body.
            Self::Polar2 { inner, .. } => inner.gauge([u[0], u[1], R::zero()]),
        }
    }

    /// Support function as a function of the normal angle (d = 2 only).
    fn support_angle(&self, t: R) -> R {
        self.support_unchecked([t.cos(), t.sin(), R::zero()])
    }

    /// Series evaluation `(h, h', h'')` of a support curve.
    fn support_series(&self, t: R) -> (R, R, R) {
        match self {
            Self::SupportCurve { cos, sin } => {
                let mut h = R::zero();
                let mut hp = R::zero();
                let mut hpp = R::zero();
                for (k, ck) in cos.iter().enumerate() {
                    let kf = R::of_usize(k);
                    let (s, c) = (kf * t).sin_cos();
                    h += *ck * c;
                    hp -= *ck * kf * s;
                    hpp -= *ck * kf * kf * c;
                }
                for (k, sk) in sin.iter().enumerate().skip(1) {
                    let kf = R::of_usize(k);
                    let (s, c) = (kf * t).sin_cos();
                    h += *sk * s;
                    hp += *sk * kf * c;
                    hpp -= *sk * kf * kf * s;
                }
                (h, hp, hpp)
            }
            _ => unreachable!("support_series is only called on support curves"),
        }
    }

    /// Minkowski gauge `g(x) = inf { t > 0 : x in t K }`; `g = 1` on the
    /// boundary. Closed form for balls and ellipsoids; variational
    /// (`g(x) = max_t <x, u(t)> / h(u(t))`) for support-parametrized bodies.
    pub fn gauge(&self, x: [R; 3]) -> R {
        match self {
            Self::Ball { radius, .. } => norm3(x) / *radius,
            Self::Ellipse { a, b } => ((x[0] / *a).powi(2) + (x[1] / *b).powi(2)).sqrt(),
            Self::Ellipsoid { a, b, c } => {
                ((x[0] / *a).powi(2) + (x[1] / *b).powi(2) + (x[2] / *c).powi(2)).sqrt()
            }
            Self::SupportCurve { .. } => {
                self.gauge_scan(xy(x), GAUGE_SCAN, |t| self.support_angle(t), false)
            }
            Self::Polar2 { table, .. } => {
                self.gauge_scan(xy(x), table.len(), |t| table_support(table, t), false)
            }
        }
    }

    /// Gauge with golden-section refinement of the maximizer; slower but free
    /// of interpolation bias. Used where derivatives of the result are taken.
    fn gauge_refined(&self, x: [R; 2]) -> R {
        match self {
            Self::SupportCurve { .. } => {
                self.gauge_scan(x, GAUGE_SCAN, |t| self.support_angle(t), true)
            }
            Self::Polar2 { inner, .. } => {
                inner_scan_refined(x, POLAR_TABLE, |t| inner.support_angle(t))
            }
            _ => self.gauge([x[0], x[1], R::zero()]),
        }
    }

    fn gauge_scan<F: Fn(R) -> R>(&self, x: [R; 2], n: usize, support_at: F, refined: bool) -> R {
        let r = norm2(x);
        if r == R::zero() {
            return R::zero();
        }
        let xh = [x[0] / r, x[1] / r];
        if refined {
            return r * max_refined(xh, n, &support_at);
        }
        r * max_parabolic(xh, n, &support_at)
    }

    /// Evaluate the boundary at a parameter. In d = 2 only `param[0]` is
    /// read; angles wrap periodically.
    pub fn boundary(&self, param: [R; 2]) -> BoundaryPoint<R> {
        match self {
            Self::Ball { dim: 2, radius } => {
                let t = param[0];
                let (s, c) = t.sin_cos();
                let r = *radius;
                let mut pcs = ArrayVec::new();
                pcs.push(R::one() / r);
                BoundaryPoint {
                    param: [t, R::zero()],
                    position: [r * c, r * s, R::zero()],
                    outer_normal: [c, s, R::zero()],
                    kappa: R::one() / r,
                    principal_curvatures: pcs,
                    area_element: r,
                }
            }
            Self::Ball { radius, .. } => {
                let r = *radius;
                let (phi, lam) = (param[0], param[1]);
                let (sp, cp) = phi.sin_cos();
                let (sl, cl) = lam.sin_cos();
                let n = [sp * cl, sp * sl, cp];
                let mut pcs = ArrayVec::new();
                pcs.push(R::one() / r);
                pcs.push(R::one() / r);
                BoundaryPoint {
                    param,
                    position: [r * n[0], r * n[1], r * n[2]],
                    outer_normal: n,
                    kappa: R::one() / (r * r),
                    principal_curvatures: pcs,
                    area_element: r * r * sp,
                }
            }
            Self::Ellipse { a, b } => {
                let t = param[0];
                let (s, c) = t.sin_cos();
                let g = ((*a * s).powi(2) + (*b * c).powi(2)).sqrt();
                let kappa = *a * *b / (g * g * g);
                let mut pcs = ArrayVec::new();
                pcs.push(kappa);
                BoundaryPoint {
                    param: [t, R::zero()],
                    position: [*a * c, *b * s, R::zero()],
                    outer_normal: [*b * c / g, *a * s / g, R::zero()],
                    kappa,
                    principal_curvatures: pcs,
                    area_element: g,
                }
            }
            Self::Ellipsoid { a, b, c } => ellipsoid_boundary(*a, *b, *c, param),
            Self::SupportCurve { .. } => {
                let t = param[0];
                let (h, hp, hpp) = self.support_series(t);
                support_boundary(t, h, hp, hpp)
            }
            Self::Polar2 { .. } => {
                // Finite-difference derivatives of the variational support
                // function; second-order accuracy is limited by the scan
                // (documented; nothing quantitative depends on this path).
                let t = param[0];
                let step = R::of(1e-4);
                let eval = |tt: R| self.gauge_refined_dir(tt);
                let h = eval(t);
                let hm = eval(t - step);
                let hp2 = eval(t + step);
                let hp = (hp2 - hm) / (R::of(2.0) * step);
                let hpp = (hp2 - R::of(2.0) * h + hm) / (step * step);
                support_boundary(t, h, hp, hpp)
            }
        }
    }

    fn gauge_refined_dir(&self, t: R) -> R {
        match self {
            Self::Polar2 { inner, .. } => inner.gauge_refined([t.cos(), t.sin()]),
            _ => unreachable!(),
        }
    }

    /// Reference intrinsic volume `V_j`, `1 <= j <= d`.
    ///
    /// `V_d` is the volume, `V_{d-1}` half the boundary measure, and `V_1`
    /// the mean-width multiple `d vol_d(B_d) / (2 vol_{d-1}(B_{d-1})) * w`.
    pub fn intrinsic_volume(&self, j: usize) -> Result<R> {
        let d = self.dim();
        if j == 0 || j > d {
            return Err(Error::InvalidInput(format!("intrinsic volume index {j} not in 1..={d}")));
        }
        Ok(match (d, j) {
            (2, 2) => self.volume(),
            (2, 1) => self.boundary_measure() * R::of(0.5),
            (3, 3) => self.volume(),
            (3, 2) => self.boundary_measure() * R::of(0.5),
            (3, 1) => R::of(2.0) * self.mean_width(),
            _ => unreachable!(),
        })
    }

    /// Volume (area in d = 2).
    pub fn volume(&self) -> R {
        match self {
            Self::Ball { dim: 2, radius } => R::PI() * *radius * *radius,
            Self::Ball { radius, .. } => {
                R::of(4.0 / 3.0) * R::PI() * radius.powi(3)
            }
            Self::Ellipse { a, b } => R::PI() * *a * *b,
            Self::Ellipsoid { a, b, c } => R::of(4.0 / 3.0) * R::PI() * *a * *b * *c,
            Self::SupportCurve { .. } => {
                // (1/2) Int h^2 - h'^2 dt.
                adaptive(
                    &|t| {
                        let (h, hp, _) = self.support_series(t);
                        (h * h - hp * hp) * R::of(0.5)
                    },
                    R::zero(),
                    R::of(2.0) * R::PI(),
                    R::of(1e-12),
                )
            }
            Self::Polar2 { inner, .. } => {
                // Radial formula: vol(K°) = (1/2) Int 1 / h_K(u(t))^2 dt.
                adaptive(
                    &|t| R::of(0.5) / inner.support_angle(t).powi(2),
                    R::zero(),
                    R::of(2.0) * R::PI(),
                    R::of(1e-12),
                )
            }
        }
    }

    /// Perimeter (d = 2) or surface area (d = 3).
    pub fn boundary_measure(&self) -> R {
        match self {
            Self::Ball { dim: 2, radius } => R::of(2.0) * R::PI() * *radius,
            Self::Ball { radius, .. } => R::of(4.0) * R::PI() * *radius * *radius,
            Self::Ellipse { .. } | Self::SupportCurve { .. } => adaptive(
                &|t| self.boundary([t, R::zero()]).area_element,
                R::zero(),
                R::of(2.0) * R::PI(),
                R::of(1e-11),
            ),
            Self::Ellipsoid { .. } => sphere_adaptive(
                &|phi, lam| self.boundary([phi, lam]).area_element,
                R::of(1e-11),
            ),
            Self::Polar2 { inner, .. } => {
                // Radial parametrization x(t) = u(t) / h_K(u(t));
                // |x'| = sqrt(rho^2 + rho'^2) with rho = 1 / h.
                let step = R::of(1e-5);
                adaptive(
                    &|t| {
                        let rho = R::one() / inner.support_angle(t);
                        let rp = (R::one() / inner.support_angle(t + step)
                            - R::one() / inner.support_angle(t - step))
                            / (R::of(2.0) * step);
                        (rho * rho + rp * rp).sqrt()
                    },
                    R::zero(),
                    R::of(2.0) * R::PI(),
                    R::of(1e-9),
                )
            }
        }
    }

    /// Mean width: twice the spherical average of the support function.
    pub fn mean_width(&self) -> R {
        match self.dim() {
            // Cauchy: w = perimeter / pi in the plane.
            2 => self.boundary_measure() / R::PI(),
            _ => match self {
                Self::Ball { radius, .. } => R::of(2.0) * *radius,
                _ => {
                    let norm = R::of(2.0) * R::PI();
                    sphere_adaptive(
                        &|phi: R, lam: R| {
                            let (sp, cp) = phi.sin_cos();
                            let (sl, cl) = lam.sin_cos();
                            self.support_unchecked([sp * cl, sp * sl, cp]) * sp
                        },
                        R::of(1e-11),
                    ) / norm
                }
            },
        }
    }

    /// Polar body. Closed form for balls and ellipsoids; support curves (and
    /// iterated polars) go through the numeric gauge.
    pub fn polar(&self) -> Result<ConvexBody<R>> {
        match self {
            Self::Ball { dim, radius } => Self::ball(*dim, R::one() / *radius),
            Self::Ellipse { a, b } => Self::ellipse(R::one() / *a, R::one() / *b),
            Self::Ellipsoid { a, b, c } => {
                Self::ellipsoid(R::one() / *a, R::one() / *b, R::one() / *c)
            }
            Self::SupportCurve { .. } | Self::Polar2 { .. } => {
                let inner = Box::new(self.clone());
                let two_pi = R::of(2.0) * R::PI();
                let table = (0..POLAR_TABLE)
                    .map(|i| {
                        let t = two_pi * R::of_usize(i) / R::of_usize(POLAR_TABLE);
                        inner.gauge([t.cos(), t.sin(), R::zero()])
                    })
                    .collect();
                Ok(Self::Polar2 { inner, table })
            }
        }
    }

    /// Parameter-domain extent: `([0, 2 pi), unused)` in d = 2 and
    /// `[0, pi] x [0, 2 pi)` in d = 3.
    pub fn param_ranges(&self) -> [[R; 2]; 2] {
        let two_pi = R::of(2.0) * R::PI();
        if self.dim() == 2 {
            [[R::zero(), two_pi], [R::zero(), R::zero()]]
        } else {
            [[R::zero(), R::PI()], [R::zero(), two_pi]]
        }
    }

    /// Midpoint parameter grid with roughly `n` nodes (exactly `n` in d = 2).
    pub fn param_grid(&self, n: usize) -> Vec<[R; 2]> {
        if self.dim() == 2 {
            let two_pi = R::of(2.0) * R::PI();
            (0..n)
                .map(|i| [two_pi * (R::of_usize(i) + R::of(0.5)) / R::of_usize(n), R::zero()])
                .collect()
        } else {
            let np = ((n / 2) as f64).sqrt().round().max(2.0) as usize;
            let nl = n / np;
            let mut grid = Vec::with_capacity(np * nl);
            for i in 0..np {
                let phi = R::PI() * (R::of_usize(i) + R::of(0.5)) / R::of_usize(np);
                for k in 0..nl {
                    let lam =
                        R::of(2.0) * R::PI() * (R::of_usize(k) + R::of(0.5)) / R::of_usize(nl);
                    grid.push([phi, lam]);
                }
            }
            grid
        }
    }

    /// `(min kappa, max kappa)` over a parameter grid.
    pub fn curvature_range(&self, n: usize) -> (R, R) {
        let mut lo = R::infinity();
        let mut hi = R::zero();
        for p in self.param_grid(n) {
            let k = self.boundary(p).kappa;
            lo = lo.min(k);
            hi = hi.max(k);
        }
        (lo, hi)
    }
}

/// Integrate `f` against the surface measure `dS` of the boundary.
pub fn integrate_boundary<R: Real, F: Fn(&BoundaryPoint<R>) -> R>(
    body: &ConvexBody<R>,
    rel_tol: R,
    f: F,
) -> R {
    if body.dim() == 2 {
        adaptive(
            &|t| {
                let bp = body.boundary([t, R::zero()]);
                f(&bp) * bp.area_element
            },
            R::zero(),
            R::of(2.0) * R::PI(),
            rel_tol,
        )
    } else {
        sphere_adaptive(
            &|phi, lam| {
                let bp = body.boundary([phi, lam]);
                f(&bp) * bp.area_element
            },
            rel_tol,
        )
    }
}

/// Boundary data of a support-parametrized planar body at normal angle `t`.
fn support_boundary<R: Real>(t: R, h: R, hp: R, hpp: R) -> BoundaryPoint<R> {
    let (s, c) = t.sin_cos();
    let radius = h + hpp; // curvature radius
    let mut pcs = ArrayVec::new();
    pcs.push(R::one() / radius);
    BoundaryPoint {
        param: [t, R::zero()],
        position: [h * c - hp * s, h * s + hp * c, R::zero()],
        outer_normal: [c, s, R::zero()],
        kappa: R::one() / radius,
        principal_curvatures: pcs,
        area_element: radius,
    }
}

fn ellipsoid_boundary<R: Real>(a: R, b: R, c: R, param: [R; 2]) -> BoundaryPoint<R> {
    let (phi, lam) = (param[0], param[1]);
    let (sp, cp) = phi.sin_cos();
    let (sl, cl) = lam.sin_cos();
    if sp.abs() < R::of(1e-12) {
        // Coordinate pole: take the analytic limit.
        let sign = if cp >= R::zero() { R::one() } else { -R::one() };
        let k1 = c / (a * a);
        let k2 = c / (b * b);
        let mut pcs = ArrayVec::new();
        pcs.push(k1.max(k2));
        pcs.push(k1.min(k2));
        return BoundaryPoint {
            param,
            position: [R::zero(), R::zero(), sign * c],
            outer_normal: [R::zero(), R::zero(), sign],
            kappa: k1 * k2,
            principal_curvatures: pcs,
            area_element: R::zero(),
        };
    }
    let position = [a * sp * cl, b * sp * sl, c * cp];
    // Outward normal direction (x/a^2, y/b^2, z/c^2).
    let nr = [sp * cl / a, sp * sl / b, cp / c];
    let w = norm3(nr);
    let normal = unit3(nr);
    // First fundamental form.
    let xp = [a * cp * cl, b * cp * sl, -c * sp];
    let xl = [-a * sp * sl, b * sp * cl, R::zero()];
    let e = dot3(xp, xp);
    let ff = dot3(xp, xl);
    let g = dot3(xl, xl);
    // Second fundamental form w.r.t. the inner normal: L = 1/W, M = 0,
    // N = sin^2(phi)/W in this parametrization.
    let l = R::one() / w;
    let nn = sp * sp / w;
    let den = e * g - ff * ff;
    let s11 = g * l / den;
    let s12 = -ff * nn / den;
    let s21 = -ff * l / den;
    let s22 = e * nn / den;
    let tr = s11 + s22;
    let det = s11 * s22 - s12 * s21;
    let disc = (tr * tr - R::of(4.0) * det).max(R::zero()).sqrt();
    let k1 = (tr + disc) * R::of(0.5);
    let k2 = (tr - disc) * R::of(0.5);
    let mut pcs = ArrayVec::new();
    pcs.push(k1);
    pcs.push(k2);
    // Closed-form Gauss curvature (consistency with det(S) is a test).
    let kappa = R::one() / ((a * b * c).powi(2) * w.powi(4));
    // |x_phi x x_lambda| = sin(phi) sqrt(b^2 c^2 sin^2 cos^2 lam + ...).
    let cr = [
        b * c * sp * sp * cl,
        a * c * sp * sp * sl,
        a * b * sp * cp,
    ];
    BoundaryPoint {
        param,
        position,
        outer_normal: normal,
        kappa,
        principal_curvatures: pcs,
        area_element: norm3(cr),
    }
}

/// Cubic Lagrange interpolation of a periodic uniform table.
fn table_support<R: Real>(table: &[R], t: R) -> R {
    let n = table.len();
    let two_pi = R::of(2.0) * R::PI();
    let mut x = t / two_pi * R::of_usize(n);
    let nf = R::of_usize(n);
    x = x - (x / nf).floor() * nf;
    let i = x.floor().as_f64() as usize % n;
    let f = x - x.floor();
    let y = |k: i64| table[((i as i64 + k).rem_euclid(n as i64)) as usize];
    let (ym, y0, y1, y2) = (y(-1), y(0), y(1), y(2));
    let one = R::one();
    let two = R::of(2.0);
    let six = R::of(6.0);
    -f * (f - one) * (f - two) / six * ym
        + (f + one) * (f - one) * (f - two) / two * y0
        - (f + one) * f * (f - two) / two * y1
        + (f + one) * f * (f - one) / six * y2
}

/// Max of `q(t) = <u, (cos t, sin t)> / support_at(t)` over a uniform grid,
/// refined by evaluating at the vertex of the parabola through the three
/// samples around the argmax. For smooth support functions the residual error
/// after re-evaluation is far below the grid bias.
fn max_parabolic<R: Real, F: Fn(R) -> R>(u: [R; 2], n: usize, support_at: &F) -> R {
    let two_pi = R::of(2.0) * R::PI();
    let h = two_pi / R::of_usize(n);
    let q = |t: R| dot2(u, [t.cos(), t.sin()]) / support_at(t);
    let mut best = R::neg_infinity();
    let mut arg = 0usize;
    for i in 0..n {
        let v = q(h * R::of_usize(i));
        if v > best {
            best = v;
            arg = i;
        }
    }
    let t0 = h * R::of_usize(arg);
    let qm = q(t0 - h);
    let qp = q(t0 + h);
    let denom = qm - R::of(2.0) * best + qp;
    if denom < R::zero() {
        let delta = h * (qm - qp) / (R::of(2.0) * denom);
        best.max(q(t0 + delta.max(-h).min(h)))
    } else {
        best
    }
}

/// Same maximum, but refined by golden-section search on the exact objective.
fn max_refined<R: Real, F: Fn(R) -> R>(u: [R; 2], n: usize, support_at: &F) -> R {
    let two_pi = R::of(2.0) * R::PI();
    let q = |t: R| dot2(u, [t.cos(), t.sin()]) / support_at(t);
    let mut best = R::neg_infinity();
    let mut arg = R::zero();
    for i in 0..n {
        let t = two_pi * R::of_usize(i) / R::of_usize(n);
        let v = q(t);
        if v > best {
            best = v;
            arg = t;
        }
    }
    let h = two_pi / R::of_usize(n);
    golden_max(&q, arg - h, arg + h).max(best)
}

fn inner_scan_refined<R: Real, F: Fn(R) -> R>(x: [R; 2], n: usize, support_at: F) -> R {
    let r = norm2(x);
    if r == R::zero() {
        return R::zero();
    }
    let xh = [x[0] / r, x[1] / r];
    r * max_refined(xh, n, &support_at)
}

fn golden_max<R: Real, F: Fn(R) -> R>(f: &F, mut a: R, mut b: R) -> R {
    let inv_phi = R::of(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < R::of(1e-13) {
            break;
        }
    }
    fc.max(fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn catalog() -> Vec<ConvexBody<f64>> {
        vec![
            ConvexBody::ball(2, 1.0).unwrap(),
            ConvexBody::ball(3, 1.0).unwrap(),
            ConvexBody::ellipse(2.0, 1.0).unwrap(),
            ConvexBody::ellipsoid(1.0, 1.0, 1.5).unwrap(),
            ConvexBody::support_curve(vec![1.0, 0.0, 0.1], vec![]).unwrap(),
        ]
    }

    #[test]
    fn support_examples() {
        let ball = ConvexBody::ball(2, 1.0).unwrap();
        assert_eq!(ball.support([0.6, 0.8, 0.0]).unwrap(), 1.0);
        let ell = ConvexBody::ellipse(2.0, 1.0).unwrap();
        assert_eq!(ell.support([1.0, 0.0, 0.0]).unwrap(), 2.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // h(u) = sqrt(a^2 u1^2 + b^2 u2^2); cross-checked below by a dense max
        // over boundary samples.
        let h = ell.support([s, s, 0.0]).unwrap();
        assert_relative_eq!(h, (2.5f64).sqrt(), max_relative = 1e-14);
        let dense = (0..200_000)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * (i as f64) / 200_000.0;
                let p = ell.boundary([t, 0.0]).position;
                p[0] * s + p[1] * s
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((h - dense).abs() < 1e-8, "dense max {dense} vs closed {h}");
        assert!(ell.support([1.0, 1.0, 0.0]).is_err(), "non-unit direction");
    }

    #[test]
    fn boundary_examples() {
        let ell = ConvexBody::ellipse(2.0, 1.0).unwrap();
        let bp = ell.boundary([0.0, 0.0]);
        // kappa = a/b^2 at the flat-axis endpoint.
        assert_relative_eq!(bp.kappa, 2.0, max_relative = 1e-14);
        assert_eq!(bp.position[0], 2.0);
        let sphere = ConvexBody::ellipsoid(1.0, 1.0, 1.0).unwrap();
        let bp = sphere.boundary([0.7, 1.3]);
        assert_relative_eq!(bp.kappa, 1.0, max_relative = 1e-12);
        assert_relative_eq!(bp.area_element, 0.7f64.sin(), max_relative = 1e-12);
    }

    #[test]
    fn ellipsoid_principal_curvatures_match_oracle() {
        // Independent finite-difference oracle values at phi = 0.7 for the
        // (1, 1, 1.5) spheroid.
        let e = ConvexBody::ellipsoid(1.0, 1.0, 1.5).unwrap();
        let bp = e.boundary([0.7, 0.3]);
        assert_relative_eq!(bp.principal_curvatures[0], 1.21715301, max_relative = 1e-7);
        assert_relative_eq!(bp.principal_curvatures[1], 0.8014067836, max_relative = 1e-7);
        // Pole limit.
        let pole = e.boundary([0.0, 0.0]);
        assert_relative_eq!(pole.kappa, 2.25, max_relative = 1e-12);
        assert_eq!(pole.position[2], 1.5);
    }

    #[test]
    fn principal_product_equals_kappa() {
        for body in catalog() {
            for p in body.param_grid(64) {
                let bp = body.boundary(p);
                let prod: f64 = bp.principal_curvatures.iter().product();
                assert_relative_eq!(prod, bp.kappa, max_relative = 1e-9);
                assert!(bp.kappa > 0.0);
            }
        }
    }

    #[test]
    fn support_consistency_on_boundary() {
        // h(nu(x)) = <x, nu(x)> everywhere.
        for body in catalog() {
            for p in body.param_grid(128) {
                let bp = body.boundary(p);
                if bp.area_element == 0.0 {
                    continue; // coordinate pole
                }
                let h = body.support(bp.outer_normal).unwrap();
                let d = dot3(bp.position, bp.outer_normal);
                assert!((h - d).abs() <= 1e-10, "{}: {h} vs {d}", body.label());
            }
        }
    }

    #[test]
    fn curvature_matches_finite_differences() {
        // Independent second-fundamental-form oracle at random parameters.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for body in catalog() {
            for _ in 0..256 {
                let p = if body.dim() == 2 {
                    [rng.random::<f64>() * 2.0 * std::f64::consts::PI, 0.0]
                } else {
                    [
                        0.05 + rng.random::<f64>() * (std::f64::consts::PI - 0.1),
                        rng.random::<f64>() * 2.0 * std::f64::consts::PI,
                    ]
                };
                let bp = body.boundary(p);
                let fd = fd_gauss_curvature(&body, p);
                assert_relative_eq!(bp.kappa, fd, max_relative = 1e-6);
            }
        }
    }

    /// Finite-difference Gauss curvature from first/second fundamental forms.
    /// Step ~ eps^(1/4) balances truncation against roundoff in the second
    /// differences.
    fn fd_gauss_curvature(body: &ConvexBody<f64>, p: [f64; 2]) -> f64 {
        let h = 2e-4;
        let pos = |a: f64, b: f64| body.boundary([a, b]).position;
        if body.dim() == 2 {
            let xm = pos(p[0] - h, 0.0);
            let x0 = pos(p[0], 0.0);
            let xp = pos(p[0] + h, 0.0);
            let d1 = [(xp[0] - xm[0]) / (2.0 * h), (xp[1] - xm[1]) / (2.0 * h)];
            let d2 = [
                (xp[0] - 2.0 * x0[0] + xm[0]) / (h * h),
                (xp[1] - 2.0 * x0[1] + xm[1]) / (h * h),
            ];
            let cross = d1[0] * d2[1] - d1[1] * d2[0];
            cross.abs() / norm2(d1).powi(3)
        } else {
            let xpp = pos(p[0] + h, p[1]);
            let xpm = pos(p[0] - h, p[1]);
            let xlp = pos(p[0], p[1] + h);
            let xlm = pos(p[0], p[1] - h);
            let x0 = pos(p[0], p[1]);
            let dp = scale3(sub3(xpp, xpm), 0.5 / h);
            let dl = scale3(sub3(xlp, xlm), 0.5 / h);
            let dpp = scale3(add3(sub3(xpp, x0), sub3(xpm, x0)), 1.0 / (h * h));
            let dll = scale3(add3(sub3(xlp, x0), sub3(xlm, x0)), 1.0 / (h * h));
            let xpl1 = pos(p[0] + h, p[1] + h);
            let xpl2 = pos(p[0] + h, p[1] - h);
            let xpl3 = pos(p[0] - h, p[1] + h);
            let xpl4 = pos(p[0] - h, p[1] - h);
            let dplam = scale3(
                sub3(add3(xpl1, xpl4), add3(xpl2, xpl3)),
                1.0 / (4.0 * h * h),
            );
            let n = unit3(crate::geom::cross3(dp, dl));
            let (e, f, g) = (dot3(dp, dp), dot3(dp, dl), dot3(dl, dl));
            let (l, m, nn) = (dot3(dpp, n), dot3(dplam, n), dot3(dll, n));
            (l * nn - m * m) / (e * g - f * f)
        }
    }

    use crate::geom::{add3, scale3, sub3};

    #[test]
    fn reference_volumes() {
        let b2 = ConvexBody::ball(2, 1.0).unwrap();
        assert_relative_eq!(b2.intrinsic_volume(2).unwrap(), std::f64::consts::PI);
        let ell = ConvexBody::ellipse(2.0, 1.0).unwrap();
        // Adaptive quadrature of the arc length; mpmath oracle.
        assert_relative_eq!(ell.boundary_measure(), 9.688_448_220_547_675, max_relative = 1e-11);
        let sphere = ConvexBody::ellipsoid(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(sphere.mean_width(), 2.0, max_relative = 1e-11);
        let sph = ConvexBody::ellipsoid(1.0, 1.0, 1.5).unwrap();
        // Closed-form prolate spheroid area and mpmath mean width.
        assert_relative_eq!(sph.boundary_measure(), 16.918218163459972, max_relative = 1e-10);
        assert_relative_eq!(sph.mean_width(), 2.360_817_881_928_008, max_relative = 1e-10);
        assert_relative_eq!(sph.volume(), 2.0 * std::f64::consts::PI, max_relative = 1e-12);
        let sc = ConvexBody::support_curve(vec![1.0, 0.0, 0.1], vec![]).unwrap();
        assert_relative_eq!(sc.volume(), 3.09446876378595, max_relative = 1e-11);
        assert_relative_eq!(
            sc.boundary_measure(),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-11
        );
        assert!(b2.intrinsic_volume(3).is_err());
    }

    #[test]
    fn surface_measure_consistency() {
        // Int area_element dparam equals the reference boundary measure.
        for body in catalog() {
            let quad = integrate_boundary(&body, 1e-11, |_| 1.0);
            assert_relative_eq!(quad, body.boundary_measure(), max_relative = 1e-9);
        }
    }

    #[test]
    fn polar_closed_forms() {
        let b = ConvexBody::ball(2, 2.0).unwrap().polar().unwrap();
        assert_eq!(b, ConvexBody::ball(2, 0.5).unwrap());
        let e = ConvexBody::ellipse(2.0, 1.0).unwrap().polar().unwrap();
        assert_eq!(e, ConvexBody::ellipse(0.5, 1.0).unwrap());
        let ee = e.polar().unwrap();
        assert_eq!(ee, ConvexBody::ellipse(2.0, 1.0).unwrap());
    }

    #[test]
    fn polar_support_curve_involution() {
        // Two nested variational gauges must reproduce the original support
        // function: a numerical bipolar theorem.
        let sc = ConvexBody::support_curve(vec![1.0, 0.0, 0.12], vec![0.0, 0.0, 0.0, 0.05])
            .unwrap();
        let p1 = sc.polar().unwrap();
        let p2 = p1.polar().unwrap();
        for i in 0..97 {
            let t = 2.0 * std::f64::consts::PI * (i as f64) / 97.0;
            let u = [t.cos(), t.sin(), 0.0];
            let orig = sc.support(u).unwrap();
            let twice = p2.support(u).unwrap();
            assert!(
                (orig - twice).abs() <= 1e-9 * orig,
                "involution gap {} at t={t}",
                (orig - twice).abs()
            );
        }
        // And the polar support is the reciprocal radial function:
        // h_polar(u) * rho(u) = 1, checked through the gauge.
        for i in 0..31 {
            let t = 2.0 * std::f64::consts::PI * (i as f64) / 31.0;
            let u = [t.cos(), t.sin(), 0.0];
            let hp = p1.support(u).unwrap();
            let g = sc.gauge(u);
            assert_relative_eq!(hp, g, max_relative = 1e-12);
        }
    }

    #[test]
    fn gauge_boundary_membership() {
        for body in catalog() {
            for p in body.param_grid(64) {
                let bp = body.boundary(p);
                let g = body.gauge(bp.position);
                assert!((g - 1.0).abs() < 1e-9, "{} gauge {g}", body.label());
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for spec in [
            "ball:r=1",
            "ball:r=0.5,d=3",
            "ellipse:a=2,b=1",
            "ellipsoid:a=1,b=1,c=1.5",
            "support2d:c0=1,c2=0.1",
        ] {
            let body = ConvexBody::<f64>::parse(spec).unwrap();
            let relabeled = ConvexBody::<f64>::parse(&body.label()).unwrap();
            assert_eq!(body, relabeled, "{spec}");
        }
        assert!(ConvexBody::<f64>::parse("cube:r=1").is_err());
        assert!(ConvexBody::<f64>::parse("ball").is_err());
        // Strong convexity violation: h + h'' changes sign.
        assert!(ConvexBody::<f64>::parse("support2d:c0=1,c2=0.5").is_err());
    }

    #[test]
    fn curvature_range_examples() {
        let (lo, hi) = ConvexBody::ball(2, 1.0).unwrap().curvature_range(512);
        assert_relative_eq!(lo, 1.0);
        assert_relative_eq!(hi, 1.0);
        // Midpoint grid resolution limits how closely the extremes are hit.
        let (lo, hi) = ConvexBody::ellipse(2.0, 1.0).unwrap().curvature_range(4096);
        assert_relative_eq!(lo, 0.25, max_relative = 1e-5);
        assert_relative_eq!(hi, 2.0, max_relative = 1e-5);
    }
}
