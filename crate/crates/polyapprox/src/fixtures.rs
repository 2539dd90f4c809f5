//! Regression fixtures: derived quadrature values (and a few seed-pinned
//! Monte Carlo summaries) frozen into a versioned text file.
//!
//! The file lives at `fixtures/derived.txt` in the repository root and can be
//! overridden with the `POLYAPPROX_FIXTURES` environment variable. Each line
//! is `name value relative_tolerance`; `#` starts a comment. The
//! `polyapprox fixtures --regen` maintenance command rewrites the file and
//! prints per-value deltas for review.

use std::path::PathBuf;

use crate::bodies::ConvexBody;
use crate::experiments::{fit_rate, run_inscribed, ExperimentConfig};
use crate::functionals::{density_gap, suboptimality_factor, QuantFunctional, WeightKind};
use crate::polytope::Side;
use crate::sampling::{DensityKind, DensitySpec};
use crate::{Error, Result};

/// One pinned value.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub value: f64,
    pub rel_tol: f64,
}

/// Comparison of a freshly computed value against the pinned one.
#[derive(Clone, Debug)]
pub struct FixtureDelta {
    pub name: String,
    pub pinned: Option<f64>,
    pub fresh: f64,
    pub rel_delta: f64,
    pub within_tolerance: bool,
}

/// Fixture file location: `POLYAPPROX_FIXTURES` or the repository default.
pub fn default_path() -> PathBuf {
    match std::env::var("POLYAPPROX_FIXTURES") {
        Ok(p) => PathBuf::from(p),
        Err(_) => PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/derived.txt"
        )),
    }
}

pub fn parse(text: &str) -> Result<Vec<Fixture>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (name, value, tol) = (it.next(), it.next(), it.next());
        match (name, value, tol) {
            (Some(n), Some(v), Some(t)) => {
                let value: f64 = v.parse().map_err(|_| {
                    Error::InvalidInput(format!("fixture line {}: bad value", lineno + 1))
                })?;
                let rel_tol: f64 = t.parse().map_err(|_| {
                    Error::InvalidInput(format!("fixture line {}: bad tolerance", lineno + 1))
                })?;
                out.push(Fixture {
                    name: n.to_string(),
                    value,
                    rel_tol,
                });
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "fixture line {}: expected `name value tolerance`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn render(fixtures: &[Fixture]) -> String {
    let mut s = String::from(
        "# Derived regression fixtures: name value relative_tolerance\n\
         # Regenerate with `polyapprox fixtures --regen` and review the deltas.\n",
    );
    for f in fixtures {
        s.push_str(&format!("{} {:.17e} {:e}\n", f.name, f.value, f.rel_tol));
    }
    s
}

/// Recompute every fixture value. Monte Carlo entries are seed-pinned and
/// take a few seconds; disable them for quick checks.
pub fn compute(include_monte_carlo: bool) -> Result<Vec<Fixture>> {
    let mut out = Vec::new();
    let mut push = |name: &str, value: f64, tol: f64| {
        out.push(Fixture {
            name: name.to_string(),
            value,
            rel_tol: tol,
        });
    };
    let quad_tol = 1e-8;

    let ellipse = ConvexBody::<f64>::ellipse(2.0, 1.0)?;
    push("ellipse_a2_b1.perimeter", ellipse.boundary_measure(), quad_tol);
    let fv = QuantFunctional::new(&ellipse, WeightKind::Volume)?;
    push("ellipse_a2_b1.holder_bound.volume", fv.holder_bound(), quad_tol);
    let fw = QuantFunctional::new(&ellipse, WeightKind::MeanWidth)?;
    push("ellipse_a2_b1.holder_bound.meanwidth", fw.holder_bound(), quad_tol);
    let dv = DensitySpec::optimal(&ellipse, DensityKind::Volume)?;
    let dw = DensitySpec::optimal(&ellipse, DensityKind::MeanWidth)?;
    push(
        "ellipse_a2_b1.density_gap.fvopt_fwopt",
        density_gap(&ellipse, &dv, &dw),
        quad_tol,
    );
    push(
        "ellipse_a2_b1.suboptimality.j1.fvopt",
        suboptimality_factor(&ellipse, 1, &dv)?,
        quad_tol,
    );
    let uniform = DensitySpec::uniform(&ellipse)?;
    let i2 = QuantFunctional::new(&ellipse, WeightKind::Intrinsic(2))?;
    push(
        "ellipse_a2_b1.i2_ratio.uniform_over_fvopt",
        i2.eval(&uniform) / i2.eval(&dv),
        quad_tol,
    );
    for a in [1.25f64, 1.5] {
        let e = ConvexBody::<f64>::ellipse(a, 1.0)?;
        let v = DensitySpec::optimal(&e, DensityKind::Volume)?;
        let w = DensitySpec::optimal(&e, DensityKind::MeanWidth)?;
        push(
            &format!("ellipse_a{a}_b1.density_gap.fvopt_fwopt"),
            density_gap(&e, &v, &w),
            quad_tol,
        );
    }

    let spheroid = ConvexBody::<f64>::ellipsoid(1.0, 1.0, 1.5)?;
    push("spheroid_1_1_1.5.surface_area", spheroid.boundary_measure(), quad_tol);
    push("spheroid_1_1_1.5.mean_width", spheroid.mean_width(), quad_tol);
    for (kind, name) in [
        (WeightKind::Volume, "volume"),
        (WeightKind::MeanWidth, "meanwidth"),
        (WeightKind::Intrinsic(2), "intrinsic2"),
    ] {
        let f = QuantFunctional::new(&spheroid, kind)?;
        push(
            &format!("spheroid_1_1_1.5.holder_bound.{name}"),
            f.holder_bound(),
            quad_tol,
        );
    }
    let sv = DensitySpec::optimal(&spheroid, DensityKind::Volume)?;
    let sw = DensitySpec::optimal(&spheroid, DensityKind::MeanWidth)?;
    push(
        "spheroid_1_1_1.5.density_gap.fvopt_fwopt",
        density_gap(&spheroid, &sv, &sw),
        quad_tol,
    );

    let sc = ConvexBody::<f64>::parse("support2d:c0=1,c2=0.1")?;
    push("supportcurve_c0_1_c2_0.1.area", sc.volume(), quad_tol);

    if include_monte_carlo {
        // Seed-pinned self-consistency run; bitwise deterministic, but the
        // tolerance leaves room for libm differences across platforms.
        let config = ExperimentConfig {
            body_spec: "ball:r=1".into(),
            density_spec: "uniform".into(),
            side: Side::Inscribed,
            js: vec![2],
            schedule: ExperimentConfig::geometric_schedule(32, 1024),
            trials: 500,
            seed: 7,
        };
        let result = run_inscribed(&config)?;
        let n64 = result
            .cell(64, 2)
            .ok_or_else(|| Error::Numerical("missing N=64 cell".into()))?;
        push("mc.ball2_uniform_seed7.n64.mean_j2", n64.mean, 1e-5);
        let fit = fit_rate(&result, 2)?;
        push("mc.ball2_uniform_seed7.rate.exponent_j2", fit.exponent, 1e-4);
        push("mc.ball2_uniform_seed7.rate.r2_j2", fit.r_squared, 1e-5);
    }
    Ok(out)
}

/// Compare fresh values against pinned ones by name.
pub fn compare(pinned: &[Fixture], fresh: &[Fixture]) -> Vec<FixtureDelta> {
    fresh
        .iter()
        .map(|f| {
            let p = pinned.iter().find(|p| p.name == f.name);
            match p {
                Some(p) => {
                    let rel = (f.value - p.value).abs() / p.value.abs().max(1e-300);
                    FixtureDelta {
                        name: f.name.clone(),
                        pinned: Some(p.value),
                        fresh: f.value,
                        rel_delta: rel,
                        within_tolerance: rel <= p.rel_tol,
                    }
                }
                None => FixtureDelta {
                    name: f.name.clone(),
                    pinned: None,
                    fresh: f.value,
                    rel_delta: f64::INFINITY,
                    within_tolerance: false,
                },
            }
        })
        .collect()
}
