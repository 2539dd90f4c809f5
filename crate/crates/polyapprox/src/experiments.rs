//! Monte Carlo harnesses and deterministic constructions that confront the
//! asymptotic and rigidity predictions with simulation.
//!
//! Reproducibility contract: every trial draws from a counter-based
//! substream keyed by `(seed, n_index, trial)`, trials are accumulated in
//! trial-index order after the parallel map, and all floating-point folds are
//! compensated — so results are bitwise identical for any worker count.
//!
//! This harness is deliberately concrete in `f64`; the generic numeric core
//! lives below it.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bodies::ConvexBody;
use crate::functionals::{density_gap, suboptimality_factor, QuantFunctional, WeightKind};
use crate::polytope::{
    circumscribe, deviation, deviation_with_reference, hull2d, hull3d, reference_value, Polygon,
    Polytope, Side,
};
use crate::quad::adaptive;
use crate::real::{sum, Accumulator};
use crate::sampling::{trial_rng, BoundarySampler, DensitySpec, SphereSampler};
use crate::{Error, Result};

/// Full description of a Monte Carlo run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub body_spec: String,
    /// Boundary density (inscribed) or sphere density (circumscribed).
    pub density_spec: String,
    pub side: Side,
    /// Intrinsic-volume indices to track.
    pub js: Vec<usize>,
    /// Strictly increasing vertex/facet budgets.
    pub schedule: Vec<usize>,
    /// Trials per schedule point (>= 100).
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Expand the `lo:hi` grammar into a geometric schedule with ratio 2.
    pub fn geometric_schedule(lo: usize, hi: usize) -> Vec<usize> {
        let mut v = Vec::new();
        let mut n = lo;
        while n <= hi {
            v.push(n);
            n *= 2;
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() || self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "schedule must be nonempty and strictly increasing".into(),
            ));
        }
        if self.trials < 100 {
            return Err(Error::InvalidInput(format!(
                "trials = {} below the minimum 100",
                self.trials
            )));
        }
        if self.js.is_empty() {
            return Err(Error::InvalidInput("no intrinsic-volume indices given".into()));
        }
        Ok(())
    }

    /// Hash of the canonical configuration line (provenance column).
    pub fn hash(&self) -> String {
        let canon = format!(
            "body={}|density={}|side={}|js={:?}|schedule={:?}|trials={}|seed={}",
            self.body_spec,
            self.density_spec,
            self.side,
            self.js,
            self.schedule,
            self.trials,
            self.seed
        );
        let digest = Sha256::digest(canon.as_bytes());
        let mut s = String::new();
        for b in digest.iter().take(8) {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

/// Per-(N, j) summary statistics.
#[derive(Clone, Debug)]
pub struct CellStats {
    pub n: usize,
    pub j: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Trials that produced a value.
    pub used: usize,
    pub misses: usize,
}

/// Aggregated result of a Monte Carlo run.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub body: String,
    pub density: String,
    pub side: Side,
    pub dim: usize,
    pub js: Vec<usize>,
    pub seed: u64,
    pub trials: usize,
    pub config_hash: String,
    /// Ordered by (schedule index, j index).
    pub cells: Vec<CellStats>,
    /// Mean vertex fraction f_0 / N per schedule point (inscribed runs).
    pub vertex_fraction: Vec<(usize, f64)>,
}

impl ExperimentResult {
    pub fn cell(&self, n: usize, j: usize) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.n == n && c.j == j)
    }
}

/// Least-squares fit of `log(mean)` against `log(N)`.
#[derive(Clone, Debug)]
pub struct RateFit {
    pub j: usize,
    pub exponent: f64,
    pub log_const: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// Schedule points dropped for nonpositive means.
    pub dropped: usize,
    /// Per-point constants `mean * N^(2/(d-1))`.
    pub per_point_constants: Vec<(usize, f64)>,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = sum(values.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// One inscribed trial: sample, hull, deviations. `None` marks a miss
/// (degenerate hull after one resample).
fn inscribed_trial(
    body: &ConvexBody<f64>,
    sampler: &BoundarySampler<f64>,
    refs: &[(usize, f64)],
    n: usize,
    seed: u64,
    n_index: u32,
    trial: u32,
) -> Result<Option<(Vec<f64>, usize)>> {
    let mut rng = trial_rng(seed, n_index, trial);
    for _attempt in 0..2 {
        let batch = sampler.sample(n, &mut rng)?;
        let poly = if body.dim() == 2 {
            let pts: Vec<[f64; 2]> = batch.points.iter().map(|p| [p.position[0], p.position[1]]).collect();
            hull2d(&pts).map(Polytope::Gon)
        } else {
            let pts: Vec<[f64; 3]> = batch.points.iter().map(|p| p.position).collect();
            hull3d(&pts).map(Polytope::Hedron)
        };
        match poly {
            Ok(p) => {
                let mut vals = Vec::with_capacity(refs.len());
                for (j, reference) in refs {
                    vals.push(deviation_with_reference(*reference, &p, *j, Side::Inscribed)?.value);
                }
                return Ok(Some((vals, p.vertex_count())));
            }
            Err(Error::DegenerateHull(_)) => continue, // resample once
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Random inscribed polytopes: sample the boundary density, hull, measure
/// the intrinsic-volume deviations.
pub fn run_inscribed(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.side != Side::Inscribed {
        return Err(Error::InvalidInput("config side is not inscribed".into()));
    }
    let body = ConvexBody::<f64>::parse(&config.body_spec)?;
    let d = body.dim();
    for &j in &config.js {
        if j == 0 || j > d {
            return Err(Error::InvalidInput(format!("j = {j} not in 1..={d}")));
        }
    }
    let density = DensitySpec::parse(&body, &config.density_spec)?;
    let sampler = BoundarySampler::new(&body, &density)?;
    let refs: Vec<(usize, f64)> = config
        .js
        .iter()
        .map(|&j| reference_value(&body, j).map(|v| (j, v)))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut vertex_fraction = Vec::new();
    for (n_index, &n) in config.schedule.iter().enumerate() {
        let outcomes: Vec<Option<(Vec<f64>, usize)>> = (0..config.trials as u32)
            .into_par_iter()
            .map(|t| inscribed_trial(&body, &sampler, &refs, n, config.seed, n_index as u32, t))
            .collect::<Result<_>>()?;
        let misses = outcomes.iter().filter(|o| o.is_none()).count();
        let mut f0 = Accumulator::new();
        for o in outcomes.iter().flatten() {
            f0.add(o.1 as f64 / n as f64);
        }
        let used_total = outcomes.len() - misses;
        vertex_fraction.push((n, f0.value() / used_total.max(1) as f64));
        for (ji, &j) in config.js.iter().enumerate() {
            let values: Vec<f64> = outcomes
                .iter()
                .flatten()
                .map(|(vals, _)| vals[ji])
                .collect();
            let (mean, stderr) = mean_and_stderr(&values);
            cells.push(CellStats {
                n,
                j,
                mean,
                stderr,
                used: values.len(),
                misses,
            });
        }
    }
    Ok(ExperimentResult {
        body: body.label(),
        density: density.label().to_string(),
        side: Side::Inscribed,
        dim: d,
        js: config.js.clone(),
        seed: config.seed,
        trials: config.trials,
        config_hash: config.hash(),
        cells,
        vertex_fraction,
    })
}

fn circumscribed_trial(
    body: &ConvexBody<f64>,
    sampler: &SphereSampler<f64>,
    refs: &[(usize, f64)],
    n: usize,
    seed: u64,
    n_index: u32,
    trial: u32,
) -> Result<Option<Vec<f64>>> {
    let mut rng = trial_rng(seed, n_index, trial);
    let normals = sampler.sample(n, &mut rng)?;
    match circumscribe(body, &normals) {
        Ok(q) => {
            let mut vals = Vec::with_capacity(refs.len());
            for (j, reference) in refs {
                vals.push(deviation_with_reference(*reference, &q, *j, Side::Circumscribed)?.value);
            }
            Ok(Some(vals))
        }
        // Unbounded draws are recorded as misses, not retried.
        Err(Error::UnboundedPolytope) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Random circumscribed polytopes from i.i.d. supporting hyperplanes with
/// normals drawn on the sphere. Tracks volume and mean-width excess
/// (j restricted to {1, d}); unbounded intersections count as misses.
pub fn run_circumscribed(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.side != Side::Circumscribed {
        return Err(Error::InvalidInput("config side is not circumscribed".into()));
    }
    let body = ConvexBody::<f64>::parse(&config.body_spec)?;
    let d = body.dim();
    for &j in &config.js {
        if j != 1 && j != d {
            return Err(Error::InvalidInput(format!(
                "circumscribed deviations are defined for j in {{1, {d}}}, got {j}"
            )));
        }
    }
    let ball = ConvexBody::<f64>::ball(d, 1.0)?;
    let sphere_density = DensitySpec::parse(&ball, &config.density_spec)?;
    let sampler = SphereSampler::with_density(d, &sphere_density)?;
    let refs: Vec<(usize, f64)> = config
        .js
        .iter()
        .map(|&j| reference_value(&body, j).map(|v| (j, v)))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (n_index, &n) in config.schedule.iter().enumerate() {
        let outcomes: Vec<Option<Vec<f64>>> = (0..config.trials as u32)
            .into_par_iter()
            .map(|t| circumscribed_trial(&body, &sampler, &refs, n, config.seed, n_index as u32, t))
            .collect::<Result<_>>()?;
        let misses = outcomes.iter().filter(|o| o.is_none()).count();
        if n_index + 1 == config.schedule.len() && 2 * misses > config.trials {
            return Err(Error::Numerical(format!(
                "miss rate {misses}/{} at the largest budget: normals do not positively span",
                config.trials
            )));
        }
        for (ji, &j) in config.js.iter().enumerate() {
            let values: Vec<f64> = outcomes.iter().flatten().map(|vals| vals[ji]).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            cells.push(CellStats {
                n,
                j,
                mean,
                stderr,
                used: values.len(),
                misses,
            });
        }
    }
    Ok(ExperimentResult {
        body: body.label(),
        density: sphere_density.label().to_string(),
        side: Side::Circumscribed,
        dim: d,
        js: config.js.clone(),
        seed: config.seed,
        trials: config.trials,
        config_hash: config.hash(),
        cells,
        vertex_fraction: Vec::new(),
    })
}

/// Ordinary least squares of `log(mean)` on `log(N)` for one index.
pub fn fit_rate(result: &ExperimentResult, j: usize) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut constants = Vec::new();
    let mut dropped = 0usize;
    let rate = 2.0 / (result.dim as f64 - 1.0);
    for c in result.cells.iter().filter(|c| c.j == j) {
        if c.mean > 0.0 {
            xs.push((c.n as f64).ln());
            ys.push(c.mean.ln());
            constants.push((c.n, c.mean * (c.n as f64).powf(rate)));
        } else {
            dropped += 1;
        }
    }
    let k = xs.len();
    if k < 4 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs >= 4 positive points, got {k}"
        )));
    }
    let xm = sum(xs.iter().copied()) / k as f64;
    let ym = sum(ys.iter().copied()) / k as f64;
    let sxx = sum(xs.iter().map(|x| (x - xm) * (x - xm)));
    let sxy = sum(xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)));
    let syy = sum(ys.iter().map(|y| (y - ym) * (y - ym)));
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let r2 = if syy > 0.0 {
        ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        j,
        exponent: slope,
        log_const: intercept,
        r_squared: r2,
        points_used: k,
        dropped,
        per_point_constants: constants,
    })
}

/// Result of a paired (common-random-numbers) ratio experiment.
#[derive(Clone, Debug)]
pub struct RatioResult {
    pub j: usize,
    /// `(N, mean_a / mean_b)` per schedule point.
    pub observed: Vec<(usize, f64)>,
    /// Quadrature prediction `I_j(a) / I_j(b)`.
    pub predicted: f64,
    pub result_a: ExperimentResult,
    pub result_b: ExperimentResult,
}

/// Paired experiment comparing two boundary densities for one index. Trials
/// share their random substream (the second arm replays the first arm's
/// generator state), which cancels most of the trial-level noise in the
/// ratio of means.
pub fn ratio_experiment(
    body_spec: &str,
    j: usize,
    density_a: &str,
    density_b: &str,
    schedule: &[usize],
    trials: usize,
    seed: u64,
) -> Result<RatioResult> {
    let body = ConvexBody::<f64>::parse(body_spec)?;
    let da = DensitySpec::parse(&body, density_a)?;
    let db = DensitySpec::parse(&body, density_b)?;
    let sa = BoundarySampler::new(&body, &da)?;
    let sb = BoundarySampler::new(&body, &db)?;
    let reference = reference_value(&body, j)?;
    let refs = [(j, reference)];

    let mut observed = Vec::new();
    let mut cells_a = Vec::new();
    let mut cells_b = Vec::new();
    for (n_index, &n) in schedule.iter().enumerate() {
        let pairs: Vec<(Option<f64>, Option<f64>)> = (0..trials as u32)
            .into_par_iter()
            .map(|t| -> Result<(Option<f64>, Option<f64>)> {
                let va = inscribed_trial(&body, &sa, &refs, n, seed, n_index as u32, t)?
                    .map(|(vals, _)| vals[0]);
                let vb = inscribed_trial(&body, &sb, &refs, n, seed, n_index as u32, t)?
                    .map(|(vals, _)| vals[0]);
                Ok((va, vb))
            })
            .collect::<Result<_>>()?;
        let a_vals: Vec<f64> = pairs.iter().filter_map(|p| p.0).collect();
        let b_vals: Vec<f64> = pairs.iter().filter_map(|p| p.1).collect();
        let (ma, sea) = mean_and_stderr(&a_vals);
        let (mb, seb) = mean_and_stderr(&b_vals);
        observed.push((n, ma / mb));
        cells_a.push(CellStats {
            n,
            j,
            mean: ma,
            stderr: sea,
            used: a_vals.len(),
            misses: trials - a_vals.len(),
        });
        cells_b.push(CellStats {
            n,
            j,
            mean: mb,
            stderr: seb,
            used: b_vals.len(),
            misses: trials - b_vals.len(),
        });
    }
    let functional = QuantFunctional::new(&body, WeightKind::Intrinsic(j))?;
    let predicted = functional.eval(&da) / functional.eval(&db);
    let make = |density: &DensitySpec<f64>, cells: Vec<CellStats>| ExperimentResult {
        body: body.label(),
        density: density.label().to_string(),
        side: Side::Inscribed,
        dim: body.dim(),
        js: vec![j],
        seed,
        trials,
        config_hash: String::new(),
        cells,
        vertex_fraction: Vec::new(),
    };
    Ok(RatioResult {
        j,
        observed,
        predicted,
        result_a: make(&da, cells_a),
        result_b: make(&db, cells_b),
    })
}

/// Objective for the best-polygon dynamic program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DpObjective {
    Area,
    Perimeter,
}

impl std::fmt::Display for DpObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DpObjective::Area => write!(f, "area"),
            DpObjective::Perimeter => write!(f, "perimeter"),
        }
    }
}

/// Output of the best-polygon dynamic program.
#[derive(Clone, Debug)]
pub struct DpResult {
    pub polygon: Polygon<f64>,
    /// Boundary parameters of the chosen vertices.
    pub vertex_params: Vec<f64>,
    /// Deviation of the returned polygon (j = 2 for area, j = 1 for
    /// perimeter, in the deviation units of [`deviation`]).
    pub deviation: f64,
    /// Vertex histogram over 64 equal-arclength bins (masses sum to 1).
    pub histogram: Vec<f64>,
    pub objective: DpObjective,
    pub grid: usize,
    pub anchors: usize,
}

/// Number of histogram bins used for vertex-distribution diagnostics.
pub const HISTOGRAM_BINS: usize = 64;

/// Near-best inscribed N-gon by dynamic programming over a discretized
/// boundary.
///
/// The boundary is discretized into `grid` equal-parameter points; for each
/// of `starts` evenly spaced anchor vertices, a DP over cyclically ordered
/// vertex choices maximizes the shoelace area (or perimeter), and the best
/// polygon over anchors is returned together with its vertex histogram
/// against equal-arclength bins.
pub fn best_polygon_dp(
    body: &ConvexBody<f64>,
    n: usize,
    grid: usize,
    objective: DpObjective,
    starts: usize,
) -> Result<DpResult> {
    if body.dim() != 2 {
        return Err(Error::Capability("best-polygon DP is 2D only".into()));
    }
    if n < 3 {
        return Err(Error::InvalidInput("need at least 3 vertices".into()));
    }
    if grid < 8 * n {
        return Err(Error::Resolution(format!("grid {grid} below 8 N = {}", 8 * n)));
    }
    if starts < 8 {
        return Err(Error::InvalidInput("need at least 8 anchor starts".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let params: Vec<f64> = (0..grid).map(|i| two_pi * i as f64 / grid as f64).collect();
    let pts: Vec<[f64; 2]> = params
        .iter()
        .map(|&t| {
            let p = body.boundary([t, 0.0]).position;
            [p[0], p[1]]
        })
        .collect();
    // Cumulative arclength at the grid points (trapezoidal).
    let ae: Vec<f64> = params
        .iter()
        .map(|&t| body.boundary([t, 0.0]).area_element)
        .collect();
    let mut arclen = vec![0.0f64; grid + 1];
    for i in 0..grid {
        let next = ae[(i + 1) % grid];
        arclen[i + 1] = arclen[i] + 0.5 * (ae[i] + next) * (two_pi / grid as f64);
    }
    let total_len = arclen[grid];

    let anchors: Vec<usize> = (0..starts).map(|k| k * grid / starts).collect();
    let solutions: Vec<(f64, Vec<usize>)> = anchors
        .par_iter()
        .map(|&anchor| dp_single_anchor(&pts, grid, n, anchor, objective))
        .collect();
    let (mut best_score, mut best_idx) = (f64::NEG_INFINITY, 0usize);
    for (i, (score, _)) in solutions.iter().enumerate() {
        if *score > best_score {
            best_score = *score;
            best_idx = i;
        }
    }
    let indices = &solutions[best_idx].1;
    let polygon = Polygon {
        vertices: indices.iter().map(|&i| pts[i]).collect(),
    };
    let vertex_params: Vec<f64> = indices.iter().map(|&i| params[i]).collect();

    let mut histogram = vec![0.0f64; HISTOGRAM_BINS];
    for &i in indices {
        let bin = ((arclen[i] / total_len) * HISTOGRAM_BINS as f64).floor() as usize;
        histogram[bin.min(HISTOGRAM_BINS - 1)] += 1.0 / n as f64;
    }

    let j = match objective {
        DpObjective::Area => 2,
        DpObjective::Perimeter => 1,
    };
    let dev = deviation(body, &Polytope::Gon(polygon.clone()), j, Side::Inscribed)?;
    Ok(DpResult {
        polygon,
        vertex_params,
        deviation: dev.value,
        histogram,
        objective,
        grid,
        anchors: starts,
    })
}

/// DP with a fixed anchor: indices strictly increase around the curve.
/// Returns the closed-cycle score and the chosen absolute grid indices.
///
/// The objective is permutation-invariant in the gap multiset, so on bodies
/// of constant curvature many arrangements are exactly tied; among
/// value-tied transitions the DP prefers the gap closest to the mean gap
/// `grid / n`, which selects the evenly interleaved arrangement. On bodies
/// with varying curvature the transition values differ by real amounts and
/// the tie-break never fires.
fn dp_single_anchor(
    pts: &[[f64; 2]],
    grid: usize,
    n: usize,
    anchor: usize,
    objective: DpObjective,
) -> (f64, Vec<usize>) {
    let at = |rel: usize| pts[(anchor + rel) % grid];
    let gain = |from: usize, to: usize| -> f64 {
        let (a, b) = (at(from), at(to));
        match objective {
            // Shoelace pair term; summed over the closed cycle it is twice
            // the area regardless of the origin.
            DpObjective::Area => 0.5 * (a[0] * b[1] - a[1] * b[0]),
            DpObjective::Perimeter => {
                let dx = b[0] - a[0];
                let dy = b[1] - a[1];
                (dx * dx + dy * dy).sqrt()
            }
        }
    };
    let mean_gap = grid as f64 / n as f64;
    // prev[i] = best score of a chain anchor -> ... -> i with k vertices;
    // prev_pen[i] = cumulative squared positional drift of that chain,
    // the lexicographic secondary objective.
    let mut prev = vec![f64::NEG_INFINITY; grid];
    let mut prev_pen = vec![f64::INFINITY; grid];
    let mut parent = vec![vec![0u32; grid]; n];
    prev[0] = 0.0;
    prev_pen[0] = 0.0;
    let mut cur = vec![f64::NEG_INFINITY; grid];
    let mut cur_pen = vec![f64::INFINITY; grid];
    for (k, parent_k) in parent.iter_mut().enumerate().skip(1) {
        for x in cur.iter_mut() {
            *x = f64::NEG_INFINITY;
        }
        // Chains with k+1 vertices ending at rel index i need i >= k.
        for i in k..grid {
            let mut best = f64::NEG_INFINITY;
            let mut best_pen = f64::INFINITY;
            let mut arg = 0u32;
            for jj in (k - 1)..i {
                let s = prev[jj];
                if s == f64::NEG_INFINITY {
                    continue;
                }
                let cand = s + gain(jj, i);
                let tol = 1e-12 * (1.0 + best.abs());
                if cand > best + tol || (cand > best - tol && prev_pen[jj] < best_pen) {
                    best = best.max(cand);
                    best_pen = prev_pen[jj];
                    arg = jj as u32;
                }
            }
            let drift = i as f64 - k as f64 * mean_gap;
            cur[i] = best;
            cur_pen[i] = best_pen + drift * drift;
            parent_k[i] = arg;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut prev_pen, &mut cur_pen);
    }
    // Close the cycle back to the anchor.
    let mut best = f64::NEG_INFINITY;
    let mut best_pen = f64::INFINITY;
    let mut last = n - 1;
    for i in (n - 1)..grid {
        if prev[i] == f64::NEG_INFINITY {
            continue;
        }
        let cand = prev[i] + gain(i, 0);
        let tol = 1e-12 * (1.0 + best.abs());
        if cand > best + tol || (cand > best - tol && prev_pen[i] < best_pen) {
            best = best.max(cand);
            best_pen = prev_pen[i];
            last = i;
        }
    }
    let mut rel_indices = vec![0usize; n];
    let mut cursor = last;
    for k in (1..n).rev() {
        rel_indices[k] = cursor;
        cursor = parent[k][cursor] as usize;
    }
    rel_indices[0] = 0;
    let abs: Vec<usize> = rel_indices.iter().map(|&r| (anchor + r) % grid).collect();
    (best, abs)
}

/// Binned target masses of a density over the same equal-arclength bins the
/// DP histogram uses.
pub fn density_bin_masses(body: &ConvexBody<f64>, density: &DensitySpec<f64>) -> Vec<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    // Invert arclength(t) on a fine grid to find the bin edges in parameter.
    let fine = 8192usize;
    let ae: Vec<f64> = (0..=fine)
        .map(|i| {
            body.boundary([two_pi * i as f64 / fine as f64, 0.0])
                .area_element
        })
        .collect();
    let mut cum = vec![0.0f64; fine + 1];
    for i in 0..fine {
        cum[i + 1] = cum[i] + 0.5 * (ae[i] + ae[i + 1]) * (two_pi / fine as f64);
    }
    let total = cum[fine];
    let mut edges = vec![0.0f64; HISTOGRAM_BINS + 1];
    let mut k = 1usize;
    for i in 0..=fine {
        while k < HISTOGRAM_BINS && cum[i] >= total * k as f64 / HISTOGRAM_BINS as f64 {
            // Linear interpolation of the crossing.
            let target = total * k as f64 / HISTOGRAM_BINS as f64;
            let prev = cum[i - 1];
            let frac = (target - prev) / (cum[i] - prev);
            edges[k] = two_pi * ((i - 1) as f64 + frac) / fine as f64;
            k += 1;
        }
    }
    edges[HISTOGRAM_BINS] = two_pi;
    (0..HISTOGRAM_BINS)
        .map(|b| {
            adaptive(
                &|t: f64| {
                    let bp = body.boundary([t, 0.0]);
                    density.eval(&bp) * bp.area_element
                },
                edges[b],
                edges[b + 1],
                1e-9,
            )
        })
        .collect()
}

/// Total-variation distance between two binned mass vectors.
pub fn histogram_tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// Rigidity diagnostic comparing the optimal densities of two indices.
#[derive(Clone, Debug)]
pub struct RigidityReport {
    pub body: String,
    pub j1: usize,
    pub j2: usize,
    /// Total-variation gap between the two optimal densities.
    pub gap: f64,
    /// Cost of using the j2-optimal density for j1, and vice versa.
    pub factor_j1_under_j2opt: f64,
    pub factor_j2_under_j1opt: f64,
    /// max kappa / min kappa over the boundary.
    pub curvature_ratio: f64,
    /// Verdict: gap <= 1e-6.
    pub ball_consistent: bool,
}

/// Bundle the density-gap diagnostics for two distinct indices.
pub fn rigidity_report(body: &ConvexBody<f64>, j1: usize, j2: usize) -> Result<RigidityReport> {
    let d = body.dim();
    if j1 == 0 || j2 > d || j1 >= j2 {
        return Err(Error::InvalidInput(format!(
            "need two distinct indices 1 <= j1 < j2 <= {d}, got ({j1}, {j2})"
        )));
    }
    let r1 = DensitySpec::optimal(body, crate::sampling::DensityKind::Intrinsic(j1))?;
    let r2 = DensitySpec::optimal(body, crate::sampling::DensityKind::Intrinsic(j2))?;
    let gap = density_gap(body, &r1, &r2);
    let (kmin, kmax) = body.curvature_range(4096);
    Ok(RigidityReport {
        body: body.label(),
        j1,
        j2,
        gap,
        factor_j1_under_j2opt: suboptimality_factor(body, j1, &r2)?,
        factor_j2_under_j1opt: suboptimality_factor(body, j2, &r1)?,
        curvature_ratio: kmax / kmin,
        ball_consistent: gap <= 1e-6,
    })
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// Quote a CSV field when it contains separators (body labels carry commas).
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Results CSV. The optional timestamp becomes a `#`-comment header line;
/// suppress it for byte-reproducible output.
pub fn results_csv(result: &ExperimentResult, timestamp: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(ts) = timestamp {
        s.push_str(&format!("# generated {ts}\n"));
    }
    s.push_str("body,density,side,j,N,trials,misses,mean,stderr,seed,config_hash\n");
    for c in &result.cells {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&result.body),
            csv_field(&result.density),
            result.side,
            c.j,
            c.n,
            c.used,
            c.misses,
            c.mean,
            c.stderr,
            result.seed,
            result.config_hash
        ));
    }
    s
}

/// Rate-fit CSV.
pub fn fits_csv(result: &ExperimentResult, fits: &[RateFit], timestamp: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(ts) = timestamp {
        s.push_str(&format!("# generated {ts}\n"));
    }
    s.push_str("body,density,j,exponent,log_const,r2\n");
    for f in fits {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&result.body),
            csv_field(&result.density),
            f.j,
            f.exponent,
            f.log_const,
            f.r_squared
        ));
    }
    s
}
