//! Curvature-weighted quantization functionals, their lower bounds and
//! closed-form minimizers, asymptotic constants, and density-gap diagnostics.
//!
//! The central object is `I(f) = Int w(x) f(x)^(-a) dS(x)` over probability
//! densities `f` on the boundary, with exponent `a = 2/(d-1)` and weight
//! `w` determined by the target functional: `kappa^(1/(d-1))` for volume,
//! `kappa^(d/(d-1))` for mean width, `kappa^(1/(d-1)) H_{d-j}` for the j-th
//! intrinsic volume. The power-mean inequality gives the sharp lower bound
//! `(Int w^(1/(a+1)) dS)^(a+1)`, attained exactly at `f` proportional to
//! `w^(1/(a+1))`; the gap between a density and that minimizer is what the
//! rigidity diagnostics measure.

use crate::bodies::{integrate_boundary, BoundaryPoint, ConvexBody};
use crate::quad::GaussLegendre;
use crate::real::{sum, Accumulator, Real};
use crate::sampling::{h_m, DensitySpec};
use crate::{Error, Result};

/// Weight selector for the quantization functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    Volume,
    MeanWidth,
    Intrinsic(usize),
}

/// A quantization functional bound to a body.
pub struct QuantFunctional<'a, R: Real> {
    pub body: &'a ConvexBody<R>,
    pub kind: WeightKind,
}

/// Result of the discrete simplex-constrained minimization.
#[derive(Clone, Debug)]
pub struct DiscreteMinimizer<R: Real> {
    /// Grid nodes (boundary points).
    pub nodes: Vec<BoundaryPoint<R>>,
    /// Quadrature mass of each node with respect to `dS`.
    pub masses: Vec<R>,
    /// Minimizing density values at the nodes.
    pub density: Vec<R>,
    /// Objective value at the minimizer.
    pub value: R,
    pub iterations: usize,
}

impl<'a, R: Real> QuantFunctional<'a, R> {
    pub fn new(body: &'a ConvexBody<R>, kind: WeightKind) -> Result<Self> {
        if let WeightKind::Intrinsic(j) = kind {
            let d = body.dim();
            if j == 0 || j > d {
                return Err(Error::InvalidInput(format!("intrinsic index {j} not in 1..={d}")));
            }
        }
        Ok(Self { body, kind })
    }

    /// The exponent `a = 2/(d-1)`.
    pub fn exponent(&self) -> R {
        R::of(2.0) / R::of_usize(self.body.dim() - 1)
    }

    /// Weight `w(x)` at a boundary point.
    pub fn weight(&self, bp: &BoundaryPoint<R>) -> R {
        let d = self.body.dim();
        let inv = R::one() / R::of_usize(d - 1);
        match self.kind {
            WeightKind::Volume => bp.kappa.powf(inv),
            WeightKind::MeanWidth => bp.kappa.powf(R::of_usize(d) * inv),
            WeightKind::Intrinsic(j) => bp.kappa.powf(inv) * h_m(bp, d - j),
        }
    }

    /// `Int w f^(-a) dS` by adaptive quadrature (relative tolerance 1e-9).
    pub fn eval(&self, density: &DensitySpec<R>) -> R {
        let a = self.exponent();
        integrate_boundary(self.body, R::of(1e-10), |bp| {
            self.weight(bp) * density.eval(bp).powf(-a)
        })
    }

    /// Sharp lower bound `(Int w^(1/(a+1)) dS)^(a+1)`.
    ///
    /// For the volume weight this is the `(d+1)/(d-1)` power of the affine
    /// surface area `Int kappa^(1/(d+1)) dS`.
    pub fn holder_bound(&self) -> R {
        let a = self.exponent();
        let p = R::one() / (a + R::one());
        let integral = integrate_boundary(self.body, R::of(1e-10), |bp| self.weight(bp).powf(p));
        integral.powf(a + R::one())
    }

    /// The unique minimizing density, `w^(1/(a+1))` normalized.
    ///
    /// Derived from the weight algebra (`w = kappa^p H_m^q` implies exponents
    /// `(p/(a+1), m, q/(a+1))`), independently of the closed-form
    /// constructors in [`DensitySpec::optimal`]; the two must agree.
    pub fn holder_optimal(&self) -> Result<DensitySpec<R>> {
        let d = self.body.dim();
        let inv = R::one() / R::of_usize(d - 1);
        let (p, m, q) = match self.kind {
            WeightKind::Volume => (inv, 0, R::zero()),
            WeightKind::MeanWidth => (R::of_usize(d) * inv, 0, R::zero()),
            WeightKind::Intrinsic(j) => (inv, d - j, R::one()),
        };
        let a = self.exponent();
        let scale = R::one() / (a + R::one());
        DensitySpec::custom(self.body, p * scale, m, q * scale)
    }

    /// Discrete grid (nodes and `dS` masses) used by the minimizer: midpoint
    /// in the angle for d = 2, Gauss-Legendre x periodic midpoint for d = 3.
    pub fn grid(&self, grid_size: usize) -> Result<(Vec<BoundaryPoint<R>>, Vec<R>)> {
        if grid_size < 64 {
            return Err(Error::Resolution(format!("grid {grid_size} below the minimum 64")));
        }
        let body = self.body;
        let mut nodes = Vec::with_capacity(grid_size);
        let mut masses = Vec::with_capacity(grid_size);
        if body.dim() == 2 {
            let h = R::of(2.0) * R::PI() / R::of_usize(grid_size);
            for i in 0..grid_size {
                let t = h * (R::of_usize(i) + R::of(0.5));
                let bp = body.boundary([t, R::zero()]);
                masses.push(bp.area_element * h);
                nodes.push(bp);
            }
        } else {
            let np = ((grid_size / 2) as f64).sqrt().round().max(2.0) as usize;
            let nl = grid_size / np;
            let rule = GaussLegendre::<R>::new(np);
            let dl = R::of(2.0) * R::PI() / R::of_usize(nl);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let phi = (R::one() + *x) * R::PI() * R::of(0.5);
                for k in 0..nl {
                    let lam = dl * (R::of_usize(k) + R::of(0.5));
                    let bp = body.boundary([phi, lam]);
                    masses.push(*w * R::PI() * R::of(0.5) * dl * bp.area_element);
                    nodes.push(bp);
                }
            }
        }
        Ok((nodes, masses))
    }

    /// Numerically minimize the discretized functional over the weighted
    /// probability simplex by projected gradient descent with a spectral
    /// (Barzilai-Borwein) step and nonmonotone backtracking.
    ///
    /// Converges when the projected-gradient sup norm drops below 1e-10;
    /// fails after 1e5 iterations. `start` optionally seeds the iteration
    /// (values at the grid nodes; any positive profile works).
    pub fn minimize_numeric(
        &self,
        grid_size: usize,
        start: Option<&[R]>,
    ) -> Result<DiscreteMinimizer<R>> {
        let (nodes, masses) = self.grid(grid_size)?;
        let weights: Vec<R> = nodes.iter().map(|bp| self.weight(bp)).collect();
        let a = self.exponent();
        let n = nodes.len();
        let mm = sum(masses.iter().map(|m| *m * *m));
        let project = |f: &mut [R]| {
            let fm = sum(f.iter().zip(&masses).map(|(x, m)| *x * *m));
            let shift = (fm - R::one()) / mm;
            for (x, m) in f.iter_mut().zip(&masses) {
                *x -= shift * *m;
            }
        };
        let objective = |f: &[R]| -> R { discrete_objective(&weights, &masses, f, a) };

        let total_mass = sum(masses.iter().copied());
        let mut f: Vec<R> = match start {
            Some(s) => {
                if s.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "start density has {} values for {n} nodes",
                        s.len()
                    )));
                }
                let z = sum(s.iter().zip(&masses).map(|(x, m)| *x * *m));
                s.iter().map(|x| *x / z).collect()
            }
            None => vec![R::one() / total_mass; n],
        };
        project(&mut f);

        let mut grad = vec![R::zero(); n];
        let mut pg = vec![R::zero(); n];
        let fill_grad = |f: &[R], grad: &mut [R], pg: &mut [R]| -> R {
            for i in 0..f.len() {
                grad[i] = -a * weights[i] * f[i].powf(-a - R::one()) * masses[i];
            }
            let gm = sum(grad.iter().zip(&masses).map(|(g, m)| *g * *m)) / mm;
            let mut norm = R::zero();
            for i in 0..f.len() {
                pg[i] = grad[i] - gm * masses[i];
                norm = norm.max(pg[i].abs());
            }
            norm
        };

        let mut fval = objective(&f);
        let mut history = vec![fval; 10];
        let mut prev_f: Option<(Vec<R>, Vec<R>)> = None;
        let mut step = R::of(1e-2) / (fill_grad(&f, &mut grad, &mut pg) + R::of(1e-30));
        let max_iter = 100_000;
        for iter in 0..max_iter {
            let norm = fill_grad(&f, &mut grad, &mut pg);
            if norm < R::of(1e-10) {
                return Ok(DiscreteMinimizer {
                    nodes,
                    masses,
                    density: f,
                    value: fval,
                    iterations: iter,
                });
            }
            // Spectral step from the previous iterate.
            if let Some((pf, ppg)) = &prev_f {
                let mut sy = R::zero();
                let mut ss = R::zero();
                for i in 0..n {
                    let si = f[i] - pf[i];
                    let yi = pg[i] - ppg[i];
                    sy += si * yi;
                    ss += si * si;
                }
                if sy > R::of(1e-300) {
                    step = (ss / sy).max(R::of(1e-16)).min(R::of(1e16));
                }
            }
            prev_f = Some((f.clone(), pg.clone()));
            // Nonmonotone Armijo backtracking against the recent maximum.
            let fmax = history.iter().fold(R::neg_infinity(), |acc, v| acc.max(*v));
            let pg_sq = sum(pg.iter().map(|g| *g * *g));
            let mut t = step;
            loop {
                let mut trial: Vec<R> = (0..n).map(|i| f[i] - t * pg[i]).collect();
                project(&mut trial);
                let tv = objective(&trial);
                if tv.is_finite() && tv <= fmax - R::of(1e-4) * t * pg_sq {
                    f = trial;
                    fval = tv;
                    break;
                }
                t *= R::of(0.5);
                if t < R::of(1e-16) {
                    // Step floor: accept the current iterate and keep going.
                    break;
                }
            }
            history.remove(0);
            history.push(fval);
        }
        Err(Error::Numerical(format!(
            "projected gradient descent did not converge in {max_iter} iterations"
        )))
    }
}

/// Discrete objective `sum_i w_i f_i^(-a) m_i`; infinite off the positive
/// orthant (the natural barrier for the line search).
pub fn discrete_objective<R: Real>(weights: &[R], masses: &[R], f: &[R], a: R) -> R {
    let mut acc = Accumulator::new();
    for i in 0..f.len() {
        if f[i] <= R::zero() {
            return R::infinity();
        }
        acc.add(weights[i] * f[i].powf(-a) * masses[i]);
    }
    acc.value()
}

/// Total-variation distance `(1/2) Int |f1 - f2| dS` between two densities
/// on the same body. The integrand has kinks where the densities cross, so
/// the 3D path uses the nested (kink-robust) spherical integrator.
pub fn density_gap<R: Real>(
    body: &ConvexBody<R>,
    f1: &DensitySpec<R>,
    f2: &DensitySpec<R>,
) -> R {
    if body.dim() == 2 {
        integrate_boundary(body, R::of(1e-9), |bp| (f1.eval(bp) - f2.eval(bp)).abs())
            * R::of(0.5)
    } else {
        crate::quad::sphere_nested(
            &|phi, lam| {
                let bp = body.boundary([phi, lam]);
                (f1.eval(&bp) - f2.eval(&bp)).abs() * bp.area_element
            },
            R::of(1e-9),
        ) * R::of(0.5)
    }
}

/// Predicted limiting ratio of expected deviations when using `density` for
/// the j-th intrinsic volume instead of its optimal density:
/// `I_j(density) / min I_j`, always >= 1.
pub fn suboptimality_factor<R: Real>(
    body: &ConvexBody<R>,
    j: usize,
    density: &DensitySpec<R>,
) -> Result<R> {
    let functional = QuantFunctional::new(body, WeightKind::Intrinsic(j))?;
    Ok(functional.eval(density) / functional.holder_bound())
}

/// Which asymptotic constant to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantKind {
    /// `c_{d,j}` for the random inscribed model.
    InscribedRandom,
    /// Constant multiplying the expected volume excess of the random
    /// circumscribed model.
    CircumscribedVolume,
    /// Same for the expected mean-width excess.
    CircumscribedMeanWidth,
}

/// An evaluated asymptotic constant.
#[derive(Clone, Copy, Debug)]
pub struct AsymptoticConstant<R: Real> {
    pub kind: ConstantKind,
    pub value: R,
}

/// `vol_d(B_d)` for d = 0..3.
fn unit_ball_volume<R: Real>(d: usize) -> R {
    match d {
        0 => R::one(),
        1 => R::of(2.0),
        2 => R::PI(),
        3 => R::of(4.0 / 3.0) * R::PI(),
        _ => unreachable!(),
    }
}

/// `vol_{d-1}(boundary of B_d)` for d = 2, 3.
fn unit_sphere_measure<R: Real>(d: usize) -> R {
    match d {
        2 => R::of(2.0) * R::PI(),
        3 => R::of(4.0) * R::PI(),
        _ => unreachable!(),
    }
}

/// Gamma at a positive integer argument (the only arguments that occur for
/// d in {2, 3}, where 2/(d-1) is an integer).
fn gamma_integer<R: Real>(n: usize) -> R {
    let mut v = R::one();
    for k in 2..n {
        v *= R::of_usize(k);
    }
    v
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// `V_j(B_d) = C(d, j) vol_d(B_d) / vol_{d-j}(B_{d-j})`.
pub fn ball_intrinsic_volume<R: Real>(d: usize, j: usize) -> R {
    R::of_usize(binomial(d, j)) * unit_ball_volume::<R>(d) / unit_ball_volume::<R>(d - j)
}

/// Evaluate an asymptotic constant for dimension `d` (and index `j` for the
/// inscribed kind).
pub fn asymptotic_constant<R: Real>(
    kind: ConstantKind,
    d: usize,
    j: usize,
) -> Result<AsymptoticConstant<R>> {
    if d != 2 && d != 3 {
        return Err(Error::InvalidInput(format!("constants only evaluated for d in {{2,3}}, got {d}")));
    }
    let two_over = 2 / (d - 1); // integral for d in {2, 3}
    let a = R::of_usize(two_over);
    let value = match kind {
        ConstantKind::InscribedRandom => {
            if j == 0 || j > d {
                return Err(Error::InvalidInput(format!("j = {j} not in 1..={d}")));
            }
            let alpha = (R::of_usize(d - 1) / R::of_usize(d + 1))
                * (R::of_usize(d) * unit_ball_volume::<R>(d) / unit_ball_volume::<R>(d - 1))
                    .powf(a)
                * gamma_integer::<R>(j + 1 + two_over)
                / gamma_integer::<R>(j + 1);
            R::of_usize(j) * ball_intrinsic_volume::<R>(d, j) * R::of(0.5) * alpha
        }
        ConstantKind::CircumscribedVolume => {
            gamma_integer::<R>(1 + two_over)
                / (R::of(2.0) * unit_ball_volume::<R>(d - 1).powf(a))
        }
        ConstantKind::CircumscribedMeanWidth => {
            (unit_sphere_measure::<R>(d) / unit_ball_volume::<R>(d - 1)).powf(a)
                * gamma_integer::<R>(1 + two_over)
        }
    };
    let positive = value > R::zero();
    if !positive {
        return Err(Error::Numerical("asymptotic constant not positive".into()));
    }
    Ok(AsymptoticConstant { kind, value })
}

/// The scaling factor `alpha(d, j)` relating `c_{d,j}` to `j V_j(B_d) / 2`.
pub fn alpha_factor<R: Real>(d: usize, j: usize) -> Result<R> {
    let c = asymptotic_constant::<R>(ConstantKind::InscribedRandom, d, j)?;
    Ok(c.value / (R::of_usize(j) * ball_intrinsic_volume::<R>(d, j) * R::of(0.5)))
}
