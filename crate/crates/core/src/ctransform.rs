//! Discrete c-transforms on finite grids.
//!
//! `f^c(y) = min_x (c(x, y) - f(x))` over an explicit point list, with the
//! c-concavity test, c-superdifferential and c-divergence built on it. Pairs
//! with infeasible cost (`1 + alpha x . y <= 0` for the log cost) are excluded.

use std::collections::HashSet;
use std::thread;

use serde::Serialize;

use crate::duality::{alpha_gradient, cost_c_alpha};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::potentials::PotentialSpec;

/// Tie tolerance for argmin sets and superdifferential partners.
pub const TIE_TOL: f64 = 1e-12;

/// Values of a function on an explicit grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    points: Vec<Vector>,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(points: Vec<Vector>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value {v}")));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            let key: Vec<u64> = p.iter().map(|v| (v + 0.0).to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::InvalidParameter(format!("duplicate grid point {:?}", p.as_slice())));
            }
        }
        Ok(Self { points, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(points: Vec<Vector>, f: impl Fn(&Vector) -> f64) -> Result<Self> {
        let values = points.iter().map(&f).collect();
        Self::new(points, values)
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Transport cost.
#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    /// `|x - y|^2 / 2`.
    Quadratic,
    /// `(1/alpha) log(1 + alpha x . y)`; `x . y` when `alpha = 0`.
    Log { alpha: f64 },
    /// Explicit `c(x_i, y_j)` with rows indexed by X and columns by Y.
    /// Non-finite entries mark infeasible pairs.
    Table(Matrix),
}

impl CostSpec {
    /// `c(x_i, y_j)`, or `None` for an infeasible pair.
    pub fn eval(&self, i: usize, x: &Vector, j: usize, y: &Vector) -> Option<f64> {
        match self {
            CostSpec::Quadratic => Some(0.5 * (x - y).norm_squared()),
            CostSpec::Log { alpha } => cost_c_alpha(x, y, *alpha).ok(),
            CostSpec::Table(m) => {
                let v = *m.get((i, j))?;
                v.is_finite().then_some(v)
            }
        }
    }
}

/// Output of a c-transform.
#[derive(Debug, Clone, PartialEq)]
pub struct CTransform {
    /// The transformed function on the target grid.
    pub function: DiscreteFunction,
    /// Lowest-index optimizer for each target.
    pub argmin: Vec<usize>,
    /// All optimizers within the tie tolerance, per target.
    pub optimizers: Vec<Vec<usize>>,
}

struct Scan {
    value: f64,
    argmin: usize,
    optimizers: Vec<usize>,
}

fn scan_target(n_sources: usize, term: impl Fn(usize) -> Option<f64>) -> Option<Scan> {
    let mut buf = Vec::with_capacity(n_sources);
    let mut best: Option<(f64, usize)> = None;
    for s in 0..n_sources {
        if let Some(v) = term(s) {
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, s));
            }
            buf.push((s, v));
        }
    }
    let (value, argmin) = best?;
    let tol = TIE_TOL * value.abs().max(1.0);
    let optimizers = buf.into_iter().filter(|(_, v)| *v <= value + tol).map(|(s, _)| s).collect();
    Some(Scan { value, argmin, optimizers })
}

/// Evaluates `min_s term(s, t)` for every target `t`, split over threads in
/// contiguous chunks so the result is independent of scheduling.
fn transform_core(
    n_sources: usize,
    n_targets: usize,
    term: &(dyn Fn(usize, usize) -> Option<f64> + Sync),
) -> Result<Vec<Scan>> {
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(n_targets.max(1));
    let chunk = n_targets.div_ceil(workers.max(1)).max(1);
    let results: Vec<Vec<Option<Scan>>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..n_targets)
            .step_by(chunk)
            .map(|start| {
                let end = (start + chunk).min(n_targets);
                scope.spawn(move || (start..end).map(|t| scan_target(n_sources, |s| term(s, t))).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("transform worker panicked")).collect()
    });
    results.into_iter().flatten().enumerate().map(|(t, s)| s.ok_or(Error::NoFeasiblePartner { index: t })).collect()
}

fn assemble(points: &[Vector], scans: Vec<Scan>) -> Result<CTransform> {
    let mut values = Vec::with_capacity(scans.len());
    let mut argmin = Vec::with_capacity(scans.len());
    let mut optimizers = Vec::with_capacity(scans.len());
    for s in scans {
        values.push(s.value);
        argmin.push(s.argmin);
        optimizers.push(s.optimizers);
    }
    Ok(CTransform { function: DiscreteFunction::new(points.to_vec(), values)?, argmin, optimizers })
}

/// `f^c(y) = min_x (c(x, y) - f(x))` for `f` on X, evaluated on `y_grid`.
pub fn c_transform(f: &DiscreteFunction, cost: &CostSpec, y_grid: &[Vector]) -> Result<CTransform> {
    let xs = f.points();
    let fv = f.values();
    let term = |i: usize, j: usize| cost.eval(i, &xs[i], j, &y_grid[j]).map(|c| c - fv[i]);
    let scans = transform_core(xs.len(), y_grid.len(), &term)?;
    assemble(y_grid, scans)
}

/// `g^c(x) = min_y (c(x, y) - g(y))` for `g` on Y, evaluated on `x_grid`.
pub fn c_transform_dual(g: &DiscreteFunction, cost: &CostSpec, x_grid: &[Vector]) -> Result<CTransform> {
    let ys = g.points();
    let gv = g.values();
    let term = |j: usize, i: usize| cost.eval(i, &x_grid[i], j, &ys[j]).map(|c| c - gv[j]);
    let scans = transform_core(ys.len(), x_grid.len(), &term)?;
    assemble(x_grid, scans)
}

/// `f^{cc}` on the grid of `f`, through `y_grid`.
pub fn double_transform(f: &DiscreteFunction, cost: &CostSpec, y_grid: &[Vector]) -> Result<DiscreteFunction> {
    let fc = c_transform(f, cost, y_grid)?;
    Ok(c_transform_dual(&fc.function, cost, f.points())?.function)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityReport {
    /// `max_x (f^{cc}(x) - f(x))`, never negative up to roundoff.
    pub max_deviation: f64,
    pub c_concave: bool,
}

/// `f` is c-concave (relative to `y_grid`) when `f^{cc} = f` within `tol`.
pub fn is_c_concave(f: &DiscreteFunction, cost: &CostSpec, y_grid: &[Vector], tol: f64) -> Result<ConcavityReport> {
    let fcc = double_transform(f, cost, y_grid)?;
    let max_deviation = fcc.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ConcavityReport { max_deviation, c_concave: max_deviation <= tol })
}

/// Index pairs `(i, j)` with `|f(x_i) + f^c(y_j) - c(x_i, y_j)| <= tol`.
pub fn c_superdifferential(
    f: &DiscreteFunction,
    f_c: &DiscreteFunction,
    cost: &CostSpec,
    tol: f64,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, (x, fx)) in f.points().iter().zip(f.values()).enumerate() {
        for (j, (y, gy)) in f_c.points().iter().zip(f_c.values()).enumerate() {
            if let Some(c) = cost.eval(i, x, j, y) {
                if (fx + gy - c).abs() <= tol {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs
}

/// Precomputed c-transform and c-gradient partners for repeated
/// c-divergence queries.
#[derive(Debug, Clone)]
pub struct CDivergence {
    f: DiscreteFunction,
    cost: CostSpec,
    transform: CTransform,
    partners: Vec<Vec<usize>>,
}

impl CDivergence {
    pub fn new(f: DiscreteFunction, cost: CostSpec, y_grid: &[Vector]) -> Result<Self> {
        let transform = c_transform(&f, &cost, y_grid)?;
        let mut partners = vec![Vec::new(); f.len()];
        for (j, opts) in transform.optimizers.iter().enumerate() {
            for &i in opts {
                partners[i].push(j);
            }
        }
        Ok(Self { f, cost, transform, partners })
    }

    pub fn transform(&self) -> &CTransform {
        &self.transform
    }

    /// Unique c-gradient partner of `x_i`, or an error when absent or tied.
    pub fn partner(&self, i: usize) -> Result<usize> {
        match self.partners.get(i).map(Vec::as_slice) {
            None => Err(Error::InvalidParameter(format!("index {i} out of range"))),
            Some([]) => Err(Error::MissingCGradient { index: i }),
            Some([j]) => Ok(*j),
            Some(many) => Err(Error::NonUniqueCGradient { index: i, count: many.len() }),
        }
    }

    /// `D_f[x : x'] = c(x, y') - c(x', y') - (f(x) - f(x'))` with `y'` the
    /// partner of `x'`.
    pub fn divergence(&self, x_idx: usize, x_prime_idx: usize) -> Result<f64> {
        let n = self.f.len();
        if x_idx >= n {
            return Err(Error::InvalidParameter(format!("index {x_idx} out of range")));
        }
        let j = self.partner(x_prime_idx)?;
        let xs = self.f.points();
        let y = &self.transform.function.points()[j];
        let infeasible = || Error::NonPositivePairing { value: f64::NAN };
        let c1 = self.cost.eval(x_idx, &xs[x_idx], j, y).ok_or_else(infeasible)?;
        let c2 = self.cost.eval(x_prime_idx, &xs[x_prime_idx], j, y).ok_or_else(infeasible)?;
        let fv = self.f.values();
        Ok(c1 - c2 - (fv[x_idx] - fv[x_prime_idx]))
    }
}

/// One-shot c-divergence; prefer [`CDivergence`] for repeated queries.
pub fn c_divergence(
    f: &DiscreteFunction,
    cost: &CostSpec,
    y_grid: &[Vector],
    x_idx: usize,
    x_prime_idx: usize,
) -> Result<f64> {
    CDivergence::new(f.clone(), cost.clone(), y_grid)?.divergence(x_idx, x_prime_idx)
}

/// c-gradient for the log cost, `Dphi(x) / (1 - alpha Dphi(x) . x)`; the
/// same map as the alpha-gradient.
pub fn log_cost_c_gradient(phi: &PotentialSpec, x: &Vector) -> Result<Vector> {
    alpha_gradient(phi, x)
}
