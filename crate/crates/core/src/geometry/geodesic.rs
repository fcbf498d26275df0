//! Primal and dual geodesics.
//!
//! Geodesics of `G^k_ij = -alpha(d_i phi delta_jk + d_j phi delta_ik)` solve
//! `x'' = 2 alpha x' (d/dt) phi(x)`, so their traces are chords
//! `tau(u) = (1 - u) x0 + u x1` and only the speed is nontrivial. Writing
//! `x(t) = tau(h(t))` gives `h'' = 2 alpha h' (d/dt) phi`, i.e.
//! `h'(t) = C exp(2 alpha phi(tau(h(t))))`. Separating variables,
//!
//! ```text
//! t(u) = int_0^u exp(-2 alpha phi(tau)) / int_0^1 exp(-2 alpha phi(tau))
//! ```
//!
//! and `h` is the inverse of `t`. This needs one quadrature along the chord
//! and a monotone inversion, no fixed-point iteration.

use std::cell::RefCell;

use serde::Serialize;

use crate::duality::DualPair;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::potentials::PotentialSpec;
use crate::quadrature::{cumulative_simpson, richardson_panels, simpson};

/// Relative Richardson tolerance for the time-change quadrature.
const QUADRATURE_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 1 << 16;
/// Sample count for the a-posteriori dual segment membership test.
pub const DUAL_SEGMENT_CHECKS: usize = 33;

/// Coordinate chart a path lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Primal,
    Dual,
}

type WeightFn = std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A geodesic with its time change tabulated on the chord parameter.
#[derive(Clone)]
pub struct GeodesicPath {
    pub chart: Chart,
    pub start: Vector,
    pub end: Vector,
    /// `u` nodes of the quadrature table.
    nodes: Vec<f64>,
    /// Unnormalized `int_0^u w` at the nodes.
    cumulative: Vec<f64>,
    /// `int_0^1 w`.
    total: f64,
    /// `log w(u) = -2 alpha potential(tau(u))`; sampled lazily for inversion.
    log_weight: WeightFn,
    /// `(t, x(t))` at `n_samples + 1` evenly spaced times.
    pub samples: Vec<(f64, Vector)>,
}

impl std::fmt::Debug for GeodesicPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeodesicPath")
            .field("chart", &self.chart)
            .field("start", &self.start)
            .field("end", &self.end)
            .field("panels", &(self.nodes.len() - 1))
            .field("samples", &self.samples.len())
            .finish()
    }
}

impl GeodesicPath {
    fn chord(&self, u: f64) -> Vector {
        &self.start * (1.0 - u) + &self.end * u
    }

    fn weight(&self, u: f64) -> f64 {
        (self.log_weight)(u).exp()
    }

    /// `t(u)`, the time at which the chord point `u` is reached.
    pub fn time_of(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let n = self.nodes.len() - 1;
        let m = ((u * n as f64).floor() as usize).min(n - 1);
        let partial = simpson(|v| self.weight(v), self.nodes[m], u, 4);
        (self.cumulative[m] + partial) / self.total
    }

    /// `h(t)`, the chord parameter at time `t`; `h(0) = 0` and `h(1) = 1` exactly.
    pub fn h(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let target = t * self.total;
        let m = self.cumulative.partition_point(|c| *c <= target).clamp(1, self.nodes.len() - 1) - 1;
        let (lo, hi) = (self.nodes[m], self.nodes[m + 1]);
        let (c_lo, c_hi) = (self.cumulative[m], self.cumulative[m + 1]);
        let mut u = lo + (hi - lo) * (target - c_lo) / (c_hi - c_lo);
        for _ in 0..50 {
            let f = self.cumulative[m] + simpson(|v| self.weight(v), lo, u, 4) - target;
            let du = f / self.weight(u);
            u = (u - du).clamp(lo, hi);
            if du.abs() < 1e-15 {
                break;
            }
        }
        u
    }

    /// Position at time `t`.
    pub fn point(&self, t: f64) -> Vector {
        self.chord(self.h(t))
    }

    /// `h'(t) = total / w(h(t))`.
    pub fn h_prime(&self, t: f64) -> f64 {
        self.total / self.weight(self.h(t))
    }

    /// Velocity `h'(t) (end - start)`.
    pub fn velocity(&self, t: f64) -> Vector {
        (&self.end - &self.start) * self.h_prime(t)
    }

    /// `max |x(t) - chord(h(t))|` relative to the chord length, over samples.
    pub fn collinearity(&self) -> f64 {
        let pts: Vec<Vector> = self.samples.iter().map(|(_, x)| x.clone()).collect();
        collinearity_deviation(&pts, &self.start, &self.end)
    }
}

/// Largest distance of `points` from the line through `a` and `b`, divided
/// by `|b - a|`.
pub fn collinearity_deviation(points: &[Vector], a: &Vector, b: &Vector) -> f64 {
    let dir = b - a;
    let len = dir.norm();
    if len == 0.0 {
        return points.iter().map(|p| (p - a).norm()).fold(0.0, f64::max);
    }
    let unit = dir / len;
    points
        .iter()
        .map(|p| {
            let v = p - a;
            (&v - &unit * unit.dot(&v)).norm() / len
        })
        .fold(0.0, f64::max)
}

fn build_path(
    chart: Chart,
    start: &Vector,
    end: &Vector,
    n_samples: usize,
    log_weight: WeightFn,
) -> Result<GeodesicPath> {
    let w = |u: f64| log_weight(u).exp();
    let panels = richardson_panels(w, 0.0, 1.0, 16, QUADRATURE_TOL, MAX_PANELS)?;
    let cumulative = cumulative_simpson(w, 0.0, 1.0, panels);
    let total = *cumulative.last().expect("non-empty table");
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NoConvergence { iterations: panels, residual: total });
    }
    let nodes = (0..=panels).map(|m| m as f64 / panels as f64).collect();
    let mut path = GeodesicPath {
        chart,
        start: start.clone(),
        end: end.clone(),
        nodes,
        cumulative,
        total,
        log_weight,
        samples: Vec::new(),
    };
    let n = n_samples.max(1);
    path.samples = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            (t, path.point(t))
        })
        .collect();
    Ok(path)
}

/// Primal geodesic from `xi0` to `xi1`: straight chord with the closed-form
/// time change, tabulated at `n_samples + 1` times.
pub fn primal_geodesic(phi: &PotentialSpec, xi0: &Vector, xi1: &Vector, n_samples: usize) -> Result<GeodesicPath> {
    phi.ensure_interior(xi0)?;
    phi.ensure_interior(xi1)?;
    let checks = 64;
    for i in 0..=checks {
        let u = i as f64 / checks as f64;
        if !phi.contains(&(xi0 * (1.0 - u) + xi1 * u)) {
            return Err(Error::SegmentInfeasible { t: u });
        }
    }
    let a = phi.alpha().alpha();
    let (p, x0, x1) = (phi.clone(), xi0.clone(), xi1.clone());
    let log_weight = std::sync::Arc::new(
        move |u: f64| {
            if a == 0.0 {
                0.0
            } else {
                -2.0 * a * p.value(&(&x0 * (1.0 - u) + &x1 * u))
            }
        },
    );
    build_path(Chart::Primal, xi0, xi1, n_samples, log_weight)
}

/// Inverts the alpha-gradient at [`DUAL_SEGMENT_CHECKS`] evenly spaced
/// points of the eta-segment, returning the primal points. A failed
/// inversion is reported with its segment parameter.
pub fn check_dual_segment(pair: &DualPair, eta0: &Vector, eta1: &Vector) -> Result<Vec<Vector>> {
    let mut seed: Option<Vector> = None;
    let mut anchors = Vec::with_capacity(DUAL_SEGMENT_CHECKS);
    for i in 0..DUAL_SEGMENT_CHECKS {
        let u = i as f64 / (DUAL_SEGMENT_CHECKS - 1) as f64;
        let eta = eta0 * (1.0 - u) + eta1 * u;
        let xi = pair.primal_point(&eta, seed.as_ref()).map_err(|e| {
            log::debug!("dual segment check failed at u = {u}: {e}");
            Error::SegmentInfeasible { t: u }
        })?;
        anchors.push(xi.clone());
        seed = Some(xi);
    }
    Ok(anchors)
}

/// Dual geodesic from `eta0` to `eta1`: straight in the eta-chart with the
/// time change driven by the conjugate `psi`.
///
/// The segment's membership in the dual domain is checked by inverting the
/// alpha-gradient at [`DUAL_SEGMENT_CHECKS`] evenly spaced points.
pub fn dual_geodesic(pair: &DualPair, eta0: &Vector, eta1: &Vector, n_samples: usize) -> Result<GeodesicPath> {
    let anchors = check_dual_segment(pair, eta0, eta1)?;
    let a = pair.alpha();
    let owned = pair.clone();
    let (e0, e1) = (eta0.clone(), eta1.clone());
    let log_weight = std::sync::Arc::new(move |u: f64| {
        if a == 0.0 {
            return 0.0;
        }
        let eta = &e0 * (1.0 - u) + &e1 * u;
        // the nearest anchor is a reliable Newton seed anywhere on the segment
        let idx = ((u * (DUAL_SEGMENT_CHECKS - 1) as f64).round() as usize).min(DUAL_SEGMENT_CHECKS - 1);
        let psi = owned
            .primal_point(&eta, Some(&anchors[idx]))
            .and_then(|x| Ok(crate::duality::cost_c_alpha(&x, &eta, a)? - owned.primal().value(&x)));
        match psi {
            Ok(v) => -2.0 * a * v,
            Err(_) => f64::NAN,
        }
    });
    build_path(Chart::Dual, eta0, eta1, n_samples, log_weight)
}

/// RK4 solution of the projective geodesic equation.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn end(&self) -> Vector {
        Vector::from_column_slice(self.points.last().expect("non-empty trajectory"))
    }

    pub fn point_vectors(&self) -> Vec<Vector> {
        self.points.iter().map(|p| Vector::from_column_slice(p)).collect()
    }
}

fn integrate_projective<G, C>(
    alpha: f64,
    gradient: G,
    contains: C,
    x0: &Vector,
    v0: &Vector,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory>
where
    G: Fn(&Vector) -> Result<Vector>,
    C: Fn(&Vector) -> bool,
{
    if x0.len() != v0.len() {
        return Err(Error::DimensionMismatch { expected: x0.len(), found: v0.len() });
    }
    let steps = steps.max(1);
    let dt = t_end / steps as f64;
    let accel = |x: &Vector, v: &Vector| -> Result<Vector> {
        if !contains(x) {
            return Err(Error::OutsideDomain { point: x.iter().copied().collect() });
        }
        let g = gradient(x)?;
        Ok(v * (2.0 * alpha * g.dot(v)))
    };
    let (mut x, mut v) = (x0.clone(), v0.clone());
    let mut out = Trajectory {
        times: vec![0.0],
        points: vec![x.iter().copied().collect()],
        velocities: vec![v.iter().copied().collect()],
    };
    for n in 0..steps {
        let k1x = v.clone();
        let k1v = accel(&x, &v)?;
        let x2 = &x + &k1x * (0.5 * dt);
        let v2 = &v + &k1v * (0.5 * dt);
        let k2v = accel(&x2, &v2)?;
        let x3 = &x + &v2 * (0.5 * dt);
        let v3 = &v + &k2v * (0.5 * dt);
        let k3v = accel(&x3, &v3)?;
        let x4 = &x + &v3 * dt;
        let v4 = &v + &k3v * dt;
        let k4v = accel(&x4, &v4)?;
        x += (&k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
        v += (&k1v + &k2v * 2.0 + &k3v * 2.0 + &k4v) * (dt / 6.0);
        if !contains(&x) {
            return Err(Error::OutsideDomain { point: x.iter().copied().collect() });
        }
        out.times.push((n + 1) as f64 * dt);
        out.points.push(x.iter().copied().collect());
        out.velocities.push(v.iter().copied().collect());
    }
    Ok(out)
}

/// RK4 integration of `x'' = 2 alpha x' (Dphi(x) . x')` on `[0, t_end]`.
pub fn geodesic_ode_integrate(
    phi: &PotentialSpec,
    xi0: &Vector,
    v0: &Vector,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    phi.ensure_interior(xi0)?;
    integrate_projective(phi.alpha().alpha(), |x| Ok(phi.gradient(x)), |x| phi.contains(x), xi0, v0, t_end, steps)
}

/// RK4 integration of the dual geodesic equation in the eta-chart, with
/// `Dpsi(eta) = xi / (1 + alpha xi . eta)`.
pub fn dual_geodesic_ode_integrate(
    pair: &DualPair,
    eta0: &Vector,
    v0: &Vector,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    let seed = RefCell::new(pair.primal_point(eta0, None)?);
    integrate_projective(
        pair.alpha(),
        |eta| {
            let s = seed.borrow().clone();
            let xi = pair.primal_point(eta, Some(&s))?;
            let g = pair.conjugate_gradient(eta, Some(&xi))?;
            seed.replace(xi);
            Ok(g)
        },
        |_| true,
        eta0,
        v0,
        t_end,
        steps,
    )
}
