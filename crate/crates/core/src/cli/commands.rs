//! The single-shot subcommands.

use rand::Rng;
use serde_json::{json, Value};

use super::config::{ChartChoice, RunConfig, DEFAULT_GEODESIC_SAMPLES, DEFAULT_SAMPLES, RK4_STEPS_PER_ROW};
use super::output::{indexed, Cell, Table};
use crate::duality::{bregman_divergence, l_divergence, DualPair};
use crate::error::Error;
use crate::families::{verify_conjugate_entropy, verify_renyi_theorem, DiscreteFamily};
use crate::geometry::{
    constant_curvature_template, curvature_tensor, dual_geodesic, dual_geodesic_ode_integrate, fit_sectional_curvature,
    geodesic_ode_integrate, metric, orthogonalize_triple, primal_geodesic, pythagoras_check, GeodesicPath,
};
use crate::linalg::Vector;
use crate::potentials::PotentialSpec;
use crate::reconstruct::{
    check_metric_identity, ConnectionField, Reconstruction, DEFAULT_QUADRATURE_PANELS, ONE_FORM_FD_STEP,
};
use crate::sampling::{sample_direction, sample_interior, sample_pairs, sampling_region, seeded_rng};

/// Default tolerance of the geodesic ODE cross-check.
pub const GEODESIC_TOL: f64 = 1e-6;
/// Default tolerance of the gradient-inverse roundtrip in `conjugate`.
pub const ROUNDTRIP_TOL: f64 = 1e-8;
pub const CURVATURE_TOL: f64 = 1e-8;
pub const PYTHAGORAS_TOL: f64 = 1e-9;
pub const RENYI_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-7;

/// Everything a subcommand needs besides the config file.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    /// `--tol`, overriding the config's tolerance.
    pub tol: Option<f64>,
}

impl Context {
    fn tolerance(&self, default: f64) -> f64 {
        self.tol.or(self.config.tolerance).unwrap_or(default)
    }

    fn samples(&self) -> usize {
        self.config.samples.unwrap_or(DEFAULT_SAMPLES)
    }
}

/// A rendered command result and whether its check held.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub table: Table,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Malformed or incomplete input (exit 1).
    Config(String),
    /// Domain or numerical failure (exit 2).
    Math(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Math(e)
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => f.write_str(m),
            Failure::Math(e) => write!(f, "{e}"),
        }
    }
}

type CmdResult = std::result::Result<Output, Failure>;

fn raw(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn point(v: &[f64], d: usize) -> std::result::Result<Vector, Failure> {
    if v.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: v.len() }.into());
    }
    Ok(Vector::from_column_slice(v))
}

fn push_vec(row: &mut Vec<Cell>, v: &Vector) {
    row.extend(v.iter().map(|x| Cell::Num(*x)));
}

fn header(fixed: &[&str], vectors: &[(&str, usize)], tail: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
    for (p, d) in vectors {
        h.extend(indexed(p, *d));
    }
    h.extend(tail.iter().map(|s| s.to_string()));
    h
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// The potential named by the config, or the potential of its family.
pub fn load_potential(cfg: &RunConfig) -> std::result::Result<PotentialSpec, Failure> {
    match (&cfg.potential, &cfg.family) {
        (Some(p), _) => Ok(p.build()?),
        (None, Some(f)) => Ok(f.build()?.potential_spec()?),
        (None, None) => Err(Failure::Config("config needs a \"potential\" or \"family\"".into())),
    }
}

fn load_family(cfg: &RunConfig) -> std::result::Result<DiscreteFamily, Failure> {
    match &cfg.family {
        Some(f) => Ok(f.build()?),
        None => Err(Failure::Config("config needs a \"family\"".into())),
    }
}

fn random_points(ctx: &Context, phi: &PotentialSpec, n: usize) -> std::result::Result<Vec<Vector>, Failure> {
    Ok(sample_interior(&mut seeded_rng(ctx.seed), phi.domain(), n)?)
}

/// Configured pairs, or `samples` random pairs from the seed.
fn pairs(ctx: &Context, phi: &PotentialSpec) -> std::result::Result<Vec<(Vector, Vector)>, Failure> {
    let d = phi.dim();
    match &ctx.config.pairs {
        Some(ps) => ps.iter().map(|[a, b]| Ok((point(a, d)?, point(b, d)?))).collect(),
        None => Ok(sample_pairs(&mut seeded_rng(ctx.seed), phi, ctx.samples())?),
    }
}

fn points(ctx: &Context, phi: &PotentialSpec) -> std::result::Result<Vec<Vector>, Failure> {
    match &ctx.config.points {
        Some(ps) => ps.iter().map(|p| point(p, phi.dim())).collect(),
        None => random_points(ctx, phi, ctx.samples()),
    }
}

/// Divergence, Bregman divergence, dual coordinates and Fenchel gap per pair.
pub fn eval(ctx: &Context) -> CmdResult {
    let phi = load_potential(&ctx.config)?;
    let pair = DualPair::new(phi.clone());
    let d = phi.dim();
    let mut table = Table::new(header(&[], &[("xi", d), ("xi_prime", d)], &["divergence", "bregman", "fenchel_gap"]));
    table.header.extend(indexed("dual_eta", d));
    let mut rows = Vec::new();
    for (xi, xp) in pairs(ctx, &phi)? {
        let divergence = l_divergence(&phi, &xi, &xp)?;
        let bregman = bregman_divergence(&phi, &xi, &xp)?;
        let eta = pair.dual_point(&xp)?;
        let gap = pair.fenchel_gap(&xi, &eta)?;
        let mut row = Vec::new();
        push_vec(&mut row, &xi);
        push_vec(&mut row, &xp);
        row.extend([divergence.into(), bregman.into(), gap.into()]);
        push_vec(&mut row, &eta);
        table.push(row);
        rows.push(json!({
            "xi": raw(&xi),
            "xi_prime": raw(&xp),
            "divergence": divergence,
            "bregman": bregman,
            "dual_eta": raw(&eta),
            "fenchel_gap": gap,
        }));
    }
    let json = json!({
        "potential": phi.name(),
        "alpha": phi.alpha().alpha(),
        "class": phi.alpha().sign().to_string(),
        "pairs": rows,
    });
    Ok(Output { json, table, passed: true })
}

/// Conjugate values at primal points (closed form plus inversion roundtrip)
/// and at dual points (by inversion).
pub fn conjugate(ctx: &Context) -> CmdResult {
    let phi = load_potential(&ctx.config)?;
    let pair = DualPair::new(phi.clone());
    let d = phi.dim();
    let tol = ctx.tolerance(ROUNDTRIP_TOL);
    let mut table = Table::new(header(&["kind"], &[("xi", d), ("eta", d)], &["psi", "roundtrip"]));
    let mut rows = Vec::new();
    let mut worst = 0.0;
    let etas = match &ctx.config.eta {
        Some(es) => es.iter().map(|e| point(e, d)).collect::<std::result::Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let primal = if ctx.config.eta.is_some() && ctx.config.points.is_none() { Vec::new() } else { points(ctx, &phi)? };
    for xi in primal {
        let (eta, psi) = pair.conjugate_at_primal(&xi)?;
        let back = pair.primal_point(&eta, None)?;
        let roundtrip = (&back - &xi).norm();
        worst = max_of([worst, roundtrip]);
        let mut row = vec![Cell::from("primal")];
        push_vec(&mut row, &xi);
        push_vec(&mut row, &eta);
        row.extend([psi.into(), roundtrip.into()]);
        table.push(row);
        rows.push(json!({"kind": "primal", "xi": raw(&xi), "eta": raw(&eta), "psi": psi, "roundtrip": roundtrip}));
    }
    for eta in etas {
        let xi = pair.primal_point(&eta, None)?;
        let psi = pair.conjugate(&eta, Some(&xi))?;
        let mut row = vec![Cell::from("dual")];
        push_vec(&mut row, &xi);
        push_vec(&mut row, &eta);
        row.extend([psi.into(), Cell::Num(f64::NAN)]);
        table.push(row);
        rows.push(json!({"kind": "dual", "xi": raw(&xi), "eta": raw(&eta), "psi": psi, "roundtrip": null}));
    }
    let passed = worst <= tol;
    let json = json!({
        "potential": phi.name(),
        "rows": rows,
        "max_roundtrip": worst,
        "tolerance": tol,
        "passed": passed,
    });
    Ok(Output { json, table, passed })
}

/// Geodesic trace with `h(t)`, both coordinate systems and the deviation of
/// an RK4 solution of the geodesic equation from the closed form.
pub fn geodesic(ctx: &Context) -> CmdResult {
    let phi = load_potential(&ctx.config)?;
    let pair = DualPair::new(phi.clone());
    let d = phi.dim();
    let tol = ctx.tolerance(GEODESIC_TOL);
    let (start, end) = match (&ctx.config.start, &ctx.config.end) {
        (Some(a), Some(b)) => (point(a, d)?, point(b, d)?),
        (None, None) => {
            let pts = random_points(ctx, &phi, 2)?;
            (pts[0].clone(), pts[1].clone())
        }
        _ => return Err(Failure::Config("geodesic needs both \"start\" and \"end\"".into())),
    };
    let n = ctx.config.geodesic_samples.unwrap_or(DEFAULT_GEODESIC_SAMPLES).max(1);
    let chart = ctx.config.chart.unwrap_or_default();
    let steps = n * RK4_STEPS_PER_ROW;
    let (path, ode): (GeodesicPath, Vec<Vector>) = match chart {
        ChartChoice::Primal => {
            let path = primal_geodesic(&phi, &start, &end, n)?;
            let traj = geodesic_ode_integrate(&phi, &start, &path.velocity(0.0), 1.0, steps)?;
            (path, traj.point_vectors())
        }
        ChartChoice::Dual => {
            let (e0, e1) = (pair.dual_point(&start)?, pair.dual_point(&end)?);
            let path = dual_geodesic(&pair, &e0, &e1, n)?;
            let traj = dual_geodesic_ode_integrate(&pair, &e0, &path.velocity(0.0), 1.0, steps)?;
            (path, traj.point_vectors())
        }
    };
    let mut table = Table::new(header(&["t", "h"], &[("xi", d), ("eta", d)], &["ode_deviation"]));
    let mut rows = Vec::new();
    let mut worst = 0.0;
    let mut seed = start.clone();
    for (i, (t, x)) in path.samples.iter().enumerate() {
        let h = path.h(*t);
        let (xi, eta) = match chart {
            ChartChoice::Primal => (x.clone(), pair.dual_point(x)?),
            ChartChoice::Dual => {
                let xi = pair.primal_point(x, Some(&seed))?;
                (xi, x.clone())
            }
        };
        seed = xi.clone();
        let dev = (&ode[i * RK4_STEPS_PER_ROW] - x).norm();
        worst = max_of([worst, dev]);
        let mut row = vec![Cell::Num(*t), Cell::Num(h)];
        push_vec(&mut row, &xi);
        push_vec(&mut row, &eta);
        row.push(dev.into());
        table.push(row);
        rows.push(json!({"t": t, "h": h, "xi": raw(&xi), "eta": raw(&eta), "ode_deviation": dev}));
    }
    let passed = worst <= tol;
    let json = json!({
        "potential": phi.name(),
        "chart": chart,
        "start": raw(&start),
        "end": raw(&end),
        "collinearity": path.collinearity(),
        "max_ode_deviation": worst,
        "tolerance": tol,
        "passed": passed,
        "rows": rows,
    });
    Ok(Output { json, table, passed })
}

/// Curvature residual against `k = -s alpha`, where `alpha` may be replaced
/// by `claimed_alpha`.
pub fn curvature(ctx: &Context) -> CmdResult {
    let phi = load_potential(&ctx.config)?;
    let d = phi.dim();
    let tol = ctx.tolerance(CURVATURE_TOL);
    let claimed = ctx.config.claimed_alpha.unwrap_or(phi.alpha().alpha());
    let predicted = -phi.alpha().sign().factor() * claimed;
    let mut table = Table::new(header(&[], &[("xi", d)], &["predicted_k", "fitted_k", "fit_residual", "residual"]));
    let mut rows = Vec::new();
    let mut worst = 0.0;
    for xi in points(ctx, &phi)? {
        let r = curvature_tensor(&phi, &xi)?;
        let g = metric(&phi, &xi)?;
        let fit = fit_sectional_curvature(&r, &g);
        let b = constant_curvature_template(&g);
        let residual = max_of(r.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - predicted * y).abs()));
        worst = max_of([worst, residual]);
        let mut row = Vec::new();
        push_vec(&mut row, &xi);
        row.extend([predicted.into(), fit.k.into(), fit.residual.into(), residual.into()]);
        table.push(row);
        rows.push(json!({
            "xi": raw(&xi),
            "predicted_k": predicted,
            "fitted_k": fit.k,
            "fit_residual": fit.residual,
            "residual": residual,
        }));
    }
    let passed = worst <= tol;
    let json = json!({
        "potential": phi.name(),
        "claimed_alpha": claimed,
        "max_residual": worst,
        "tolerance": tol,
        "passed": passed,
        "points": rows,
    });
    Ok(Output { json, table, passed })
}

/// Orthogonal triple `r = q + step w` built from a random direction; the
/// step is halved until `r` is interior and the dual segment is feasible.
pub fn orthogonal_triple<R: Rng>(
    rng: &mut R,
    pair: &DualPair,
    p: &Vector,
    q: &Vector,
    step: f64,
) -> crate::Result<(Vector, crate::geometry::PythagorasReport)> {
    let dir = sample_direction(rng, q.len());
    let mut s = step;
    let mut last = Error::DegenerateDirection;
    for _ in 0..20 {
        match orthogonalize_triple(pair, p, q, &dir, s).and_then(|r| Ok((r.clone(), pythagoras_check(pair, p, q, &r)?)))
        {
            Ok(out) => return Ok(out),
            Err(e @ Error::DegenerateDirection) => return Err(e),
            Err(e) => last = e,
        }
        s *= 0.5;
    }
    Err(last)
}

/// Pythagorean gap for configured triples, or for random orthogonal triples.
pub fn pythagoras(ctx: &Context) -> CmdResult {
    let phi = load_potential(&ctx.config)?;
    let pair = DualPair::new(phi.clone());
    let d = phi.dim();
    let tol = ctx.tolerance(PYTHAGORAS_TOL);
    let triples: Vec<(Vector, Vector, Vector, crate::geometry::PythagorasReport, bool)> = match &ctx.config.triples {
        Some(ts) => ts
            .iter()
            .map(|[p, q, r]| {
                let (p, q, r) = (point(p, d)?, point(q, d)?, point(r, d)?);
                let rep = pythagoras_check(&pair, &p, &q, &r)?;
                Ok((p, q, r, rep, false))
            })
            .collect::<std::result::Result<_, Failure>>()?,
        None => {
            let mut rng = seeded_rng(ctx.seed);
            let (_, radius) = sampling_region(phi.domain());
            let mut out = Vec::new();
            for _ in 0..ctx.samples() {
                let (q, p) = sample_pairs(&mut rng, &phi, 1)?.remove(0);
                let (r, rep) = orthogonal_triple(&mut rng, &pair, &p, &q, radius)?;
                out.push((p, q, r, rep, true));
            }
            out
        }
    };
    let mut table = Table::new(header(
        &["orthogonal"],
        &[("p", d), ("q", d), ("r", d)],
        &["d_qp", "d_rq", "d_rp", "gap", "relative_gap", "inner_product"],
    ));
    let mut rows = Vec::new();
    let mut worst = 0.0;
    for (p, q, r, rep, constructed) in &triples {
        if *constructed {
            worst = max_of([worst, rep.relative_gap.abs()]);
        }
        let mut row = vec![Cell::Bool(*constructed)];
        for v in [p, q, r] {
            push_vec(&mut row, v);
        }
        row.extend(
            [rep.d_qp, rep.d_rq, rep.d_rp, rep.gap, rep.relative_gap, rep.inner_product].map(Cell::Num).into_iter(),
        );
        table.push(row);
        rows.push(json!({"orthogonal": constructed, "p": raw(p), "q": raw(q), "r": raw(r), "report": rep}));
    }
    let passed = worst <= tol;
    let json = json!({
        "potential": phi.name(),
        "max_orthogonal_relative_gap": worst,
        "tolerance": tol,
        "passed": passed,
        "triples": rows,
    });
    Ok(Output { json, table, passed })
}

/// The Rényi identity and the conjugate-entropy identity of a family.
pub fn renyi(ctx: &Context) -> CmdResult {
    let fam = load_family(&ctx.config)?;
    let spec = fam.potential_spec()?;
    let d = fam.dim();
    let tol = ctx.tolerance(RENYI_TOL);
    let case = fam.renyi_case();
    let mut table = Table::new(header(
        &[],
        &[("xi", d), ("xi_prime", d)],
        &["l_divergence", "renyi_side", "gap", "conjugate", "entropy_side", "conjugate_gap"],
    ));
    let mut rows = Vec::new();
    let mut worst = 0.0;
    for (xi, xp) in pairs(ctx, &spec)? {
        let id = verify_renyi_theorem(&fam, &xi, &xp)?;
        let ce = verify_conjugate_entropy(&fam, &xi)?;
        worst = max_of([worst, id.gap, ce.gap]);
        let mut row = Vec::new();
        push_vec(&mut row, &xi);
        push_vec(&mut row, &xp);
        row.extend([id.lhs, id.rhs, id.gap, ce.lhs, ce.rhs, ce.gap].map(Cell::Num).into_iter());
        table.push(row);
        rows.push(json!({"xi": raw(&xi), "xi_prime": raw(&xp), "renyi": id, "conjugate_entropy": ce}));
    }
    let passed = worst <= tol;
    let json = json!({
        "regime": case.regime,
        "class": case.class.to_string(),
        "order": case.order,
        "factor": case.factor,
        "swap": case.swap,
        "max_gap": worst,
        "tolerance": tol,
        "passed": passed,
        "pairs": rows,
    });
    Ok(Output { json, table, passed })
}

/// Reconstructs the potential from its connection and compares divergences.
pub fn reconstruct(ctx: &Context) -> CmdResult {
    let phi = load_potential(&ctx.config)?;
    let d = phi.dim();
    let tol = ctx.tolerance(RECONSTRUCTION_TOL);
    let field = ConnectionField::from_potential(&phi)?;
    let base = match &ctx.config.base {
        Some(b) => point(b, d)?,
        None => phi.domain().default_seed(),
    };
    let panels = ctx.config.quadrature_panels.unwrap_or(DEFAULT_QUADRATURE_PANELS);
    let rec = Reconstruction::new(&field, &base, panels)?;
    let metric_residual = check_metric_identity(&field, &|x: &Vector| metric(&phi, x), &base, ONE_FORM_FD_STEP)?;
    let mut table = Table::new(header(&[], &[("q", d), ("p", d)], &["reconstructed", "direct", "gap"]));
    let mut rows = Vec::new();
    let mut worst = 0.0;
    for (q, p) in pairs(ctx, &phi)? {
        let r = rec.divergence(&q, &p)?;
        let direct = l_divergence(&phi, &q, &p)?;
        let gap = (r - direct).abs();
        worst = max_of([worst, gap]);
        let mut row = Vec::new();
        push_vec(&mut row, &q);
        push_vec(&mut row, &p);
        row.extend([r.into(), direct.into(), gap.into()]);
        table.push(row);
        rows.push(json!({"q": raw(&q), "p": raw(&p), "reconstructed": r, "direct": direct, "gap": gap}));
    }
    let passed = worst <= tol;
    let json = json!({
        "potential": phi.name(),
        "base": raw(&base),
        "one_form_residual": rec.one_form_residual(),
        "curl": rec.curl(),
        "metric_identity_residual": metric_residual,
        "max_gap": worst,
        "tolerance": tol,
        "passed": passed,
        "pairs": rows,
    });
    Ok(Output { json, table, passed })
}
