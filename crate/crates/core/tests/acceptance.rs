//! Acceptance criteria 1-12, each printed as one PASS/FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;

use logdiv::cli::commands::orthogonal_triple;
use logdiv::ctransform::{log_cost_c_gradient, CDivergence, CostSpec, DiscreteFunction};
use logdiv::duality::{
    alpha_conjugate, bregman_divergence, conjugate_by_search, cost_c_alpha, l_divergence, self_dual_divergence,
    DualPair,
};
use logdiv::error::Error;
use logdiv::families::{
    alpha_divergence_curvature, renyi_alpha_identity_check, verify_conjugate_entropy, verify_renyi_theorem,
    DiscreteFamily, FamilyRegime, FamilySign, RenyiOrder,
};
use logdiv::geometry::{
    collinearity_deviation, constant_curvature_residual, dual_geodesic, dual_geodesic_ode_integrate,
    geodesic_ode_integrate, metric, mixed_inner_product_matrix, primal_geodesic, pythagoras_check,
};
use logdiv::linalg::Tensor3;
use logdiv::potentials::{
    fd_hessian, make_builtin_potential, AlphaParam, BuiltinName, ChartDomain, PotentialSpec, Sign,
};
use logdiv::quadrature::bisect;
use logdiv::reconstruct::{
    canonical_divergence, projective_template, ConnectionField, Reconstruction, DEFAULT_QUADRATURE_PANELS,
};
use logdiv::sampling::{sample_direction, sample_interior, sample_pairs, sample_simplex, sampling_region, seeded_rng};
use logdiv::{Matrix, Vector};
use rand::Rng;

type Outcome = Result<String, String>;

fn builtin(name: BuiltinName, dim: usize, alpha: f64, sign: Sign) -> PotentialSpec {
    make_builtin_potential(name, dim, AlphaParam::new(alpha, sign).unwrap()).unwrap()
}

/// One of each built-in, both classes.
fn builtins() -> Vec<PotentialSpec> {
    vec![
        builtin(BuiltinName::DirichletLog, 3, 1.0, Sign::Concave),
        builtin(BuiltinName::LogBarrierOnQuadrant, 3, 0.5, Sign::Convex),
        builtin(BuiltinName::SimplexFAlpha, 3, 1.0, Sign::Concave),
        builtin(BuiltinName::SimplexFMinusAlpha, 2, 0.5, Sign::Convex),
        builtin(BuiltinName::SimplexFMinusAlpha, 2, 2.0, Sign::Concave),
        builtin(BuiltinName::Quadratic, 2, 0.0, Sign::Concave),
    ]
}

fn label(phi: &PotentialSpec) -> String {
    format!("{}(d={}, alpha={}, {})", phi.name(), phi.dim(), phi.alpha().alpha(), phi.alpha().sign())
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

fn fenchel_self_duality() -> Outcome {
    let (mut worst, mut min_gap, mut worst_matched) = (0.0f64, f64::INFINITY, 0.0f64);
    for (i, phi) in builtins().iter().enumerate() {
        let pair = DualPair::new(phi.clone());
        for (xi, xp) in sample_pairs(&mut seeded_rng(100 + i as u64), phi, 100).map_err(e2s)? {
            let eta = pair.dual_point(&xp).map_err(e2s)?;
            let d = l_divergence(phi, &xi, &xp).map_err(e2s)?;
            let sd = self_dual_divergence(&pair, &xi, &eta).map_err(e2s)?;
            worst = worst.max((d - sd).abs());
            min_gap = min_gap.min(pair.fenchel_gap(&xi, &eta).map_err(e2s)?);
            worst_matched = worst_matched.max(pair.fenchel_gap(&xp, &eta).map_err(e2s)?.abs());
        }
    }
    let detail =
        format!("max |D - self-dual| = {worst:.2e}, min gap = {min_gap:.2e}, max matched gap = {worst_matched:.2e}");
    check(worst <= 1e-12 && min_gap >= -1e-12 && worst_matched <= 1e-10, &detail)?;
    // equality only at matched pairs
    check(min_gap > 1e-10, format!("{detail}; an unmatched pair has zero gap"))?;
    Ok(detail)
}

/// Square lattice `center + ((i - n/2 + 0.3) h, (j - n/2 + 0.7) h)`.
fn offset_grid(center: &Vector, n: usize, h: f64) -> Vec<Vector> {
    let half = (n / 2) as f64;
    let mut g = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            g.push(Vector::from_column_slice(&[
                center[0] + (i as f64 - half + 0.3) * h,
                center[1] + (j as f64 - half + 0.7) * h,
            ]));
        }
    }
    g
}

fn conjugate_oracle() -> Outcome {
    let mut worst_ratio_to_bound = 0.0f64;
    let mut min_reduction = f64::INFINITY;
    for phi in [
        builtin(BuiltinName::SimplexFAlpha, 2, 1.0, Sign::Concave),
        builtin(BuiltinName::SimplexFMinusAlpha, 2, 0.5, Sign::Convex),
    ] {
        let pair = DualPair::new(phi.clone());
        let a = phi.alpha().alpha();
        for xi in sample_interior(&mut seeded_rng(200), phi.domain(), 5).map_err(e2s)? {
            let eta = pair.dual_point(&xi).map_err(e2s)?;
            let psi = alpha_conjugate(&pair, &eta, None).map_err(e2s)?;
            let objective = |x: &Vector| cost_c_alpha(x, &eta, a).unwrap_or(f64::NAN) - phi.value(x);
            let lambda = fd_hessian(objective, &xi, 1e-4).symmetric_eigenvalues().amax();
            let mut gaps = Vec::new();
            for (n, h) in [(100, 0.004), (200, 0.002)] {
                let s = conjugate_by_search(&phi, &eta, &offset_grid(&xi, n, h)).map_err(e2s)?;
                let gap = (s.value - psi).abs();
                worst_ratio_to_bound = worst_ratio_to_bound.max(gap / (5.0 * h * h * lambda));
                gaps.push(gap);
            }
            min_reduction = min_reduction.min(gaps[0] / gaps[1]);
        }
    }
    let detail =
        format!("max gap / (5 h^2 lambda) = {worst_ratio_to_bound:.3}, min reduction on halving = {min_reduction:.2}x");
    check(worst_ratio_to_bound <= 1.0 && min_reduction >= 3.0, &detail)?;
    Ok(detail)
}

fn gradient_roundtrip() -> Outcome {
    let mut worst = 0.0f64;
    for (i, phi) in builtins().iter().enumerate() {
        let pair = DualPair::new(phi.clone());
        let a = phi.alpha().alpha();
        for xi in sample_interior(&mut seeded_rng(300 + i as u64), phi.domain(), 100).map_err(e2s)? {
            let eta = pair.dual_point(&xi).map_err(e2s)?;
            // alpha-gradient of psi from its ordinary gradient
            let g = pair.conjugate_gradient(&eta, None).map_err(e2s)?;
            let back = &g / (1.0 - a * g.dot(&eta));
            worst = worst.max((back - &xi).norm());
        }
    }
    let detail = format!("max |D psi(D phi(xi)) - xi| = {worst:.2e} over 600 points");
    check(worst <= 1e-8, &detail)?;
    Ok(detail)
}

fn bregman_limit() -> Outcome {
    let probe = builtin(BuiltinName::DirichletLog, 3, 1e-2, Sign::Concave);
    let pairs = sample_pairs(&mut seeded_rng(400), &probe, 50).map_err(e2s)?;
    let mut maxes = Vec::new();
    for a in [1e-2, 1e-3, 1e-4] {
        let phi = builtin(BuiltinName::DirichletLog, 3, a, Sign::Concave);
        let mut m = 0.0f64;
        for (x, y) in &pairs {
            let d = l_divergence(&phi, x, y).map_err(e2s)?;
            let b = bregman_divergence(&phi, x, y).map_err(e2s)?;
            m = m.max((d - b).abs());
        }
        maxes.push(m);
    }
    let ratios = [maxes[0] / maxes[1], maxes[1] / maxes[2]];
    let detail = format!("max gaps {maxes:.3?}, ratios per decade {ratios:.3?}");
    check(ratios.iter().all(|r| (8.0..=12.0).contains(r)), &detail)?;
    Ok(detail)
}

fn constant_curvature() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in [2, 3] {
        for phi in [
            builtin(BuiltinName::SimplexFAlpha, d, 1.0, Sign::Concave),
            builtin(BuiltinName::DirichletLog, d, 1.0, Sign::Concave),
            builtin(BuiltinName::SimplexFMinusAlpha, d, 2.0, Sign::Concave),
            builtin(BuiltinName::LogBarrierOnQuadrant, d, 0.5, Sign::Convex),
            builtin(BuiltinName::SimplexFMinusAlpha, d, 0.5, Sign::Convex),
        ] {
            for xi in sample_interior(&mut seeded_rng(500 + d as u64), phi.domain(), 50).map_err(e2s)? {
                worst = worst.max(constant_curvature_residual(&phi, &xi).map_err(e2s)?);
                count += 1;
            }
        }
    }
    let detail = format!("max |R - k B| = {worst:.2e} over {count} points (k = -s alpha)");
    check(worst <= 1e-8, &detail)?;
    Ok(detail)
}

fn geodesics() -> Outcome {
    let (mut end_err, mut collinear) = (0.0f64, 0.0f64);
    let mut endpoints_exact = true;
    for (i, phi) in [
        builtin(BuiltinName::SimplexFAlpha, 2, 1.0, Sign::Concave),
        builtin(BuiltinName::DirichletLog, 3, 1.0, Sign::Concave),
        builtin(BuiltinName::LogBarrierOnQuadrant, 3, 0.5, Sign::Convex),
        builtin(BuiltinName::SimplexFMinusAlpha, 2, 0.5, Sign::Convex),
    ]
    .iter()
    .enumerate()
    {
        let pair = DualPair::new(phi.clone());
        for (a, b) in sample_pairs(&mut seeded_rng(600 + i as u64), phi, 5).map_err(e2s)? {
            let path = primal_geodesic(phi, &a, &b, 64).map_err(e2s)?;
            endpoints_exact &= path.h(0.0) == 0.0 && path.h(1.0) == 1.0;
            let traj = geodesic_ode_integrate(phi, &a, &path.velocity(0.0), 1.0, 4000).map_err(e2s)?;
            end_err = end_err.max((traj.end() - &b).norm());
            collinear = collinear.max(path.collinearity()).max(collinearity_deviation(&traj.point_vectors(), &a, &b));

            let (e0, e1) = (pair.dual_point(&a).map_err(e2s)?, pair.dual_point(&b).map_err(e2s)?);
            let dual = dual_geodesic(&pair, &e0, &e1, 16).map_err(e2s)?;
            endpoints_exact &= dual.h(0.0) == 0.0 && dual.h(1.0) == 1.0;
            let dtraj = dual_geodesic_ode_integrate(&pair, &e0, &dual.velocity(0.0), 1.0, 1000).map_err(e2s)?;
            end_err = end_err.max((dtraj.end() - &e1).norm());
            collinear =
                collinear.max(dual.collinearity()).max(collinearity_deviation(&dtraj.point_vectors(), &e0, &e1));
        }
    }
    let detail =
        format!("max ODE endpoint error = {end_err:.2e}, max collinearity = {collinear:.2e}, h(0)=0 and h(1)=1 exact: {endpoints_exact}");
    check(end_err <= 1e-6 && collinear <= 1e-8 && endpoints_exact, &detail)?;
    Ok(detail)
}

fn pythagoras_potentials() -> Vec<PotentialSpec> {
    vec![
        builtin(BuiltinName::SimplexFAlpha, 2, 1.0, Sign::Concave),
        builtin(BuiltinName::DirichletLog, 3, 1.0, Sign::Concave),
        builtin(BuiltinName::LogBarrierOnQuadrant, 3, 0.5, Sign::Convex),
        builtin(BuiltinName::SimplexFMinusAlpha, 3, 0.5, Sign::Convex),
    ]
}

/// Roots of the gap and of the inner product along `r(s) = q + step (w + s |w| c)`,
/// with `w` orthogonal and `c` the unit normal direction.
fn root_agreement<R: Rng>(rng: &mut R, pair: &DualPair, p: &Vector, q: &Vector, radius: f64) -> Result<f64, String> {
    let wd = pair.dual_point(p).map_err(e2s)? - pair.dual_point(q).map_err(e2s)?;
    let c = mixed_inner_product_matrix(pair, q).map_err(e2s)? * wd;
    let c = &c / c.norm();
    let dir = sample_direction(rng, q.len());
    let w = &dir - &c * dir.dot(&c);
    let s0: f64 = rng.gen_range(0.2..1.0);
    let mut step = radius;
    for _ in 0..20 {
        let r = |s: f64| q + (&w + &c * (s * w.norm())) * step;
        let gap = |s: f64| pythagoras_check(pair, p, q, &r(s)).map(|x| x.gap);
        let ip = |s: f64| pythagoras_check(pair, p, q, &r(s)).map(|x| x.inner_product);
        let ok = [-1.0, s0, 1.0].iter().all(|s| gap(*s).is_ok());
        if ok {
            let start = pythagoras_check(pair, p, q, &r(s0)).map_err(e2s)?;
            check(start.inner_product.abs() > 1e-8 && start.gap.abs() > 1e-12, "starting triple is orthogonal")?;
            let sg = bisect(|s| gap(s).unwrap_or(f64::NAN), -1.0, 1.0, 1e-12).map_err(e2s)?;
            let si = bisect(|s| ip(s).unwrap_or(f64::NAN), -1.0, 1.0, 1e-12).map_err(e2s)?;
            return Ok((sg - si).abs());
        }
        step *= 0.5;
    }
    Err("no feasible one-parameter family".into())
}

fn pythagorean_theorem() -> Outcome {
    let (mut worst_gap, mut worst_root) = (0.0f64, 0.0f64);
    for (i, phi) in pythagoras_potentials().iter().enumerate() {
        let pair = DualPair::new(phi.clone());
        let mut rng = seeded_rng(700 + i as u64);
        let (_, radius) = sampling_region(phi.domain());
        for _ in 0..25 {
            let (q, p) = sample_pairs(&mut rng, phi, 1).map_err(e2s)?.remove(0);
            let (_, rep) = orthogonal_triple(&mut rng, &pair, &p, &q, radius).map_err(e2s)?;
            worst_gap = worst_gap.max(rep.relative_gap.abs());
        }
        for _ in 0..25 {
            let (q, p) = sample_pairs(&mut rng, phi, 1).map_err(e2s)?.remove(0);
            worst_root = worst_root.max(root_agreement(&mut rng, &pair, &p, &q, radius)?);
        }
    }
    let detail = format!(
        "max relative gap on 100 orthogonal triples = {worst_gap:.2e}; max |s_gap - s_inner| on 100 families = {worst_root:.2e}"
    );
    check(worst_gap <= 1e-9 && worst_root <= 1e-6, &detail)?;
    Ok(detail)
}

fn random_family<R: Rng>(rng: &mut R, n: usize, d: usize, alpha: f64, sign: FamilySign) -> DiscreteFamily {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mu = raw.iter().map(|v| v / total).collect();
    let h = (0..n).map(|_| Vector::from_fn(d, |_, _| rng.gen_range(0.0..2.0))).collect();
    DiscreteFamily::new(mu, h, alpha, sign).unwrap()
}

fn renyi_equivalence() -> Outcome {
    let mut rng = seeded_rng(800);
    let families = vec![
        DiscreteFamily::simplex(3, 1.0, FamilySign::Plus).unwrap(),
        random_family(&mut rng, 5, 2, 0.5, FamilySign::Plus),
        random_family(&mut rng, 10, 3, 0.3, FamilySign::Plus),
        DiscreteFamily::simplex(2, 0.5, FamilySign::Minus).unwrap(),
        random_family(&mut rng, 6, 2, 0.5, FamilySign::Minus),
        DiscreteFamily::simplex(2, 2.0, FamilySign::Minus).unwrap(),
        random_family(&mut rng, 8, 3, 3.0, FamilySign::Minus),
    ];
    let (mut worst, mut worst_conj) = (0.0f64, 0.0f64);
    let mut regimes = Vec::new();
    for (i, fam) in families.iter().enumerate() {
        let case = fam.renyi_case();
        if !regimes.contains(&case.regime) {
            regimes.push(case.regime);
        }
        if case.regime == FamilyRegime::MinusAboveOne {
            let a = fam.alpha();
            check((case.factor - (a - 1.0) / a).abs() < 1e-15, "factor is not (alpha - 1)/alpha")?;
        }
        let spec = fam.potential_spec().map_err(e2s)?;
        for (x, y) in sample_pairs(&mut seeded_rng(810 + i as u64), &spec, 100).map_err(e2s)? {
            worst = worst.max(verify_renyi_theorem(fam, &x, &y).map_err(e2s)?.gap);
            worst_conj = worst_conj.max(verify_conjugate_entropy(fam, &x).map_err(e2s)?.gap);
        }
    }
    let detail = format!(
        "{} regimes, {} families: max Rényi gap = {worst:.2e}, max conjugate-entropy gap = {worst_conj:.2e}",
        regimes.len(),
        families.len()
    );
    check(regimes.len() == 3 && worst <= 1e-10 && worst_conj <= 1e-10, &detail)?;
    Ok(detail)
}

fn alpha_divergence_identity() -> Outcome {
    let (mut worst, mut worst_k) = (0.0f64, 0.0f64);
    let mut rng = seeded_rng(900);
    for t in [0.3, 0.5, 2.0, 4.0] {
        let order = RenyiOrder::new(t).unwrap();
        for _ in 0..100 {
            let (p, q) = (sample_simplex(&mut rng, 4), sample_simplex(&mut rng, 4));
            worst = worst.max(renyi_alpha_identity_check(&p, &q, order).map_err(e2s)?.gap);
        }
        let dom = logdiv::families::simplex_family_for_order(3, order).unwrap().domain();
        for xi in sample_interior(&mut rng, &dom, 20).map_err(e2s)? {
            let c = alpha_divergence_curvature(3, order, &xi).map_err(e2s)?;
            worst_k = worst_k.max((c.fitted - c.predicted).abs());
        }
    }
    let detail = format!("max identity residual = {worst:.2e}; max |k_fit - (1 - a^2)/4| = {worst_k:.2e}");
    check(worst <= 1e-12 && worst_k <= 1e-6, &detail)?;
    Ok(detail)
}

fn reconstruction() -> Outcome {
    let (mut worst, mut worst_chart) = (0.0f64, 0.0f64);
    for (i, phi) in builtins().iter().filter(|p| p.alpha().alpha() > 0.0).enumerate() {
        let d = phi.dim();
        let on = |e: Error| format!("{}: {e}", label(phi));
        let a =
            Matrix::from_fn(d, d, |i, j| if i == j { 1.5 + 0.25 * i as f64 } else { 0.2 / (1.0 + (i + 2 * j) as f64) });
        let b = Vector::from_fn(d, |i, _| 0.3 - 0.2 * i as f64);
        let field = ConnectionField::from_potential(phi).map_err(on)?;
        let base = phi.domain().default_seed();
        let rec = Reconstruction::new(&field, &base, DEFAULT_QUADRATURE_PANELS).map_err(on)?;
        let moved = field.recharted(&a, &b).map_err(on)?;
        let rec_moved = Reconstruction::new(&moved, &(&a * &base + &b), DEFAULT_QUADRATURE_PANELS).map_err(on)?;
        for (q, p) in sample_pairs(&mut seeded_rng(1000 + i as u64), phi, 50).map_err(on)? {
            let r = rec.divergence(&q, &p).map_err(on)?;
            worst = worst.max((r - l_divergence(phi, &q, &p).map_err(on)?).abs());
            let r2 = rec_moved.divergence(&(&a * &q + &b), &(&a * &p + &b)).map_err(on)?;
            worst_chart = worst_chart.max((r - r2).abs());
        }
    }
    // non-flat and inconsistent fields
    let phi = builtin(BuiltinName::SimplexFAlpha, 2, 1.0, Sign::Concave);
    let field = ConnectionField::from_potential(&phi).map_err(e2s)?;
    let base = Vector::from_column_slice(&[0.1, 0.2]);
    let noise = Tensor3::from_fn(2, |i, j, k| if (i, j, k) == (0, 1, 1) { 1e-3 } else { 0.0 });
    let not_projective =
        matches!(Reconstruction::new(&field.perturbed(noise), &base, 64), Err(Error::ResidualTooLarge { .. }));
    let rotation = ConnectionField::new(
        Arc::new(|x: &Vector| Ok(projective_template(&Vector::from_column_slice(&[-x[1], x[0]])))),
        ChartDomain::whole_space(2),
        AlphaParam::concave(1.0).unwrap(),
    )
    .map_err(e2s)?;
    let not_closed = matches!(Reconstruction::new(&rotation, &base, 64), Err(Error::OpenCurl { .. }));
    let other = builtin(BuiltinName::SimplexFAlpha, 2, 1.0, Sign::Concave);
    let wrong_metric = |x: &Vector| metric(&other, x).map(|g| g * 2.0);
    let q = Vector::from_column_slice(&[0.3, -0.1]);
    let metric_mismatch =
        matches!(canonical_divergence(&field, &wrong_metric, &base, &q, &base), Err(Error::ResidualTooLarge { .. }));
    let detail = format!(
        "max |D_rec - D| = {worst:.2e}, max rechart change = {worst_chart:.2e}; rejected: non-projective {not_projective}, non-closed {not_closed}, metric mismatch {metric_mismatch}"
    );
    check(worst <= 1e-7 && worst_chart <= 1e-7 && not_projective && not_closed && metric_mismatch, &detail)?;
    Ok(detail)
}

fn lattice(lo: f64, hi: f64, n: usize, shift: f64) -> Vec<Vector> {
    let h = (hi - lo) / n as f64;
    (0..=n)
        .flat_map(|i| {
            (0..=n).map(move |j| Vector::from_column_slice(&[lo + (i as f64 + shift) * h, lo + (j as f64 + shift) * h]))
        })
        .collect()
}

fn transport_error(phi: &PotentialSpec, x: &Vector, xp: &Vector, n: usize, shift: f64) -> Result<f64, String> {
    let xs = lattice(-0.5, 1.0, n, 0.0);
    let ys: Vec<Vector> = lattice(-0.5, 1.0, n, shift)
        .iter()
        .map(|p| log_cost_c_gradient(phi, p))
        .collect::<Result<_, _>>()
        .map_err(e2s)?;
    let find = |p: &Vector| xs.iter().position(|q| (q - p).amax() < 1e-12).unwrap();
    let f = DiscreteFunction::from_fn(xs.clone(), |p| phi.value(p)).map_err(e2s)?;
    let cd = CDivergence::new(f, CostSpec::Log { alpha: phi.alpha().alpha() }, &ys).map_err(e2s)?;
    Ok((cd.divergence(find(x), find(xp)).map_err(e2s)? - l_divergence(phi, x, xp).map_err(e2s)?).abs())
}

fn discrete_transport() -> Outcome {
    let phi = builtin(BuiltinName::SimplexFAlpha, 2, 1.0, Sign::Concave);
    let pairs = [([0.5, 0.25], [-0.25, 0.0]), ([0.0, 0.5], [0.25, -0.25]), ([-0.25, -0.25], [0.5, 0.5])];
    let (mut orders, mut errs_all, mut exact) = (Vec::new(), Vec::new(), 0.0f64);
    for (x, xp) in pairs {
        let (x, xp) = (Vector::from_column_slice(&x), Vector::from_column_slice(&xp));
        // dual grid holding the exact c-gradients
        exact = exact.max(transport_error(&phi, &x, &xp, 12, 0.0)?);
        // dual grid off by a fifth of a cell
        let errs =
            [12usize, 24, 48].iter().map(|&n| transport_error(&phi, &x, &xp, n, 0.2)).collect::<Result<Vec<_>, _>>()?;
        orders.push((errs[0] / errs[1]).log2());
        orders.push((errs[1] / errs[2]).log2());
        errs_all.push(errs.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>().join(" "));
    }
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let detail = format!(
        "matched dual grid error = {exact:.2e}; shifted dual grid errors [{}], orders {orders:.4?}, min observed order = {min_order:.4}",
        errs_all.join("; ")
    );
    check(exact <= 1e-12 && min_order >= 1.0, &detail)?;
    Ok(detail)
}

fn cli_determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_logdiv")).args(["report", "--seed", "7"]).output().map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
    let suites = report["suites"].as_array().map_or(0, Vec::len);
    let detail = format!(
        "exit codes {:?}/{:?}, identical bytes: {}, all_passed: {}, {suites} suites",
        a.status.code(),
        b.status.code(),
        a.stdout == b.stdout,
        report["all_passed"]
    );
    check(
        a.status.code() == Some(0)
            && b.status.code() == Some(0)
            && a.stdout == b.stdout
            && report["all_passed"] == true,
        &detail,
    )?;
    Ok(detail)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Fenchel and self-dual representation", fenchel_self_duality),
        ("conjugate against grid search", conjugate_oracle),
        ("gradient-inverse roundtrip", gradient_roundtrip),
        ("Bregman limit", bregman_limit),
        ("constant curvature", constant_curvature),
        ("geodesics", geodesics),
        ("Pythagorean relation", pythagorean_theorem),
        ("Rényi equivalence", renyi_equivalence),
        ("alpha-divergence identity and curvature", alpha_divergence_identity),
        ("reconstruction", reconstruction),
        ("discrete transport bridge", discrete_transport),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {:>2}. {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
