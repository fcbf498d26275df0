//! Recovering the potential and the canonical divergence from connection data.
//!
//! A projectively flat connection has symbols `G^k_ij = a_i delta_jk + a_j delta_ik`.
//! When the one-form `a` is closed it integrates to `a = -alpha Dphi`, and the
//! L-divergence of that `phi` is the divergence inducing the structure.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::duality::{alpha_gradient, cost_c_alpha};
use crate::error::{Error, Result};
use crate::geometry::christoffel_primal;
use crate::linalg::{Matrix, Tensor3, Vector};
use crate::parallel::parallel_map;
use crate::potentials::{AlphaParam, ChartDomain, Potential, PotentialSpec};
use crate::quadrature::simpson;

/// Relative residual above which a field is not of projective form.
pub const ONE_FORM_TOL: f64 = 1e-10;
/// Curl above which a one-form is treated as open.
pub const CURL_TOL: f64 = 1e-5;
/// Finite-difference step for derivatives of the one-form.
pub const ONE_FORM_FD_STEP: f64 = 1e-5;
/// Relative residual allowed in the metric identity.
pub const METRIC_IDENTITY_TOL: f64 = 1e-4;
/// Default Simpson panel count for line integrals.
pub const DEFAULT_QUADRATURE_PANELS: usize = 64;

pub type SymbolFn = Arc<dyn Fn(&Vector) -> Result<Tensor3> + Send + Sync>;

/// Christoffel symbols `G^k_ij`, stored as `get(i, j, k)`, on a chart.
#[derive(Clone)]
pub struct ConnectionField {
    symbols: SymbolFn,
    domain: ChartDomain,
    alpha: AlphaParam,
}

impl fmt::Debug for ConnectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionField").field("domain", &self.domain).field("alpha", &self.alpha).finish()
    }
}

impl ConnectionField {
    /// `alpha` is the curvature magnitude and its sign the class: curvature
    /// `-alpha` for the concave class, `+alpha` for the convex class.
    pub fn new(symbols: SymbolFn, domain: ChartDomain, alpha: AlphaParam) -> Result<Self> {
        if alpha.is_bregman() {
            return Err(Error::InvalidParameter("reconstruction needs alpha > 0".into()));
        }
        if domain.dim() < 2 {
            return Err(Error::InvalidParameter("reconstruction needs dimension >= 2".into()));
        }
        Ok(Self { symbols, domain, alpha })
    }

    /// The primal connection induced by a potential.
    pub fn from_potential(phi: &PotentialSpec) -> Result<Self> {
        let spec = phi.clone();
        Self::new(Arc::new(move |xi: &Vector| christoffel_primal(&spec, xi)), phi.domain().clone(), phi.alpha())
    }

    /// The same connection written in the chart `zeta = A xi + b`. Symbols
    /// transform as a tensor because the change of chart is affine.
    pub fn recharted(&self, a: &Matrix, b: &Vector) -> Result<Self> {
        let d = self.dim();
        if a.nrows() != d || a.ncols() != d || b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.nrows() });
        }
        let inv = a.clone().try_inverse().ok_or(Error::SingularHessian)?;
        let domain = ChartDomain::Affine {
            inner: Box::new(self.domain.clone()),
            forward: a.clone(),
            inverse: inv.clone(),
            offset: b.clone(),
        };
        let inner = self.symbols.clone();
        let (a, b) = (a.clone(), b.clone());
        let symbols: SymbolFn = Arc::new(move |zeta: &Vector| {
            let g = inner(&(&inv * (zeta - &b)))?;
            Ok(Tensor3::from_fn(d, |i, j, k| {
                let mut v = 0.0;
                for p in 0..d {
                    for q in 0..d {
                        let w = inv[(p, i)] * inv[(q, j)];
                        if w == 0.0 {
                            continue;
                        }
                        for c in 0..d {
                            v += a[(k, c)] * g.get(p, q, c) * w;
                        }
                    }
                }
                v
            }))
        });
        Self::new(symbols, domain, self.alpha)
    }

    /// Adds `perturbation` to every symbol.
    pub fn perturbed(&self, perturbation: Tensor3) -> Self {
        let inner = self.symbols.clone();
        let symbols: SymbolFn = Arc::new(move |xi: &Vector| {
            let g = inner(xi)?;
            let d = g.dim();
            Ok(Tensor3::from_fn(d, |i, j, k| g.get(i, j, k) + perturbation.get(i, j, k)))
        });
        Self { symbols, domain: self.domain.clone(), alpha: self.alpha }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn alpha(&self) -> AlphaParam {
        self.alpha
    }

    pub fn symbols(&self, xi: &Vector) -> Result<Tensor3> {
        if !self.domain.contains(xi) {
            return Err(Error::OutsideDomain { point: xi.iter().copied().collect() });
        }
        (self.symbols)(xi)
    }
}

/// `a_i delta_jk + a_j delta_ik`.
pub fn projective_template(a: &Vector) -> Tensor3 {
    let d = a.len();
    Tensor3::from_fn(d, |i, j, k| {
        let mut v = 0.0;
        if j == k {
            v += a[i];
        }
        if i == k {
            v += a[j];
        }
        v
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    pub a: Vector,
    /// `max |G - (a_i delta_jk + a_j delta_ik)|`, relative to `max(1, |G|)`.
    pub residual: f64,
    /// `max |G^k_ij - G^k_ji|`.
    pub asymmetry: f64,
}

/// Least-squares fit of `a` to the `d^3` equations, without a tolerance check.
pub fn fit_one_form(field: &ConnectionField, xi: &Vector) -> Result<OneForm> {
    let g = field.symbols(xi)?;
    let d = g.dim();
    let mut design = DMatrix::<f64>::zeros(d * d * d, d);
    let mut rhs = Vector::zeros(d * d * d);
    let mut asymmetry: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let row = (i * d + j) * d + k;
                if j == k {
                    design[(row, i)] += 1.0;
                }
                if i == k {
                    design[(row, j)] += 1.0;
                }
                rhs[row] = g.get(i, j, k);
                asymmetry = asymmetry.max((g.get(i, j, k) - g.get(j, i, k)).abs());
            }
        }
    }
    let a = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("one-form least squares failed: {e}")))?;
    let fitted = projective_template(&a);
    let residual = g.max_abs_diff(&fitted) / g.max_abs().max(1.0);
    Ok(OneForm { a, residual, asymmetry })
}

/// Extracts the one-form, failing when the field is not of projective form.
pub fn extract_one_form(field: &ConnectionField, xi: &Vector, tol: f64) -> Result<OneForm> {
    let form = fit_one_form(field, xi)?;
    if form.residual > tol {
        return Err(Error::ResidualTooLarge { residual: form.residual, tol });
    }
    Ok(form)
}

/// Central-difference Jacobian `J[(i, j)] = d_i a_j`.
fn one_form_jacobian(field: &ConnectionField, xi: &Vector, h_fd: f64) -> Result<Matrix> {
    let d = xi.len();
    let mut jac = Matrix::zeros(d, d);
    for i in 0..d {
        let mut xp = xi.clone();
        let mut xm = xi.clone();
        xp[i] += h_fd;
        xm[i] -= h_fd;
        let ap = fit_one_form(field, &xp)?.a;
        let am = fit_one_form(field, &xm)?.a;
        for j in 0..d {
            jac[(i, j)] = (ap[j] - am[j]) / (2.0 * h_fd);
        }
    }
    Ok(jac)
}

/// `max |d_i a_j - d_j a_i|` by central differences.
pub fn check_closedness(field: &ConnectionField, xi: &Vector, h_fd: f64) -> Result<f64> {
    let jac = one_form_jacobian(field, xi, h_fd)?;
    Ok((&jac - jac.transpose()).amax())
}

/// `max |s alpha g_ij - (d_i a_j - a_i a_j)|`, relative to `max(1, |alpha g|)`,
/// where `s = +1` for negative curvature (concave class) and `-1` for positive.
pub fn check_metric_identity(
    field: &ConnectionField,
    g: &dyn Fn(&Vector) -> Result<Matrix>,
    xi: &Vector,
    h_fd: f64,
) -> Result<f64> {
    let jac = one_form_jacobian(field, xi, h_fd)?;
    let a = fit_one_form(field, xi)?.a;
    let lhs = g(xi)? * (field.alpha.sign().factor() * field.alpha.alpha());
    let rhs = jac - &a * a.transpose();
    Ok((&lhs - rhs).amax() / lhs.amax().max(1.0))
}

fn ensure_segment(field: &ConnectionField, base: &Vector, target: &Vector) -> Result<()> {
    for p in [base, target] {
        if !field.domain.contains(p) {
            return Err(Error::OutsideDomain { point: p.iter().copied().collect() });
        }
    }
    Ok(())
}

/// `int_0^1 a(base + t (target - base)) . (target - base) dt` by Simpson's rule.
fn line_integral(field: &ConnectionField, base: &Vector, target: &Vector, n_quad: usize) -> Result<f64> {
    let dir = target - base;
    if dir.norm() == 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let v = simpson(
        |t| match fit_one_form(field, &(base + &dir * t)) {
            Ok(f) => f.a.dot(&dir),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        n_quad,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `phi(target) - phi(base) = -(1/alpha) int a` along the segment. Refuses
/// fields whose curl at the endpoints and midpoint exceeds [`CURL_TOL`].
pub fn integrate_potential(field: &ConnectionField, base: &Vector, target: &Vector, n_quad: usize) -> Result<f64> {
    ensure_segment(field, base, target)?;
    let mid = (base + target) * 0.5;
    for p in [base, &mid, target] {
        let curl = check_closedness(field, p, ONE_FORM_FD_STEP)?;
        if curl > CURL_TOL {
            return Err(Error::OpenCurl { curl });
        }
    }
    Ok(-line_integral(field, base, target, n_quad)? / field.alpha.alpha())
}

/// Difference between the two axis-aligned two-leg paths from `base` to
/// `target` (through `(target_0, base_1, ...)`-type corners), for `d >= 2`
/// in the first two coordinates.
pub fn path_discrepancy(field: &ConnectionField, base: &Vector, target: &Vector, n_quad: usize) -> Result<f64> {
    let mut c1 = base.clone();
    c1[0] = target[0];
    let mut c2 = target.clone();
    c2[0] = base[0];
    for c in [&c1, &c2] {
        ensure_segment(field, base, c)?;
        ensure_segment(field, c, target)?;
    }
    let p1 = line_integral(field, base, &c1, n_quad)? + line_integral(field, &c1, target, n_quad)?;
    let p2 = line_integral(field, base, &c2, n_quad)? + line_integral(field, &c2, target, n_quad)?;
    Ok((p1 - p2).abs() / field.alpha.alpha())
}

/// The reconstructed potential `phi_hat(xi) = offset + int_base^xi (-a/alpha)`.
#[derive(Debug)]
struct ReconstructedPotential {
    field: ConnectionField,
    base: Vector,
    n_quad: usize,
    offset: f64,
}

impl Potential for ReconstructedPotential {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn value(&self, xi: &Vector) -> f64 {
        match line_integral(&self.field, &self.base, xi, self.n_quad) {
            Ok(v) => self.offset - v / self.field.alpha.alpha(),
            Err(_) => f64::NAN,
        }
    }

    fn gradient(&self, xi: &Vector) -> Vector {
        match fit_one_form(&self.field, xi) {
            Ok(f) => f.a / (-self.field.alpha.alpha()),
            Err(_) => Vector::from_element(xi.len(), f64::NAN),
        }
    }

    fn hessian(&self, xi: &Vector) -> Matrix {
        match one_form_jacobian(&self.field, xi, ONE_FORM_FD_STEP) {
            Ok(j) => crate::linalg::symmetrize(&j) / (-self.field.alpha.alpha()),
            Err(_) => Matrix::from_element(xi.len(), xi.len(), f64::NAN),
        }
    }
}

/// A validated reconstruction anchored at `base`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    spec: PotentialSpec,
    base: Vector,
    offset: f64,
    one_form_residual: f64,
    curl: f64,
}

impl Reconstruction {
    /// Checks projective form and closedness at `base` and wraps the
    /// integrated potential, normalized to `phi_hat(base) = 0`.
    pub fn new(field: &ConnectionField, base: &Vector, n_quad: usize) -> Result<Self> {
        Self::with_offset(field, base, n_quad, 0.0)
    }

    /// As [`Reconstruction::new`] with `phi_hat(base) = offset`.
    pub fn with_offset(field: &ConnectionField, base: &Vector, n_quad: usize, offset: f64) -> Result<Self> {
        let form = extract_one_form(field, base, ONE_FORM_TOL)?;
        let curl = check_closedness(field, base, ONE_FORM_FD_STEP)?;
        if curl > CURL_TOL {
            return Err(Error::OpenCurl { curl });
        }
        let pot = ReconstructedPotential { field: field.clone(), base: base.clone(), n_quad: n_quad.max(2), offset };
        let spec = PotentialSpec::new("reconstructed", field.alpha, field.domain.clone(), Arc::new(pot))?;
        Ok(Self { spec, base: base.clone(), offset, one_form_residual: form.residual, curl })
    }

    pub fn potential_spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn one_form_residual(&self) -> f64 {
        self.one_form_residual
    }

    pub fn curl(&self) -> f64 {
        self.curl
    }

    pub fn potential(&self, xi: &Vector) -> Result<f64> {
        self.spec.ensure_interior(xi)?;
        let v = self.spec.value(xi);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::OutsideDomain { point: xi.iter().copied().collect() })
        }
    }

    /// `D[q : p] = s [c(xi_q, eta_p) - phi_hat(xi_q) - psi_hat(eta_p)]` with
    /// `eta_p` the alpha-gradient of `phi_hat` at `p` and
    /// `psi_hat(eta_p) = c(xi_p, eta_p) - phi_hat(xi_p)`.
    pub fn divergence(&self, q: &Vector, p: &Vector) -> Result<f64> {
        let a = self.spec.alpha().alpha();
        let s = self.spec.alpha().sign().factor();
        let eta_p = alpha_gradient(&self.spec, p)?;
        let psi = cost_c_alpha(p, &eta_p, a)? - self.potential(p)?;
        Ok(s * (cost_c_alpha(q, &eta_p, a)? - self.potential(q)? - psi))
    }
}

/// Validates the metric identity at `q` and `p`, then evaluates the
/// canonical divergence of the reconstruction anchored at `base`.
pub fn canonical_divergence(
    field: &ConnectionField,
    g: &dyn Fn(&Vector) -> Result<Matrix>,
    base: &Vector,
    q: &Vector,
    p: &Vector,
) -> Result<f64> {
    for x in [q, p] {
        let r = check_metric_identity(field, g, x, ONE_FORM_FD_STEP)?;
        if r > METRIC_IDENTITY_TOL {
            return Err(Error::ResidualTooLarge { residual: r, tol: METRIC_IDENTITY_TOL });
        }
    }
    Reconstruction::new(field, base, DEFAULT_QUADRATURE_PANELS)?.divergence(q, p)
}

/// Divergences of many `(q, p)` pairs, in parallel.
pub fn divergence_batch(rec: &Reconstruction, pairs: &[(Vector, Vector)]) -> Vec<Result<f64>> {
    parallel_map(pairs, |(q, p)| rec.divergence(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::l_divergence;
    use crate::geometry::metric;
    use crate::linalg::vector;
    use crate::potentials::{make_builtin_potential, BuiltinName};

    fn simplex_plus() -> PotentialSpec {
        make_builtin_potential(BuiltinName::SimplexFAlpha, 2, AlphaParam::concave(1.0).unwrap()).unwrap()
    }

    fn log_barrier() -> PotentialSpec {
        make_builtin_potential(BuiltinName::LogBarrierOnQuadrant, 3, AlphaParam::convex(0.5).unwrap()).unwrap()
    }

    fn constant_field(a: Vector) -> ConnectionField {
        let d = a.len();
        ConnectionField::new(
            Arc::new(move |_: &Vector| Ok(projective_template(&a))),
            ChartDomain::whole_space(d),
            AlphaParam::concave(1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn one_form_of_potential_field() {
        let phi = simplex_plus();
        let field = ConnectionField::from_potential(&phi).unwrap();
        let xi = vector(&[0.4, -0.2]);
        let f = extract_one_form(&field, &xi, ONE_FORM_TOL).unwrap();
        assert!((&f.a + phi.gradient(&xi)).amax() < 1e-12);
        // a_i = G^j_ij for i != j
        let g = field.symbols(&xi).unwrap();
        assert!((f.a[0] - g.get(0, 1, 1)).abs() < 1e-14);
    }

    #[test]
    fn zero_field_has_zero_form() {
        let f = extract_one_form(&constant_field(Vector::zeros(3)), &Vector::zeros(3), ONE_FORM_TOL).unwrap();
        assert_eq!(f.a.amax(), 0.0);
        assert_eq!(check_closedness(&constant_field(vector(&[1.0, -2.0])), &Vector::zeros(2), 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_field_is_flagged() {
        let field = ConnectionField::from_potential(&simplex_plus()).unwrap();
        let noise = Tensor3::from_fn(2, |i, j, k| if (i, j, k) == (1, 1, 0) { 1e-3 } else { 0.0 });
        let r = extract_one_form(&field.perturbed(noise), &vector(&[0.1, 0.2]), ONE_FORM_TOL);
        match r {
            Err(Error::ResidualTooLarge { residual, .. }) => assert!(residual > 5e-4 && residual < 2e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rotation_form_is_not_closed() {
        // a = (-xi_2, xi_1) has curl 2
        let field = ConnectionField::new(
            Arc::new(|x: &Vector| Ok(projective_template(&vector(&[-x[1], x[0]])))),
            ChartDomain::whole_space(2),
            AlphaParam::concave(1.0).unwrap(),
        )
        .unwrap();
        let curl = check_closedness(&field, &vector(&[0.3, 0.7]), 1e-4).unwrap();
        assert!((curl - 2.0).abs() < 1e-8);
        assert!(matches!(
            integrate_potential(&field, &vector(&[0.0, 0.0]), &vector(&[1.0, 1.0]), 16),
            Err(Error::OpenCurl { .. })
        ));
        assert!(matches!(Reconstruction::new(&field, &vector(&[0.0, 0.0]), 16), Err(Error::OpenCurl { .. })));
    }

    #[test]
    fn potential_fields_are_closed_and_satisfy_the_metric_identity() {
        for phi in [simplex_plus(), log_barrier()] {
            let field = ConnectionField::from_potential(&phi).unwrap();
            let xi = if phi.dim() == 2 { vector(&[0.3, 0.9]) } else { vector(&[0.7, 1.3, 2.0]) };
            assert!(check_closedness(&field, &xi, ONE_FORM_FD_STEP).unwrap() < 1e-5);
            let g = |x: &Vector| metric(&phi, x);
            assert!(check_metric_identity(&field, &g, &xi, ONE_FORM_FD_STEP).unwrap() < 1e-4);
        }
    }

    #[test]
    fn mismatched_alpha_breaks_the_metric_identity() {
        let phi = simplex_plus();
        let field = ConnectionField::from_potential(&phi).unwrap();
        let xi = vector(&[0.3, 0.9]);
        let g = |x: &Vector| metric(&phi, x);
        let other =
            ConnectionField::new(field.symbols.clone(), field.domain.clone(), AlphaParam::concave(1.1).unwrap())
                .unwrap();
        let r = check_metric_identity(&other, &g, &xi, ONE_FORM_FD_STEP).unwrap();
        let scale = metric(&phi, &xi).unwrap().amax();
        assert!(r > 0.05 * scale / (1.1 * scale).max(1.0), "{r}");
    }

    #[test]
    fn integration_recovers_potential_differences() {
        let phi = simplex_plus();
        let field = ConnectionField::from_potential(&phi).unwrap();
        let (b, t) = (vector(&[0.1, 0.2]), vector(&[1.3, -0.3]));
        let v = integrate_potential(&field, &b, &t, 64).unwrap();
        assert!((v - (phi.value(&t) - phi.value(&b))).abs() < 1e-8);
        assert_eq!(integrate_potential(&field, &b, &b, 64).unwrap(), 0.0);
        assert!(path_discrepancy(&field, &b, &t, 64).unwrap() < 1e-8);
    }

    #[test]
    fn canonical_divergence_reproduces_the_original() {
        for phi in [simplex_plus(), log_barrier()] {
            let field = ConnectionField::from_potential(&phi).unwrap();
            let g = |x: &Vector| metric(&phi, x);
            let (base, q, p) = if phi.dim() == 2 {
                (vector(&[0.0, 0.0]), vector(&[0.5, -0.2]), vector(&[-0.1, 0.8]))
            } else {
                (vector(&[1.0, 1.0, 1.0]), vector(&[0.8, 1.4, 2.0]), vector(&[1.2, 0.6, 1.1]))
            };
            let d = canonical_divergence(&field, &g, &base, &q, &p).unwrap();
            assert!((d - l_divergence(&phi, &q, &p).unwrap()).abs() < 1e-7);
            assert!(canonical_divergence(&field, &g, &base, &q, &q).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn gauge_and_rechart_invariance() {
        let phi = simplex_plus();
        let field = ConnectionField::from_potential(&phi).unwrap();
        let base = vector(&[0.0, 0.0]);
        let (q, p) = (vector(&[0.5, -0.2]), vector(&[-0.1, 0.8]));
        let r0 = Reconstruction::new(&field, &base, 64).unwrap();
        let r1 = Reconstruction::with_offset(&field, &base, 64, 3.7).unwrap();
        let d0 = r0.divergence(&q, &p).unwrap();
        assert!((d0 - r1.divergence(&q, &p).unwrap()).abs() < 1e-12);

        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.5, -0.3, 1.5]);
        let b = vector(&[0.7, -1.0]);
        let moved = field.recharted(&a, &b).unwrap();
        let base2 = &a * &base + &b;
        let r2 = Reconstruction::new(&moved, &base2, 64).unwrap();
        let d2 = r2.divergence(&(&a * &q + &b), &(&a * &p + &b)).unwrap();
        assert!((d0 - d2).abs() < 1e-7, "{d0} vs {d2}");
    }

    #[test]
    fn rejects_flat_and_low_dimensional_requests() {
        assert!(ConnectionField::new(
            Arc::new(|_: &Vector| Ok(Tensor3::zeros(2))),
            ChartDomain::whole_space(2),
            AlphaParam::concave(0.0).unwrap()
        )
        .is_err());
        let phi = make_builtin_potential(BuiltinName::SimplexFAlpha, 1, AlphaParam::concave(1.0).unwrap()).unwrap();
        assert!(ConnectionField::from_potential(&phi).is_err());
    }
}
