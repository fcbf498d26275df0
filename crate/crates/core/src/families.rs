//! F(±α) families on finite sample spaces.
//!
//! `p(x, xi) = (1 + alpha xi . h(x))^(-1/alpha) e^{phi(xi)}` for the `+`
//! family and `(1 + alpha xi . h(x))^(1/alpha) e^{-phi(xi)}` for the `-`
//! family, with `phi` the normalizing potential. All integrals are finite
//! sums against the reference weights `mu`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::duality::{alpha_conjugate, alpha_gradient, l_divergence, DualPair};
use crate::error::{Error, Result};
use crate::geometry::{curvature_tensor, fit_sectional_curvature, metric};
use crate::linalg::{max_abs, Matrix, Vector};
use crate::parallel::parallel_map;
use crate::potentials::{
    check_exponential_class, finite_difference_derivatives, AlphaParam, ChartDomain, ClassReport, Potential,
    PotentialSpec, Sign, DOMAIN_MARGIN, FD_HESSIAN_STEP,
};

/// Tolerance on the normalization of user-supplied densities.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilySign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for FamilySign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilySign::Plus => "+",
            FamilySign::Minus => "-",
        })
    }
}

impl FromStr for FamilySign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(FamilySign::Plus),
            "-" | "minus" => Ok(FamilySign::Minus),
            other => Err(Error::InvalidParameter(format!("unknown family sign {other:?}"))),
        }
    }
}

/// Order of a Rényi entropy or divergence, in `(0, 1) ∪ (1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(order: f64) -> Result<Self> {
        if !order.is_finite() || order <= 0.0 || order == 1.0 {
            return Err(Error::InvalidParameter(format!("Renyi order must lie in (0,1) or (1,inf), got {order}")));
        }
        Ok(Self(order))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The matching Amari index `1 - 2 order`.
    pub fn amari_index(self) -> f64 {
        1.0 - 2.0 * self.0
    }
}

/// The three cases of the divergence/entropy correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyRegime {
    /// `+` family, concave class, order `1 + alpha`.
    Plus,
    /// `-` family with `alpha < 1`, convex class, order `1 - alpha`.
    MinusBelowOne,
    /// `-` family with `alpha > 1`, concave class, order `alpha`, factor `(alpha - 1)/alpha`.
    MinusAboveOne,
}

/// How the L-divergence and the conjugate of a family read in Rényi terms.
///
/// `divergence(xi, xi') = factor * D_order(p(first) || p(second))` where
/// `first` is `xi'` unless `swap` is false, and
/// `conjugate(eta) = entropy_sign * log(sum mu p^conjugate_power) / conjugate_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenyiCase {
    pub regime: FamilyRegime,
    pub class: Sign,
    pub order: f64,
    pub factor: f64,
    pub swap: bool,
    pub conjugate_power: f64,
    pub conjugate_scale: f64,
}

impl FamilyRegime {
    pub fn of(sign: FamilySign, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("family alpha must be positive, got {alpha}")));
        }
        match sign {
            FamilySign::Plus => Ok(FamilyRegime::Plus),
            FamilySign::Minus if alpha < 1.0 => Ok(FamilyRegime::MinusBelowOne),
            FamilySign::Minus if alpha > 1.0 => Ok(FamilyRegime::MinusAboveOne),
            FamilySign::Minus => {
                Err(Error::InvalidParameter("the - family with alpha = 1 has an affine e^{alpha phi}".into()))
            }
        }
    }

    pub fn case(self, alpha: f64) -> RenyiCase {
        // conjugate = log(sum mu p^power) / scale
        let (class, order, factor, swap, conjugate_power, conjugate_scale) = match self {
            FamilyRegime::Plus => (Sign::Concave, 1.0 + alpha, 1.0, true, 1.0 + alpha, -alpha),
            FamilyRegime::MinusBelowOne => (Sign::Convex, 1.0 - alpha, 1.0, true, 1.0 - alpha, -alpha),
            FamilyRegime::MinusAboveOne => (Sign::Concave, alpha, (alpha - 1.0) / alpha, false, 1.0 - alpha, -alpha),
        };
        RenyiCase { regime: self, class, order, factor, swap, conjugate_power, conjugate_scale }
    }
}

/// JSON form of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub sample_points: usize,
    pub mu: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub alpha: f64,
    pub family_sign: FamilySign,
}

impl FamilyConfig {
    pub fn build(&self) -> Result<DiscreteFamily> {
        if self.mu.len() != self.sample_points {
            return Err(Error::DimensionMismatch { expected: self.sample_points, found: self.mu.len() });
        }
        if self.h.len() != self.sample_points {
            return Err(Error::DimensionMismatch { expected: self.sample_points, found: self.h.len() });
        }
        let h = self.h.iter().map(|row| Vector::from_column_slice(row)).collect();
        DiscreteFamily::new(self.mu.clone(), h, self.alpha, self.family_sign)
    }
}

/// A finite F(±α) family.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFamily {
    mu: Vec<f64>,
    h: Vec<Vector>,
    alpha: f64,
    sign: FamilySign,
    regime: FamilyRegime,
}

impl DiscreteFamily {
    /// `mu` are positive reference weights and `h[x]` the statistic at sample
    /// point `x`. Entries of `h` must be nonnegative, and no nonzero
    /// combination of the components of `h` may be constant on the sample space.
    pub fn new(mu: Vec<f64>, h: Vec<Vector>, alpha: f64, sign: FamilySign) -> Result<Self> {
        let regime = FamilyRegime::of(sign, alpha)?;
        if mu.is_empty() || mu.len() != h.len() {
            return Err(Error::DimensionMismatch { expected: mu.len(), found: h.len() });
        }
        if let Some(m) = mu.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidParameter(format!("reference weights must be positive, got {m}")));
        }
        let d = h[0].len();
        if d == 0 {
            return Err(Error::InvalidParameter("statistic must have at least one component".into()));
        }
        for row in &h {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidParameter(format!("statistic entries must be nonnegative, got {v}")));
            }
        }
        // Cov(Z) is nonsingular iff no nonzero v makes v . h(x) constant in x.
        let rows = Matrix::from_fn(h.len(), d + 1, |x, i| if i == 0 { 1.0 } else { h[x][i - 1] });
        if rows.rank(1e-12 * max_abs(&rows)) < d + 1 {
            return Err(Error::InvalidParameter(
                "statistic is not identifiable: [1 | h] must have full column rank".into(),
            ));
        }
        Ok(Self { mu, h, alpha, sign, regime })
    }

    /// The simplex `{0, ..., d}` with counting measure and indicator statistic.
    pub fn simplex(dim: usize, alpha: f64, sign: FamilySign) -> Result<Self> {
        let mut h = vec![Vector::zeros(dim)];
        for i in 0..dim {
            let mut e = Vector::zeros(dim);
            e[i] = 1.0;
            h.push(e);
        }
        Self::new(vec![1.0; dim + 1], h, alpha, sign)
    }

    pub fn dim(&self) -> usize {
        self.h[0].len()
    }

    pub fn sample_points(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn statistic(&self) -> &[Vector] {
        &self.h
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sign(&self) -> FamilySign {
        self.sign
    }

    pub fn regime(&self) -> FamilyRegime {
        self.regime
    }

    pub fn renyi_case(&self) -> RenyiCase {
        self.regime.case(self.alpha)
    }

    fn exponent(&self) -> f64 {
        match self.sign {
            FamilySign::Plus => -1.0 / self.alpha,
            FamilySign::Minus => 1.0 / self.alpha,
        }
    }

    /// `{xi : 1 + alpha xi . h(x) > 0 for all x}`.
    pub fn domain(&self) -> ChartDomain {
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for row in &self.h {
            if row.iter().any(|v| *v != 0.0) {
                normals.push(row * (-self.alpha));
                offsets.push(1.0);
            }
        }
        ChartDomain::Halfspaces { dim: self.dim(), normals, offsets }
    }

    pub fn contains(&self, xi: &Vector) -> bool {
        self.domain().contains(xi)
    }

    /// `1 + alpha xi . h(x)` per sample point.
    fn bases(&self, xi: &Vector) -> Result<Vec<f64>> {
        if xi.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: xi.len() });
        }
        let bases: Vec<f64> = self.h.iter().map(|row| 1.0 + self.alpha * row.dot(xi)).collect();
        if bases.iter().any(|b| !(*b > DOMAIN_MARGIN)) {
            return Err(Error::OutsideDomain { point: xi.iter().copied().collect() });
        }
        Ok(bases)
    }

    /// Unnormalized masses `u^e` and their `mu`-weighted total.
    fn masses(&self, bases: &[f64]) -> (Vec<f64>, f64) {
        let e = self.exponent();
        let w: Vec<f64> = bases.iter().map(|b| (e * b.ln()).exp()).collect();
        let total = w.iter().zip(&self.mu).map(|(a, m)| a * m).sum();
        (w, total)
    }

    /// The potential `phi(xi)`.
    pub fn potential(&self, xi: &Vector) -> Result<f64> {
        let (_, total) = self.masses(&self.bases(xi)?);
        Ok(match self.sign {
            FamilySign::Plus => -total.ln(),
            FamilySign::Minus => total.ln(),
        })
    }

    /// Density of `p(., xi)` with respect to `mu`.
    pub fn density(&self, xi: &Vector) -> Result<Vec<f64>> {
        let (w, total) = self.masses(&self.bases(xi)?);
        Ok(w.into_iter().map(|a| a / total).collect())
    }

    /// `Z_xi(x) = h(x) / (1 + alpha xi . h(x))`.
    fn z_values(&self, bases: &[f64]) -> Vec<Vector> {
        self.h.iter().zip(bases).map(|(row, b)| row / *b).collect()
    }

    /// `E_xi[Z_xi]`, which is the gradient of the potential.
    pub fn expectation_parameter(&self, xi: &Vector) -> Result<Vector> {
        Ok(self.moments(xi)?.0)
    }

    /// First and second moments `(E[Z], E[Z Z^T])` under `p(., xi)`.
    fn moments(&self, xi: &Vector) -> Result<(Vector, Matrix)> {
        let bases = self.bases(xi)?;
        let (w, total) = self.masses(&bases);
        let z = self.z_values(&bases);
        let d = self.dim();
        let mut mean = Vector::zeros(d);
        let mut second = Matrix::zeros(d, d);
        for ((zx, wx), mx) in z.iter().zip(&w).zip(&self.mu) {
            let px = wx * mx / total;
            mean += zx * px;
            second += zx * zx.transpose() * px;
        }
        Ok((mean, second))
    }

    /// `Cov_xi(Z_xi)`, the Fisher information of the family in the `xi` chart.
    pub fn covariance(&self, xi: &Vector) -> Result<Matrix> {
        let (mean, second) = self.moments(xi)?;
        Ok(second - &mean * mean.transpose())
    }

    /// The potential wrapped as a [`PotentialSpec`] with the class the family
    /// regime predicts.
    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        let case = self.renyi_case();
        let alpha = AlphaParam::new(self.alpha, case.class)?;
        PotentialSpec::new(
            format!("family-{}", self.sign),
            alpha,
            self.domain(),
            Arc::new(FamilyPotential(self.clone())),
        )
    }

    /// `D_order` between the family members at `xi` and `xi_prime` as the
    /// regime's correspondence dictates, including the factor.
    pub fn renyi_side(&self, xi: &Vector, xi_prime: &Vector) -> Result<f64> {
        let case = self.renyi_case();
        let p = self.density(xi)?;
        let q = self.density(xi_prime)?;
        let order = RenyiOrder::new(case.order)?;
        let d = if case.swap {
            renyi_divergence(&q, &p, &self.mu, order)?
        } else {
            renyi_divergence(&p, &q, &self.mu, order)?
        };
        Ok(case.factor * d)
    }

    /// Closed-form value of the conjugate at the dual point of `xi`.
    pub fn entropy_side(&self, xi: &Vector) -> Result<f64> {
        let case = self.renyi_case();
        let p = self.density(xi)?;
        let s: f64 = p.iter().zip(&self.mu).map(|(px, m)| m * px.powf(case.conjugate_power)).sum();
        Ok(s.ln() / case.conjugate_scale)
    }
}

#[derive(Debug)]
struct FamilyPotential(DiscreteFamily);

impl Potential for FamilyPotential {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, xi: &Vector) -> f64 {
        self.0.potential(xi).unwrap_or(f64::NAN)
    }

    fn gradient(&self, xi: &Vector) -> Vector {
        self.0.expectation_parameter(xi).unwrap_or_else(|_| Vector::from_element(xi.len(), f64::NAN))
    }

    // + family: -(1 + alpha) E[Z Z^T] + E[Z] E[Z]^T
    // - family:  (1 - alpha) E[Z Z^T] - E[Z] E[Z]^T
    fn hessian(&self, xi: &Vector) -> Matrix {
        let d = xi.len();
        let Ok((mean, second)) = self.0.moments(xi) else {
            return Matrix::from_element(d, d, f64::NAN);
        };
        let outer = &mean * mean.transpose();
        match self.0.sign {
            FamilySign::Plus => second * (-(1.0 + self.0.alpha)) + outer,
            FamilySign::Minus => second * (1.0 - self.0.alpha) - outer,
        }
    }
}

/// Class check plus the covariance form of `D^2 e^{alpha phi}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyClassReport {
    pub regime: FamilyRegime,
    pub class: Sign,
    pub class_report: ClassReport,
    /// Max relative deviation between the finite-difference Hessian of
    /// `Phi = e^{alpha phi}` and `c Phi Cov(Z)` with `c = -alpha(1+alpha)`
    /// for the `+` family and `alpha(1-alpha)` for the `-` family.
    pub covariance_residual: f64,
    pub ok: bool,
}

/// Runs the class conditions for the predicted class at `points` and checks
/// the covariance identity to `cov_tol`.
pub fn family_concavity_check(fam: &DiscreteFamily, points: &[Vector], cov_tol: f64) -> Result<FamilyClassReport> {
    let spec = fam.potential_spec()?;
    let class_report = check_exponential_class(&spec, points, 0.0)?;
    let a = fam.alpha;
    let coef = match fam.sign {
        FamilySign::Plus => -a * (1.0 + a),
        FamilySign::Minus => a * (1.0 - a),
    };
    let mut covariance_residual: f64 = 0.0;
    for xi in points {
        let big_phi = |x: &Vector| fam.potential(x).map(|v| (a * v).exp()).unwrap_or(f64::NAN);
        let (_, fd) = finite_difference_derivatives(big_phi, &spec.domain().clone(), xi, FD_HESSIAN_STEP)?;
        let predicted = fam.covariance(xi)? * (coef * big_phi(xi));
        let scale = max_abs(&predicted).max(1e-300);
        covariance_residual = covariance_residual.max(max_abs(&(fd - &predicted)) / scale);
    }
    let ok = class_report.all_ok && covariance_residual <= cov_tol;
    Ok(FamilyClassReport { regime: fam.regime, class: fam.renyi_case().class, class_report, covariance_residual, ok })
}

fn check_density(p: &[f64], mu: &[f64]) -> Result<()> {
    if p.len() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), found: p.len() });
    }
    if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter(format!("density values must be nonnegative, got {v}")));
    }
    if let Some(m) = mu.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Error::InvalidParameter(format!("reference weights must be positive, got {m}")));
    }
    let mass: f64 = p.iter().zip(mu).map(|(a, m)| a * m).sum();
    if mass == 0.0 {
        return Err(Error::ZeroMass);
    }
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidParameter(format!("density has total mass {mass}, expected 1")));
    }
    Ok(())
}

/// `H_order(p) = log(sum mu p^order) / (1 - order)`.
pub fn renyi_entropy(p: &[f64], mu: &[f64], order: RenyiOrder) -> Result<f64> {
    check_density(p, mu)?;
    let a = order.value();
    let s: f64 = p.iter().zip(mu).filter(|(px, _)| **px > 0.0).map(|(px, m)| m * px.powf(a)).sum();
    Ok(s.ln() / (1.0 - a))
}

/// `D_order(p || q) = log(sum mu p^order q^(1-order)) / (order - 1)`.
pub fn renyi_divergence(p: &[f64], q: &[f64], mu: &[f64], order: RenyiOrder) -> Result<f64> {
    check_density(p, mu)?;
    check_density(q, mu)?;
    let a = order.value();
    let mut s = 0.0;
    for (x, ((px, qx), m)) in p.iter().zip(q).zip(mu).enumerate() {
        if *px == 0.0 {
            continue;
        }
        if *qx == 0.0 {
            return Err(Error::SupportViolation { index: x });
        }
        s += m * px.powf(a) * qx.powf(1.0 - a);
    }
    Ok(s.ln() / (a - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl IdentityReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, gap: (lhs - rhs).abs() }
    }
}

/// L-divergence of the family potential against the regime's Rényi expression.
pub fn verify_renyi_theorem(fam: &DiscreteFamily, xi: &Vector, xi_prime: &Vector) -> Result<IdentityReport> {
    let spec = fam.potential_spec()?;
    let lhs = l_divergence(&spec, xi, xi_prime)?;
    let rhs = fam.renyi_side(xi, xi_prime)?;
    Ok(IdentityReport::new(lhs, rhs))
}

/// [`verify_renyi_theorem`] over many pairs, in parallel.
pub fn verify_renyi_batch(fam: &DiscreteFamily, pairs: &[(Vector, Vector)]) -> Vec<Result<IdentityReport>> {
    parallel_map(pairs, |(a, b)| verify_renyi_theorem(fam, a, b))
}

/// The conjugate at `eta = D^(alpha) phi(xi)`, obtained by inverting the
/// alpha-gradient, against the closed-form entropy expression.
pub fn verify_conjugate_entropy(fam: &DiscreteFamily, xi: &Vector) -> Result<IdentityReport> {
    let pair = DualPair::new(fam.potential_spec()?);
    let eta = alpha_gradient(pair.primal(), xi)?;
    let lhs = alpha_conjugate(&pair, &eta, None)?;
    let rhs = fam.entropy_side(xi)?;
    Ok(IdentityReport::new(lhs, rhs))
}

/// The bijection between the open simplex `S_d` and the chart of the simplex
/// F(±α) family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexChart {
    pub dim: usize,
    pub alpha: f64,
    pub sign: FamilySign,
}

impl SimplexChart {
    pub fn new(dim: usize, alpha: f64, sign: FamilySign) -> Result<Self> {
        if dim == 0 || !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "simplex chart needs dim >= 1 and alpha > 0, got {dim}, {alpha}"
            )));
        }
        Ok(Self { dim, alpha, sign })
    }

    /// `(p^0, ..., p^d)` for `xi`.
    pub fn to_simplex(&self, xi: &Vector) -> Result<Vec<f64>> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: xi.len() });
        }
        let e = match self.sign {
            FamilySign::Plus => -1.0 / self.alpha,
            FamilySign::Minus => 1.0 / self.alpha,
        };
        let mut w = vec![1.0];
        for x in xi.iter() {
            let b = 1.0 + self.alpha * x;
            if !(b > DOMAIN_MARGIN) {
                return Err(Error::OutsideDomain { point: xi.iter().copied().collect() });
            }
            w.push((e * b.ln()).exp());
        }
        let total: f64 = w.iter().sum();
        Ok(w.into_iter().map(|v| v / total).collect())
    }

    /// `xi^i = ((p^0/p^i)^alpha - 1)/alpha` for `+`, `((p^i/p^0)^alpha - 1)/alpha` for `-`.
    pub fn from_simplex(&self, p: &[f64]) -> Result<Vector> {
        check_open_simplex(p)?;
        if p.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim + 1, found: p.len() });
        }
        let a = self.alpha;
        Ok(Vector::from_iterator(
            self.dim,
            p[1..].iter().map(|pi| {
                let ratio = match self.sign {
                    FamilySign::Plus => p[0] / pi,
                    FamilySign::Minus => pi / p[0],
                };
                (ratio.powf(a) - 1.0) / a
            }),
        ))
    }
}

fn check_open_simplex(p: &[f64]) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::InvalidParameter("a simplex point needs at least two coordinates".into()));
    }
    if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!("simplex point on the boundary (coordinate {v})")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidParameter(format!("simplex point sums to {s}")));
    }
    Ok(())
}

/// `D_a[p : q] = 4/(1 - a^2) (1 - sum p^((1-a)/2) q^((1+a)/2))`.
pub fn alpha_divergence(p: &[f64], q: &[f64], a: f64) -> Result<f64> {
    if !a.is_finite() || (a.abs() - 1.0).abs() == 0.0 {
        return Err(Error::InvalidParameter(format!("alpha-divergence index must differ from +-1, got {a}")));
    }
    check_open_simplex(p)?;
    check_open_simplex(q)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    let (ep, eq) = ((1.0 - a) / 2.0, (1.0 + a) / 2.0);
    let s: f64 = p.iter().zip(q).map(|(pi, qi)| pi.powf(ep) * qi.powf(eq)).sum();
    Ok(4.0 / (1.0 - a * a) * (1.0 - s))
}

/// `D_order(p || q)` against `log(1 + order (order - 1) D_a[p : q]) / (order - 1)`
/// with `a = 1 - 2 order`, both computed independently.
pub fn renyi_alpha_identity_check(p: &[f64], q: &[f64], order: RenyiOrder) -> Result<IdentityReport> {
    let ones = vec![1.0; p.len()];
    let lhs = renyi_divergence(p, q, &ones, order)?;
    let t = order.value();
    let da = alpha_divergence(p, q, order.amari_index())?;
    let rhs = (t * (t - 1.0) * da).ln_1p() / (t - 1.0);
    Ok(IdentityReport::new(lhs, rhs))
}

/// Curvature of the alpha-divergence structure on the simplex, obtained from
/// the simplex family of matching Rényi order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureTransfer {
    pub amari_index: f64,
    /// `(1 - a^2)/4`.
    pub predicted: f64,
    /// Sectional curvature fitted against the Fisher metric.
    pub fitted: f64,
    /// `max |R - k B|` at the fitted `k`.
    pub fit_residual: f64,
    /// `max |g_family - order * Fisher|`, relative to `|g_family|`.
    pub metric_ratio_residual: f64,
}

/// The simplex family whose L-divergence is `D_order(p(xi') || p(xi))`.
pub fn simplex_family_for_order(dim: usize, order: RenyiOrder) -> Result<DiscreteFamily> {
    let t = order.value();
    if t > 1.0 {
        DiscreteFamily::simplex(dim, t - 1.0, FamilySign::Plus)
    } else {
        DiscreteFamily::simplex(dim, 1.0 - t, FamilySign::Minus)
    }
}

/// Fits the curvature tensor of the family potential against the Fisher
/// metric `Cov(Z)` at `xi`. The family metric is `order` times the Fisher
/// metric and the connections coincide, so the fit is the curvature of the
/// alpha-divergence geometry.
pub fn alpha_divergence_curvature(dim: usize, order: RenyiOrder, xi: &Vector) -> Result<CurvatureTransfer> {
    let fam = simplex_family_for_order(dim, order)?;
    let spec = fam.potential_spec()?;
    let fisher = fam.covariance(xi)?;
    let g_family = metric(&spec, xi)?;
    let metric_ratio_residual = max_abs(&(&g_family - &fisher * order.value())) / max_abs(&g_family);
    let r = curvature_tensor(&spec, xi)?;
    let fit = fit_sectional_curvature(&r, &fisher);
    let a = order.amari_index();
    Ok(CurvatureTransfer {
        amari_index: a,
        predicted: (1.0 - a * a) / 4.0,
        fitted: fit.k,
        fit_residual: fit.residual,
        metric_ratio_residual,
    })
}
