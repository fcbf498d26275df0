//! Potential functions on convex charts and their exponential concavity
//! and convexity checks.
//!
//! A potential `phi` is *alpha-exponentially concave* when `exp(alpha phi)`
//! is concave, which for smooth `phi` means `-D^2 phi - alpha Dphi Dphi^T`
//! is positive semidefinite. The convex class flips the sign of the whole
//! matrix. `alpha = 0` encodes the Bregman limit, where the conditions reduce
//! to plain concavity or convexity.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, Matrix, Vector};

/// Interior margin used by every strict domain-membership test.
pub const DOMAIN_MARGIN: f64 = 1e-9;
/// Default central-difference step for gradients.
pub const FD_GRADIENT_STEP: f64 = 1e-5;
/// Default central-difference step for Hessians.
pub const FD_HESSIAN_STEP: f64 = 1e-4;
/// Threshold for the positive-definiteness test.
pub const PD_TOL: f64 = 1e-10;

/// Concavity class of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// `exp(alpha phi)` concave; gives the global `L^(alpha)` divergence.
    Concave,
    /// `exp(alpha phi)` convex; gives the local `L^(-alpha)` divergence.
    Convex,
}

impl Sign {
    /// `+1` for the concave class, `-1` for the convex class.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Concave => 1.0,
            Sign::Convex => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Concave => f.write_str("concave"),
            Sign::Convex => f.write_str("convex"),
        }
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concave" | "+" => Ok(Sign::Concave),
            "convex" | "-" => Ok(Sign::Convex),
            other => Err(Error::InvalidParameter(format!("unknown sign '{other}'"))),
        }
    }
}

/// Divergence order: magnitude `alpha >= 0` plus concavity class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaParam {
    alpha: f64,
    sign: Sign,
}

impl AlphaParam {
    pub fn new(alpha: f64, sign: Sign) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        Ok(Self { alpha, sign })
    }

    pub fn concave(alpha: f64) -> Result<Self> {
        Self::new(alpha, Sign::Concave)
    }

    pub fn convex(alpha: f64) -> Result<Self> {
        Self::new(alpha, Sign::Convex)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `true` for the `0+` / `0-` Bregman limit.
    pub fn is_bregman(&self) -> bool {
        self.alpha == 0.0
    }
}

/// Open convex chart domain.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartDomain {
    /// Product of open intervals; bounds may be infinite.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{xi : 1 + alpha xi^i > 0 for all i}`.
    SimplexChart { alpha: f64, dim: usize },
    /// Intersection of open half-spaces `normal . xi < offset`.
    Halfspaces { dim: usize, normals: Vec<Vector>, offsets: Vec<f64> },
    /// `{xi : xi + shift in inner}`.
    Shifted { inner: Box<ChartDomain>, shift: Vector },
    /// Image of `inner` under `xi -> forward xi + offset`; `inverse` is `forward^-1`.
    Affine { inner: Box<ChartDomain>, forward: Matrix, inverse: Matrix, offset: Vector },
}

impl ChartDomain {
    pub fn quadrant(dim: usize) -> Self {
        ChartDomain::Box { lower: vec![0.0; dim], upper: vec![f64::INFINITY; dim] }
    }

    pub fn whole_space(dim: usize) -> Self {
        ChartDomain::Box { lower: vec![f64::NEG_INFINITY; dim], upper: vec![f64::INFINITY; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            ChartDomain::Box { lower, .. } => lower.len(),
            ChartDomain::SimplexChart { dim, .. } => *dim,
            ChartDomain::Halfspaces { dim, .. } => *dim,
            ChartDomain::Shifted { inner, .. } | ChartDomain::Affine { inner, .. } => inner.dim(),
        }
    }

    /// Strict membership with the default interior margin.
    pub fn contains(&self, xi: &Vector) -> bool {
        self.contains_with_margin(xi, DOMAIN_MARGIN)
    }

    pub fn contains_with_margin(&self, xi: &Vector, margin: f64) -> bool {
        if xi.len() != self.dim() || xi.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            ChartDomain::Box { lower, upper } => {
                xi.iter().zip(lower.iter().zip(upper)).all(|(x, (lo, hi))| *x > lo + margin && *x < hi - margin)
            }
            ChartDomain::SimplexChart { alpha, .. } => xi.iter().all(|x| 1.0 + alpha * x > margin),
            ChartDomain::Halfspaces { normals, offsets, .. } => {
                normals.iter().zip(offsets).all(|(n, b)| n.dot(xi) < b - margin)
            }
            ChartDomain::Shifted { inner, shift } => inner.contains_with_margin(&(xi + shift), margin),
            ChartDomain::Affine { inner, inverse, offset, .. } => {
                inner.contains_with_margin(&(inverse * (xi - offset)), margin)
            }
        }
    }

    /// A canonical interior point, used to seed Newton iterations.
    pub fn default_seed(&self) -> Vector {
        match self {
            ChartDomain::Box { lower, upper } => Vector::from_iterator(
                lower.len(),
                lower.iter().zip(upper).map(|(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    (false, false) => 0.0,
                }),
            ),
            ChartDomain::SimplexChart { dim, .. } | ChartDomain::Halfspaces { dim, .. } => Vector::zeros(*dim),
            ChartDomain::Shifted { inner, shift } => inner.default_seed() - shift,
            ChartDomain::Affine { inner, forward, offset, .. } => forward * inner.default_seed() + offset,
        }
    }
}

/// A smooth scalar function on a chart.
///
/// The default derivative implementations are central finite differences.
pub trait Potential: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, xi: &Vector) -> f64;

    fn gradient(&self, xi: &Vector) -> Vector {
        fd_gradient(|x| self.value(x), xi, FD_GRADIENT_STEP)
    }

    fn hessian(&self, xi: &Vector) -> Matrix {
        fd_hessian(|x| self.value(x), xi, FD_HESSIAN_STEP)
    }
}

/// Central-difference gradient.
pub fn fd_gradient<F: Fn(&Vector) -> f64>(f: F, xi: &Vector, h: f64) -> Vector {
    let d = xi.len();
    let mut g = Vector::zeros(d);
    let mut x = xi.clone();
    for i in 0..d {
        x[i] = xi[i] + h;
        let fp = f(&x);
        x[i] = xi[i] - h;
        let fm = f(&x);
        x[i] = xi[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian, symmetrized.
pub fn fd_hessian<F: Fn(&Vector) -> f64>(f: F, xi: &Vector, h: f64) -> Matrix {
    let d = xi.len();
    let mut m = Matrix::zeros(d, d);
    let f0 = f(xi);
    let mut x = xi.clone();
    for i in 0..d {
        x[i] = xi[i] + h;
        let fp = f(&x);
        x[i] = xi[i] - h;
        let fm = f(&x);
        x[i] = xi[i];
        m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (i + 1)..d {
            let mut eval = |si: f64, sj: f64| {
                x[i] = xi[i] + si * h;
                x[j] = xi[j] + sj * h;
                let v = f(&x);
                x[i] = xi[i];
                x[j] = xi[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0)) / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Central-difference gradient and Hessian of `value` at `xi`, refusing
/// stencils that leave `domain`.
pub fn finite_difference_derivatives<F: Fn(&Vector) -> f64>(
    value: F,
    domain: &ChartDomain,
    xi: &Vector,
    h_fd: f64,
) -> Result<(Vector, Matrix)> {
    let d = xi.len();
    if d != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), found: d });
    }
    for i in 0..d {
        for j in i..d {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut x = xi.clone();
                x[i] += si * h_fd;
                x[j] += sj * h_fd;
                if !domain.contains(&x) {
                    return Err(Error::OutsideDomain { point: x.iter().copied().collect() });
                }
            }
        }
    }
    Ok((fd_gradient(&value, xi, h_fd), fd_hessian(&value, xi, h_fd)))
}

/// A potential together with its chart and divergence order.
#[derive(Clone, Debug)]
pub struct PotentialSpec {
    name: String,
    alpha: AlphaParam,
    domain: ChartDomain,
    func: Arc<dyn Potential>,
}

impl PotentialSpec {
    pub fn new(
        name: impl Into<String>,
        alpha: AlphaParam,
        domain: ChartDomain,
        func: Arc<dyn Potential>,
    ) -> Result<Self> {
        if func.dim() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: func.dim() });
        }
        if func.dim() == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Self { name: name.into(), alpha, domain, func })
    }

    /// A potential given only by its value; derivatives by finite differences.
    pub fn from_fn<F>(name: impl Into<String>, alpha: AlphaParam, domain: ChartDomain, f: F) -> Result<Self>
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        let dim = domain.dim();
        Self::new(name, alpha, domain, Arc::new(FnPotential { dim, f: Arc::new(f) }))
    }

    /// `xi -> phi(xi + offset)` on the correspondingly shifted domain.
    pub fn translated(&self, offset: Vector) -> Result<Self> {
        if offset.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: offset.len() });
        }
        Ok(Self {
            name: self.name.clone(),
            alpha: self.alpha,
            domain: ChartDomain::Shifted { inner: Box::new(self.domain.clone()), shift: offset.clone() },
            func: Arc::new(Translated { inner: self.func.clone(), offset }),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> AlphaParam {
        self.alpha
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.func.dim()
    }

    pub fn value(&self, xi: &Vector) -> f64 {
        self.func.value(xi)
    }

    pub fn gradient(&self, xi: &Vector) -> Vector {
        self.func.gradient(xi)
    }

    pub fn hessian(&self, xi: &Vector) -> Matrix {
        self.func.hessian(xi)
    }

    pub fn contains(&self, xi: &Vector) -> bool {
        self.domain.contains(xi)
    }

    pub fn ensure_interior(&self, xi: &Vector) -> Result<()> {
        if xi.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: xi.len() });
        }
        if !self.domain.contains(xi) {
            return Err(Error::OutsideDomain { point: xi.iter().copied().collect() });
        }
        Ok(())
    }

    /// The class matrix `s (-D^2 phi - alpha Dphi Dphi^T)` with `s = +1`
    /// for the concave class and `-1` for the convex class. It is the
    /// induced Riemannian metric.
    pub fn class_matrix(&self, xi: &Vector) -> Matrix {
        let g = self.gradient(xi);
        let h = self.hessian(xi);
        let a = self.alpha.alpha();
        let m = -h - (&g * g.transpose()) * a;
        m * self.alpha.sign().factor()
    }

    /// `1 - alpha Dphi(xi) . xi`.
    pub fn gradient_denominator(&self, xi: &Vector) -> f64 {
        1.0 - self.alpha.alpha() * self.gradient(xi).dot(xi)
    }
}

#[derive(Clone)]
struct FnPotential {
    dim: usize,
    f: Arc<dyn Fn(&Vector) -> f64 + Send + Sync>,
}

impl fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnPotential").field("dim", &self.dim).finish()
    }
}

impl Potential for FnPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, xi: &Vector) -> f64 {
        (self.f)(xi)
    }
}

#[derive(Debug)]
struct Translated {
    inner: Arc<dyn Potential>,
    offset: Vector,
}

impl Potential for Translated {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, xi: &Vector) -> f64 {
        self.inner.value(&(xi + &self.offset))
    }

    fn gradient(&self, xi: &Vector) -> Vector {
        self.inner.gradient(&(xi + &self.offset))
    }

    fn hessian(&self, xi: &Vector) -> Matrix {
        self.inner.hessian(&(xi + &self.offset))
    }
}

/// `sigma * sum_i w_i log xi_i` on the positive quadrant.
#[derive(Debug, Clone)]
pub struct WeightedLog {
    weights: Vec<f64>,
    sigma: f64,
}

impl Potential for WeightedLog {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, xi: &Vector) -> f64 {
        self.sigma * self.weights.iter().zip(xi.iter()).map(|(w, x)| w * x.ln()).sum::<f64>()
    }

    fn gradient(&self, xi: &Vector) -> Vector {
        Vector::from_iterator(xi.len(), self.weights.iter().zip(xi.iter()).map(|(w, x)| self.sigma * w / x))
    }

    fn hessian(&self, xi: &Vector) -> Matrix {
        let diag =
            Vector::from_iterator(xi.len(), self.weights.iter().zip(xi.iter()).map(|(w, x)| -self.sigma * w / (x * x)));
        Matrix::from_diagonal(&diag)
    }
}

/// Potential of the simplex F-family written in its own chart:
/// `-log(1 + sum (1 + alpha xi^i)^(-1/alpha))` for the `+` family and
/// `log(1 + sum (1 + alpha xi^i)^(1/alpha))` for the `-` family.
#[derive(Debug, Clone)]
pub struct SimplexFamilyPotential {
    dim: usize,
    alpha: f64,
    plus: bool,
}

impl SimplexFamilyPotential {
    fn exponent(&self) -> f64 {
        if self.plus {
            -1.0 / self.alpha
        } else {
            1.0 / self.alpha
        }
    }

    /// Returns `(b, s, t, S)` with `b_i = 1 + alpha xi^i`, `s_i = b_i^e`,
    /// `t_i = s_i / b_i` and `S = 1 + sum s`.
    fn parts(&self, xi: &Vector) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
        let e = self.exponent();
        let b: Vec<f64> = xi.iter().map(|x| 1.0 + self.alpha * x).collect();
        let s: Vec<f64> = b.iter().map(|bi| (e * bi.ln()).exp()).collect();
        let t: Vec<f64> = s.iter().zip(&b).map(|(si, bi)| si / bi).collect();
        let total = 1.0 + s.iter().sum::<f64>();
        (b, s, t, total)
    }
}

impl Potential for SimplexFamilyPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, xi: &Vector) -> f64 {
        let (_, _, _, total) = self.parts(xi);
        if self.plus {
            -total.ln()
        } else {
            total.ln()
        }
    }

    fn gradient(&self, xi: &Vector) -> Vector {
        let (_, _, t, total) = self.parts(xi);
        Vector::from_iterator(self.dim, t.iter().map(|ti| ti / total))
    }

    fn hessian(&self, xi: &Vector) -> Matrix {
        let (b, _, t, total) = self.parts(xi);
        let g = Vector::from_iterator(self.dim, t.iter().map(|ti| ti / total));
        let outer = &g * g.transpose();
        let (diag_coef, outer_sign) = if self.plus { (-(1.0 + self.alpha), 1.0) } else { (1.0 - self.alpha, -1.0) };
        let diag = Vector::from_iterator(self.dim, t.iter().zip(&b).map(|(ti, bi)| diag_coef * ti / (bi * total)));
        Matrix::from_diagonal(&diag) + outer * outer_sign
    }
}

/// `-scale |xi|^2 / 2`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    dim: usize,
    scale: f64,
}

impl Potential for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, xi: &Vector) -> f64 {
        -0.5 * self.scale * xi.norm_squared()
    }

    fn gradient(&self, xi: &Vector) -> Vector {
        xi * (-self.scale)
    }

    fn hessian(&self, _xi: &Vector) -> Matrix {
        Matrix::identity(self.dim, self.dim) * (-self.scale)
    }
}

/// Names of the closed-form built-in potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    /// `sum_i w_i log xi_i` on the quadrant, default weights `1/(d+1)`,
    /// requiring `alpha sum w <= 1`.
    DirichletLog,
    /// Simplex F(+alpha) family potential.
    SimplexFAlpha,
    /// Simplex F(-alpha) family potential.
    SimplexFMinusAlpha,
    /// `-|xi|^2/2` (concave) or `|xi|^2/2` (convex); Bregman limit only.
    Quadratic,
    /// `-sum_i w_i log xi_i` on the quadrant, default weights 1; convex class.
    LogBarrierOnQuadrant,
}

impl BuiltinName {
    pub const ALL: [BuiltinName; 5] = [
        BuiltinName::DirichletLog,
        BuiltinName::SimplexFAlpha,
        BuiltinName::SimplexFMinusAlpha,
        BuiltinName::Quadratic,
        BuiltinName::LogBarrierOnQuadrant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinName::DirichletLog => "dirichlet-log",
            BuiltinName::SimplexFAlpha => "simplex-F-alpha",
            BuiltinName::SimplexFMinusAlpha => "simplex-F-minus-alpha",
            BuiltinName::Quadratic => "quadratic",
            BuiltinName::LogBarrierOnQuadrant => "log-barrier-on-quadrant",
        }
    }
}

impl FromStr for BuiltinName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| Error::UnknownPotential(s.to_string()))
    }
}

/// Optional constructor parameters for the built-ins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinParams {
    /// Per-coordinate weights for the logarithmic potentials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Overrides the quadratic's `scale` in `-scale |xi|^2 / 2` (not validated).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Chart translation: the resulting potential is `xi -> phi(xi + translate)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translate: Option<Vec<f64>>,
}

/// JSON declaration of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub name: String,
    pub dim: usize,
    pub alpha: f64,
    pub sign: Sign,
    #[serde(default)]
    pub params: BuiltinParams,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        let name: BuiltinName = self.name.parse()?;
        let alpha = AlphaParam::new(self.alpha, self.sign)?;
        make_builtin_potential_with(name, self.dim, alpha, &self.params)
    }
}

/// Built-in potential with default parameters.
pub fn make_builtin_potential(name: BuiltinName, dim: usize, alpha: AlphaParam) -> Result<PotentialSpec> {
    make_builtin_potential_with(name, dim, alpha, &BuiltinParams::default())
}

pub fn make_builtin_potential_with(
    name: BuiltinName,
    dim: usize,
    alpha: AlphaParam,
    params: &BuiltinParams,
) -> Result<PotentialSpec> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let a = alpha.alpha();
    let mismatch = |why: &str| Err(Error::InvalidParameter(format!("{}: {why}", name.as_str())));
    let weights = |default: f64| -> Result<Vec<f64>> {
        let w = params.weights.clone().unwrap_or_else(|| vec![default; dim]);
        if w.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: w.len() });
        }
        if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        Ok(w)
    };
    let spec = match name {
        BuiltinName::DirichletLog => {
            if alpha.sign() != Sign::Concave {
                return mismatch("belongs to the concave class");
            }
            let w = weights(1.0 / (dim as f64 + 1.0))?;
            let total: f64 = w.iter().sum();
            // alpha * total = 1 is the homogeneous boundary case: the divergence
            // exists but the alpha-gradient degenerates
            if a * total > 1.0 + 1e-12 {
                return mismatch(&format!("alpha * sum(weights) = {} must be <= 1", a * total));
            }
            PotentialSpec::new(
                name.as_str(),
                alpha,
                ChartDomain::quadrant(dim),
                Arc::new(WeightedLog { weights: w, sigma: 1.0 }),
            )?
        }
        BuiltinName::LogBarrierOnQuadrant => {
            if alpha.sign() != Sign::Convex {
                return mismatch("belongs to the convex class");
            }
            let w = weights(1.0)?;
            PotentialSpec::new(
                name.as_str(),
                alpha,
                ChartDomain::quadrant(dim),
                Arc::new(WeightedLog { weights: w, sigma: -1.0 }),
            )?
        }
        BuiltinName::SimplexFAlpha => {
            if alpha.sign() != Sign::Concave || a <= 0.0 {
                return mismatch("requires the concave class with alpha > 0");
            }
            PotentialSpec::new(
                name.as_str(),
                alpha,
                ChartDomain::SimplexChart { alpha: a, dim },
                Arc::new(SimplexFamilyPotential { dim, alpha: a, plus: true }),
            )?
        }
        BuiltinName::SimplexFMinusAlpha => {
            let ok = match alpha.sign() {
                Sign::Convex => a > 0.0 && a < 1.0,
                Sign::Concave => a > 1.0,
            };
            if !ok {
                return mismatch("is convex for 0 < alpha < 1 and concave for alpha > 1");
            }
            PotentialSpec::new(
                name.as_str(),
                alpha,
                ChartDomain::SimplexChart { alpha: a, dim },
                Arc::new(SimplexFamilyPotential { dim, alpha: a, plus: false }),
            )?
        }
        BuiltinName::Quadratic => {
            if a != 0.0 {
                return mismatch("is only available in the Bregman limit alpha = 0");
            }
            let scale = params.scale.unwrap_or(alpha.sign().factor());
            if !scale.is_finite() || scale == 0.0 {
                return Err(Error::InvalidParameter("scale must be finite and nonzero".into()));
            }
            PotentialSpec::new(name.as_str(), alpha, ChartDomain::whole_space(dim), Arc::new(Quadratic { dim, scale }))?
        }
    };
    match &params.translate {
        Some(t) => spec.translated(Vector::from_column_slice(t)),
        None => Ok(spec),
    }
}

/// Class test results at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointClassReport {
    /// Smallest eigenvalue of the class matrix.
    pub min_eigenvalue: f64,
    pub positive_definite: bool,
    /// `1 - alpha Dphi(xi) . xi`.
    pub denominator: f64,
    pub denominator_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub points: Vec<PointClassReport>,
    /// Convex class only: the minimum over ordered point pairs of
    /// `1 + alpha Dphi(xi') . (xi - xi')`.
    pub min_pair_log_argument: Option<f64>,
    pub all_ok: bool,
}

/// Evaluates the exponential concavity/convexity conditions at `points`.
pub fn check_exponential_class(spec: &PotentialSpec, points: &[Vector], tol: f64) -> Result<ClassReport> {
    let mut reports = Vec::with_capacity(points.len());
    for xi in points {
        spec.ensure_interior(xi)?;
        let min_eig = min_eigenvalue(&spec.class_matrix(xi));
        let denom = spec.gradient_denominator(xi);
        reports.push(PointClassReport {
            min_eigenvalue: min_eig,
            positive_definite: min_eig > tol,
            denominator: denom,
            denominator_positive: denom > 0.0,
        });
    }
    let min_pair = match spec.alpha().sign() {
        Sign::Concave => None,
        Sign::Convex => {
            let a = spec.alpha().alpha();
            let grads: Vec<Vector> = points.iter().map(|p| spec.gradient(p)).collect();
            let mut m = f64::INFINITY;
            for (xp, gp) in points.iter().zip(&grads) {
                for x in points {
                    m = m.min(1.0 + a * gp.dot(&(x - xp)));
                }
            }
            Some(m)
        }
    };
    let all_ok =
        reports.iter().all(|r| r.positive_definite && r.denominator_positive) && min_pair.is_none_or(|m| m > 0.0);
    Ok(ClassReport { points: reports, min_pair_log_argument: min_pair, all_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn simplex_plus(alpha: f64, d: usize) -> PotentialSpec {
        make_builtin_potential(BuiltinName::SimplexFAlpha, d, AlphaParam::concave(alpha).unwrap()).unwrap()
    }

    #[test]
    fn simplex_f_alpha_at_origin_is_minus_log_three() {
        let p = simplex_plus(1.0, 2);
        assert!((p.value(&vector(&[0.0, 0.0])) + 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn quadratic_value() {
        let p = make_builtin_potential(BuiltinName::Quadratic, 2, AlphaParam::concave(0.0).unwrap()).unwrap();
        assert_eq!(p.value(&vector(&[1.0, 2.0])), -2.5);
    }

    #[test]
    fn dirichlet_log_at_ones_is_zero() {
        let p = make_builtin_potential(BuiltinName::DirichletLog, 2, AlphaParam::concave(1.0).unwrap()).unwrap();
        assert_eq!(p.value(&vector(&[1.0, 1.0])), 0.0);
        // sum_i (1/3) log xi_i evaluated directly
        let x = vector(&[2.0, 0.5]);
        let direct = (2f64.ln() + 0.5f64.ln()) / 3.0;
        assert!((p.value(&x) - direct).abs() < 1e-15);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!("nope".parse::<BuiltinName>(), Err(Error::UnknownPotential(_))));
        let convex = AlphaParam::convex(0.5).unwrap();
        assert!(make_builtin_potential(BuiltinName::SimplexFAlpha, 2, convex).is_err());
        assert!(make_builtin_potential(BuiltinName::Quadratic, 2, AlphaParam::concave(0.1).unwrap()).is_err());
        assert!(make_builtin_potential(BuiltinName::SimplexFMinusAlpha, 2, AlphaParam::convex(1.5).unwrap()).is_err());
        assert!(make_builtin_potential(BuiltinName::DirichletLog, 2, AlphaParam::concave(2.0).unwrap()).is_err());
        assert!(
            make_builtin_potential(BuiltinName::LogBarrierOnQuadrant, 2, AlphaParam::concave(0.5).unwrap()).is_err()
        );
        assert!(AlphaParam::concave(-1.0).is_err());
    }

    #[test]
    fn quadratic_class_matrix_is_identity() {
        let p = make_builtin_potential(BuiltinName::Quadratic, 3, AlphaParam::concave(0.0).unwrap()).unwrap();
        let r = check_exponential_class(&p, &[vector(&[0.3, -2.0, 5.0])], PD_TOL).unwrap();
        assert!((r.points[0].min_eigenvalue - 1.0).abs() < 1e-15);
        assert!(r.all_ok);
    }

    #[test]
    fn simplex_f_alpha_origin_is_positive_definite() {
        // At xi = 0, alpha = 1, d = 2: Dphi = (1/3, 1/3) and
        // D^2 phi = -2 diag(1/3) + Dphi Dphi^T, so the class matrix is
        // (2/3) I - 2 Dphi Dphi^T = [[4/9, -2/9], [-2/9, 4/9]] with
        // eigenvalues 2/9 and 6/9.
        let p = simplex_plus(1.0, 2);
        let r = check_exponential_class(&p, &[Vector::zeros(2)], PD_TOL).unwrap();
        assert!((r.points[0].min_eigenvalue - 2.0 / 9.0).abs() < 1e-14);
        assert!(r.points[0].positive_definite);
    }

    #[test]
    fn squared_norm_is_not_exp_concave() {
        let p = PotentialSpec::from_fn("sq", AlphaParam::concave(0.5).unwrap(), ChartDomain::whole_space(2), |x| {
            x.norm_squared()
        })
        .unwrap();
        let r = check_exponential_class(&p, &[vector(&[0.1, 0.2])], PD_TOL).unwrap();
        assert!(!r.points[0].positive_definite);
        assert!(!r.all_ok);
    }

    #[test]
    fn class_check_rejects_exterior_points() {
        let p = simplex_plus(1.0, 2);
        assert!(matches!(
            check_exponential_class(&p, &[vector(&[-1.5, 0.0])], PD_TOL),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn fd_on_quadratic_and_constant() {
        let dom = ChartDomain::whole_space(2);
        let (g, h) =
            finite_difference_derivatives(|x| 0.5 * x.norm_squared(), &dom, &vector(&[1.0, 1.0]), 1e-4).unwrap();
        assert!((g - vector(&[1.0, 1.0])).amax() < 1e-7);
        assert!((h - Matrix::identity(2, 2)).amax() < 1e-6);
        let (g, h) = finite_difference_derivatives(|_| 4.2, &dom, &vector(&[1.0, 1.0]), 1e-4).unwrap();
        assert_eq!(g.amax(), 0.0);
        assert_eq!(h.amax(), 0.0);
    }

    #[test]
    fn fd_matches_simplex_gradient() {
        let p = simplex_plus(1.0, 2);
        let x = vector(&[0.2, -0.3]);
        let (g, _) = finite_difference_derivatives(|v| p.value(v), p.domain(), &x, 1e-5).unwrap();
        assert!((g - p.gradient(&x)).amax() < 1e-6);
    }

    #[test]
    fn fd_stencil_must_stay_inside() {
        let dom = ChartDomain::quadrant(1);
        assert!(matches!(
            finite_difference_derivatives(|x| x[0].ln(), &dom, &vector(&[1e-6]), 1e-5),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn translation_shifts_chart() {
        let p = simplex_plus(1.0, 2);
        let t = p.translated(vector(&[0.5, -0.25])).unwrap();
        let x = vector(&[-0.2, 0.1]);
        assert_eq!(t.value(&x), p.value(&vector(&[0.3, -0.15])));
        assert!(t.contains(&vector(&[-1.4, 0.0])));
        assert!(!t.contains(&vector(&[-1.6, 0.0])));
        assert!(t.contains(&t.domain().default_seed()));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: PotentialConfig =
            serde_json::from_str(r#"{"name":"simplex-F-alpha","dim":2,"alpha":1.0,"sign":"concave"}"#).unwrap();
        assert!(ok.build().is_ok());
        let bad = serde_json::from_str::<PotentialConfig>(
            r#"{"name":"simplex-F-alpha","dim":2,"alpha":1.0,"sign":"concave","extra":1}"#,
        );
        assert!(bad.is_err());
    }
}
