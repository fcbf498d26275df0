//! Induced dualistic structure: metric, primal and dual connections,
//! curvature and the mixed inner product.
//!
//! With `s = +1` for the concave class and `-1` for the convex class:
//!
//! ```text
//! g_ij    = s (-d_ij phi - alpha d_i phi d_j phi)
//! G^k_ij  = -alpha (d_i phi delta_jk + d_j phi delta_ik)
//! R_ijk^l = s alpha (g_ik delta_jl - g_jk delta_il)
//! ```
//!
//! Christoffel arrays are indexed `[i][j][k]` for `G^k_ij` (or `G_ijk` when
//! lowered) and curvature `[i][j][k][l]` for `R_ijk^l`.

pub mod geodesic;
pub mod pythagoras;

use serde::Serialize;

pub use geodesic::{
    check_dual_segment, collinearity_deviation, dual_geodesic, dual_geodesic_ode_integrate, geodesic_ode_integrate,
    primal_geodesic, Chart, GeodesicPath, Trajectory,
};
pub use pythagoras::{orthogonalize_triple, pythagoras_check, PythagorasReport};

use crate::duality::{alpha_gradient, alpha_gradient_jacobian, DualPair};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, Matrix, Tensor3, Tensor4, Vector};
use crate::potentials::PotentialSpec;

/// Step for finite differences of the analytic alpha-gradient Jacobian.
const JACOBIAN_FD_STEP: f64 = 1e-5;

/// Riemannian metric `g = s(-D^2 phi - alpha Dphi Dphi^T)`.
pub fn metric(phi: &PotentialSpec, xi: &Vector) -> Result<Matrix> {
    phi.ensure_interior(xi)?;
    let g = phi.class_matrix(xi);
    if g.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eigenvalue(&g) });
    }
    Ok(g)
}

/// The metric from the alpha-gradient Jacobian,
/// `-(s/Pi) (I - (alpha/Pi) eta xi^T) d eta / d xi`.
pub fn metric_from_jacobian(phi: &PotentialSpec, xi: &Vector) -> Result<Matrix> {
    let eta = alpha_gradient(phi, xi)?;
    let jac = alpha_gradient_jacobian(phi, xi)?;
    let a = phi.alpha().alpha();
    let pi = 1.0 + a * xi.dot(&eta);
    let d = xi.len();
    let left = Matrix::identity(d, d) - (&eta * xi.transpose()) * (a / pi);
    Ok(left * jac * (-phi.alpha().sign().factor() / pi))
}

/// Inverse metric by dense factorization.
pub fn metric_inverse(phi: &PotentialSpec, xi: &Vector) -> Result<Matrix> {
    let g = metric(phi, xi)?;
    let chol = g.cholesky().ok_or(Error::SingularHessian)?;
    Ok(chol.inverse())
}

/// Inverse metric from the Sherman-Morrison formula
/// `s G^{-1} = -[H^{-1} - alpha H^{-1} g g^T H^{-1} / (1 + alpha g^T H^{-1} g)]`.
pub fn metric_inverse_sherman_morrison(phi: &PotentialSpec, xi: &Vector) -> Result<Matrix> {
    phi.ensure_interior(xi)?;
    let g = phi.gradient(xi);
    let h_inv = phi.hessian(xi).try_inverse().ok_or(Error::SingularHessian)?;
    let a = phi.alpha().alpha();
    let hg = &h_inv * &g;
    let denom = 1.0 + a * g.dot(&hg);
    if denom.abs() < 1e-300 {
        return Err(Error::SingularHessian);
    }
    let bracket = &h_inv - (&hg * hg.transpose()) * (a / denom);
    Ok(bracket * (-phi.alpha().sign().factor()))
}

/// Primal Christoffel symbols `G^k_ij = -alpha (d_i phi delta_jk + d_j phi delta_ik)`.
pub fn christoffel_primal(phi: &PotentialSpec, xi: &Vector) -> Result<Tensor3> {
    phi.ensure_interior(xi)?;
    Ok(projective_symbols(phi.alpha().alpha(), &phi.gradient(xi)))
}

/// `-alpha (w_i delta_jk + w_j delta_ik)`, the symbols of every connection
/// in this family once `w` is the chart gradient of the potential.
pub fn projective_symbols(alpha: f64, w: &Vector) -> Tensor3 {
    let d = w.len();
    Tensor3::from_fn(d, |i, j, k| {
        let mut v = 0.0;
        if j == k {
            v += w[i];
        }
        if i == k {
            v += w[j];
        }
        -alpha * v
    })
}

/// Lowers the last index: `G_ijk = G^m_ij g_mk`.
pub fn lower_last(gamma: &Tensor3, g: &Matrix) -> Tensor3 {
    let d = gamma.dim();
    Tensor3::from_fn(d, |i, j, k| (0..d).map(|m| gamma.get(i, j, m) * g[(m, k)]).sum())
}

/// Lowered primal symbols `G_ijk` from the closed form in the dual
/// coordinate,
/// `s [(alpha/Pi^2)(eta^j d eta^i/d xi^k + eta^i d eta^j/d xi^k)
///    - (2 alpha^2/Pi^3) eta^i eta^j sum_l xi^l d eta^l/d xi^k]`.
pub fn christoffel_primal_lowered(phi: &PotentialSpec, xi: &Vector) -> Result<Tensor3> {
    let eta = alpha_gradient(phi, xi)?;
    let jac = alpha_gradient_jacobian(phi, xi)?;
    let a = phi.alpha().alpha();
    let s = phi.alpha().sign().factor();
    let pi = 1.0 + a * xi.dot(&eta);
    let xi_j = jac.transpose() * xi;
    let d = xi.len();
    Ok(Tensor3::from_fn(d, |i, j, k| {
        let first = a / (pi * pi) * (eta[j] * jac[(i, k)] + eta[i] * jac[(j, k)]);
        let second = 2.0 * a * a / (pi * pi * pi) * eta[i] * eta[j] * xi_j[k];
        s * (first - second)
    }))
}

/// Dual Christoffel symbols in the eta-chart,
/// `-alpha (d_a psi delta_bc + d_b psi delta_ac)` with `Dpsi = xi / Pi`.
pub fn christoffel_dual(pair: &DualPair, eta: &Vector) -> Result<Tensor3> {
    let dpsi = pair.conjugate_gradient(eta, None)?;
    Ok(projective_symbols(pair.alpha(), &dpsi))
}

/// Dual Christoffel symbols carried to the xi-chart by the connection
/// transformation law
/// `G*^k_ij = (d xi^k / d eta^c)[d^2 eta^c / d xi^i d xi^j + G*(eta)^c_ab J^a_i J^b_j]`,
/// with the second derivatives of eta from central differences of the
/// analytic Jacobian.
pub fn christoffel_dual_in_primal_chart(pair: &DualPair, xi: &Vector) -> Result<Tensor3> {
    let phi = pair.primal();
    let d = xi.len();
    let eta = alpha_gradient(phi, xi)?;
    let jac = alpha_gradient_jacobian(phi, xi)?;
    let jac_inv = jac.clone().try_inverse().ok_or(Error::SingularHessian)?;
    let (_, pi) = crate::duality::cost_with_pairing(xi, &eta, pair.alpha())?;
    let dual = projective_symbols(pair.alpha(), &(xi / pi));
    // second[c][i][j] = d^2 eta^c / d xi^i d xi^j
    let mut dj = Vec::with_capacity(d);
    for i in 0..d {
        let mut xp = xi.clone();
        xp[i] += JACOBIAN_FD_STEP;
        let mut xm = xi.clone();
        xm[i] -= JACOBIAN_FD_STEP;
        let diff = (alpha_gradient_jacobian(phi, &xp)? - alpha_gradient_jacobian(phi, &xm)?) / (2.0 * JACOBIAN_FD_STEP);
        dj.push(diff);
    }
    let second = Tensor3::from_fn(d, |c, i, j| 0.5 * (dj[i][(c, j)] + dj[j][(c, i)]));
    let mut inner = Tensor3::zeros(d);
    for c in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = second.get(c, i, j);
                for a in 0..d {
                    for b in 0..d {
                        v += dual.get(a, b, c) * jac[(a, i)] * jac[(b, j)];
                    }
                }
                inner.set(i, j, c, v);
            }
        }
    }
    Ok(Tensor3::from_fn(d, |i, j, k| (0..d).map(|c| jac_inv[(k, c)] * inner.get(i, j, c)).sum()))
}

/// Riemann tensor `R_ijk^l = d_i G^l_jk - d_j G^l_ik + G^m_jk G^l_im - G^m_ik G^l_jm`
/// with `d_m G^k_ij = -alpha (d_mi phi delta_jk + d_mj phi delta_ik)`.
pub fn curvature_tensor(phi: &PotentialSpec, xi: &Vector) -> Result<Tensor4> {
    let d = xi.len();
    if d < 2 {
        return Err(Error::InvalidParameter("curvature needs dimension >= 2".into()));
    }
    phi.ensure_interior(xi)?;
    let a = phi.alpha().alpha();
    let gamma = projective_symbols(a, &phi.gradient(xi));
    let h = phi.hessian(xi);
    // dgamma(m, i, j, k) = d_m G^k_ij
    let dgamma = |m: usize, i: usize, j: usize, k: usize| {
        let mut v = 0.0;
        if j == k {
            v += h[(m, i)];
        }
        if i == k {
            v += h[(m, j)];
        }
        -a * v
    };
    Ok(Tensor4::from_fn(d, |i, j, k, l| {
        let mut v = dgamma(i, j, k, l) - dgamma(j, i, k, l);
        for m in 0..d {
            v += gamma.get(j, k, m) * gamma.get(i, m, l) - gamma.get(i, k, m) * gamma.get(j, m, l);
        }
        v
    }))
}

/// `B_ijk^l = g_jk delta_il - g_ik delta_jl`, the constant-curvature template
/// with `R = k B` for sectional curvature `k`.
pub fn constant_curvature_template(g: &Matrix) -> Tensor4 {
    let d = g.nrows();
    Tensor4::from_fn(d, |i, j, k, l| {
        let mut v = 0.0;
        if i == l {
            v += g[(j, k)];
        }
        if j == l {
            v -= g[(i, k)];
        }
        v
    })
}

/// Least-squares sectional curvature of `r` against the metric `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureFit {
    pub k: f64,
    /// `max |R - k B|`.
    pub residual: f64,
}

pub fn fit_sectional_curvature(r: &Tensor4, g: &Matrix) -> CurvatureFit {
    let b = constant_curvature_template(g);
    let k = r.dot(&b) / b.dot(&b);
    let residual = r.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - k * y).abs()).fold(0.0, f64::max);
    CurvatureFit { k, residual }
}

/// `max |R - k B|` for the predicted curvature `k = -s alpha`.
pub fn constant_curvature_residual(phi: &PotentialSpec, xi: &Vector) -> Result<f64> {
    let r = curvature_tensor(phi, xi)?;
    let g = metric(phi, xi)?;
    let k = -phi.alpha().sign().factor() * phi.alpha().alpha();
    let b = constant_curvature_template(&g);
    Ok(r.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - k * y).abs()).fold(0.0, f64::max))
}

/// `<d/d xi^i, d/d eta^j> = s [-delta_ij / Pi + alpha eta^i xi^j / Pi^2]`.
pub fn mixed_inner_product_matrix(pair: &DualPair, xi: &Vector) -> Result<Matrix> {
    let eta = pair.dual_point(xi)?;
    let a = pair.alpha();
    let pi = 1.0 + a * xi.dot(&eta);
    let d = xi.len();
    let m = Matrix::identity(d, d) * (-1.0 / pi) + (&eta * xi.transpose()) * (a / (pi * pi));
    Ok(m * pair.class_sign())
}

pub fn mixed_inner_product(pair: &DualPair, xi: &Vector, i: usize, j: usize) -> Result<f64> {
    let d = xi.len();
    if i >= d || j >= d {
        return Err(Error::InvalidParameter(format!("index ({i}, {j}) out of range for dimension {d}")));
    }
    Ok(mixed_inner_product_matrix(pair, xi)?[(i, j)])
}

/// The same pairing assembled as `G (d eta / d xi)^{-1}`.
pub fn mixed_inner_product_from_jacobian(phi: &PotentialSpec, xi: &Vector) -> Result<Matrix> {
    let g = metric(phi, xi)?;
    let jac_inv = alpha_gradient_jacobian(phi, xi)?.try_inverse().ok_or(Error::SingularHessian)?;
    Ok(g * jac_inv)
}

/// Everything the geometry module computes at one point.
#[derive(Debug, Clone)]
pub struct GeometryField {
    pub point: Vector,
    pub metric: Matrix,
    pub metric_inverse: Matrix,
    pub christoffel_primal: Tensor3,
    /// Dual symbols in the eta-chart at `eta = D^(alpha) phi(point)`.
    pub christoffel_dual: Tensor3,
    pub curvature: Option<Tensor4>,
}

impl GeometryField {
    pub fn at(pair: &DualPair, xi: &Vector) -> Result<Self> {
        let phi = pair.primal();
        let eta = pair.dual_point(xi)?;
        let (_, pi) = crate::duality::cost_with_pairing(xi, &eta, pair.alpha())?;
        Ok(Self {
            point: xi.clone(),
            metric: metric(phi, xi)?,
            metric_inverse: metric_inverse(phi, xi)?,
            christoffel_primal: christoffel_primal(phi, xi)?,
            christoffel_dual: projective_symbols(pair.alpha(), &(xi / pi)),
            curvature: if xi.len() >= 2 { Some(curvature_tensor(phi, xi)?) } else { None },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::l_divergence;
    use crate::linalg::vector;
    use crate::potentials::{make_builtin_potential, AlphaParam, BuiltinName};
    use proptest::prelude::*;

    fn simplex_plus(alpha: f64, d: usize) -> PotentialSpec {
        make_builtin_potential(BuiltinName::SimplexFAlpha, d, AlphaParam::concave(alpha).unwrap()).unwrap()
    }

    fn simplex_minus(alpha: f64, d: usize) -> PotentialSpec {
        make_builtin_potential(BuiltinName::SimplexFMinusAlpha, d, AlphaParam::convex(alpha).unwrap()).unwrap()
    }

    fn quadratic() -> PotentialSpec {
        make_builtin_potential(BuiltinName::Quadratic, 2, AlphaParam::concave(0.0).unwrap()).unwrap()
    }

    /// Second derivative of `t -> D[xi + t v : xi]` at 0 by central differences.
    fn divergence_second_derivative(phi: &PotentialSpec, xi: &Vector, v: &Vector) -> f64 {
        let h = 1e-4;
        let dp = l_divergence(phi, &(xi + v * h), xi).unwrap();
        let dm = l_divergence(phi, &(xi - v * h), xi).unwrap();
        (dp + dm) / (h * h)
    }

    /// Eguchi relation `G_ijk = -d_i d_j d'_k D[xi : xi']` at `xi = xi'`.
    fn eguchi_lowered(phi: &PotentialSpec, xi: &Vector) -> Tensor3 {
        let d = xi.len();
        let h = 1e-3;
        let unit = |i: usize| {
            let mut e = Vector::zeros(d);
            e[i] = 1.0;
            e
        };
        Tensor3::from_fn(d, |i, j, k| {
            let mut acc = 0.0;
            for (si, sj, sk) in itertools_signs() {
                let x = xi + unit(i) * (si * h) + unit(j) * (sj * h);
                let xp = xi + unit(k) * (sk * h);
                acc += si * sj * sk * l_divergence(phi, &x, &xp).unwrap();
            }
            -acc / (8.0 * h * h * h)
        })
    }

    fn itertools_signs() -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for a in [1.0, -1.0] {
            for b in [1.0, -1.0] {
                for c in [1.0, -1.0] {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    #[test]
    fn quadratic_metric_is_identity() {
        let q = quadratic();
        let x = vector(&[0.3, -0.7]);
        assert_eq!(metric(&q, &x).unwrap(), Matrix::identity(2, 2));
        assert_eq!(metric_inverse(&q, &x).unwrap(), Matrix::identity(2, 2));
        assert!(christoffel_primal(&q, &x).unwrap().max_abs() == 0.0);
        assert!(curvature_tensor(&q, &x).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn metric_is_second_derivative_of_divergence() {
        // v^T G v = d^2/dt^2 D[xi + t v : xi] at t = 0
        for (phi, x) in [
            (simplex_plus(1.0, 2), vector(&[0.0, 0.0])),
            (simplex_plus(0.5, 3), vector(&[0.4, -0.3, 1.2])),
            (simplex_minus(0.5, 2), vector(&[0.2, 0.6])),
        ] {
            let g = metric(&phi, &x).unwrap();
            for v in [vector_like(&x, 1.0, 0.0), vector_like(&x, 0.3, -0.8)] {
                let quad = v.dot(&(&g * &v));
                let fd = divergence_second_derivative(&phi, &x, &v);
                assert!((quad - fd).abs() < 1e-5, "{quad} vs {fd}");
            }
        }
    }

    fn vector_like(x: &Vector, a: f64, b: f64) -> Vector {
        Vector::from_iterator(x.len(), (0..x.len()).map(|i| if i % 2 == 0 { a } else { b }))
    }

    #[test]
    fn metric_paths_agree() {
        for (phi, x) in [
            (simplex_plus(1.0, 2), vector(&[0.0, 0.0])),
            (simplex_plus(2.0, 3), vector(&[0.4, -0.3, 1.2])),
            (simplex_minus(0.3, 3), vector(&[0.4, -0.3, 1.2])),
        ] {
            let g = metric(&phi, &x).unwrap();
            assert!((metric_from_jacobian(&phi, &x).unwrap() - &g).amax() < 1e-8);
            let inv = metric_inverse(&phi, &x).unwrap();
            let sm = metric_inverse_sherman_morrison(&phi, &x).unwrap();
            assert!((&inv - &sm).amax() < 1e-9);
            assert!((&inv - inv.transpose()).amax() < 1e-12);
            assert!((&inv * &g - Matrix::identity(x.len(), x.len())).amax() < 1e-10);
        }
    }

    #[test]
    fn exterior_class_violation_is_reported() {
        let bad = PotentialSpec::from_fn(
            "sq",
            AlphaParam::concave(0.5).unwrap(),
            crate::potentials::ChartDomain::whole_space(2),
            |x| x.norm_squared(),
        )
        .unwrap();
        assert!(matches!(metric(&bad, &vector(&[0.1, 0.1])), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn christoffel_examples() {
        let p = simplex_plus(1.0, 2);
        let x = Vector::zeros(2);
        let gamma = christoffel_primal(&p, &x).unwrap();
        // Dphi(0) = (1/3, 1/3): G^0_00 = -2/3, G^1_01 = -1/3, G^0_11 = 0
        assert!((gamma.get(0, 0, 0) + 2.0 / 3.0).abs() < 1e-15);
        assert!((gamma.get(0, 1, 1) + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(gamma.get(1, 1, 0), 0.0);
        let g = metric(&p, &x).unwrap();
        let lowered = lower_last(&gamma, &g);
        assert!((christoffel_primal_lowered(&p, &x).unwrap().max_abs_diff(&lowered)) < 1e-9);
        assert!(eguchi_lowered(&p, &x).max_abs_diff(&lowered) < 1e-4);
    }

    #[test]
    fn lowered_forms_agree_for_both_classes() {
        for (phi, x) in
            [(simplex_plus(0.7, 3), vector(&[0.4, -0.3, 1.2])), (simplex_minus(0.4, 2), vector(&[0.1, 0.5]))]
        {
            let lowered = lower_last(&christoffel_primal(&phi, &x).unwrap(), &metric(&phi, &x).unwrap());
            assert!(christoffel_primal_lowered(&phi, &x).unwrap().max_abs_diff(&lowered) < 1e-9);
            assert!(eguchi_lowered(&phi, &x).max_abs_diff(&lowered) < 1e-4);
        }
    }

    /// `d_k g_ij` by central differences of the analytic metric.
    fn metric_derivative(phi: &PotentialSpec, x: &Vector) -> Tensor3 {
        let d = x.len();
        let h = 1e-5;
        let dg: Vec<Matrix> = (0..d)
            .map(|k| {
                let mut xp = x.clone();
                xp[k] += h;
                let mut xm = x.clone();
                xm[k] -= h;
                (metric(phi, &xp).unwrap() - metric(phi, &xm).unwrap()) / (2.0 * h)
            })
            .collect();
        Tensor3::from_fn(d, |k, i, j| dg[k][(i, j)])
    }

    #[test]
    fn connections_are_dual() {
        for (phi, x) in [
            (simplex_plus(1.0, 2), vector(&[0.3, -0.2])),
            (simplex_plus(0.5, 3), vector(&[0.4, -0.3, 1.2])),
            (simplex_minus(0.5, 2), vector(&[0.2, 0.6])),
        ] {
            let pair = DualPair::new(phi.clone());
            let g = metric(&phi, &x).unwrap();
            let gamma = christoffel_primal(&phi, &x).unwrap();
            let dual = christoffel_dual_in_primal_chart(&pair, &x).unwrap();
            let dg = metric_derivative(&phi, &x);
            let d = x.len();
            // d_k g_ij = G^m_ki g_mj + G*^m_kj g_im
            let rhs = Tensor3::from_fn(d, |k, i, j| {
                (0..d).map(|m| gamma.get(k, i, m) * g[(m, j)] + dual.get(k, j, m) * g[(i, m)]).sum()
            });
            assert!(dg.max_abs_diff(&rhs) < 1e-5, "{}", dg.max_abs_diff(&rhs));
            // the average connection is Levi-Civita
            let g_inv = metric_inverse(&phi, &x).unwrap();
            let lc = Tensor3::from_fn(d, |i, j, k| {
                0.5 * (0..d).map(|m| g_inv[(k, m)] * (dg.get(i, j, m) + dg.get(j, i, m) - dg.get(m, i, j))).sum::<f64>()
            });
            let avg = Tensor3::from_fn(d, |i, j, k| 0.5 * (gamma.get(i, j, k) + dual.get(i, j, k)));
            assert!(avg.max_abs_diff(&lc) < 1e-5);
        }
    }

    #[test]
    fn dual_symbols_vanish_with_alpha_or_gradient() {
        let pair = DualPair::new(quadratic());
        assert_eq!(christoffel_dual(&pair, &vector(&[0.5, 0.1])).unwrap().max_abs(), 0.0);
        // Dpsi(eta) = xi / Pi vanishes at xi = 0
        let pair = DualPair::new(simplex_plus(1.0, 2));
        let eta = pair.dual_point(&Vector::zeros(2)).unwrap();
        assert!(christoffel_dual(&pair, &eta).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn constant_curvature_both_classes() {
        for (phi, x, k) in [
            (simplex_plus(1.0, 2), vector(&[0.3, -0.2]), -1.0),
            (simplex_plus(0.5, 3), vector(&[0.4, -0.3, 1.2]), -0.5),
            (simplex_minus(0.5, 2), vector(&[0.2, 0.6]), 0.5),
            (simplex_minus(0.25, 3), vector(&[0.2, 0.6, -1.0]), 0.25),
        ] {
            assert!(constant_curvature_residual(&phi, &x).unwrap() < 1e-8);
            let fit = fit_sectional_curvature(&curvature_tensor(&phi, &x).unwrap(), &metric(&phi, &x).unwrap());
            assert!((fit.k - k).abs() < 1e-8, "{fit:?}");
        }
        assert!(curvature_tensor(&simplex_plus(1.0, 1), &vector(&[0.1])).is_err());
    }

    #[test]
    fn mixed_inner_product_examples() {
        let pair = DualPair::new(simplex_plus(1.0, 2));
        let m = mixed_inner_product_matrix(&pair, &Vector::zeros(2)).unwrap();
        assert_eq!(m, -Matrix::identity(2, 2));
        let q = DualPair::new(quadratic());
        assert_eq!(mixed_inner_product(&q, &vector(&[2.0, 1.0]), 0, 0).unwrap(), -1.0);
        assert_eq!(mixed_inner_product(&q, &vector(&[2.0, 1.0]), 0, 1).unwrap(), 0.0);
        for (phi, x) in
            [(simplex_plus(1.0, 2), vector(&[0.3, -0.2])), (simplex_minus(0.5, 3), vector(&[0.2, 0.6, -0.4]))]
        {
            let pair = DualPair::new(phi.clone());
            let closed = mixed_inner_product_matrix(&pair, &x).unwrap();
            assert!((closed - mixed_inner_product_from_jacobian(&phi, &x).unwrap()).amax() < 1e-7);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_curvature_symmetries(a in -0.9f64..2.0, b in -0.9f64..2.0, c in -0.9f64..2.0) {
            let phi = simplex_plus(0.8, 3);
            let x = vector(&[a, b, c]);
            let r = curvature_tensor(&phi, &x).unwrap();
            let gamma = christoffel_primal(&phi, &x).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        prop_assert_eq!(gamma.get(i, j, k), gamma.get(j, i, k));
                        for l in 0..3 {
                            prop_assert!((r.get(i, j, k, l) + r.get(j, i, k, l)).abs() < 1e-12);
                        }
                    }
                }
            }
            prop_assert!(constant_curvature_residual(&phi, &x).unwrap() < 1e-8);
            let g = metric(&phi, &x).unwrap();
            prop_assert!((&g - g.transpose()).amax() == 0.0);
        }
    }
}
