//! The generalized Pythagorean relation.
//!
//! For `p, q, r` with dual coordinates `eta_p, eta_q`, the self-dual form
//! of the divergence gives
//!
//! ```text
//! D[q:p] + D[r:q] - D[r:p] = (s/alpha) log(Pi(q,p) Pi(r,q) / (Pi(r,p) Pi(q,q)))
//! ```
//!
//! which vanishes exactly when the residual
//! `(xi_r - xi_q).(eta_p - eta_q) - alpha (xi_q.eta_p)(xi_r.eta_q) + alpha (xi_r.eta_p)(xi_q.eta_q)`
//! does. The mixed inner product of the primal tangent `xi_r - xi_q` and the
//! dual tangent `eta_p - eta_q` at `q` equals `-s residual / Pi(q,q)^2`, so
//! orthogonality and the Pythagorean equality coincide.

use serde::Serialize;

use super::geodesic::check_dual_segment;
use super::mixed_inner_product_matrix;
use crate::duality::{l_divergence, DualPair};
use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Lower bound on the scale used for the relative gap.
const RELATIVE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PythagorasReport {
    /// `D[q:p]`.
    pub d_qp: f64,
    /// `D[r:q]`.
    pub d_rq: f64,
    /// `D[r:p]`.
    pub d_rp: f64,
    /// `D[q:p] + D[r:q] - D[r:p]`.
    pub gap: f64,
    /// `gap / max(D[q:p], D[r:q], 1e-3)`.
    pub relative_gap: f64,
    /// Mixed inner product of the primal tangent toward `r` and the dual
    /// tangent toward `p`, at `q`.
    pub inner_product: f64,
    /// Residual of the bilinear identity behind the theorem.
    pub proof_residual: f64,
}

/// Evaluates the Pythagorean gap for the triple; requires the eta-segment
/// from `q` to `p` to lie in the dual domain.
pub fn pythagoras_check(pair: &DualPair, p: &Vector, q: &Vector, r: &Vector) -> Result<PythagorasReport> {
    let phi = pair.primal();
    let a = pair.alpha();
    let eta_p = pair.dual_point(p)?;
    let eta_q = pair.dual_point(q)?;
    phi.ensure_interior(r)?;
    check_dual_segment(pair, &eta_q, &eta_p)?;
    let d_qp = l_divergence(phi, q, p)?;
    let d_rq = l_divergence(phi, r, q)?;
    let d_rp = l_divergence(phi, r, p)?;
    let gap = d_qp + d_rq - d_rp;
    let u = r - q;
    let w = &eta_p - &eta_q;
    let inner_product = u.dot(&(mixed_inner_product_matrix(pair, q)? * &w));
    let proof_residual = u.dot(&w) - a * q.dot(&eta_p) * r.dot(&eta_q) + a * r.dot(&eta_p) * q.dot(&eta_q);
    Ok(PythagorasReport {
        d_qp,
        d_rq,
        d_rp,
        gap,
        relative_gap: gap / d_qp.max(d_rq).max(RELATIVE_FLOOR),
        inner_product,
        proof_residual,
    })
}

/// `r = xi_q + step w`, where `w` is `direction` with its component along
/// `M (eta_p - eta_q)` removed (`M` the mixed inner product at `q`), so that
/// `r - q` is orthogonal to the dual tangent toward `p`.
pub fn orthogonalize_triple(pair: &DualPair, p: &Vector, q: &Vector, direction: &Vector, step: f64) -> Result<Vector> {
    let dn = direction.norm();
    if dn == 0.0 || !dn.is_finite() {
        return Err(Error::DegenerateDirection);
    }
    let w_dual = pair.dual_point(p)? - pair.dual_point(q)?;
    let c = mixed_inner_product_matrix(pair, q)? * w_dual;
    let cn2 = c.norm_squared();
    let w = if cn2 == 0.0 { direction.clone() } else { direction - &c * (direction.dot(&c) / cn2) };
    if w.norm() <= 1e-12 * dn {
        return Err(Error::DegenerateDirection);
    }
    let r = q + w * step;
    pair.primal().ensure_interior(&r)?;
    Ok(r)
}
