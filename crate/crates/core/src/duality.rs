//! L^(±alpha)-divergences, the alpha-gradient and alpha-conjugation.
//!
//! For the concave class
//!
//! ```text
//! D[xi : xi'] = (1/alpha) log(1 + alpha Dphi(xi') . (xi - xi')) - (phi(xi) - phi(xi'))
//! ```
//!
//! and the convex class is its negation. Both are written through the cost
//! `c(x, y) = (1/alpha) log(1 + alpha x . y)`, the dual coordinate
//! `eta = Dphi / (1 - alpha Dphi . xi)` and the conjugate
//! `psi(eta) = c(xi, eta) - phi(xi)`.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::potentials::{PotentialSpec, DOMAIN_MARGIN};

/// Maximum damped Newton iterations for the alpha-gradient inverse.
pub const NEWTON_MAX_ITER: usize = 100;
/// Residual tolerance `|D^(alpha) phi(xi) - eta|` for the inverse.
pub const NEWTON_TOL: f64 = 1e-10;
/// Smallest continuation step in the fallback of the inverse.
const CONTINUATION_MIN_STEP: f64 = 1e-4;

/// `1 + alpha x . y`; identically 1 in the Bregman limit.
pub fn pairing(x: &Vector, y: &Vector, alpha: f64) -> f64 {
    1.0 + alpha * x.dot(y)
}

/// Returns `(c(x, y), 1 + alpha x . y)`.
pub fn cost_with_pairing(x: &Vector, y: &Vector, alpha: f64) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if alpha == 0.0 {
        return Ok((x.dot(y), 1.0));
    }
    let pi = pairing(x, y, alpha);
    if pi <= 0.0 || !pi.is_finite() {
        return Err(Error::NonPositivePairing { value: pi });
    }
    Ok(((alpha * x.dot(y)).ln_1p() / alpha, pi))
}

/// Logarithmic cost `(1/alpha) log(1 + alpha x . y)`, or `x . y` at `alpha = 0`.
pub fn cost_c_alpha(x: &Vector, y: &Vector, alpha: f64) -> Result<f64> {
    cost_with_pairing(x, y, alpha).map(|(c, _)| c)
}

fn denominator_checked(phi: &PotentialSpec, xi: &Vector, g: &Vector) -> Result<f64> {
    let denom = 1.0 - phi.alpha().alpha() * g.dot(xi);
    if denom <= DOMAIN_MARGIN || !denom.is_finite() {
        return Err(Error::DegenerateDenominator { value: denom });
    }
    Ok(denom)
}

/// Dual coordinate `eta = Dphi(xi) / (1 - alpha Dphi(xi) . xi)`.
pub fn alpha_gradient(phi: &PotentialSpec, xi: &Vector) -> Result<Vector> {
    phi.ensure_interior(xi)?;
    let g = phi.gradient(xi);
    let denom = denominator_checked(phi, xi, &g)?;
    Ok(g / denom)
}

/// Jacobian `d eta^i / d xi^k` of the alpha-gradient.
pub fn alpha_gradient_jacobian(phi: &PotentialSpec, xi: &Vector) -> Result<Matrix> {
    phi.ensure_interior(xi)?;
    let g = phi.gradient(xi);
    let h = phi.hessian(xi);
    let denom = denominator_checked(phi, xi, &g)?;
    let a = phi.alpha().alpha();
    let w = &h * xi + &g;
    Ok(h / denom + (&g * w.transpose()) * (a / (denom * denom)))
}

/// Solves `D^(alpha) phi(xi) = eta` by damped Newton iteration from `seed`
/// (the domain's default seed when `None`). If Newton fails from the seed,
/// `eta` is approached by continuation from the seed's own dual point.
pub fn alpha_gradient_inverse(phi: &PotentialSpec, eta: &Vector, seed: Option<&Vector>) -> Result<Vector> {
    if eta.len() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), found: eta.len() });
    }
    let start = match seed {
        Some(s) => s.clone(),
        None => phi.domain().default_seed(),
    };
    phi.ensure_interior(&start)?;
    newton_inverse(phi, eta, start.clone()).or_else(|e| {
        log::debug!("Newton inverse failed ({e}); continuing from the seed's dual point");
        continuation_inverse(phi, eta, start).map_err(|_| e)
    })
}

/// Follows `eta_t = (1 - t) D^(alpha) phi(start) + t eta` with adaptive steps.
fn continuation_inverse(phi: &PotentialSpec, eta: &Vector, start: Vector) -> Result<Vector> {
    let eta0 = alpha_gradient(phi, &start)?;
    let (mut xi, mut t, mut dt) = (start, 0.0_f64, 0.125_f64);
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        let target = &eta0 * (1.0 - next) + eta * next;
        match newton_inverse(phi, &target, xi.clone()) {
            Ok(x) => {
                xi = x;
                t = next;
                dt = (2.0 * dt).min(0.5);
            }
            Err(e) => {
                dt *= 0.5;
                if dt < CONTINUATION_MIN_STEP {
                    return Err(e);
                }
            }
        }
    }
    Ok(xi)
}

fn newton_inverse(phi: &PotentialSpec, eta: &Vector, mut xi: Vector) -> Result<Vector> {
    let a = phi.alpha().alpha();
    let residual_at = |x: &Vector| -> Option<Vector> {
        if !phi.contains(x) {
            return None;
        }
        let r = alpha_gradient(phi, x).ok()? - eta;
        if a > 0.0 && pairing(x, eta, a) <= 0.0 {
            return None;
        }
        r.iter().all(|v| v.is_finite()).then_some(r)
    };
    // Newton steps kept only while they shrink the residual; used past the
    // tolerance because the Jacobian can be ill-conditioned near the boundary
    let polish = |mut xi: Vector, mut norm: f64, mut r: Vector| -> Vector {
        for _ in 0..3 {
            let Ok(j) = alpha_gradient_jacobian(phi, &xi) else { break };
            let Some(step) = j.lu().solve(&(-&r)) else { break };
            let cand = &xi + step;
            match residual_at(&cand) {
                Some(rc) if rc.norm() < norm => {
                    norm = rc.norm();
                    r = rc;
                    xi = cand;
                }
                _ => break,
            }
        }
        xi
    };
    let mut r = residual_at(&xi).ok_or(Error::IterateLeftDomain)?;
    let mut norm = r.norm();
    for _ in 0..NEWTON_MAX_ITER {
        if norm <= NEWTON_TOL {
            return Ok(polish(xi, norm, r));
        }
        let j = alpha_gradient_jacobian(phi, &xi)?;
        let step = j.lu().solve(&(-&r)).ok_or(Error::SingularHessian)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &xi + &step * t;
            if let Some(rc) = residual_at(&cand) {
                let nc = rc.norm();
                if nc < norm || nc <= NEWTON_TOL {
                    accepted = Some((cand, rc, nc));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((x, rc, nc)) => {
                xi = x;
                r = rc;
                norm = nc;
            }
            None => {
                // no decrease possible at machine precision
                if norm <= 1e3 * NEWTON_TOL {
                    return Ok(xi);
                }
                return Err(Error::IterateLeftDomain);
            }
        }
    }
    if norm <= NEWTON_TOL {
        Ok(polish(xi, norm, r))
    } else {
        Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, residual: norm })
    }
}

type CacheKey = Vec<u64>;

fn cache_key(eta: &Vector) -> CacheKey {
    eta.iter().map(|v| ((v * 1e12).round() + 0.0).to_bits()).collect()
}

/// A potential together with its alpha-conjugate.
///
/// Inversions of the alpha-gradient are memoized per `eta` (rounded to 12
/// decimals). Exact repeats return the cached point; near repeats reuse it as
/// the Newton seed, so cached and uncached results agree to the Newton tolerance.
#[derive(Debug)]
pub struct DualPair {
    primal: PotentialSpec,
    samples: Vec<(Vector, Vector)>,
    cache: Mutex<HashMap<CacheKey, (Vector, Vector)>>,
}

impl Clone for DualPair {
    fn clone(&self) -> Self {
        let cache = self.cache.lock().map(|c| c.clone()).unwrap_or_default();
        Self { primal: self.primal.clone(), samples: self.samples.clone(), cache: Mutex::new(cache) }
    }
}

impl DualPair {
    pub fn new(primal: PotentialSpec) -> Self {
        Self { primal, samples: Vec::new(), cache: Mutex::new(HashMap::new()) }
    }

    /// Also records `(xi, eta)` for each sample, which later seed inversions.
    pub fn with_samples(primal: PotentialSpec, points: &[Vector]) -> Result<Self> {
        let mut pair = Self::new(primal);
        for xi in points {
            let eta = alpha_gradient(&pair.primal, xi)?;
            pair.samples.push((xi.clone(), eta));
        }
        Ok(pair)
    }

    pub fn primal(&self) -> &PotentialSpec {
        &self.primal
    }

    pub fn samples(&self) -> &[(Vector, Vector)] {
        &self.samples
    }

    pub fn dual_samples(&self) -> Vec<Vector> {
        self.samples.iter().map(|(_, e)| e.clone()).collect()
    }

    pub fn alpha(&self) -> f64 {
        self.primal.alpha().alpha()
    }

    /// `+1` (concave class) or `-1` (convex class).
    pub fn class_sign(&self) -> f64 {
        self.primal.alpha().sign().factor()
    }

    pub fn dual_point(&self, xi: &Vector) -> Result<Vector> {
        alpha_gradient(&self.primal, xi)
    }

    fn nearest_sample(&self, eta: &Vector) -> Option<&Vector> {
        self.samples.iter().min_by(|a, b| (&a.1 - eta).norm().total_cmp(&(&b.1 - eta).norm())).map(|(xi, _)| xi)
    }

    /// Inverse alpha-gradient, memoized.
    pub fn primal_point(&self, eta: &Vector, seed: Option<&Vector>) -> Result<Vector> {
        let key = cache_key(eta);
        let cached = self.cache.lock().ok().and_then(|c| c.get(&key).cloned());
        if let Some((xi, e)) = &cached {
            if e == eta {
                return Ok(xi.clone());
            }
        }
        let warm = cached.as_ref().map(|(xi, _)| xi.clone());
        let seed = seed.cloned().or(warm).or_else(|| self.nearest_sample(eta).cloned());
        let xi = match alpha_gradient_inverse(&self.primal, eta, seed.as_ref()) {
            Ok(x) => x,
            Err(e) if seed.is_some() => {
                log::debug!("inverse from seed failed ({e}); retrying from default seed");
                alpha_gradient_inverse(&self.primal, eta, None)?
            }
            Err(e) => return Err(e),
        };
        if let Ok(mut c) = self.cache.lock() {
            c.insert(key, (xi.clone(), eta.clone()));
        }
        Ok(xi)
    }

    /// `psi(eta) = c(xi, eta) - phi(xi)` at `xi = (D^(alpha) phi)^{-1}(eta)`.
    pub fn conjugate(&self, eta: &Vector, seed: Option<&Vector>) -> Result<f64> {
        let xi = self.primal_point(eta, seed)?;
        Ok(cost_c_alpha(&xi, eta, self.alpha())? - self.primal.value(&xi))
    }

    /// `psi` evaluated at the dual point of a known primal point, no inversion.
    pub fn conjugate_at_primal(&self, xi: &Vector) -> Result<(Vector, f64)> {
        let eta = self.dual_point(xi)?;
        let psi = cost_c_alpha(xi, &eta, self.alpha())? - self.primal.value(xi);
        Ok((eta, psi))
    }

    /// `Dpsi(eta) = xi / (1 + alpha xi . eta)`.
    pub fn conjugate_gradient(&self, eta: &Vector, seed: Option<&Vector>) -> Result<Vector> {
        let xi = self.primal_point(eta, seed)?;
        let (_, pi) = cost_with_pairing(&xi, eta, self.alpha())?;
        Ok(xi / pi)
    }

    /// `s (c(xi, eta) - phi(xi) - psi(eta))`.
    pub fn fenchel_gap(&self, xi: &Vector, eta: &Vector) -> Result<f64> {
        self.primal.ensure_interior(xi)?;
        let c = cost_c_alpha(xi, eta, self.alpha())?;
        let psi = self.conjugate(eta, None)?;
        Ok(self.class_sign() * (c - self.primal.value(xi) - psi))
    }
}

/// `psi(eta)` through the pair's closed form.
pub fn alpha_conjugate(pair: &DualPair, eta: &Vector, seed: Option<&Vector>) -> Result<f64> {
    pair.conjugate(eta, seed)
}

/// Result of the brute-force conjugate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConjugate {
    pub value: f64,
    /// Index of the optimizing grid point.
    pub index: usize,
    /// Grid points dropped because `1 + alpha xi . eta <= 0` or outside the domain.
    pub skipped: usize,
}

/// Optimizes `c(xi', eta) - phi(xi')` over `grid`: minimum for the concave
/// class, maximum for the convex class.
pub fn conjugate_by_search(phi: &PotentialSpec, eta: &Vector, grid: &[Vector]) -> Result<SearchConjugate> {
    let a = phi.alpha().alpha();
    let s = phi.alpha().sign().factor();
    let mut best: Option<(f64, usize)> = None;
    let mut skipped = 0;
    for (i, x) in grid.iter().enumerate() {
        if !phi.contains(x) {
            skipped += 1;
            continue;
        }
        let Ok(c) = cost_c_alpha(x, eta, a) else {
            skipped += 1;
            continue;
        };
        let v = c - phi.value(x);
        if best.is_none_or(|(b, _)| s * v < s * b) {
            best = Some((v, i));
        }
    }
    let (value, index) = best.ok_or(Error::EmptyFeasibleGrid)?;
    Ok(SearchConjugate { value, index, skipped })
}

/// `D^(±alpha)[xi : xi']`; the Bregman branch when `alpha = 0`.
pub fn l_divergence(phi: &PotentialSpec, xi: &Vector, xi_prime: &Vector) -> Result<f64> {
    let a = phi.alpha().alpha();
    if a == 0.0 {
        return bregman_divergence(phi, xi, xi_prime);
    }
    phi.ensure_interior(xi)?;
    phi.ensure_interior(xi_prime)?;
    let g = phi.gradient(xi_prime);
    let t = a * g.dot(&(xi - xi_prime));
    if 1.0 + t <= DOMAIN_MARGIN || !t.is_finite() {
        return Err(Error::LogDomain { argument: 1.0 + t });
    }
    let d = t.ln_1p() / a - (phi.value(xi) - phi.value(xi_prime));
    Ok(phi.alpha().sign().factor() * d)
}

/// `s (Dphi(xi') . (xi - xi') - (phi(xi) - phi(xi')))`.
pub fn bregman_divergence(phi: &PotentialSpec, xi: &Vector, xi_prime: &Vector) -> Result<f64> {
    phi.ensure_interior(xi)?;
    phi.ensure_interior(xi_prime)?;
    let g = phi.gradient(xi_prime);
    let d = g.dot(&(xi - xi_prime)) - (phi.value(xi) - phi.value(xi_prime));
    Ok(phi.alpha().sign().factor() * d)
}

/// `s (c(xi, eta') - phi(xi) - psi(eta'))`, equal to `D[xi : xi']` for
/// `eta' = D^(alpha) phi(xi')`.
pub fn self_dual_divergence(pair: &DualPair, xi: &Vector, eta_prime: &Vector) -> Result<f64> {
    pair.fenchel_gap(xi, eta_prime)
}

/// Generalized Fenchel gap; nonnegative, zero exactly at dual pairs.
pub fn fenchel_gap(pair: &DualPair, xi: &Vector, eta: &Vector) -> Result<f64> {
    pair.fenchel_gap(xi, eta)
}

/// Primal divergence versus the conjugate's divergence with swapped roles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Biduality {
    /// `D_phi[xi' : xi]`.
    pub lhs: f64,
    /// `s [(1/alpha) log(1 + alpha Dpsi(eta') . (eta - eta')) - (psi(eta) - psi(eta'))]`.
    pub rhs: f64,
    pub gap: f64,
}

/// Compares the primal divergence with the dual divergence of `psi` in the
/// `eta`-chart, both evaluated from closed forms.
pub fn biduality_check(pair: &DualPair, xi: &Vector, xi_prime: &Vector) -> Result<Biduality> {
    let phi = pair.primal();
    let a = pair.alpha();
    let lhs = l_divergence(phi, xi_prime, xi)?;
    let (eta, psi) = pair.conjugate_at_primal(xi)?;
    let (eta_p, psi_p) = pair.conjugate_at_primal(xi_prime)?;
    let (_, pi_p) = cost_with_pairing(xi_prime, &eta_p, a)?;
    let dpsi_p = xi_prime / pi_p;
    let t = a * dpsi_p.dot(&(&eta - &eta_p));
    let first = if a == 0.0 {
        dpsi_p.dot(&(&eta - &eta_p))
    } else {
        if 1.0 + t <= 0.0 {
            return Err(Error::LogDomain { argument: 1.0 + t });
        }
        t.ln_1p() / a
    };
    let rhs = pair.class_sign() * (first - (psi - psi_p));
    Ok(Biduality { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// Both sides of
/// `(1 + alpha Dphi(xi) . (xi' - xi)) (1 + alpha Dphi(xi') . (xi - xi'))
///  = exp(s alpha (D[xi' : xi] + D[xi : xi']))`,
/// at least 1 for the concave class and at most 1 for the convex class.
pub fn product_identity(phi: &PotentialSpec, xi: &Vector, xi_prime: &Vector) -> Result<(f64, f64)> {
    let a = phi.alpha().alpha();
    let g = phi.gradient(xi);
    let gp = phi.gradient(xi_prime);
    let lhs = (1.0 + a * g.dot(&(xi_prime - xi))) * (1.0 + a * gp.dot(&(xi - xi_prime)));
    let sum = l_divergence(phi, xi_prime, xi)? + l_divergence(phi, xi, xi_prime)?;
    Ok((lhs, (phi.alpha().sign().factor() * a * sum).exp()))
}
