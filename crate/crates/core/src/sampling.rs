//! Seeded random sampling of chart points, simplex points and directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::potentials::{ChartDomain, PotentialSpec};

/// Lower bound kept on `1 + alpha Dphi(xi') . (xi - xi')` by [`sample_pairs`].
pub const PAIR_LOG_MARGIN: f64 = 0.05;

/// Rejection attempts allowed per requested point.
const ATTEMPTS_PER_POINT: usize = 10_000;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Center and radius of a sampling box that stays well inside `domain`.
pub fn sampling_region(domain: &ChartDomain) -> (Vector, f64) {
    let center = domain.default_seed();
    let radius = match domain {
        ChartDomain::Box { lower, upper } => {
            lower
                .iter()
                .zip(upper)
                .zip(center.iter())
                .map(|((lo, hi), c)| (c - lo).min(hi - c))
                .fold(f64::INFINITY, f64::min)
                .min(1.0)
                * 0.6
        }
        ChartDomain::SimplexChart { alpha, .. } => 0.6 / alpha.max(1.0),
        ChartDomain::Halfspaces { normals, offsets, .. } => {
            normals
                .iter()
                .zip(offsets)
                .map(|(n, b)| (b - n.dot(&center)) / n.lp_norm(1).max(1e-300))
                .fold(1.0, f64::min)
                * 0.6
        }
        ChartDomain::Shifted { inner, .. } => sampling_region(inner).1,
        // a zeta-box of radius r maps into a xi-ball of radius |A^-1|_F r sqrt(d)
        ChartDomain::Affine { inner, inverse, .. } => {
            sampling_region(inner).1 / (inverse.norm() * (inverse.nrows() as f64).sqrt()).max(1e-300)
        }
    };
    (center, radius)
}

/// Uniform points in the box `center ± radius`, rejecting those not inside
/// `domain` with the given margin.
pub fn sample_box<R: Rng>(
    rng: &mut R,
    domain: &ChartDomain,
    center: &Vector,
    radius: f64,
    margin: f64,
    n: usize,
) -> Result<Vec<Vector>> {
    let d = center.len();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > ATTEMPTS_PER_POINT * n.max(1) {
            return Err(Error::InvalidParameter(format!("could not sample {n} interior points")));
        }
        let x = Vector::from_fn(d, |i, _| center[i] + radius * rng.gen_range(-1.0..1.0));
        if domain.contains_with_margin(&x, margin) {
            out.push(x);
        }
    }
    Ok(out)
}

/// `n` interior points of `domain` from its default sampling region.
pub fn sample_interior<R: Rng>(rng: &mut R, domain: &ChartDomain, n: usize) -> Result<Vec<Vector>> {
    let (center, radius) = sampling_region(domain);
    sample_box(rng, domain, &center, radius, 1e-3, n)
}

/// `n` pairs `(xi, xi')` of interior points on which the divergence is
/// defined, keeping `1 + alpha Dphi(xi') . (xi - xi')` above
/// [`PAIR_LOG_MARGIN`]. Only local (convex-class) divergences reject pairs.
pub fn sample_pairs<R: Rng>(rng: &mut R, phi: &PotentialSpec, n: usize) -> Result<Vec<(Vector, Vector)>> {
    let a = phi.alpha().alpha();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > ATTEMPTS_PER_POINT * n.max(1) {
            return Err(Error::InvalidParameter(format!("could not sample {n} pairs in the divergence domain")));
        }
        let pts = sample_interior(rng, phi.domain(), 2)?;
        let arg = 1.0 + a * phi.gradient(&pts[1]).dot(&(&pts[0] - &pts[1]));
        if arg > PAIR_LOG_MARGIN {
            let mut it = pts.into_iter();
            out.push((it.next().expect("two points"), it.next().expect("two points")));
        }
    }
    Ok(out)
}

/// A uniform point of the open simplex with `k` coordinates.
pub fn sample_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    // normalized exponentials are Dirichlet(1, ..., 1)
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln() + f64::MIN_POSITIVE).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// A direction with independent uniform entries in `[-1, 1]`.
pub fn sample_direction<R: Rng>(rng: &mut R, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))
}
