//! The verification report: every suite over the configured potentials,
//! families and orders.

use serde::Serialize;

use super::commands::orthogonal_triple;
use super::config::{ReportConfig, ReportPotential};
use super::output::Table;
use crate::duality::{l_divergence, self_dual_divergence, DualPair};
use crate::error::{Error, Result};
use crate::families::{
    alpha_divergence_curvature, renyi_alpha_identity_check, simplex_family_for_order, verify_conjugate_entropy,
    verify_renyi_theorem, DiscreteFamily, RenyiOrder,
};
use crate::geometry::{constant_curvature_template, curvature_tensor, metric};
use crate::linalg::{Matrix, Vector};
use crate::parallel::parallel_map;
use crate::potentials::PotentialSpec;
use crate::reconstruct::{ConnectionField, Reconstruction, DEFAULT_QUADRATURE_PANELS};
use crate::sampling::{sample_interior, sample_pairs, sample_simplex, sampling_region, seeded_rng};

/// Failure messages kept per suite.
const MAX_FAILURES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub failed: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
}

impl Report {
    pub fn table(&self) -> Table {
        let mut t = Table::new(["suite", "checks", "max_residual", "tolerance", "passed", "failed"]);
        for s in &self.suites {
            t.push(vec![
                s.name.clone().into(),
                s.checks.into(),
                s.max_residual.into(),
                s.tolerance.into(),
                s.passed.into(),
                s.failed.into(),
            ]);
        }
        t
    }
}

/// Residual accumulator for one suite.
struct Suite {
    name: &'static str,
    tolerance: f64,
    checks: usize,
    max_residual: f64,
    failures: Vec<String>,
    total_failures: usize,
}

impl Suite {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, checks: 0, max_residual: 0.0, failures: Vec::new(), total_failures: 0 }
    }

    fn fail(&mut self, msg: String) {
        self.total_failures += 1;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(msg);
        }
    }

    fn record(&mut self, label: &str, residual: Result<f64>) {
        self.checks += 1;
        match residual {
            Ok(r) if r <= self.tolerance => self.max_residual = self.max_residual.max(r),
            Ok(r) => {
                if !r.is_nan() {
                    self.max_residual = self.max_residual.max(r);
                } else {
                    self.max_residual = f64::NAN;
                }
                self.fail(format!("{label}: residual {r:e}"));
            }
            Err(e) => self.fail(format!("{label}: {e}")),
        }
    }

    fn finish(mut self) -> SuiteResult {
        if self.total_failures > self.failures.len() {
            self.failures.push(format!("... {} more", self.total_failures - self.failures.len()));
        }
        SuiteResult {
            name: self.name.to_string(),
            checks: self.checks,
            failed: self.total_failures,
            max_residual: self.max_residual,
            tolerance: self.tolerance,
            passed: self.total_failures == 0 && self.checks > 0,
            failures: self.failures,
        }
    }
}

/// Built potential with its report label, or the construction error.
struct Entry {
    label: String,
    spec: Result<PotentialSpec>,
    claimed_alpha: Option<f64>,
}

fn label(p: &ReportPotential) -> String {
    let c = &p.potential;
    format!("{}(d={}, alpha={}, {})", c.name, c.dim, c.alpha, c.sign)
}

/// Seed of the random stream for item `item` of suite `suite`.
fn stream(seed: u64, suite: u64, item: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(suite << 32).wrapping_add(item as u64)
}

fn duality_suite(cfg: &ReportConfig, entries: &[Entry], seed: u64) -> SuiteResult {
    let mut suite = Suite::new("duality", cfg.tolerances.duality);
    for (i, e) in entries.iter().enumerate() {
        let phi = match &e.spec {
            Ok(p) => p,
            Err(err) => {
                suite.record(&e.label, Err(err.clone()));
                continue;
            }
        };
        let pair = DualPair::new(phi.clone());
        let pairs = match sample_pairs(&mut seeded_rng(stream(seed, 1, i)), phi, cfg.samples) {
            Ok(p) => p,
            Err(err) => {
                suite.record(&e.label, Err(err));
                continue;
            }
        };
        for (xi, xp) in &pairs {
            let r = pair.dual_point(xp).and_then(|eta| {
                let d = l_divergence(phi, xi, xp)?;
                let sd = self_dual_divergence(&pair, xi, &eta)?;
                // the gap also vanishes at the matched pair
                let matched = pair.fenchel_gap(xp, &eta)?;
                Ok((d - sd).abs().max(matched.abs()))
            });
            suite.record(&e.label, r);
        }
    }
    suite.finish()
}

fn roundtrip_suite(cfg: &ReportConfig, entries: &[Entry], seed: u64) -> SuiteResult {
    let mut suite = Suite::new("roundtrip", cfg.tolerances.roundtrip);
    for (i, e) in entries.iter().enumerate() {
        let phi = match &e.spec {
            Ok(p) => p,
            Err(err) => {
                suite.record(&e.label, Err(err.clone()));
                continue;
            }
        };
        let pair = DualPair::new(phi.clone());
        match sample_interior(&mut seeded_rng(stream(seed, 2, i)), phi.domain(), cfg.samples) {
            Ok(pts) => {
                for xi in &pts {
                    let r = pair.dual_point(xi).and_then(|eta| pair.primal_point(&eta, None)).map(|x| (x - xi).norm());
                    suite.record(&e.label, r);
                }
            }
            Err(err) => suite.record(&e.label, Err(err)),
        }
    }
    suite.finish()
}

/// `max |R - k B|` with `k = -s claimed_alpha`.
fn curvature_residual(phi: &PotentialSpec, claimed: f64, xi: &Vector) -> Result<f64> {
    let r = curvature_tensor(phi, xi)?;
    let g = metric(phi, xi)?;
    let k = -phi.alpha().sign().factor() * claimed;
    let b = constant_curvature_template(&g);
    Ok(r.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - k * y).abs()).fold(0.0, f64::max))
}

fn curvature_suite(cfg: &ReportConfig, entries: &[Entry], seed: u64) -> SuiteResult {
    let mut suite = Suite::new("curvature", cfg.tolerances.curvature);
    for (i, e) in entries.iter().enumerate() {
        let phi = match &e.spec {
            Ok(p) if p.dim() >= 2 => p,
            Ok(_) => continue,
            Err(err) => {
                suite.record(&e.label, Err(err.clone()));
                continue;
            }
        };
        let claimed = e.claimed_alpha.unwrap_or(phi.alpha().alpha());
        match sample_interior(&mut seeded_rng(stream(seed, 3, i)), phi.domain(), cfg.samples) {
            Ok(pts) => {
                for xi in &pts {
                    suite.record(&e.label, curvature_residual(phi, claimed, xi));
                }
            }
            Err(err) => suite.record(&e.label, Err(err)),
        }
    }
    suite.finish()
}

fn pythagoras_suite(cfg: &ReportConfig, entries: &[Entry], seed: u64) -> SuiteResult {
    let mut suite = Suite::new("pythagoras", cfg.tolerances.pythagoras);
    for (i, e) in entries.iter().enumerate() {
        let phi = match &e.spec {
            // the Bregman limit has no projective structure to test
            Ok(p) if p.alpha().alpha() > 0.0 => p,
            Ok(_) => continue,
            Err(err) => {
                suite.record(&e.label, Err(err.clone()));
                continue;
            }
        };
        let pair = DualPair::new(phi.clone());
        let mut rng = seeded_rng(stream(seed, 4, i));
        let (_, radius) = sampling_region(phi.domain());
        for _ in 0..cfg.samples {
            let r = sample_pairs(&mut rng, phi, 1)
                .and_then(|pq| orthogonal_triple(&mut rng, &pair, &pq[0].1, &pq[0].0, radius))
                .map(|(_, rep)| rep.relative_gap.abs());
            suite.record(&e.label, r);
        }
    }
    suite.finish()
}

fn renyi_suite(cfg: &ReportConfig, families: &[(String, Result<DiscreteFamily>)], seed: u64) -> SuiteResult {
    let mut suite = Suite::new("renyi", cfg.tolerances.renyi);
    for (i, (label, fam)) in families.iter().enumerate() {
        let fam = match fam {
            Ok(f) => f,
            Err(err) => {
                suite.record(label, Err(err.clone()));
                continue;
            }
        };
        let spec = match fam.potential_spec() {
            Ok(s) => s,
            Err(err) => {
                suite.record(label, Err(err));
                continue;
            }
        };
        match sample_pairs(&mut seeded_rng(stream(seed, 5, i)), &spec, cfg.samples) {
            Ok(pairs) => {
                for (xi, xp) in &pairs {
                    suite.record(label, verify_renyi_theorem(fam, xi, xp).map(|r| r.gap));
                    suite.record(label, verify_conjugate_entropy(fam, xi).map(|r| r.gap));
                }
            }
            Err(err) => suite.record(label, Err(err)),
        }
    }
    suite.finish()
}

fn alpha_divergence_suites(cfg: &ReportConfig, seed: u64) -> (SuiteResult, SuiteResult) {
    let mut identity = Suite::new("alpha-divergence", cfg.tolerances.alpha_divergence);
    let mut transfer = Suite::new("curvature-transfer", cfg.tolerances.curvature_transfer);
    let k = cfg.simplex_dim + 1;
    for (i, &t) in cfg.orders.iter().enumerate() {
        let label = format!("order {t}");
        let order = match RenyiOrder::new(t) {
            Ok(o) => o,
            Err(err) => {
                identity.record(&label, Err(err));
                continue;
            }
        };
        let mut rng = seeded_rng(stream(seed, 6, i));
        for _ in 0..cfg.samples {
            let (p, q) = (sample_simplex(&mut rng, k), sample_simplex(&mut rng, k));
            identity.record(&label, renyi_alpha_identity_check(&p, &q, order).map(|r| r.gap));
        }
        let pts = simplex_family_for_order(cfg.simplex_dim, order)
            .and_then(|f| f.potential_spec())
            .and_then(|s| sample_interior(&mut rng, s.domain(), cfg.samples));
        match pts {
            Ok(pts) => {
                for xi in &pts {
                    let r = alpha_divergence_curvature(cfg.simplex_dim, order, xi)
                        .map(|c| (c.fitted - c.predicted).abs().max(c.fit_residual).max(c.metric_ratio_residual));
                    transfer.record(&label, r);
                }
            }
            Err(err) => transfer.record(&label, Err(err)),
        }
    }
    (identity.finish(), transfer.finish())
}

/// Fixed rechart used for the invariance check.
fn rechart(d: usize) -> (Matrix, Vector) {
    let a = Matrix::from_fn(d, d, |i, j| if i == j { 1.5 + 0.25 * i as f64 } else { 0.2 / (1.0 + (i + 2 * j) as f64) });
    let b = Vector::from_fn(d, |i, _| 0.3 - 0.2 * i as f64);
    (a, b)
}

fn reconstruction_suite(cfg: &ReportConfig, entries: &[Entry], seed: u64) -> SuiteResult {
    let mut suite = Suite::new("reconstruction", cfg.tolerances.reconstruction);
    for (i, e) in entries.iter().enumerate() {
        let phi = match &e.spec {
            Ok(p) if p.alpha().alpha() > 0.0 && p.dim() >= 2 => p,
            Ok(_) => continue,
            Err(err) => {
                suite.record(&e.label, Err(err.clone()));
                continue;
            }
        };
        let base = phi.domain().default_seed();
        let (a, b) = rechart(phi.dim());
        let built = ConnectionField::from_potential(phi).and_then(|field| {
            let moved = field.recharted(&a, &b)?;
            let rec = Reconstruction::new(&field, &base, DEFAULT_QUADRATURE_PANELS)?;
            let rec_moved = Reconstruction::new(&moved, &(&a * &base + &b), DEFAULT_QUADRATURE_PANELS)?;
            Ok((rec, rec_moved))
        });
        let (rec, rec_moved) = match built {
            Ok(r) => r,
            Err(err) => {
                suite.record(&e.label, Err(err));
                continue;
            }
        };
        match sample_pairs(&mut seeded_rng(stream(seed, 7, i)), phi, cfg.samples) {
            Ok(pairs) => {
                for (q, p) in &pairs {
                    let r = rec.divergence(q, p).and_then(|d| {
                        let direct = l_divergence(phi, q, p)?;
                        let moved = rec_moved.divergence(&(&a * q + &b), &(&a * p + &b))?;
                        Ok((d - direct).abs().max((d - moved).abs()))
                    });
                    suite.record(&e.label, r);
                }
            }
            Err(err) => suite.record(&e.label, Err(err)),
        }
    }
    suite.finish()
}

/// Runs every suite. Suites run concurrently but each draws from its own
/// seeded stream, so the result depends only on `cfg` and `seed`.
pub fn run_report(cfg: &ReportConfig, seed: u64) -> Report {
    let entries: Vec<Entry> = cfg
        .potentials
        .iter()
        .map(|p| Entry { label: label(p), spec: p.potential.build(), claimed_alpha: p.claimed_alpha })
        .collect();
    let families: Vec<(String, Result<DiscreteFamily>)> = cfg
        .families
        .iter()
        .map(|f| (format!("family F({}{}) n={}", f.family_sign, f.alpha, f.sample_points), f.build()))
        .collect();
    let jobs: [u8; 7] = [0, 1, 2, 3, 4, 5, 6];
    let results: Vec<Vec<SuiteResult>> = parallel_map(&jobs, |job| match job {
        0 => vec![duality_suite(cfg, &entries, seed)],
        1 => vec![roundtrip_suite(cfg, &entries, seed)],
        2 => vec![curvature_suite(cfg, &entries, seed)],
        3 => vec![pythagoras_suite(cfg, &entries, seed)],
        4 => vec![renyi_suite(cfg, &families, seed)],
        5 => {
            let (a, b) = alpha_divergence_suites(cfg, seed);
            vec![a, b]
        }
        _ => vec![reconstruction_suite(cfg, &entries, seed)],
    });
    let suites: Vec<SuiteResult> = results.into_iter().flatten().collect();
    let all_passed = suites.iter().all(|s| s.passed);
    Report { seed, samples: cfg.samples, suites, all_passed }
}

/// Error for an empty report configuration.
pub fn validate(cfg: &ReportConfig) -> Result<()> {
    if cfg.samples == 0 {
        return Err(Error::InvalidParameter("report samples must be positive".into()));
    }
    if cfg.simplex_dim == 0 {
        return Err(Error::InvalidParameter("simplex_dim must be positive".into()));
    }
    Ok(())
}
