//! Run configuration read from `--config`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::families::{DiscreteFamily, FamilyConfig, FamilySign};
use crate::linalg::Vector;
use crate::potentials::{BuiltinName, BuiltinParams, PotentialConfig, PotentialSpec, Sign};

/// Default number of random samples when a command is not given explicit points.
pub const DEFAULT_SAMPLES: usize = 10;
/// Default number of geodesic rows after the first.
pub const DEFAULT_GEODESIC_SAMPLES: usize = 64;
/// RK4 steps per geodesic row in the cross-check column.
pub const RK4_STEPS_PER_ROW: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChartChoice {
    #[default]
    Primal,
    Dual,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialConfig>,
    pub family: Option<FamilyConfig>,
    /// Seed for random sampling; `--seed` takes precedence.
    pub seed: Option<u64>,
    /// Number of random samples for commands without explicit points.
    pub samples: Option<usize>,
    /// `eval`, `reconstruct`, `renyi`: point pairs `[xi, xi']`.
    pub pairs: Option<Vec<[Vec<f64>; 2]>>,
    /// `curvature`, `conjugate`: primal points.
    pub points: Option<Vec<Vec<f64>>>,
    /// `conjugate`: dual points.
    pub eta: Option<Vec<Vec<f64>>>,
    /// `pythagoras`: triples `[p, q, r]`.
    pub triples: Option<Vec<[Vec<f64>; 3]>>,
    /// `geodesic`: endpoints, row count and chart.
    pub start: Option<Vec<f64>>,
    pub end: Option<Vec<f64>>,
    pub geodesic_samples: Option<usize>,
    pub chart: Option<ChartChoice>,
    /// `reconstruct`: anchor of the integrated potential.
    pub base: Option<Vec<f64>>,
    /// `reconstruct`: Simpson panels per line integral.
    pub quadrature_panels: Option<usize>,
    /// `curvature`: curvature magnitude to test against instead of the potential's alpha.
    pub claimed_alpha: Option<f64>,
    /// Tolerance of the command's main check; `--tol` takes precedence.
    pub tolerance: Option<f64>,
    pub report: Option<ReportConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }
}

/// A potential in the report, optionally with a curvature claim that differs
/// from its divergence order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportPotential {
    pub potential: PotentialConfig,
    pub claimed_alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteTolerances {
    pub duality: f64,
    pub roundtrip: f64,
    pub curvature: f64,
    pub pythagoras: f64,
    pub renyi: f64,
    pub alpha_divergence: f64,
    pub curvature_transfer: f64,
    pub reconstruction: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        Self {
            duality: 1e-12,
            roundtrip: 1e-8,
            curvature: 1e-8,
            pythagoras: 1e-9,
            renyi: 1e-10,
            alpha_divergence: 1e-12,
            curvature_transfer: 1e-6,
            reconstruction: 1e-7,
        }
    }
}

impl SuiteTolerances {
    /// Every tolerance replaced by `tol`.
    pub fn uniform(tol: f64) -> Self {
        Self {
            duality: tol,
            roundtrip: tol,
            curvature: tol,
            pythagoras: tol,
            renyi: tol,
            alpha_divergence: tol,
            curvature_transfer: tol,
            reconstruction: tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// Random samples per potential, family or order and suite.
    pub samples: usize,
    pub potentials: Vec<ReportPotential>,
    pub families: Vec<FamilyConfig>,
    /// Rényi orders for the alpha-divergence suite.
    pub orders: Vec<f64>,
    /// Dimension of the simplex in the alpha-divergence suite.
    pub simplex_dim: usize,
    pub tolerances: SuiteTolerances,
}

fn potential(name: BuiltinName, dim: usize, alpha: f64, sign: Sign) -> ReportPotential {
    ReportPotential {
        potential: PotentialConfig {
            name: name.as_str().to_string(),
            dim,
            alpha,
            sign,
            params: BuiltinParams::default(),
        },
        claimed_alpha: None,
    }
}

fn family_config(fam: &DiscreteFamily) -> FamilyConfig {
    FamilyConfig {
        sample_points: fam.sample_points(),
        mu: fam.mu().to_vec(),
        h: fam.statistic().iter().map(|r| r.iter().copied().collect()).collect(),
        alpha: fam.alpha(),
        family_sign: fam.sign(),
    }
}

impl Default for ReportConfig {
    fn default() -> Self {
        let general = DiscreteFamily::new(
            vec![0.2, 0.3, 0.1, 0.25, 0.15],
            vec![
                Vector::from_column_slice(&[1.0, 0.2]),
                Vector::from_column_slice(&[0.3, 1.5]),
                Vector::from_column_slice(&[0.7, 0.7]),
                Vector::from_column_slice(&[0.0, 0.4]),
                Vector::from_column_slice(&[2.0, 1.0]),
            ],
            0.5,
            FamilySign::Minus,
        )
        .expect("default family is valid");
        Self {
            samples: 20,
            potentials: vec![
                potential(BuiltinName::DirichletLog, 3, 1.0, Sign::Concave),
                potential(BuiltinName::LogBarrierOnQuadrant, 3, 0.5, Sign::Convex),
                potential(BuiltinName::SimplexFAlpha, 3, 1.0, Sign::Concave),
                potential(BuiltinName::SimplexFMinusAlpha, 2, 0.5, Sign::Convex),
                potential(BuiltinName::SimplexFMinusAlpha, 2, 2.0, Sign::Concave),
                potential(BuiltinName::Quadratic, 2, 0.0, Sign::Concave),
            ],
            families: vec![
                family_config(&DiscreteFamily::simplex(3, 1.0, FamilySign::Plus).expect("valid")),
                family_config(&general),
                family_config(&DiscreteFamily::simplex(2, 2.0, FamilySign::Minus).expect("valid")),
            ],
            orders: vec![0.3, 0.5, 2.0, 4.0],
            simplex_dim: 3,
            tolerances: SuiteTolerances::default(),
        }
    }
}

/// Builds the potential and records its name for messages.
pub fn build_potential(cfg: &PotentialConfig) -> crate::Result<PotentialSpec> {
    cfg.build()
}
