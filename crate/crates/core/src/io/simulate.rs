use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bivariate::{joint_precision, BdagarSpec, LinkingParams};
use crate::error::{Error, Result};
use crate::graph::OrderedRegionGraph;
use crate::inference::Dataset;
use crate::io::config::ModelChoice;
use crate::precision::check_rho;

fn default_names() -> [String; 2] {
    ["d1".into(), "d2".into()]
}

/// Data-generating parameters. `beta` lengths fix the number of design
/// columns (intercept included); `w` is filled in by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationTruth {
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub sigma2: [f64; 2],
    pub tau: [f64; 2],
    pub rho: [f64; 2],
    pub eta: [f64; 2],
    pub seed: u64,
    #[serde(default)]
    pub model: ModelChoice,
    #[serde(default = "default_names")]
    pub disease_names: [String; 2],
    /// Latent effects `(w₁ᵀ, w₂ᵀ)`, region-indexed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
}

impl SimulationTruth {
    pub fn validate(&self) -> Result<()> {
        if self.beta1.is_empty() || self.beta2.is_empty() {
            return Err(Error::InvalidParameter(
                "beta1 and beta2 need at least the intercept".into(),
            ));
        }
        for (i, (&s, &t)) in self.sigma2.iter().zip(&self.tau).enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "sigma2[{i}] must be positive, got {s}"
                )));
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("tau[{i}] must be positive, got {t}")));
            }
        }
        check_rho(self.rho[0])?;
        check_rho(self.rho[1])?;
        if self.disease_names[0] == self.disease_names[1] {
            return Err(Error::InvalidParameter("disease names must differ".into()));
        }
        Ok(())
    }

    pub fn spec(&self, graph: &OrderedRegionGraph) -> BdagarSpec {
        BdagarSpec {
            graph: graph.clone(),
            kind: self.model.kind(),
            rho1: self.rho[0],
            rho2: self.rho[1],
            tau1: self.tau[0],
            tau2: self.tau[1],
            link: LinkingParams::new(self.eta[0], self.eta[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub dataset: Dataset,
    /// The input truth with `w` filled in.
    pub truth: SimulationTruth,
}

/// Draws covariates (standard normal, named `<disease>_x<j>`), then
/// `w ~ N(0, Q_w⁻¹)`, then `y_i = X_iβ_i + w_i + ε_i`.
pub fn simulate_dataset<R: Rng + ?Sized>(
    graph: &OrderedRegionGraph,
    truth: &SimulationTruth,
    rng: &mut R,
) -> Result<SimulatedData> {
    truth.validate()?;
    let k = graph.len();
    let names = &truth.disease_names;
    let betas = [&truth.beta1, &truth.beta2];
    let mut covariates: [DMatrix<f64>; 2] = Default::default();
    let mut covariate_names: [Vec<String>; 2] = Default::default();
    for i in 0..2 {
        let p = betas[i].len();
        covariates[i] = DMatrix::from_fn(k, p, |_, c| if c == 0 { 1.0 } else { f64::NAN });
        for c in 1..p {
            for r in 0..k {
                covariates[i][(r, c)] = StandardNormal.sample(rng);
            }
        }
        covariate_names[i] = std::iter::once("intercept".to_string())
            .chain((1..p).map(|j| format!("{}_x{j}", names[i])))
            .collect();
    }
    let w = joint_precision(&truth.spec(graph))?.sample(rng)?;
    let mut outcomes: [DVector<f64>; 2] = Default::default();
    for i in 0..2 {
        let beta = DVector::from_column_slice(betas[i]);
        let sd = truth.sigma2[i].sqrt();
        let mean = &covariates[i] * beta;
        outcomes[i] = DVector::from_fn(k, |r, _| {
            let e: f64 = StandardNormal.sample(rng);
            mean[r] + w[i * k + r] + sd * e
        });
    }
    let dataset = Dataset::new(graph.clone(), names.clone(), outcomes, covariates, covariate_names)?;
    let mut truth = truth.clone();
    truth.w = Some(w.as_slice().to_vec());
    Ok(SimulatedData { dataset, truth })
}
