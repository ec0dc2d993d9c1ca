use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters. `1/τ_i ~ IG(a_tau, b_tau)` (so `τ_i ~ Gamma(a_tau, rate b_tau)`),
/// `σ_i² ~ IG(a_sigma, b_sigma)`, `β ~ N(0, beta_var·I)`, `η ~ N(0, eta_var·I)`
/// and `ρ_i ~ Uniform(0, 1)`. Inverse-gamma densities are `∝ x^(-a-1) e^(-b/x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSpec {
    pub a_tau: f64,
    pub b_tau: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
    pub beta_var: f64,
    pub eta_var: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            a_tau: 2.0,
            b_tau: 0.1,
            a_sigma: 2.0,
            b_sigma: 1.0,
            beta_var: 1e3,
            eta_var: 1e2,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a_tau", self.a_tau),
            ("b_tau", self.b_tau),
            ("a_sigma", self.a_sigma),
            ("b_sigma", self.b_sigma),
            ("beta_var", self.beta_var),
            ("eta_var", self.eta_var),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "prior {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}
