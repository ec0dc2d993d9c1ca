//! Effective sample size by Geyer's initial positive sequence.

use crate::error::{Error, Result};
use crate::inference::draws::PosteriorDraws;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssEstimate {
    pub ess: f64,
    /// Set when the chain has zero variance; `ess` is then 0.
    pub degenerate: bool,
}

fn autocovariance(x: &[f64], mean: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag).map(|t| (x[t] - mean) * (x[t + lag] - mean)).sum::<f64>() / n as f64
}

/// ESS of a single chain. Pairs of consecutive autocorrelations
/// `Γ_m = ρ_{2m} + ρ_{2m+1}` are summed while positive.
pub fn effective_sample_size(x: &[f64]) -> Result<EssEstimate> {
    let n = x.len();
    if n < 10 {
        return Err(Error::InvalidParameter(format!("ESS needs at least 10 draws, got {n}")));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0 = autocovariance(x, mean, 0);
    if x.iter().all(|&v| v == x[0]) || c0.is_nan() || c0 <= 0.0 {
        return Ok(EssEstimate {
            ess: 0.0,
            degenerate: true,
        });
    }
    let mut sum = 0.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = (autocovariance(x, mean, 2 * m) + autocovariance(x, mean, 2 * m + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        m += 1;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    Ok(EssEstimate {
        ess: n as f64 / tau,
        degenerate: false,
    })
}

/// ESS of one named parameter, summed over chains.
pub fn parameter_ess(draws: &PosteriorDraws, name: &str) -> Result<EssEstimate> {
    let chains = draws
        .chains(name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown parameter {name:?}")))?;
    let mut total = EssEstimate {
        ess: 0.0,
        degenerate: true,
    };
    for c in &chains {
        let e = effective_sample_size(c)?;
        total.ess += e.ess;
        total.degenerate &= e.degenerate;
    }
    Ok(total)
}
