//! Gibbs sampler with random-walk Metropolis steps for the spatial
//! autocorrelations.
//!
//! One sweep updates, in order: `β`, `w`, `σ²`, `τ`, `η`, `ρ₁`, `ρ₂`. Every
//! block except `ρ` has a conjugate full conditional:
//!
//! ```text
//! β_i | ·  ~ N(V⁻¹ X_iᵀ(y_i - w_i)/σ_i²,  V = X_iᵀX_i/σ_i² + I/beta_var)
//! w   | ·  ~ N(P⁻¹ b,  P = Q_w + blockdiag(I/σ₁², I/σ₂²)),  b_i = (y_i - X_iβ_i)/σ_i²
//! σ_i²| ·  ~ IG(a_σ + k/2, b_σ + SSR_i/2)
//! τ₁  | ·  ~ Gamma(a_τ + k/2, b_τ + w₁ᵀQ₁w₁/2)
//! τ₂  | ·  ~ Gamma(a_τ + k/2, b_τ + rᵀQ₂r/2),  r = w₂ - A₂₁w₁
//! η   | ·  ~ N(V⁻¹ τ₂UᵀQ₂w₂,  V = τ₂UᵀQ₂U + I/eta_var),  U = [w₁ | Mw₁]
//! ```
//!
//! `ρ_i` moves on the logit scale; the target includes the Jacobian `ρ(1-ρ)`.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CscMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bivariate::{assemble_joint, linking_matrix, LinkingParams};
use crate::error::{Error, Result};
use crate::inference::data::Dataset;
use crate::inference::draws::{Draw, DrawsMeta, PosteriorDraws};
use crate::inference::prior::PriorSpec;
use crate::linalg::{self, SparseCholesky};
use crate::precision::{car_precision, spatial_precision, DagarComponents, PrecisionKind, SpatialPrecision};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Acceptance rate the `ρ` step sizes are tuned toward during burn-in.
pub const TARGET_ACCEPTANCE: f64 = 0.40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    /// Tune the `ρ` step sizes during burn-in (frozen afterwards).
    pub adapt: bool,
    /// Initial random-walk standard deviations for `logit(ρ₁)`, `logit(ρ₂)`.
    pub initial_step: [f64; 2],
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 5_000,
            thin: 5,
            n_chains: 1,
            seed: 2020,
            adapt: true,
            initial_step: [1.0, 1.0],
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.thin == 0 || self.n_chains == 0 {
            return Err(Error::Config("iterations, thin and n_chains must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.initial_step.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config("initial_step entries must be positive".into()));
        }
        Ok(())
    }

    /// Draws kept per chain after burn-in and thinning.
    pub fn retained_per_chain(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }
}

/// Current values of every unknown plus the chain's random stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub beta: [DVector<f64>; 2],
    /// `(w₁ᵀ, w₂ᵀ)ᵀ`, length `2k`.
    pub w: DVector<f64>,
    pub sigma2: [f64; 2],
    pub tau: [f64; 2],
    pub rho: [f64; 2],
    pub eta: LinkingParams,
    pub step: [f64; 2],
    pub rng: ChaCha8Rng,
}

#[derive(Serialize)]
struct StateDump<'a> {
    beta: [&'a [f64]; 2],
    w: &'a [f64],
    sigma2: [f64; 2],
    tau: [f64; 2],
    rho: [f64; 2],
    eta: [f64; 2],
    step: [f64; 2],
}

impl ChainState {
    /// Deterministic starting point: ridge-stabilised least squares for `β`
    /// ignoring `w`, `w = 0`, `σ²` the residual variance, `τ` its prior
    /// mean, `ρ = 0.5`, `η = 0`.
    pub fn initial(data: &Dataset, prior: &PriorSpec, seed: u64, step: [f64; 2]) -> Result<Self> {
        let k = data.k();
        let mut beta: [DVector<f64>; 2] = [DVector::zeros(0), DVector::zeros(0)];
        let mut sigma2 = [1.0; 2];
        for i in 0..2 {
            let x = &data.covariates[i];
            let y = &data.outcomes[i];
            let p = x.ncols();
            let gram = x.transpose() * x + DMatrix::identity(p, p) / prior.beta_var;
            let chol = gram
                .cholesky()
                .ok_or_else(|| Error::Factorization("least-squares start".into()))?;
            let b = chol.solve(&(x.transpose() * y));
            let resid = y - x * &b;
            let dof = if k > p { k - p } else { k };
            let s2 = resid.norm_squared() / dof as f64;
            sigma2[i] = if s2 > 1e-12 && s2.is_finite() { s2 } else { 1.0 };
            beta[i] = b;
        }
        let tau_mean = prior.a_tau / prior.b_tau;
        Ok(Self {
            beta,
            w: DVector::zeros(2 * k),
            sigma2,
            tau: [tau_mean; 2],
            rho: [0.5; 2],
            eta: LinkingParams::default(),
            step,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn k(&self) -> usize {
        self.w.len() / 2
    }

    /// `w_i` as a slice (`i` = 0 or 1).
    pub fn w_block(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.w.as_slice()[i * k..(i + 1) * k]
    }

    pub fn dump(&self) -> String {
        serde_json::to_string(&StateDump {
            beta: [self.beta[0].as_slice(), self.beta[1].as_slice()],
            w: self.w.as_slice(),
            sigma2: self.sigma2,
            tau: self.tau,
            rho: self.rho,
            eta: [self.eta.eta0, self.eta.eta1],
            step: self.step,
        })
        .unwrap_or_default()
    }
}

/// Normal full conditional in mean/precision form.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianConditional {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
}

impl GaussianConditional {
    fn from_canonical(precision: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        let chol = precision
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Factorization("conditional precision is not positive definite".into()))?;
        Ok(Self {
            mean: chol.solve(&shift),
            precision,
        })
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let n = x.len() as f64;
        let logdet = self
            .precision
            .clone()
            .cholesky()
            .map(|c| 2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
            .unwrap_or(f64::NAN);
        let d = x - &self.mean;
        -0.5 * n * LN_2PI + 0.5 * logdet - 0.5 * d.dot(&(&self.precision * &d))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<f64>> {
        let chol = self
            .precision
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Factorization("conditional precision is not positive definite".into()))?;
        let z = DVector::from_fn(self.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
        Ok(&self.mean + x)
    }
}

/// Shape/rate pair of a Gamma or inverse-gamma full conditional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeRate {
    pub shape: f64,
    pub rate: f64,
}

impl ShapeRate {
    pub fn gamma_log_density(&self, x: f64) -> f64 {
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * x.ln() - self.rate * x
    }

    pub fn inv_gamma_log_density(&self, x: f64) -> f64 {
        self.shape * self.rate.ln() - ln_gamma(self.shape) - (self.shape + 1.0) * x.ln() - self.rate / x
    }

    fn sample_gamma<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let g = Gamma::new(self.shape, 1.0 / self.rate)
            .map_err(|e| Error::InvalidParameter(format!("gamma({}, {}): {e}", self.shape, self.rate)))?;
        Ok(g.sample(rng))
    }
}

/// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 for x > 0.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = COEF[1..]
        .iter()
        .enumerate()
        .fold(COEF[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * LN_2PI + (x + 0.5) * t.ln() - t + series.ln()
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// A single chain over one dataset.
pub struct GibbsSampler<'a> {
    data: &'a Dataset,
    prior: PriorSpec,
    kind: PrecisionKind,
    adjacency: CscMatrix<f64>,
    w_factor: Option<SparseCholesky>,
    state: ChainState,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(data: &'a Dataset, kind: PrecisionKind, prior: PriorSpec, state: ChainState) -> Result<Self> {
        prior.validate()?;
        if kind == PrecisionKind::Car {
            car_precision(&data.graph, 0.0)?;
        }
        let k = data.k();
        if state.w.len() != 2 * k {
            return Err(Error::Dimension {
                expected: 2 * k,
                found: state.w.len(),
            });
        }
        for i in 0..2 {
            if state.beta[i].len() != data.p(i) {
                return Err(Error::Dimension {
                    expected: data.p(i),
                    found: state.beta[i].len(),
                });
            }
        }
        Ok(Self {
            data,
            prior,
            kind,
            adjacency: data.graph.adjacency(),
            w_factor: None,
            state,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ChainState {
        &mut self.state
    }

    pub fn into_state(self) -> ChainState {
        self.state
    }

    pub fn kind(&self) -> PrecisionKind {
        self.kind
    }

    fn precision(&self, rho: f64) -> Result<SpatialPrecision> {
        spatial_precision(self.kind, &self.data.graph, rho)
    }

    /// `(log det Q(ρ), xᵀQ(ρ)x)`. DAGAR skips assembling `Q` altogether.
    fn spatial_kernel(&self, rho: f64, x: &[f64]) -> Result<(f64, f64)> {
        match self.kind {
            PrecisionKind::Dagar => {
                let parts = DagarComponents::new(&self.data.graph, rho)?;
                Ok((parts.logdet(), parts.quad_form(x)))
            }
            PrecisionKind::Car => {
                let q = car_precision(&self.data.graph, rho)?;
                Ok((q.logdet(), q.quad_form(x)))
            }
        }
    }

    fn residual(&self, i: usize) -> DVector<f64> {
        let s = &self.state;
        let w = DVector::from_column_slice(s.w_block(i));
        &self.data.outcomes[i] - &self.data.covariates[i] * &s.beta[i] - w
    }

    /// `r = w₂ - A₂₁w₁` at the current `η`.
    pub fn conditional_residual(&self) -> Vec<f64> {
        let a = linking_matrix(self.state.eta, &self.data.graph);
        let aw1 = linalg::mat_vec(&a, self.state.w_block(0));
        self.state
            .w_block(1)
            .iter()
            .zip(aw1.iter())
            .map(|(w, m)| w - m)
            .collect()
    }

    pub fn beta_conditional(&self, i: usize) -> Result<GaussianConditional> {
        let s = &self.state;
        let x = &self.data.covariates[i];
        let p = x.ncols();
        let precision = x.transpose() * x / s.sigma2[i] + DMatrix::identity(p, p) / self.prior.beta_var;
        let target = &self.data.outcomes[i] - DVector::from_column_slice(s.w_block(i));
        let shift = x.transpose() * target / s.sigma2[i];
        GaussianConditional::from_canonical(precision, shift)
    }

    fn w_precision(&self) -> Result<(CscMatrix<f64>, DVector<f64>)> {
        let s = &self.state;
        let k = self.data.k();
        let q1 = self.precision(s.rho[0])?;
        let q2 = self.precision(s.rho[1])?;
        let a = linking_matrix(s.eta, &self.data.graph);
        let mut coo = assemble_joint(q1.matrix(), q2.matrix(), &a, s.tau[0], s.tau[1]);
        for i in 0..2 {
            for j in 0..k {
                coo.push(i * k + j, i * k + j, 1.0 / s.sigma2[i]);
            }
        }
        let mut b = DVector::zeros(2 * k);
        for i in 0..2 {
            let r = &self.data.outcomes[i] - &self.data.covariates[i] * &s.beta[i];
            b.rows_mut(i * k, k).copy_from(&(r / s.sigma2[i]));
        }
        Ok((CscMatrix::from(&coo), b))
    }

    /// Mean and (sparse) precision of `w | ·`.
    pub fn w_conditional(&self) -> Result<(DVector<f64>, CscMatrix<f64>)> {
        let (p, b) = self.w_precision()?;
        let mean = SparseCholesky::factor(&p)?.solve(&b);
        Ok((mean, p))
    }

    /// `σ_i² | · ~ IG(shape, rate)`.
    pub fn sigma2_conditional(&self, i: usize) -> ShapeRate {
        let ssr = self.residual(i).norm_squared();
        ShapeRate {
            shape: self.prior.a_sigma + self.data.k() as f64 / 2.0,
            rate: self.prior.b_sigma + ssr / 2.0,
        }
    }

    /// `τ_i | · ~ Gamma(shape, rate)`.
    pub fn tau_conditional(&self, i: usize) -> Result<ShapeRate> {
        let s = &self.state;
        let quad = if i == 0 {
            self.spatial_kernel(s.rho[0], s.w_block(0))?.1
        } else {
            self.spatial_kernel(s.rho[1], &self.conditional_residual())?.1
        };
        Ok(ShapeRate {
            shape: self.prior.a_tau + self.data.k() as f64 / 2.0,
            rate: self.prior.b_tau + quad / 2.0,
        })
    }

    pub fn eta_conditional(&self) -> Result<GaussianConditional> {
        let s = &self.state;
        let w1 = s.w_block(0);
        let w2 = DVector::from_column_slice(s.w_block(1));
        let mw1 = linalg::mat_vec(&self.adjacency, w1);
        let u = DMatrix::from_columns(&[DVector::from_column_slice(w1), mw1]);
        let q2 = self.precision(s.rho[1])?.dense();
        let q2u = &q2 * &u;
        let precision = u.transpose() * &q2u * s.tau[1] + DMatrix::identity(2, 2) / self.prior.eta_var;
        let shift = q2u.transpose() * w2 * s.tau[1];
        GaussianConditional::from_canonical(precision, shift)
    }

    /// Unnormalised log full conditional of `ρ_which` (0 or 1) on the `ρ`
    /// scale: `½ log det Q(ρ) - (τ/2) xᵀQ(ρ)x` with `x = w₁` or `x = r`.
    pub fn rho_log_density(&self, which: usize, rho: f64) -> Result<f64> {
        let s = &self.state;
        let (logdet, quad) = if which == 0 {
            self.spatial_kernel(rho, s.w_block(0))?
        } else {
            self.spatial_kernel(rho, &self.conditional_residual())?
        };
        Ok(0.5 * logdet - 0.5 * s.tau[which] * quad)
    }

    /// Metropolis target on `θ = logit(ρ)`.
    pub fn rho_log_target(&self, which: usize, theta: f64) -> Result<f64> {
        let rho = sigmoid(theta);
        Ok(self.rho_log_density(which, rho)? + (rho * (1.0 - rho)).ln())
    }

    pub fn update_beta(&mut self) -> Result<()> {
        for i in 0..2 {
            let cond = self.beta_conditional(i)?;
            self.state.beta[i] = cond.sample(&mut self.state.rng)?;
        }
        Ok(())
    }

    pub fn update_w(&mut self) -> Result<()> {
        let (p, b) = self.w_precision()?;
        match self.w_factor.as_mut() {
            Some(f) => f.refactor(&p)?,
            None => self.w_factor = Some(SparseCholesky::factor(&p)?),
        }
        let chol = self.w_factor.as_ref().expect("factor set above");
        let mean = chol.solve(&b);
        let z = DVector::from_fn(b.len(), |_, _| self.state.rng.sample::<f64, _>(StandardNormal));
        self.state.w = mean + chol.solve_lt(&z);
        Ok(())
    }

    pub fn update_sigma2(&mut self) -> Result<()> {
        for i in 0..2 {
            let cond = self.sigma2_conditional(i);
            let g = cond.sample_gamma(&mut self.state.rng)?;
            self.state.sigma2[i] = 1.0 / g;
        }
        Ok(())
    }

    pub fn update_tau(&mut self) -> Result<()> {
        for i in 0..2 {
            let cond = self.tau_conditional(i)?;
            self.state.tau[i] = cond.sample_gamma(&mut self.state.rng)?;
        }
        Ok(())
    }

    pub fn update_eta(&mut self) -> Result<()> {
        let cond = self.eta_conditional()?;
        let draw = cond.sample(&mut self.state.rng)?;
        self.state.eta = LinkingParams::new(draw[0], draw[1]);
        Ok(())
    }

    /// One random-walk Metropolis step for `ρ_which`; returns whether the
    /// proposal was accepted.
    pub fn update_rho(&mut self, which: usize) -> Result<bool> {
        let theta = logit(self.state.rho[which]);
        let z: f64 = self.state.rng.sample(StandardNormal);
        let proposal = theta + self.state.step[which] * z;
        let rho_new = sigmoid(proposal);
        let log_u = self.state.rng.random::<f64>().ln();
        // saturated proposals sit outside the prior support
        if !(rho_new > 0.0 && rho_new < 1.0) {
            return Ok(false);
        }
        let delta = self.rho_log_target(which, proposal)? - self.rho_log_target(which, theta)?;
        if log_u < delta {
            self.state.rho[which] = rho_new;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// A full scan `(β, w, σ², τ, η, ρ₁, ρ₂)`; returns the two acceptance flags.
    pub fn sweep(&mut self) -> Result<[bool; 2]> {
        self.update_beta()?;
        self.update_w()?;
        self.update_sigma2()?;
        self.update_tau()?;
        self.update_eta()?;
        Ok([self.update_rho(0)?, self.update_rho(1)?])
    }

    fn record(&self, chain: usize, iteration: usize) -> Draw {
        let s = &self.state;
        Draw {
            chain,
            iteration,
            beta: [s.beta[0].as_slice().to_vec(), s.beta[1].as_slice().to_vec()],
            w: s.w.as_slice().to_vec(),
            sigma2: s.sigma2,
            tau: s.tau,
            rho: s.rho,
            eta: [s.eta.eta0, s.eta.eta1],
        }
    }
}

struct ChainOutput {
    draws: Vec<Draw>,
    acceptance: [f64; 2],
}

fn run_chain(
    data: &Dataset,
    kind: PrecisionKind,
    prior: &PriorSpec,
    config: &McmcConfig,
    chain: usize,
) -> Result<ChainOutput> {
    let seed = config.seed.wrapping_add(chain as u64);
    let state = ChainState::initial(data, prior, seed, config.initial_step)?;
    let mut sampler = GibbsSampler::new(data, kind, *prior, state)?;
    let mut draws = Vec::with_capacity(config.retained_per_chain());
    let mut accepted = [0usize; 2];
    for t in 0..config.iterations {
        let flags = sampler.sweep().map_err(|e| Error::Chain {
            chain,
            iteration: t,
            message: e.to_string(),
            state: sampler.state.dump(),
        })?;
        if t < config.burn_in {
            if config.adapt {
                // Robbins-Monro on the log step size
                let gain = 1.0 / (t as f64 + 1.0).powf(0.6);
                for (i, &ok) in flags.iter().enumerate() {
                    let a = if ok { 1.0 } else { 0.0 };
                    let step = sampler.state.step[i] * (gain * (a - TARGET_ACCEPTANCE)).exp();
                    sampler.state.step[i] = step.clamp(1e-3, 50.0);
                }
            }
        } else {
            for (i, &ok) in flags.iter().enumerate() {
                accepted[i] += usize::from(ok);
            }
            if (t - config.burn_in).is_multiple_of(config.thin) {
                draws.push(sampler.record(chain, t));
            }
        }
    }
    let kept = (config.iterations - config.burn_in) as f64;
    Ok(ChainOutput {
        draws,
        acceptance: [accepted[0] as f64 / kept, accepted[1] as f64 / kept],
    })
}

/// Runs `config.n_chains` independent chains (seeds `seed`, `seed + 1`, ...)
/// concurrently and merges their retained draws in chain order.
pub fn run_mcmc(data: &Dataset, kind: PrecisionKind, prior: &PriorSpec, config: &McmcConfig) -> Result<PosteriorDraws> {
    prior.validate()?;
    config.validate()?;
    let outputs: Vec<Result<ChainOutput>> = if config.n_chains == 1 {
        vec![run_chain(data, kind, prior, config, 0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..config.n_chains)
                .map(|c| scope.spawn(move || run_chain(data, kind, prior, config, c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("chain thread panicked"))
                .collect()
        })
    };
    let mut draws = Vec::with_capacity(config.n_chains * config.retained_per_chain());
    let mut acceptance = Vec::with_capacity(config.n_chains);
    for out in outputs {
        let out = out?;
        draws.extend(out.draws);
        acceptance.push(out.acceptance);
    }
    Ok(PosteriorDraws {
        meta: DrawsMeta::new(data, kind, config),
        draws,
        acceptance,
    })
}
