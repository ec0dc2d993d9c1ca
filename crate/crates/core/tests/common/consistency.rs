//! Full conditionals checked against differences of the dense joint log
//! posterior.

use bdagar::bivariate::LinkingParams;
use bdagar::graph::OrderedRegionGraph;
use bdagar::inference::{ChainState, Dataset, GibbsSampler, PriorSpec};
use bdagar::precision::PrecisionKind;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{log_posterior, toy_dataset};

/// Largest absolute discrepancies found: `(conjugate blocks, ρ targets)`.
#[derive(Debug, Default, Clone, Copy)]
pub struct Discrepancy {
    pub conjugate: f64,
    pub rho: f64,
    pub checks: usize,
}

fn random_state(data: &Dataset, rng: &mut ChaCha8Rng) -> ChainState {
    let k = data.k();
    let mut s = ChainState::initial(data, &PriorSpec::default(), 0, [1.0, 1.0]).unwrap();
    for i in 0..2 {
        s.beta[i] = DVector::from_fn(data.p(i), |_, _| rng.random_range(-2.0..2.0));
        s.sigma2[i] = rng.random_range(0.2..3.0);
        s.tau[i] = rng.random_range(0.3..5.0);
        s.rho[i] = rng.random_range(0.05..0.95);
    }
    s.w = DVector::from_fn(2 * k, |_, _| rng.random_range(-1.5..1.5));
    s.eta = LinkingParams::new(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5));
    s
}

fn gaussian_ld(mean: &DVector<f64>, precision: &nalgebra::DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let d = x - mean;
    -0.5 * d.dot(&(precision * &d))
}

/// Runs `states` random state pairs per block on a 2×3 grid with two
/// covariates per disease.
pub fn check(kind: PrecisionKind, states: usize, seed: u64) -> Discrepancy {
    let data = toy_dataset(OrderedRegionGraph::grid(2, 3).unwrap(), 2, seed);
    let prior = PriorSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Discrepancy::default();
    let record = |slot: &mut f64, cond: f64, joint: f64| {
        *slot = slot.max((cond - joint).abs());
    };
    for _ in 0..states {
        let base = random_state(&data, &mut rng);
        let sampler = GibbsSampler::new(&data, kind, prior, base.clone()).unwrap();
        let lp = |s: &ChainState| log_posterior(&data, kind, &prior, s);
        let (mut a, mut b) = (base.clone(), base.clone());
        let other = random_state(&data, &mut rng);

        // β_i
        for i in 0..2 {
            let c = sampler.beta_conditional(i).unwrap();
            let (mut sa, mut sb) = (base.clone(), base.clone());
            sa.beta[i] = other.beta[i].clone();
            sb.beta[i] = &c.mean + DVector::from_element(c.mean.len(), 0.3);
            record(
                &mut out.conjugate,
                c.log_density(&sa.beta[i]) - c.log_density(&sb.beta[i]),
                lp(&sa) - lp(&sb),
            );
            out.checks += 1;
        }

        // w
        let (mean, p) = sampler.w_conditional().unwrap();
        let p = nalgebra::DMatrix::from(&p);
        a.w = other.w.clone();
        b.w = mean.map(|v| v * 0.5 + 0.1);
        record(
            &mut out.conjugate,
            gaussian_ld(&mean, &p, &a.w) - gaussian_ld(&mean, &p, &b.w),
            lp(&a) - lp(&b),
        );
        out.checks += 1;

        // σ_i², τ_i
        for i in 0..2 {
            let c = sampler.sigma2_conditional(i);
            let (mut sa, mut sb) = (base.clone(), base.clone());
            sa.sigma2[i] = other.sigma2[i];
            sb.sigma2[i] = other.sigma2[i] * 1.7 + 0.05;
            record(
                &mut out.conjugate,
                c.inv_gamma_log_density(sa.sigma2[i]) - c.inv_gamma_log_density(sb.sigma2[i]),
                lp(&sa) - lp(&sb),
            );

            let c = sampler.tau_conditional(i).unwrap();
            let (mut sa, mut sb) = (base.clone(), base.clone());
            sa.tau[i] = other.tau[i];
            sb.tau[i] = other.tau[i] * 0.6 + 0.2;
            record(
                &mut out.conjugate,
                c.gamma_log_density(sa.tau[i]) - c.gamma_log_density(sb.tau[i]),
                lp(&sa) - lp(&sb),
            );
            out.checks += 2;
        }

        // η
        let c = sampler.eta_conditional().unwrap();
        let (mut sa, mut sb) = (base.clone(), base.clone());
        sa.eta = other.eta;
        sb.eta = LinkingParams::new(c.mean[0] - 0.4, c.mean[1] + 0.2);
        let v = |e: LinkingParams| DVector::from_vec(vec![e.eta0, e.eta1]);
        record(
            &mut out.conjugate,
            c.log_density(&v(sa.eta)) - c.log_density(&v(sb.eta)),
            lp(&sa) - lp(&sb),
        );
        out.checks += 1;

        // ρ_i, on both scales
        for i in 0..2 {
            let (mut sa, mut sb) = (base.clone(), base.clone());
            sa.rho[i] = other.rho[i];
            sb.rho[i] = rng.random_range(0.01..0.99);
            let joint = lp(&sa) - lp(&sb);
            let cond = sampler.rho_log_density(i, sa.rho[i]).unwrap() - sampler.rho_log_density(i, sb.rho[i]).unwrap();
            record(&mut out.rho, cond, joint);
            let logit = |r: f64| (r / (1.0 - r)).ln();
            let jac = |r: f64| (r * (1.0 - r)).ln();
            let cond = sampler.rho_log_target(i, logit(sa.rho[i])).unwrap()
                - sampler.rho_log_target(i, logit(sb.rho[i])).unwrap();
            record(&mut out.rho, cond, joint + jac(sa.rho[i]) - jac(sb.rho[i]));
            out.checks += 2;
        }
    }
    out
}
