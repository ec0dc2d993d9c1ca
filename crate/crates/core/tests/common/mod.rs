//! Dense reference implementations shared by the integration tests. Nothing
//! here calls the crate's precision or sampler code.

#![allow(dead_code)]

use bdagar::graph::OrderedRegionGraph;
use bdagar::inference::{ChainState, Dataset, PriorSpec};
use bdagar::precision::PrecisionKind;
use nalgebra::{DMatrix, DVector};

pub mod consistency;

pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

pub fn dense_adjacency(g: &OrderedRegionGraph) -> DMatrix<f64> {
    let k = g.len();
    let mut m = DMatrix::zeros(k, k);
    for &(a, b) in g.edges() {
        m[(a, b)] = 1.0;
        m[(b, a)] = 1.0;
    }
    m
}

/// `(I - B)ᵀ F (I - B)` written out entry by entry from the ordering.
pub fn dense_dagar(g: &OrderedRegionGraph, rho: f64) -> DMatrix<f64> {
    let k = g.len();
    let pos = g.position();
    let mut b = DMatrix::zeros(k, k);
    let mut f = DMatrix::zeros(k, k);
    for i in 0..k {
        let parents: Vec<usize> = g.neighbors(i).iter().copied().filter(|&j| pos[j] < pos[i]).collect();
        let n = parents.len() as f64;
        let denom = 1.0 + (n - 1.0) * rho * rho;
        for &j in &parents {
            b[(i, j)] = rho / denom;
        }
        f[(i, i)] = denom / (1.0 - rho * rho);
    }
    let ib = DMatrix::identity(k, k) - b;
    ib.transpose() * f * ib
}

pub fn dense_car(g: &OrderedRegionGraph, rho: f64) -> DMatrix<f64> {
    let m = dense_adjacency(g);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(g.len(), m.row_iter().map(|r| r.sum())));
    d - m * rho
}

pub fn dense_q(kind: PrecisionKind, g: &OrderedRegionGraph, rho: f64) -> DMatrix<f64> {
    match kind {
        PrecisionKind::Dagar => dense_dagar(g, rho),
        PrecisionKind::Car => dense_car(g, rho),
    }
}

pub fn dense_link(g: &OrderedRegionGraph, eta0: f64, eta1: f64) -> DMatrix<f64> {
    DMatrix::identity(g.len(), g.len()) * eta0 + dense_adjacency(g) * eta1
}

pub fn dense_joint(q1: &DMatrix<f64>, q2: &DMatrix<f64>, a: &DMatrix<f64>, tau1: f64, tau2: f64) -> DMatrix<f64> {
    let k = q1.nrows();
    let mut out = DMatrix::zeros(2 * k, 2 * k);
    out.view_mut((0, 0), (k, k))
        .copy_from(&(q1 * tau1 + a.transpose() * q2 * a * tau2));
    out.view_mut((0, k), (k, k)).copy_from(&(-(a.transpose() * q2) * tau2));
    out.view_mut((k, 0), (k, k)).copy_from(&(-(q2 * a) * tau2));
    out.view_mut((k, k), (k, k)).copy_from(&(q2 * tau2));
    out
}

pub fn logdet(m: &DMatrix<f64>) -> f64 {
    let c = m.clone().cholesky().expect("positive definite");
    2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

pub fn ln_gamma(x: f64) -> f64 {
    // Stirling series with a shift; plenty for differences in tests
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + (x - 0.5) * x.ln() - x + 0.5 * LN_2PI + inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0
}

fn normal_ld(y: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln()) - 0.5 * (y - mean).powi(2) / var
}

/// Unnormalised joint log posterior of every unknown, from dense algebra.
pub fn log_posterior(data: &Dataset, kind: PrecisionKind, prior: &PriorSpec, s: &ChainState) -> f64 {
    let g = &data.graph;
    let k = data.k();
    let mut lp = 0.0;
    for i in 0..2 {
        let xb = &data.covariates[i] * &s.beta[i];
        for j in 0..k {
            lp += normal_ld(data.outcomes[i][j], xb[j] + s.w[i * k + j], s.sigma2[i]);
        }
        lp += s.beta[i]
            .iter()
            .map(|b| normal_ld(*b, 0.0, prior.beta_var))
            .sum::<f64>();
        let (a, b) = (prior.a_sigma, prior.b_sigma);
        lp += a * b.ln() - ln_gamma(a) - (a + 1.0) * s.sigma2[i].ln() - b / s.sigma2[i];
        let (a, b) = (prior.a_tau, prior.b_tau);
        lp += a * b.ln() - ln_gamma(a) + (a - 1.0) * s.tau[i].ln() - b * s.tau[i];
    }
    lp += normal_ld(s.eta.eta0, 0.0, prior.eta_var) + normal_ld(s.eta.eta1, 0.0, prior.eta_var);
    let q1 = dense_q(kind, g, s.rho[0]);
    let q2 = dense_q(kind, g, s.rho[1]);
    let qw = dense_joint(&q1, &q2, &dense_link(g, s.eta.eta0, s.eta.eta1), s.tau[0], s.tau[1]);
    lp += -(k as f64) * LN_2PI + 0.5 * logdet(&qw) - 0.5 * s.w.dot(&(&qw * &s.w));
    lp
}

/// Dataset with an intercept plus `extra` standard-normal-ish covariates
/// per disease, filled deterministically from `seed`.
pub fn toy_dataset(graph: OrderedRegionGraph, extra: usize, seed: u64) -> Dataset {
    let k = graph.len();
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let mut xs = Vec::new();
    let mut names = Vec::new();
    for i in 0..2 {
        let x = DMatrix::from_fn(k, extra + 1, |_, c| if c == 0 { 1.0 } else { next() });
        xs.push(x);
        let mut n = vec!["intercept".to_string()];
        n.extend((1..=extra).map(|c| format!("d{}_x{c}", i + 1)));
        names.push(n);
    }
    let y1 = DVector::from_fn(k, |_, _| 2.0 * next());
    let y2 = DVector::from_fn(k, |_, _| 1.0 + 2.0 * next());
    let [x1, x2]: [DMatrix<f64>; 2] = xs.try_into().unwrap();
    let [n1, n2]: [Vec<String>; 2] = names.try_into().unwrap();
    Dataset::new(graph, ["d1".into(), "d2".into()], [y1, y2], [x1, x2], [n1, n2]).unwrap()
}
