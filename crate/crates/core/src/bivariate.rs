//! The bivariate model: `w₁ ~ N(0, τ₁Q₁)` and `w₂ | w₁ ~ N(A₂₁w₁, τ₂Q₂)`
//! (precision parametrization) with linking matrix `A₂₁ = η₀I + η₁M`.
//!
//! Multiplying the two conditionals out gives the joint precision
//!
//! ```text
//! Q_w = [ τ₁Q₁ + τ₂A₂₁ᵀQ₂A₂₁   -τ₂A₂₁ᵀQ₂ ]
//!       [ -τ₂Q₂A₂₁              τ₂Q₂     ]
//! ```
//!
//! whose inverse has the blocks computed by [`joint_covariance`]. The
//! off-diagonal blocks are negative; with positive signs the product with the
//! covariance is not the identity (already visible at k = 1).

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::OrderedRegionGraph;
use crate::linalg::SparseCholesky;
use crate::precision::{check_rho, sample_with_factor, spatial_precision, PrecisionKind, SpatialPrecision};

/// Coefficients of `A₂₁ = η₀I + η₁M`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkingParams {
    pub eta0: f64,
    pub eta1: f64,
}

impl LinkingParams {
    pub fn new(eta0: f64, eta1: f64) -> Self {
        Self { eta0, eta1 }
    }
}

/// `A₂₁ = η₀I + η₁M`, region-indexed. The diagonal and every adjacency slot
/// are stored even when zero.
pub fn linking_matrix(link: LinkingParams, graph: &OrderedRegionGraph) -> CscMatrix<f64> {
    let k = graph.len();
    let mut coo = CooMatrix::new(k, k);
    for r in 0..k {
        coo.push(r, r, link.eta0);
    }
    for &(a, b) in graph.edges() {
        coo.push(a, b, link.eta1);
        coo.push(b, a, link.eta1);
    }
    CscMatrix::from(&coo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BdagarSpec {
    pub graph: OrderedRegionGraph,
    pub kind: PrecisionKind,
    pub rho1: f64,
    pub rho2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub link: LinkingParams,
}

impl BdagarSpec {
    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho1)?;
        check_rho(self.rho2)?;
        for (name, tau) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {tau}")));
            }
        }
        if !(self.link.eta0.is_finite() && self.link.eta1.is_finite()) {
            return Err(Error::InvalidParameter("eta must be finite".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.graph.len()
    }

    /// `(Q₁(ρ₁), Q₂(ρ₂))` of the configured kind.
    pub fn marginal_precisions(&self) -> Result<(SpatialPrecision, SpatialPrecision)> {
        self.validate()?;
        Ok((
            spatial_precision(self.kind, &self.graph, self.rho1)?,
            spatial_precision(self.kind, &self.graph, self.rho2)?,
        ))
    }
}

/// Assembles the 2k×2k joint precision from its ingredients.
pub(crate) fn assemble_joint(
    q1: &CscMatrix<f64>,
    q2: &CscMatrix<f64>,
    a: &CscMatrix<f64>,
    tau1: f64,
    tau2: f64,
) -> CooMatrix<f64> {
    let k = q1.nrows();
    let q2a = q2 * a;
    let at_q2a = &a.transpose() * &q2a;
    let mut coo = CooMatrix::new(2 * k, 2 * k);
    for (i, j, &v) in q1.triplet_iter() {
        coo.push(i, j, tau1 * v);
    }
    for (i, j, &v) in at_q2a.triplet_iter() {
        coo.push(i, j, tau2 * v);
    }
    for (i, j, &v) in q2a.triplet_iter() {
        // lower-left block -τ₂Q₂A and its transpose in the upper right
        coo.push(k + i, j, -tau2 * v);
        coo.push(j, k + i, -tau2 * v);
    }
    for (i, j, &v) in q2.triplet_iter() {
        coo.push(k + i, k + j, tau2 * v);
    }
    coo
}

/// Joint Gaussian of `w = (w₁ᵀ, w₂ᵀ)ᵀ`.
#[derive(Debug, Clone)]
pub struct JointGaussian {
    precision: CscMatrix<f64>,
    logdet: f64,
    spec: BdagarSpec,
}

impl JointGaussian {
    pub fn precision(&self) -> &CscMatrix<f64> {
        &self.precision
    }

    /// `log det Q_w = k log τ₁ + log det Q₁ + k log τ₂ + log det Q₂`.
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn dense_precision(&self) -> DMatrix<f64> {
        DMatrix::from(&self.precision)
    }

    pub fn covariance_blocks(&self) -> Result<CovarianceBlocks> {
        joint_covariance(&self.spec)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<f64>> {
        let chol = SparseCholesky::factor(&self.precision)?;
        sample_with_factor(&chol, 1.0, &vec![0.0; 2 * self.spec.k()], rng)
    }

    /// Draws `n` vectors reusing one factorization.
    pub fn sample_many<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<DVector<f64>>> {
        let chol = SparseCholesky::factor(&self.precision)?;
        let zero = vec![0.0; 2 * self.spec.k()];
        (0..n).map(|_| sample_with_factor(&chol, 1.0, &zero, rng)).collect()
    }
}

pub fn joint_precision(spec: &BdagarSpec) -> Result<JointGaussian> {
    let (q1, q2) = spec.marginal_precisions()?;
    let a = linking_matrix(spec.link, &spec.graph);
    let precision = CscMatrix::from(&assemble_joint(q1.matrix(), q2.matrix(), &a, spec.tau1, spec.tau2));
    if SparseCholesky::factor(&precision).is_err() {
        return Err(Error::Factorization(
            "internal error: assembled joint precision is not positive definite".into(),
        ));
    }
    let k = spec.k() as f64;
    let logdet = k * spec.tau1.ln() + q1.logdet() + k * spec.tau2.ln() + q2.logdet();
    Ok(JointGaussian {
        precision,
        logdet,
        spec: spec.clone(),
    })
}

/// The four k×k blocks of `Q_w⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBlocks {
    pub c11: DMatrix<f64>,
    pub c12: DMatrix<f64>,
    pub c21: DMatrix<f64>,
    pub c22: DMatrix<f64>,
}

impl CovarianceBlocks {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let k = self.c11.nrows();
        let mut out = DMatrix::zeros(2 * k, 2 * k);
        out.view_mut((0, 0), (k, k)).copy_from(&self.c11);
        out.view_mut((0, k), (k, k)).copy_from(&self.c12);
        out.view_mut((k, 0), (k, k)).copy_from(&self.c21);
        out.view_mut((k, k), (k, k)).copy_from(&self.c22);
        out
    }
}

/// Covariance blocks from triangular solves against the factors of `Q₁`, `Q₂`:
///
/// ```text
/// C₁₁ = Q₁⁻¹/τ₁,  C₁₂ = Q₁⁻¹A₂₁ᵀ/τ₁,  C₂₁ = C₁₂ᵀ,  C₂₂ = A₂₁Q₁⁻¹A₂₁ᵀ/τ₁ + Q₂⁻¹/τ₂
/// ```
pub fn joint_covariance(spec: &BdagarSpec) -> Result<CovarianceBlocks> {
    let (q1, q2) = spec.marginal_precisions()?;
    let s1 = q1.cholesky()?.inverse();
    let s2 = q2.cholesky()?.inverse();
    let a = DMatrix::from(&linking_matrix(spec.link, &spec.graph));
    let c11 = &s1 / spec.tau1;
    let c12 = &c11 * a.transpose();
    let c21 = c12.transpose();
    let c22 = &a * &c12 + s2 / spec.tau2;
    Ok(CovarianceBlocks { c11, c12, c21, c22 })
}

/// Per-region correlation between `w₁ⱼ` and `w₂ⱼ`.
pub fn cross_correlation_map(spec: &BdagarSpec) -> Result<Vec<f64>> {
    let c = joint_covariance(spec)?;
    Ok((0..spec.k())
        .map(|j| {
            let denom = (c.c11[(j, j)] * c.c22[(j, j)]).sqrt();
            (c.c12[(j, j)] / denom).clamp(-1.0, 1.0)
        })
        .collect())
}
