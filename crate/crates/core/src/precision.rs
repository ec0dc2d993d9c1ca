//! Univariate spatial precision matrices: DAGAR and the proper-CAR comparator.
//!
//! For DAGAR with ordered neighbor sets `N(i)` and `n = |N(i)|`,
//!
//! ```text
//! b_ij = ρ / (1 + (n - 1) ρ²)      for j ∈ N(i)
//! f_ii = (1 + (n - 1) ρ²) / (1 - ρ²)
//! Q(ρ) = (I - B)ᵀ F (I - B)
//! ```
//!
//! `B` is strictly lower triangular in DAGAR position order, so
//! `log det Q = Σ log f_ii` without any factorization. The CAR comparator is
//! `Q = D - ρM` with `D` the degree matrix.
//!
//! All matrices returned here are indexed by region (graph input order).

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::OrderedRegionGraph;
use crate::linalg::{self, SparseCholesky};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionKind {
    Dagar,
    Car,
}

impl fmt::Display for PrecisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecisionKind::Dagar => "dagar",
            PrecisionKind::Car => "car",
        })
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must lie in [0, 1), got {rho}")));
    }
    Ok(())
}

/// The `B` and `F` factors of a DAGAR precision at a fixed `ρ`.
///
/// Stored per DAGAR position: every nonzero in row `i` of `B` shares the value
/// `b[i]`, so a row is just its parent list plus one coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct DagarComponents {
    rho: f64,
    order: Vec<usize>,
    parents: Vec<Vec<usize>>,
    b: Vec<f64>,
    f: Vec<f64>,
}

impl DagarComponents {
    pub fn new(graph: &OrderedRegionGraph, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        let sets = graph.neighbor_sets();
        let parents: Vec<Vec<usize>> = sets.iter().map(<[usize]>::to_vec).collect();
        let rho2 = rho * rho;
        let (b, f) = parents
            .iter()
            .map(|p| {
                let denom = 1.0 + (p.len() as f64 - 1.0) * rho2;
                let b = if p.is_empty() { 0.0 } else { rho / denom };
                (b, denom / (1.0 - rho2))
            })
            .unzip();
        Ok(Self {
            rho,
            order: graph.order().to_vec(),
            parents,
            b,
            f,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Diagonal of `F`, by DAGAR position.
    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Entry `b_ij` of `B` by DAGAR positions.
    pub fn b(&self, i: usize, j: usize) -> f64 {
        if self.parents[i].binary_search(&j).is_ok() {
            self.b[i]
        } else {
            0.0
        }
    }

    /// Parents `N(i)` of position `i`.
    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    /// Dense `B` in DAGAR position order.
    pub fn dense_b(&self) -> DMatrix<f64> {
        let k = self.len();
        DMatrix::from_fn(k, k, |i, j| self.b(i, j))
    }

    pub fn logdet(&self) -> f64 {
        self.f.iter().map(|f| f.ln()).sum()
    }

    /// `wᵀ Q w` for a region-indexed `w`, computed as `Σ f_ii (w_i - Σ_j b_ij w_j)²`.
    pub fn quad_form(&self, w: &[f64]) -> f64 {
        self.order
            .iter()
            .enumerate()
            .map(|(p, &r)| {
                let pull: f64 = self.parents[p].iter().map(|&q| w[self.order[q]]).sum();
                let e = w[r] - self.b[p] * pull;
                self.f[p] * e * e
            })
            .sum()
    }

    /// Assembles `Q = (I - B)ᵀ F (I - B)` in region indexing. Structural
    /// zeros at `ρ = 0` are kept so the pattern does not depend on `ρ`.
    pub fn precision_matrix(&self) -> CscMatrix<f64> {
        let k = self.len();
        let mut coo = CooMatrix::new(k, k);
        for (p, &r) in self.order.iter().enumerate() {
            let f = self.f[p];
            let row: Vec<(usize, f64)> = std::iter::once((r, 1.0))
                .chain(self.parents[p].iter().map(|&q| (self.order[q], -self.b[p])))
                .collect();
            for &(u, cu) in &row {
                for &(v, cv) in &row {
                    coo.push(u, v, f * cu * cv);
                }
            }
        }
        CscMatrix::from(&coo)
    }
}

/// Computes the DAGAR `B` and `F` factors for `graph` at `rho`.
pub fn build_bf(graph: &OrderedRegionGraph, rho: f64) -> Result<DagarComponents> {
    DagarComponents::new(graph, rho)
}

/// Sparse symmetric positive-definite precision with its log-determinant.
#[derive(Debug, Clone)]
pub struct SpatialPrecision {
    matrix: CscMatrix<f64>,
    logdet: f64,
    kind: PrecisionKind,
}

impl SpatialPrecision {
    pub fn matrix(&self) -> &CscMatrix<f64> {
        &self.matrix
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn kind(&self) -> PrecisionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        DMatrix::from(&self.matrix)
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        linalg::quad_form(&self.matrix, x)
    }

    pub fn cholesky(&self) -> Result<SparseCholesky> {
        SparseCholesky::factor(&self.matrix)
    }

    /// Matrix Market coordinate dump (lower triangle, symmetric, 1-based).
    pub fn to_matrix_market(&self) -> String {
        let k = self.dim();
        let mut entries: Vec<(usize, usize, f64)> = self
            .matrix
            .triplet_iter()
            .filter(|&(i, j, _)| i >= j)
            .map(|(i, j, &v)| (i, j, v))
            .collect();
        entries.sort_by_key(|&(i, j, _)| (j, i));
        let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(out, "% kind={}", self.kind);
        let _ = writeln!(out, "{k} {k} {}", entries.len());
        for (i, j, v) in entries {
            let _ = writeln!(out, "{} {} {v:e}", i + 1, j + 1);
        }
        out
    }
}

/// DAGAR precision `Q(ρ)`; its log-determinant is `Σ log f_ii`.
pub fn dagar_precision(graph: &OrderedRegionGraph, rho: f64) -> Result<SpatialPrecision> {
    let parts = build_bf(graph, rho)?;
    Ok(SpatialPrecision {
        matrix: parts.precision_matrix(),
        logdet: parts.logdet(),
        kind: PrecisionKind::Dagar,
    })
}

/// Proper CAR precision `D - ρM`. Every region needs at least one neighbor.
pub fn car_precision(graph: &OrderedRegionGraph, rho: f64) -> Result<SpatialPrecision> {
    check_rho(rho)?;
    let k = graph.len();
    if let Some(r) = (0..k).find(|&r| graph.degree(r) == 0) {
        return Err(Error::InvalidGraph(format!(
            "CAR precision needs every region to have a neighbor; {:?} is isolated",
            graph.region_ids()[r]
        )));
    }
    let mut coo = CooMatrix::new(k, k);
    for r in 0..k {
        coo.push(r, r, graph.degree(r) as f64);
    }
    for &(a, b) in graph.edges() {
        coo.push(a, b, -rho);
        coo.push(b, a, -rho);
    }
    let matrix = CscMatrix::from(&coo);
    let logdet = SparseCholesky::factor(&matrix)?.logdet();
    Ok(SpatialPrecision {
        matrix,
        logdet,
        kind: PrecisionKind::Car,
    })
}

pub fn spatial_precision(kind: PrecisionKind, graph: &OrderedRegionGraph, rho: f64) -> Result<SpatialPrecision> {
    match kind {
        PrecisionKind::Dagar => dagar_precision(graph, rho),
        PrecisionKind::Car => car_precision(graph, rho),
    }
}

/// Positive multiplier `τ` on a spatial precision.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GmrfScale(f64);

impl GmrfScale {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau.is_finite() {
            Ok(Self(tau))
        } else {
            Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")))
        }
    }

    pub fn tau(self) -> f64 {
        self.0
    }
}

/// Log density of `N(mean, (τQ)⁻¹)` at `w`.
pub fn gmrf_log_density(w: &[f64], scale: GmrfScale, prec: &SpatialPrecision, mean: &[f64]) -> Result<f64> {
    let k = prec.dim();
    for len in [w.len(), mean.len()] {
        if len != k {
            return Err(Error::Dimension {
                expected: k,
                found: len,
            });
        }
    }
    let diff: Vec<f64> = w.iter().zip(mean).map(|(a, b)| a - b).collect();
    let tau = scale.tau();
    let kf = k as f64;
    Ok(-0.5 * kf * LN_2PI + 0.5 * kf * tau.ln() + 0.5 * prec.logdet - 0.5 * tau * prec.quad_form(&diff))
}

/// Draws `mean + L⁻ᵀz / √τ` where `L Lᵀ = Q` and `z ~ N(0, I)`.
pub fn sample_gmrf<R: Rng + ?Sized>(
    scale: GmrfScale,
    prec: &SpatialPrecision,
    mean: &[f64],
    rng: &mut R,
) -> Result<DVector<f64>> {
    let chol = prec.cholesky()?;
    sample_with_factor(&chol, scale.tau(), mean, rng)
}

pub(crate) fn sample_with_factor<R: Rng + ?Sized>(
    chol: &SparseCholesky,
    tau: f64,
    mean: &[f64],
    rng: &mut R,
) -> Result<DVector<f64>> {
    let k = chol.dim();
    if mean.len() != k {
        return Err(Error::Dimension {
            expected: k,
            found: mean.len(),
        });
    }
    let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = chol.solve_lt(&z) / tau.sqrt();
    Ok(x + DVector::from_column_slice(mean))
}
