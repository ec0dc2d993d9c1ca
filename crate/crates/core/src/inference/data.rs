use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::OrderedRegionGraph;

/// Outcomes and covariates for two diseases over the regions of one graph.
///
/// Rows follow the graph's region indexing. Disease 0 is the one modelled
/// marginally; disease 1 is modelled conditionally on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: OrderedRegionGraph,
    pub disease_names: [String; 2],
    pub outcomes: [DVector<f64>; 2],
    /// `k × p_i` design matrices; the first column is the intercept.
    pub covariates: [DMatrix<f64>; 2],
    /// Column names matching `covariates`, starting with `"intercept"`.
    pub covariate_names: [Vec<String>; 2],
}

impl Dataset {
    pub fn new(
        graph: OrderedRegionGraph,
        disease_names: [String; 2],
        outcomes: [DVector<f64>; 2],
        covariates: [DMatrix<f64>; 2],
        covariate_names: [Vec<String>; 2],
    ) -> Result<Self> {
        let k = graph.len();
        if disease_names[0] == disease_names[1] {
            return Err(Error::Data(format!(
                "disease names must differ, both are {:?}",
                disease_names[0]
            )));
        }
        for i in 0..2 {
            let name = &disease_names[i];
            if outcomes[i].len() != k {
                return Err(Error::Data(format!(
                    "{name}: {} outcomes for {k} regions",
                    outcomes[i].len()
                )));
            }
            let x = &covariates[i];
            if x.nrows() != k || x.ncols() == 0 {
                return Err(Error::Data(format!(
                    "{name}: design matrix is {}x{}, expected {k} rows and at least one column",
                    x.nrows(),
                    x.ncols()
                )));
            }
            if covariate_names[i].len() != x.ncols() {
                return Err(Error::Data(format!(
                    "{name}: covariate names do not match design columns"
                )));
            }
            if outcomes[i].iter().chain(x.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "{name}: non-finite value in outcomes or covariates"
                )));
            }
        }
        Ok(Self {
            graph,
            disease_names,
            outcomes,
            covariates,
            covariate_names,
        })
    }

    pub fn k(&self) -> usize {
        self.graph.len()
    }

    pub fn p(&self, disease: usize) -> usize {
        self.covariates[disease].ncols()
    }

    /// The same data with the disease order reversed.
    pub fn swapped(&self) -> Self {
        let [d0, d1] = self.disease_names.clone();
        let [y0, y1] = self.outcomes.clone();
        let [x0, x1] = self.covariates.clone();
        let [n0, n1] = self.covariate_names.clone();
        Self {
            graph: self.graph.clone(),
            disease_names: [d1, d0],
            outcomes: [y1, y0],
            covariates: [x1, x0],
            covariate_names: [n1, n0],
        }
    }
}
