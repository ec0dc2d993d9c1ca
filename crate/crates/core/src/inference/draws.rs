use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::data::Dataset;
use crate::inference::sampler::McmcConfig;
use crate::precision::PrecisionKind;

/// Everything needed to interpret a draws table without the original run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawsMeta {
    pub kind: PrecisionKind,
    pub seed: u64,
    pub disease_names: [String; 2],
    pub regions: Vec<String>,
    /// Region ids in DAGAR order.
    pub vertex_order: Vec<String>,
    pub covariate_names: [Vec<String>; 2],
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub n_chains: usize,
}

impl DrawsMeta {
    pub fn new(data: &Dataset, kind: PrecisionKind, config: &McmcConfig) -> Self {
        Self {
            kind,
            seed: config.seed,
            disease_names: data.disease_names.clone(),
            regions: data.graph.region_ids().to_vec(),
            vertex_order: data.graph.ordered_ids(),
            covariate_names: data.covariate_names.clone(),
            iterations: config.iterations,
            burn_in: config.burn_in,
            thin: config.thin,
            n_chains: config.n_chains,
        }
    }

    pub fn k(&self) -> usize {
        self.regions.len()
    }

    /// Column names of one draws row, in storage order.
    pub fn parameter_names(&self) -> Vec<String> {
        let mut names = self.scalar_parameter_names();
        for i in 1..=2 {
            names.extend(self.regions.iter().map(|r| format!("w{i}_{r}")));
        }
        names
    }

    /// Every parameter except the latent `w`.
    pub fn scalar_parameter_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for i in 0..2 {
            names.extend(self.covariate_names[i].iter().map(|c| format!("beta{}_{c}", i + 1)));
        }
        names.extend(
            ["sigma2_1", "sigma2_2", "tau1", "tau2", "rho1", "rho2", "eta0", "eta1"]
                .iter()
                .map(|s| s.to_string()),
        );
        names
    }
}

/// One retained MCMC iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub chain: usize,
    pub iteration: usize,
    pub beta: [Vec<f64>; 2],
    pub w: Vec<f64>,
    pub sigma2: [f64; 2],
    pub tau: [f64; 2],
    pub rho: [f64; 2],
    pub eta: [f64; 2],
}

impl Draw {
    /// Values in [`DrawsMeta::parameter_names`] order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.beta[0].len() + self.beta[1].len() + 8 + self.w.len());
        v.extend_from_slice(&self.beta[0]);
        v.extend_from_slice(&self.beta[1]);
        v.extend_from_slice(&self.sigma2);
        v.extend_from_slice(&self.tau);
        v.extend_from_slice(&self.rho);
        v.extend_from_slice(&self.eta);
        v.extend_from_slice(&self.w);
        v
    }

    fn from_values(meta: &DrawsMeta, chain: usize, iteration: usize, v: &[f64]) -> Self {
        let p0 = meta.covariate_names[0].len();
        let p1 = meta.covariate_names[1].len();
        let mut at = 0;
        let mut take = |n: usize| {
            let s = &v[at..at + n];
            at += n;
            s
        };
        let beta = [take(p0).to_vec(), take(p1).to_vec()];
        let pair = |s: &[f64]| [s[0], s[1]];
        let sigma2 = pair(take(2));
        let tau = pair(take(2));
        let rho = pair(take(2));
        let eta = pair(take(2));
        let w = take(2 * meta.k()).to_vec();
        Self {
            chain,
            iteration,
            beta,
            w,
            sigma2,
            tau,
            rho,
            eta,
        }
    }
}

/// Retained draws of all chains, concatenated in chain order.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub meta: DrawsMeta,
    pub draws: Vec<Draw>,
    /// Post-burn-in `ρ` acceptance rates per chain.
    pub acceptance: Vec<[f64; 2]>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.meta.parameter_names()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.parameter_names().iter().position(|n| n == name)?;
        Some(self.draws.iter().map(|d| d.values()[idx]).collect())
    }

    /// Values of one parameter split by chain.
    pub fn chains(&self, name: &str) -> Option<Vec<Vec<f64>>> {
        let idx = self.parameter_names().iter().position(|n| n == name)?;
        let mut out: Vec<Vec<f64>> = vec![Vec::new(); self.meta.n_chains.max(1)];
        for d in &self.draws {
            if d.chain >= out.len() {
                out.resize(d.chain + 1, Vec::new());
            }
            out[d.chain].push(d.values()[idx]);
        }
        out.retain(|c| !c.is_empty());
        Some(out)
    }

    /// Mean acceptance rate over chains for `ρ₁`, `ρ₂`.
    pub fn mean_acceptance(&self) -> [f64; 2] {
        let n = self.acceptance.len().max(1) as f64;
        let mut out = [0.0; 2];
        for a in &self.acceptance {
            out[0] += a[0] / n;
            out[1] += a[1] / n;
        }
        out
    }

    /// CSV with columns `chain,iteration,<parameters...>` and full-precision
    /// (shortest round-trip) floats.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["chain".to_string(), "iteration".to_string()];
        header.extend(self.parameter_names());
        wtr.write_record(&header)?;
        for d in &self.draws {
            let mut row = vec![d.chain.to_string(), d.iteration.to_string()];
            row.extend(d.values().iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(|e| Error::io("draws.csv", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads a table written by [`write_csv`](Self::write_csv). Acceptance
    /// rates are not part of the table.
    pub fn read_csv<R: Read>(meta: DrawsMeta, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let expected = meta.parameter_names();
        let header = rdr.headers()?.clone();
        let found: Vec<&str> = header.iter().skip(2).collect();
        if header.len() < 2 || &header[0] != "chain" || &header[1] != "iteration" || found != expected {
            return Err(Error::Data(
                "draws header does not match the recorded parameters".into(),
            ));
        }
        let mut draws = Vec::new();
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Data(format!("draws row {}: bad {what}", n + 1));
            let chain = rec[0].parse().map_err(|_| bad("chain"))?;
            let iteration = rec[1].parse().map_err(|_| bad("iteration"))?;
            let values = rec
                .iter()
                .skip(2)
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("value"))?;
            if values.len() != expected.len() {
                return Err(bad("row length"));
            }
            draws.push(Draw::from_values(&meta, chain, iteration, &values));
        }
        Ok(Self {
            meta,
            draws,
            acceptance: Vec::new(),
        })
    }
}
