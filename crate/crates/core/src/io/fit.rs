use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bivariate::{cross_correlation_map, BdagarSpec, LinkingParams};
use crate::error::{Error, Result};
use crate::graph::OrderedRegionGraph;
use crate::inference::{run_mcmc, summarize, summarize_values, Dataset, DrawsMeta, PosteriorDraws, Summary};
use crate::io::config::RunConfig;
use crate::io::export::RegionValue;
use crate::waic::{pointwise_log_lik, waic, WaicReport};

/// Region ids and edges of the fitted graph, in file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEcho {
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl GraphEcho {
    pub fn from_graph(graph: &OrderedRegionGraph) -> Self {
        let ids = graph.region_ids();
        Self {
            nodes: ids.to_vec(),
            edges: graph
                .edges()
                .iter()
                .map(|&(a, b)| [ids[a].clone(), ids[b].clone()])
                .collect(),
        }
    }

    /// Rebuilds the graph with the given DAGAR order.
    pub fn to_graph(&self, vertex_order: &[String]) -> Result<OrderedRegionGraph> {
        let g = OrderedRegionGraph::new(self.nodes.clone(), Vec::new())?;
        let mut edges = Vec::with_capacity(self.edges.len());
        for [a, b] in &self.edges {
            let idx = |id: &String| {
                g.index_of(id)
                    .ok_or_else(|| Error::InvalidGraph(format!("edge endpoint {id:?} is not a node")))
            };
            edges.push((idx(a)?, idx(b)?));
        }
        OrderedRegionGraph::new(self.nodes.clone(), edges)?.reorder(vertex_order)
    }
}

/// `config_echo.json`: the fully resolved configuration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub label: String,
    pub config: RunConfig,
    pub meta: DrawsMeta,
    pub graph: GraphEcho,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub echo: ConfigEcho,
    pub draws: PosteriorDraws,
    pub summary: Summary,
    pub waic: WaicReport,
}

/// Runs the sampler and computes summaries and WAIC.
///
/// The dataset already carries the disease order, covariates and vertex
/// order; the echoed configuration is `config` with those filled in.
pub fn fit(data: &Dataset, config: &RunConfig) -> Result<FitOutput> {
    config.validate()?;
    let draws = run_mcmc(data, config.model.kind(), &config.prior, &config.mcmc)?;
    let summary = summarize(&draws)?;
    let waic = waic(&pointwise_log_lik(&draws, data)?)?;
    let mut resolved = config.clone();
    resolved.disease_order = Some(data.disease_names.clone());
    resolved.vertex_order = Some(data.graph.ordered_ids());
    resolved.covariates = data
        .disease_names
        .iter()
        .zip(&data.covariate_names)
        .map(|(d, names)| (d.clone(), names[1..].to_vec()))
        .collect();
    let echo = ConfigEcho {
        label: config.label(&data.disease_names),
        config: resolved,
        meta: draws.meta.clone(),
        graph: GraphEcho::from_graph(&data.graph),
    };
    Ok(FitOutput {
        echo,
        draws,
        summary,
        waic,
    })
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(file))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct AcceptanceFile {
    per_chain: Vec<[f64; 2]>,
    mean: [f64; 2],
}

/// Writes `draws.csv`, `summary.csv`, `waic.json`, `config_echo.json` and
/// `acceptance.json` into `dir`, creating it if needed.
pub fn write_fit_dir(dir: impl AsRef<Path>, fit: &FitOutput) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    fit.draws.write_csv(create(&dir.join("draws.csv"))?)?;
    fit.summary.write_csv(create(&dir.join("summary.csv"))?)?;
    let waic_path = dir.join("waic.json");
    std::fs::write(&waic_path, fit.waic.to_json()).map_err(|e| Error::io(&waic_path, e))?;
    write_json(&dir.join("config_echo.json"), &fit.echo)?;
    write_json(
        &dir.join("acceptance.json"),
        &AcceptanceFile {
            per_chain: fit.draws.acceptance.clone(),
            mean: fit.draws.mean_acceptance(),
        },
    )
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Everything a later command needs from a fit directory.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDir {
    pub echo: ConfigEcho,
    pub draws: PosteriorDraws,
    pub waic: WaicReport,
}

pub fn read_fit_dir(dir: impl AsRef<Path>) -> Result<FitDir> {
    let dir = dir.as_ref();
    let echo: ConfigEcho = read_json(&dir.join("config_echo.json"))?;
    let waic: WaicReport = read_json(&dir.join("waic.json"))?;
    let draws_path = dir.join("draws.csv");
    let file = std::fs::File::open(&draws_path).map_err(|e| Error::io(&draws_path, e))?;
    let mut draws = PosteriorDraws::read_csv(echo.meta.clone(), std::io::BufReader::new(file))?;
    if let Ok(acc) = read_json::<AcceptanceFile>(&dir.join("acceptance.json")) {
        draws.acceptance = acc.per_chain;
    }
    Ok(FitDir { echo, draws, waic })
}

/// Posterior mean and 95% interval of the per-region correlation between
/// the two latent effects, computed for every draw and then summarised.
pub fn correlation_map(draws: &PosteriorDraws, graph: &OrderedRegionGraph) -> Result<Vec<RegionValue>> {
    let meta = &draws.meta;
    if graph.region_ids() != meta.regions.as_slice() || graph.ordered_ids() != meta.vertex_order {
        return Err(Error::Data(
            "graph does not match the regions and order of the draws".into(),
        ));
    }
    let k = graph.len();
    let mut per_region: Vec<Vec<f64>> = vec![Vec::with_capacity(draws.len()); k];
    for d in &draws.draws {
        let spec = BdagarSpec {
            graph: graph.clone(),
            kind: meta.kind,
            rho1: d.rho[0],
            rho2: d.rho[1],
            tau1: d.tau[0],
            tau2: d.tau[1],
            link: LinkingParams::new(d.eta[0], d.eta[1]),
        };
        for (j, c) in cross_correlation_map(&spec)?.into_iter().enumerate() {
            per_region[j].push(c);
        }
    }
    per_region
        .iter()
        .zip(graph.region_ids())
        .map(|(values, id)| {
            let s = summarize_values(id, values)?;
            Ok(RegionValue {
                region: id.clone(),
                mean: s.mean,
                lo: s.lo,
                hi: s.hi,
            })
        })
        .collect()
}

/// Posterior summary of the latent effect `w_i` per region (`disease` 0 or 1).
pub fn latent_map(draws: &PosteriorDraws, disease: usize) -> Result<Vec<RegionValue>> {
    if disease > 1 {
        return Err(Error::InvalidParameter(format!(
            "disease index must be 0 or 1, got {disease}"
        )));
    }
    let k = draws.meta.k();
    (0..k)
        .map(|j| {
            let values: Vec<f64> = draws.draws.iter().map(|d| d.w[disease * k + j]).collect();
            let id = &draws.meta.regions[j];
            let s = summarize_values(id, &values)?;
            Ok(RegionValue {
                region: id.clone(),
                mean: s.mean,
                lo: s.lo,
                hi: s.hi,
            })
        })
        .collect()
}
