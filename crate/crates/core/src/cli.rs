//! The `bdagar` command line: `simulate`, `fit`, `waic`, `corr-map`,
//! `export-map` and `check`.
//!
//! Exit status is 0 on success, 1 for invalid input or usage, 2 when a
//! numerical or I/O step fails at run time.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::OrderedRegionGraph;
use crate::io::{
    correlation_map, export_choropleth, export_values_csv, fit, load_dataset, read_fit_dir, read_values_csv,
    simulate_dataset, write_dataset_csv, write_fit_dir, ModelChoice, RunConfig, SimulationTruth,
};
use crate::precision::{spatial_precision, PrecisionKind};
use crate::waic::compare;

#[derive(Debug, Parser)]
#[command(name = "bdagar", version, about = "Bivariate DAGAR disease mapping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Dagar,
    Car,
}

impl From<KindArg> for PrecisionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Dagar => PrecisionKind::Dagar,
            KindArg::Car => PrecisionKind::Car,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a synthetic dataset from known parameters.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        /// JSON with beta1, beta2, sigma2, tau, rho, eta and seed.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the truth including the drawn w
        /// (default: `<out>.truth.json`).
        #[arg(long)]
        truth_out: Option<PathBuf>,
    },
    /// Fit the joint model and write a fit directory.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        model: Option<ModelChoice>,
        /// Disease order as `first,second`; the second is conditioned on the first.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Compare fits by WAIC.
    Waic {
        #[arg(required = true)]
        fits: Vec<PathBuf>,
        /// Also write the comparison as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Per-region posterior correlation between the two latent effects.
    CorrMap {
        fit: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Join a region,mean,lo,hi CSV onto GeoJSON features.
    ExportMap {
        #[arg(long)]
        values: PathBuf,
        #[arg(long)]
        geojson: PathBuf,
        #[arg(long)]
        id_property: String,
        #[arg(long)]
        field: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a precision matrix and report its basic properties.
    Check {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long, value_enum, default_value = "dagar")]
        kind: KindArg,
        /// Write the matrix in Matrix Market format.
        #[arg(long)]
        matrix_market: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            graph,
            truth,
            out,
            truth_out,
        } => simulate(&graph, &truth, &out, truth_out),
        Command::Fit {
            data,
            graph,
            config,
            out,
            model,
            order,
            seed,
            iterations,
            burn_in,
            thin,
            chains,
        } => {
            let mut cfg = match config {
                Some(path) => RunConfig::from_file(path)?,
                None => RunConfig::default(),
            };
            if let Some(m) = model {
                cfg.model = m;
            }
            if let Some(o) = order {
                let [a, b]: [String; 2] = o
                    .try_into()
                    .map_err(|_| Error::Config("--order takes exactly two disease names".into()))?;
                cfg.disease_order = Some([a, b]);
            }
            let mc = &mut cfg.mcmc;
            for (slot, v) in [
                (&mut mc.iterations, iterations),
                (&mut mc.burn_in, burn_in),
                (&mut mc.thin, thin),
                (&mut mc.n_chains, chains),
            ] {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            if let Some(s) = seed {
                mc.seed = s;
            }
            if out.is_some() {
                cfg.output_dir = out;
            }
            let dir = cfg
                .output_dir
                .clone()
                .ok_or_else(|| Error::Config("no output directory: pass --out or set output_dir".into()))?;
            cfg.validate()?;
            let dataset = load_dataset(&data, &graph, &cfg)?;
            let result = fit(&dataset, &cfg)?;
            write_fit_dir(&dir, &result)?;
            println!("{}", result.echo.label);
            print!("{}", result.summary.table_text());
            let acc = result.draws.mean_acceptance();
            println!("rho acceptance: {:.3}, {:.3}", acc[0], acc[1]);
            println!(
                "lppd {:.2}  p_WAIC {:.2}  WAIC {:.2}",
                result.waic.lppd, result.waic.p_waic, result.waic.waic
            );
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Waic { fits, csv } => {
            let mut reports = Vec::with_capacity(fits.len());
            for dir in &fits {
                let f = read_fit_dir(dir)?;
                reports.push((f.echo.label, f.waic));
            }
            let table = compare(&reports)?;
            print!("{}", table.to_text());
            if let Some(path) = csv {
                let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                table.write_csv(file)?;
            }
            Ok(())
        }
        Command::CorrMap { fit, out } => {
            let f = read_fit_dir(&fit)?;
            let graph = f.echo.graph.to_graph(&f.draws.meta.vertex_order)?;
            let values = correlation_map(&f.draws, &graph)?;
            export_values_csv(&values, &out)?;
            println!("wrote {} regions to {}", values.len(), out.display());
            Ok(())
        }
        Command::ExportMap {
            values,
            geojson,
            id_property,
            field,
            out,
        } => {
            let file = std::fs::File::open(&values).map_err(|e| Error::io(&values, e))?;
            let v = read_values_csv(file)?;
            export_choropleth(&v, &geojson, &id_property, &field, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Check {
            graph,
            rho,
            kind,
            matrix_market,
        } => check(&graph, rho, kind.into(), matrix_market),
    }
}

fn simulate(graph: &Path, truth: &Path, out: &Path, truth_out: Option<PathBuf>) -> Result<()> {
    let g = OrderedRegionGraph::from_file(graph)?;
    let text = std::fs::read_to_string(truth).map_err(|e| Error::io(truth, e))?;
    let t: SimulationTruth =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", truth.display())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed);
    let sim = simulate_dataset(&g, &t, &mut rng)?;
    let file = std::fs::File::create(out).map_err(|e| Error::io(out, e))?;
    write_dataset_csv(&sim.dataset, std::io::BufWriter::new(file))?;
    let truth_out = truth_out.unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".truth.json");
        PathBuf::from(p)
    });
    let mut json = serde_json::to_string_pretty(&sim.truth)?;
    json.push('\n');
    std::fs::write(&truth_out, json).map_err(|e| Error::io(&truth_out, e))?;
    println!("wrote {} and {}", out.display(), truth_out.display());
    Ok(())
}

fn check(graph: &Path, rho: f64, kind: PrecisionKind, matrix_market: Option<PathBuf>) -> Result<()> {
    let g = OrderedRegionGraph::from_file(graph)?;
    let q = spatial_precision(kind, &g, rho)?;
    q.cholesky()?;
    println!("kind: {kind}");
    println!("regions: {}  edges: {}", g.len(), g.num_edges());
    println!("rho: {rho}");
    println!("nonzeros: {}", q.matrix().nnz());
    println!("log det Q: {:.10}", q.logdet());
    println!("positive definite: yes");
    if rho == 0.0 && kind == PrecisionKind::Dagar {
        let dense = q.dense();
        let dev = (dense - nalgebra::DMatrix::<f64>::identity(g.len(), g.len())).amax();
        if dev > 1e-12 {
            return Err(Error::Factorization(format!("rho = 0 but Q differs from I by {dev:e}")));
        }
        println!("rho = 0: Q = I (max deviation {dev:e})");
    }
    if let Some(path) = matrix_market {
        std::fs::write(&path, q.to_matrix_market()).map_err(|e| Error::io(&path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
