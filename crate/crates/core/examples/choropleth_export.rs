//! From a fit to map-ready files: per-region cross-disease correlation and
//! latent effects, written as CSV and joined onto GeoJSON features.
//!
//! ```bash
//! cargo run --release --example choropleth_export -- [output dir]
//! ```

use std::path::PathBuf;

use bdagar::graph::OrderedRegionGraph;
use bdagar::inference::McmcConfig;
use bdagar::io::{
    correlation_map, export_choropleth, export_values_csv, fit, latent_map, simulate_dataset, write_fit_dir, RunConfig,
    SimulationTruth,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Unit squares named like the grid's regions.
fn grid_geojson(rows: usize, cols: usize) -> serde_json::Value {
    let features: Vec<_> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            let (x, y) = (c as f64, (rows - 1 - r) as f64);
            json!({
                "type": "Feature",
                "properties": {"NAME": format!("r{r}c{c}")},
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[x, y], [x + 1.0, y], [x + 1.0, y + 1.0], [x, y + 1.0], [x, y]]]
                }
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("bdagar_choropleth"));
    std::fs::create_dir_all(&dir)?;

    let graph = OrderedRegionGraph::grid(5, 5)?;
    let truth: SimulationTruth = serde_json::from_str(
        r#"{"beta1": [1.0], "beta2": [0.5], "sigma2": [0.1, 0.1], "tau": [3.0, 3.0],
            "rho": [0.7, 0.5], "eta": [0.9, 0.3], "seed": 5}"#,
    )?;
    let sim = simulate_dataset(&graph, &truth, &mut ChaCha8Rng::seed_from_u64(truth.seed))?;
    let config = RunConfig {
        mcmc: McmcConfig {
            iterations: 4000,
            burn_in: 2000,
            thin: 4,
            ..McmcConfig::default()
        },
        ..RunConfig::default()
    };
    let out = fit(&sim.dataset, &config)?;
    write_fit_dir(dir.join("fit"), &out)?;

    let geojson = dir.join("grid.geojson");
    std::fs::write(&geojson, serde_json::to_string_pretty(&grid_geojson(5, 5))?)?;

    let corr = correlation_map(&out.draws, &sim.dataset.graph)?;
    export_values_csv(&corr, dir.join("corr.csv"))?;
    export_choropleth(&corr, &geojson, "NAME", "corr", dir.join("corr.geojson"))?;

    for (i, name) in sim.dataset.disease_names.iter().enumerate() {
        let w = latent_map(&out.draws, i)?;
        export_choropleth(
            &w,
            &geojson,
            "NAME",
            &format!("w_{name}"),
            dir.join(format!("w_{name}.geojson")),
        )?;
    }

    let strongest = corr.iter().max_by(|a, b| a.mean.total_cmp(&b.mean)).expect("non-empty");
    println!(
        "strongest cross-disease correlation: {} at {:.3}",
        strongest.region, strongest.mean
    );
    println!(
        "wrote fit/, corr.csv, corr.geojson and per-disease latent maps to {}",
        dir.display()
    );
    Ok(())
}
