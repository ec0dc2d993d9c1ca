//! BDAGAR and GMCAR, each under both disease orderings, on one dataset.
//!
//! ```bash
//! cargo run --release --example four_model_comparison
//! ```
//!
//! `scripts/four_models.sh` runs the same comparison through the `bdagar`
//! binary.

use bdagar::graph::OrderedRegionGraph;
use bdagar::io::{fit, simulate_dataset, ModelChoice, RunConfig, SimulationTruth};
use bdagar::waic::compare;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = OrderedRegionGraph::grid(6, 6)?;
    let truth: SimulationTruth = serde_json::from_str(
        r#"{"beta1": [1.0, 0.5], "beta2": [2.0, -0.4], "sigma2": [0.05, 0.05],
            "tau": [5.0, 5.0], "rho": [0.8, 0.4], "eta": [1.5, 0.4], "seed": 42,
            "disease_names": ["lung", "esophagus"]}"#,
    )?;
    let sim = simulate_dataset(&graph, &truth, &mut ChaCha8Rng::seed_from_u64(truth.seed))?;

    let mut reports = Vec::new();
    for model in [ModelChoice::Bdagar, ModelChoice::Gmcar] {
        for data in [sim.dataset.clone(), sim.dataset.swapped()] {
            let config = RunConfig {
                model,
                ..RunConfig::default()
            };
            let out = fit(&data, &config)?;
            println!("fitted {}", out.echo.label);
            reports.push((out.echo.label, out.waic));
        }
    }
    println!();
    print!("{}", compare(&reports)?.to_text());
    Ok(())
}
