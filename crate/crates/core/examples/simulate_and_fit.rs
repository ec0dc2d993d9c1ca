//! Simulate two diseases on a 7x7 grid, fit the joint model and compare the
//! posterior with the truth.
//!
//! ```bash
//! cargo run --release --example simulate_and_fit
//! ```

use bdagar::graph::OrderedRegionGraph;
use bdagar::inference::{parameter_ess, McmcConfig};
use bdagar::io::{fit, simulate_dataset, RunConfig, SimulationTruth};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = OrderedRegionGraph::grid(7, 7)?;
    let truth: SimulationTruth = serde_json::from_str(
        r#"{"beta1": [1.0, 0.5, -0.7], "beta2": [2.0, -0.4, 0.8],
            "sigma2": [0.1, 0.1], "tau": [4.0, 4.0], "rho": [0.7, 0.3],
            "eta": [0.8, 0.2], "seed": 2020,
            "disease_names": ["lung", "esophagus"]}"#,
    )?;
    let sim = simulate_dataset(&graph, &truth, &mut ChaCha8Rng::seed_from_u64(truth.seed))?;
    let config = RunConfig {
        mcmc: McmcConfig {
            seed: 7,
            ..McmcConfig::default()
        },
        ..RunConfig::default()
    };
    let out = fit(&sim.dataset, &config)?;
    println!("{}\n", out.echo.label);
    print!("{}", out.summary.table_text());

    println!("\nparameter          truth   posterior            ESS");
    let check = |name: String, value: f64| {
        let row = out.summary.get(&name).expect("summarised");
        let ess = parameter_ess(&out.draws, &name).map(|e| e.ess).unwrap_or(f64::NAN);
        let mark = if row.covers(value) { "" } else { "  (missed)" };
        println!("{name:<16} {value:>7.2}   {:<20} {ess:>6.0}{mark}", row.formatted());
    };
    for (i, beta) in [&truth.beta1, &truth.beta2].iter().enumerate() {
        for (c, name) in sim.dataset.covariate_names[i].iter().enumerate() {
            check(format!("beta{}_{name}", i + 1), beta[c]);
        }
    }
    for (i, name) in ["rho1", "rho2"].iter().enumerate() {
        check(name.to_string(), truth.rho[i]);
    }
    check("eta0".into(), truth.eta[0]);
    check("eta1".into(), truth.eta[1]);
    let acc = out.draws.mean_acceptance();
    println!(
        "\nrho acceptance {:.2} / {:.2}; WAIC {:.2}",
        acc[0], acc[1], out.waic.waic
    );
    Ok(())
}
