//! Files in and out: datasets, simulation, run configuration, fit
//! directories, and map-ready exports.

mod config;
mod dataset;
mod export;
mod fit;
mod simulate;

pub use config::{ModelChoice, RunConfig, Transform};
pub use dataset::{load_dataset, load_dataset_from, write_dataset_csv};
pub use export::{export_choropleth, export_values_csv, join_geojson, read_values_csv, write_values_csv, RegionValue};
pub use fit::{
    correlation_map, fit, latent_map, read_fit_dir, write_fit_dir, ConfigEcho, FitDir, FitOutput, GraphEcho,
};
pub use simulate::{simulate_dataset, SimulatedData, SimulationTruth};

/// Six significant digits, fixed notation for magnitudes in `[1e-5, 1e6)`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..6).contains(&e) {
        format!("{:.*}", (5 - e) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}
