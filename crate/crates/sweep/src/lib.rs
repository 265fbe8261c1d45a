//! Batch runner for the compton-core solvers: figure recipes, generic
//! parameter sweeps, and dataset/manifest output.

pub mod config;
pub mod dataset;
pub mod error;
pub mod point;
pub mod recipes;
pub mod sweep;

pub use config::{Axis, ExperimentConfig, GridConfig, NumericsOverride};
pub use dataset::{Dataset, Manifest, RunOutput, SCHEMA_VERSION};
pub use error::{Result, SweepError};
pub use point::{evaluate, Observables, PointOutcome, PointSpec, Reference, ResolvedPoint, Solver};
pub use recipes::{run_recipe, RecipeOptions, RECIPES};
pub use sweep::sweep;

/// Re-runs whatever produced `manifest` (a recipe or a sweep config).
pub fn replay(manifest: &Manifest, workers: Option<usize>) -> Result<RunOutput> {
    let s = &manifest.settings;
    if let Some(name) = s.get("recipe").and_then(|v| v.as_str()) {
        if let Some(opts) = s.get("options") {
            let mut opts: RecipeOptions = serde_json::from_value(opts.clone()).map_err(|e| SweepError::Config(format!("manifest options: {e}")))?;
            opts.workers = workers;
            return run_recipe(name, &opts);
        }
    }
    let mut config: ExperimentConfig = serde_json::from_value(s.clone()).map_err(|e| SweepError::Config(format!("manifest settings: {e}")))?;
    config.workers = workers;
    sweep(&config)
}
