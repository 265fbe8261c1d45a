//! Generic parameter sweeps over a [`GridConfig`](crate::config::GridConfig).

use crate::config::ExperimentConfig;
use crate::dataset::{Dataset, Manifest, RunOutput};
use crate::error::{Result, SweepError};
use crate::point::{evaluate, point_columns, point_row, ResolvedPoint};
use compton_core::Numerics;
use rayon::prelude::*;
use serde_json::Map;

/// Runs `f` inside a pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(SweepError::Config("workers must be positive".into()));
        }
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| SweepError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Maps `f` over `items` in parallel; results keep the order of `items`.
pub fn par_map<I: Sync, T: Send>(items: &[I], f: impl Fn(usize, &I) -> Result<T> + Sync) -> Result<Vec<T>> {
    items.par_iter().enumerate().map(|(k, x)| f(k, x)).collect()
}

pub fn resolve_points(config: &ExperimentConfig) -> Result<Vec<ResolvedPoint>> {
    let numerics = config.numerics.apply(Numerics::default())?;
    let specs = config.grid.points()?;
    specs.iter().enumerate().map(|(k, s)| s.resolve(&numerics).map_err(SweepError::at(k))).collect()
}

/// One row per grid point with the columns of [`point_columns`].
pub fn sweep(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let points = resolve_points(config)?;
    let obs = &config.observables;
    let rows = with_workers(config.workers, || {
        par_map(&points, |k, p| {
            let out = evaluate(&p.problem, obs).map_err(SweepError::at(k))?;
            Ok(point_row(k, p, &out))
        })
    })??;
    let mut data = Dataset::new(config.name.clone(), point_columns(&obs.doc_orders));
    data.extend(rows);

    let settings = serde_json::to_value(config).map_err(|e| SweepError::Serialize(e.to_string()))?;
    let mut manifest = Manifest::new(config.name.clone(), settings);
    for p in &points {
        let mut labels = Map::new();
        labels.insert("spec".into(), serde_json::to_value(&p.spec).map_err(|e| SweepError::Serialize(e.to_string()))?);
        manifest.push(p.problem.clone(), labels);
    }
    Ok(RunOutput::new(vec![data], manifest))
}
