//! TOML experiment configuration.
//!
//! ```toml
//! name = "doc_map"          # dataset / manifest file stem
//! output_dir = "out"
//! workers = 4               # omitted: all cores
//! precision = 12            # significant digits in outputs
//!
//! [grid]
//! kinetic_energy_kev = [31.0]             # or velocity_ratio = [...]
//! beta = { log = [0.5, 4.0], points = 8 } # or power_per_photon_energy = [...]
//! talbot_ratio = { log = [5.0, 500.0], points = 8 }
//! photon_energy_ev = [2.0]
//! na1 = [0.2]
//! # frequency_ratio = [0.5]  omitted: phase matched
//! recoil = true
//!
//! [numerics]
//! slices = 400
//! net_exchange_cutoff = 2   # or full_lattice = true
//!
//! [observables]
//! doc_orders = [1, 2]
//! reference = "exit"        # or "focus"
//! solver = "lattice"        # or "analytic"
//! ```

use crate::error::{Result, SweepError};
use crate::point::{Observables, PointSpec};
use compton_core::Numerics;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Values along one axis: an explicit list or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Linear { linear: [f64; 2], points: usize },
    Log { log: [f64; 2], points: usize },
}

impl Default for Axis {
    fn default() -> Self {
        Axis::Values(Vec::new())
    }
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Axis::Values(v) => Ok(v.clone()),
            Axis::Linear { linear: [a, b], points } => Ok(linspace(*a, *b, *points)),
            Axis::Log { log: [a, b], points } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(SweepError::Config(format!("log axis needs positive bounds, got [{a}, {b}]")));
                }
                Ok(logspace(*a, *b, *points))
            }
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    linspace(la, lb, n).into_iter().map(f64::exp).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub kinetic_energy_kev: Axis,
    pub velocity_ratio: Axis,
    pub beta: Axis,
    pub power_per_photon_energy: Axis,
    pub photon_energy_ev: Axis,
    pub na1: Axis,
    pub frequency_ratio: Axis,
    pub talbot_ratio: Axis,
    pub recoil: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            kinetic_energy_kev: Axis::default(),
            velocity_ratio: Axis::default(),
            beta: Axis::default(),
            power_per_photon_energy: Axis::default(),
            photon_energy_ev: Axis::Values(vec![2.0]),
            na1: Axis::Values(vec![0.2]),
            frequency_ratio: Axis::default(),
            talbot_ratio: Axis::default(),
            recoil: true,
        }
    }
}

fn pick(name_a: &str, a: &Axis, name_b: &str, b: &Axis) -> Result<(bool, Vec<f64>)> {
    let (va, vb) = (a.values()?, b.values()?);
    match (va.is_empty(), vb.is_empty()) {
        (false, true) => Ok((true, va)),
        (true, false) => Ok((false, vb)),
        _ => Err(SweepError::Config(format!("set exactly one of grid.{name_a} and grid.{name_b}"))),
    }
}

fn optional(axis: &Axis) -> Result<Vec<Option<f64>>> {
    let v = axis.values()?;
    Ok(if v.is_empty() { vec![None] } else { v.into_iter().map(Some).collect() })
}

fn required(name: &str, axis: &Axis) -> Result<Vec<f64>> {
    let v = axis.values()?;
    if v.is_empty() {
        return Err(SweepError::Config(format!("grid.{name} is empty")));
    }
    Ok(v)
}

impl GridConfig {
    /// Cartesian product in the order energy, coupling, ħω1, NA1, ω2/ω1, z_T/z0
    /// (last axis fastest).
    pub fn points(&self) -> Result<Vec<PointSpec>> {
        let (by_energy, energies) = pick("kinetic_energy_kev", &self.kinetic_energy_kev, "velocity_ratio", &self.velocity_ratio)?;
        let (by_beta, couplings) = pick("beta", &self.beta, "power_per_photon_energy", &self.power_per_photon_energy)?;
        let photons = required("photon_energy_ev", &self.photon_energy_ev)?;
        let nas = required("na1", &self.na1)?;
        let ratios = optional(&self.frequency_ratio)?;
        let talbots = optional(&self.talbot_ratio)?;
        let mut out = Vec::new();
        for &e in &energies {
            for &c in &couplings {
                for &w in &photons {
                    for &na in &nas {
                        for &r in &ratios {
                            for &t in &talbots {
                                out.push(PointSpec {
                                    kinetic_energy_kev: by_energy.then_some(e),
                                    velocity_ratio: (!by_energy).then_some(e),
                                    beta: by_beta.then_some(c),
                                    power_per_photon_energy: (!by_beta).then_some(c),
                                    photon_energy_ev: w,
                                    na1: na,
                                    frequency_ratio: r,
                                    talbot_ratio: t,
                                    recoil: self.recoil,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Partial numerics; unset fields keep the run's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsOverride {
    pub span: Option<f64>,
    pub slice_width: Option<f64>,
    pub slices: Option<usize>,
    pub l_max: Option<usize>,
    pub net_exchange_cutoff: Option<usize>,
    /// Keep every lattice state (clears `net_exchange_cutoff`).
    pub full_lattice: bool,
}

impl NumericsOverride {
    pub fn apply(&self, mut n: Numerics) -> Result<Numerics> {
        if let Some(s) = self.span {
            if !(s > 0.0) {
                return Err(SweepError::Config(format!("span must be positive, got {s}")));
            }
            n.span = s;
        }
        if let Some(w) = self.slice_width {
            if !(w > 0.0) {
                return Err(SweepError::Config(format!("slice_width must be positive, got {w}")));
            }
            n.slice_width = w;
        }
        if let Some(s) = self.slices {
            if s == 0 {
                return Err(SweepError::Config("slices must be positive".into()));
            }
            n.slices = Some(s);
        }
        if self.l_max.is_some() {
            n.l_max = self.l_max;
        }
        if self.full_lattice {
            if self.net_exchange_cutoff.is_some() {
                return Err(SweepError::Config("full_lattice conflicts with net_exchange_cutoff".into()));
            }
            n.net_exchange_cutoff = None;
        } else if self.net_exchange_cutoff.is_some() {
            n.net_exchange_cutoff = self.net_exchange_cutoff;
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Named recipe; when set, `grid` and `observables` are ignored.
    pub recipe: Option<String>,
    pub name: String,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    pub precision: usize,
    pub grid: GridConfig,
    pub numerics: NumericsOverride,
    pub observables: Observables,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            recipe: None,
            name: "sweep".into(),
            output_dir: PathBuf::from("out"),
            workers: None,
            precision: crate::dataset::DEFAULT_PRECISION,
            grid: GridConfig::default(),
            numerics: NumericsOverride::default(),
            observables: Observables::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| SweepError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SweepError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(SweepError::Config(format!("invalid dataset name {:?}", self.name)));
        }
        if self.precision == 0 || self.precision > 17 {
            return Err(SweepError::Config(format!("precision must lie in 1..=17, got {}", self.precision)));
        }
        if self.workers == Some(0) {
            return Err(SweepError::Config("workers must be positive".into()));
        }
        if self.observables.doc_orders.iter().any(|&m| m <= 0) {
            return Err(SweepError::Config("doc orders must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"
            name = "doc_map"
            workers = 2
            [grid]
            kinetic_energy_kev = [31.0]
            beta = { log = [0.5, 4.0], points = 3 }
            talbot_ratio = { linear = [10.0, 20.0], points = 2 }
            [numerics]
            net_exchange_cutoff = 2
            [observables]
            doc_orders = [1, 2]
            reference = "focus"
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let pts = c.grid.points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1].talbot_ratio, Some(20.0));
        assert!((pts[5].beta.unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(c.numerics.apply(Numerics::default()).unwrap().net_exchange_cutoff, Some(2));
    }

    #[test]
    fn rejects_ambiguous_axes() {
        let g = GridConfig { kinetic_energy_kev: Axis::Values(vec![31.0]), velocity_ratio: Axis::Values(vec![0.3]), beta: Axis::Values(vec![1.0]), ..GridConfig::default() };
        assert!(matches!(g.points(), Err(SweepError::Config(_))));
        let g = GridConfig { velocity_ratio: Axis::Values(vec![0.3]), ..GridConfig::default() };
        assert!(g.points().is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentConfig::from_toml("nmae = \"x\"").is_err());
        assert!(ExperimentConfig::from_toml("precision = 0").is_err());
    }

    #[test]
    fn logspace_hits_endpoints() {
        let v = logspace(5.0, 300.0, 16);
        assert_eq!(v.len(), 16);
        assert!((v[0] - 5.0).abs() < 1e-12 && (v[15] - 300.0).abs() < 1e-9);
    }
}
