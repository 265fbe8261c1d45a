//! A single grid point: mixed laboratory / dimensionless inputs, their
//! reduction to a [`DimensionlessProblem`], and the per-point observables.

use compton_core::lattice::{solve_recoil_with, Backend, EvolveOptions};
use compton_core::observables::{max_doc_over_distance, DistanceSearch};
use compton_core::problem::{beta_per_power, reduce_to_dimensionless};
use compton_core::units::{self, LabConfig};
use compton_core::{comb_coefficients_with, phase_integral, sideband_sigma, DimensionlessProblem, Error, Numerics, SidebandSpectrum, C64};
use serde::{Deserialize, Serialize};

/// Inputs for one point. Exactly one of `kinetic_energy_kev`/`velocity_ratio`
/// and one of `beta`/`power_per_photon_energy` must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub kinetic_energy_kev: Option<f64>,
    pub velocity_ratio: Option<f64>,
    /// Nonrecoil `|β|`; the coupling phase is fixed so that `β = i|β|`.
    pub beta: Option<f64>,
    /// `P/ħω1` in kW/eV, equal powers in both beams.
    pub power_per_photon_energy: Option<f64>,
    pub photon_energy_ev: f64,
    pub na1: f64,
    /// `ω2/ω1`; `None` is phase matched.
    pub frequency_ratio: Option<f64>,
    /// Overrides the `z_T/z0` implied by `photon_energy_ev` and `na1`.
    pub talbot_ratio: Option<f64>,
    pub recoil: bool,
}

impl Default for PointSpec {
    fn default() -> Self {
        Self {
            kinetic_energy_kev: None,
            velocity_ratio: Some(1.0 / 3.0),
            beta: Some(1.0),
            power_per_photon_energy: None,
            photon_energy_ev: 2.0,
            na1: 0.2,
            frequency_ratio: None,
            talbot_ratio: None,
            recoil: true,
        }
    }
}

/// A point after reduction, with the lab-unit values used for figure axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPoint {
    pub spec: PointSpec,
    pub problem: DimensionlessProblem,
    pub kinetic_energy_kev: f64,
    pub power_per_photon_energy: f64,
}

impl ResolvedPoint {
    pub fn beta_abs(&self) -> f64 {
        self.problem.focal_beta().norm()
    }

    pub fn talbot_ratio(&self) -> f64 {
        self.problem.talbot_ratio.unwrap_or(f64::INFINITY)
    }
}

impl PointSpec {
    pub fn resolve(&self, numerics: &Numerics) -> compton_core::Result<ResolvedPoint> {
        let (v, e0_kev) = match (self.kinetic_energy_kev, self.velocity_ratio) {
            (Some(e), None) => (units::electron_kinematics(e * 1e3)?.velocity_ratio, e),
            (None, Some(v)) => (v, units::kinematics_from_velocity(v)?.kinetic_energy * 1e-3),
            _ => return Err(Error::Config("set exactly one of kinetic_energy_kev and velocity_ratio".into())),
        };
        let matched = (1.0 - v) / (1.0 + v);
        let r = self.frequency_ratio.unwrap_or(matched);
        // |β| per unit P/ħω1 at ratio r
        let per_power = beta_per_power(v)? * (matched / r).sqrt();

        let (problem, power) = match (self.beta, self.power_per_photon_energy) {
            (None, Some(p)) => {
                let mut lab = LabConfig::phase_matched(e0_kev, self.photon_energy_ev, p, self.na1);
                if let Some(r) = self.frequency_ratio {
                    lab.photon_energy2_ev = Some(r * self.photon_energy_ev);
                }
                (reduce_to_dimensionless(&lab, numerics)?, p)
            }
            (Some(b), None) => {
                let omega = self.photon_energy_ev * (1.0 - r);
                let talbot = units::talbot_distance(v, omega)? / units::rayleigh_range(self.photon_energy_ev, self.na1)?;
                let p = DimensionlessProblem::detuned(v, r, C64::new(0.0, b), Some(talbot), self.na1)?;
                (p.apply_numerics(numerics), b / per_power)
            }
            _ => return Err(Error::Config("set exactly one of beta and power_per_photon_energy".into())),
        };
        let mut problem = problem;
        if let Some(t) = self.talbot_ratio {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("z_T/z0 must be positive, got {t}")));
            }
            problem.talbot_ratio = Some(t);
        }
        if !self.recoil {
            problem.talbot_ratio = None;
        }
        Ok(ResolvedPoint { spec: self.clone(), problem, kinetic_energy_kev: e0_kev, power_per_photon_energy: power })
    }
}

/// Plane from which downstream distances are measured for recoil runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// Exit of the interaction region, `z = L/2`.
    #[default]
    Exit,
    /// Focal plane `z = 0`.
    Focus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Slice-by-slice lattice propagation.
    #[default]
    Lattice,
    /// Closed-form Bessel comb with the infinite-envelope coupling (no recoil, no span).
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Observables {
    pub doc_orders: Vec<i64>,
    pub search: DistanceSearch,
    pub reference: Reference,
    pub solver: Solver,
    pub backend: Backend,
}

impl Default for Observables {
    fn default() -> Self {
        Self { doc_orders: vec![1], search: DistanceSearch::default(), reference: Reference::Exit, solver: Solver::Lattice, backend: Backend::Chebyshev }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub spectrum: SidebandSpectrum,
    pub sigma: f64,
    pub resonant_weight: f64,
    pub nonresonant_weight: f64,
    pub peak_nonresonant_ratio: f64,
    pub truncation_flagged: bool,
    /// `(d/z_T, DOC_m)` per entry of `doc_orders`.
    pub doc_maxima: Vec<(f64, f64)>,
}

pub fn evaluate(problem: &DimensionlessProblem, obs: &Observables) -> compton_core::Result<PointOutcome> {
    let (spectrum, rw, nw, peak, flagged) = match obs.solver {
        Solver::Analytic => {
            let beta = phase_integral(problem).beta_eff;
            (comb_coefficients_with(beta, problem.l_max)?, 1.0, 0.0, 0.0, false)
        }
        Solver::Lattice => {
            let opts = EvolveOptions { backend: obs.backend, ..EvolveOptions::default() };
            let out = solve_recoil_with(problem, &opts)?;
            let s = match obs.reference {
                Reference::Exit => out.exit,
                Reference::Focus => out.focal,
            };
            (s, out.resonant_weight, out.nonresonant_weight, out.peak_nonresonant_ratio, out.truncation_flagged)
        }
    };
    let sigma = sideband_sigma(&spectrum)?;
    let doc_maxima = obs.doc_orders.iter().map(|&m| max_doc_over_distance(&spectrum, m, &obs.search)).collect::<compton_core::Result<Vec<_>>>()?;
    Ok(PointOutcome { spectrum, sigma, resonant_weight: rw, nonresonant_weight: nw, peak_nonresonant_ratio: peak, truncation_flagged: flagged, doc_maxima })
}

/// Column names matching [`point_row`].
pub fn point_columns(doc_orders: &[i64]) -> Vec<String> {
    let mut c: Vec<String> = [
        "index",
        "E0_keV",
        "v_over_c",
        "P_over_hw1_kW_per_eV",
        "hw1_eV",
        "na1",
        "w2_over_w1",
        "beta_abs",
        "zT_over_z0",
        "sigma",
        "sigma_nonrecoil",
        "sigma_nonrecoil_span",
        "resonant_weight",
        "nonresonant_weight",
        "peak_nonresonant_ratio",
        "truncation_flag",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for m in doc_orders {
        c.push(format!("doc{m}_max"));
        c.push(format!("doc{m}_d_over_zT"));
    }
    c
}

pub fn point_row(index: usize, p: &ResolvedPoint, out: &PointOutcome) -> Vec<f64> {
    let mut row = vec![
        index as f64,
        p.kinetic_energy_kev,
        p.problem.velocity_ratio,
        p.power_per_photon_energy,
        p.spec.photon_energy_ev,
        p.spec.na1,
        p.problem.frequency_ratio,
        p.beta_abs(),
        p.talbot_ratio(),
        out.sigma,
        std::f64::consts::SQRT_2 * p.beta_abs(),
        std::f64::consts::SQRT_2 * phase_integral(&p.problem).beta_span.norm(),
        out.resonant_weight,
        out.nonresonant_weight,
        out.peak_nonresonant_ratio,
        if out.truncation_flagged { 1.0 } else { 0.0 },
    ];
    for &(d, v) in &out.doc_maxima {
        row.push(v);
        row.push(d);
    }
    row
}
