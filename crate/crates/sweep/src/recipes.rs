//! Named recipes, one per figure panel, at desk-scale resolution.
//!
//! Solvers are driven by dimensionless groups; lab-unit columns (E0, P/ħω1)
//! are emitted alongside. Recoil runs use the exit-plane reference for
//! downstream distances. Lattice runs keep states with `|ℓ1 + ℓ2| <= 2`
//! unless the numerics override says otherwise (`figs1` uses the full lattice).

use crate::config::{linspace, logspace, NumericsOverride};
use crate::dataset::{Dataset, Manifest, RunOutput};
use crate::error::{Result, SweepError};
use crate::point::{evaluate, Observables, PointSpec, Reference, Solver};
use crate::sweep::{par_map, with_workers};
use compton_core::lattice::{evolve, EvolveOptions, Schedule};
use compton_core::observables::{density_profile, doc, max_doc_over_distance, DistanceSearch};
use compton_core::problem::beta_per_power;
use compton_core::units::{self, LabConfig};
use compton_core::{comb_coefficients_with, phase_integral, DimensionlessProblem, Numerics, C64};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// `|β|` of the compression optimum at 31 keV, `z_T/z0 = 13.3`.
pub const OPERATING_BETA: f64 = 1.6;
pub const OPERATING_TALBOT: f64 = 13.3;

pub const RECIPES: &[(&str, &str)] = &[
    ("fig2a", "|beta| vs E0 for several P/hw1"),
    ("fig2b", "nonrecoil sideband probabilities vs P/hw1 at v = c/3"),
    ("fig2c", "density over one period vs d/z_T, nonrecoil, beta = 1"),
    ("fig3ab", "sideband probabilities along z at v = c/3, |beta| = 12.5, without and with recoil (z_T = 50 z0)"),
    ("fig3c", "field envelope along z"),
    ("fig3d", "sigma_l vs E0 at NA1 = 0.2, hw1 = 2 eV, with sqrt(z_T/z0)"),
    ("fig4a", "max DOC1 over (|beta|, z_T/z0) at 31 keV"),
    ("fig4b", "density vs d/z_T at the compression optimum"),
    ("fig4c", "max DOC_m vs E0 at the optimum P/hw1 and z_T/z0"),
    ("fig4d", "max DOC_m vs z_T/z0 at 31 keV"),
    ("figs1", "resonant and nonresonant weight along z at 31 keV, P/hw1 = 1 and 2 kW/eV"),
    ("figs2", "sideband probabilities along z at 31 keV, P/hw1 = 4.5 kW/eV, several z_T/z0"),
    ("figs3", "phase-matching detuning with hw1 = 2 eV, hw2 = 1 eV fixed"),
    ("figs4b", "max DOC1 over (|beta|, z_T/z0) at 200 keV"),
    ("figs4c", "max DOC_m vs E0 around 200 keV"),
    ("figs5", "final spectrum at the compression optimum"),
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecipeOptions {
    pub numerics: NumericsOverride,
    pub search: DistanceSearch,
    /// Not part of the manifest: results do not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
}

pub fn run_recipe(name: &str, opts: &RecipeOptions) -> Result<RunOutput> {
    let ctx = Ctx { name, opts };
    let f: fn(&Ctx) -> Result<RunOutput> = match name {
        "fig2a" => fig2a,
        "fig2b" => fig2b,
        "fig2c" => fig2c,
        "fig3ab" => fig3ab,
        "fig3c" => fig3c,
        "fig3d" => fig3d,
        "fig4a" => |c| doc_map(c, 31.0),
        "fig4b" => fig4b,
        "fig4c" => |c| doc_vs_energy(c, 31.0, logspace(5.0, 300.0, 24)),
        "fig4d" => fig4d,
        "figs1" => figs1,
        "figs2" => figs2,
        "figs3" => figs3,
        "figs4b" => |c| doc_map(c, 200.0),
        "figs4c" => |c| doc_vs_energy(c, 200.0, logspace(30.0, 600.0, 24)),
        "figs5" => figs5,
        _ => {
            let known: Vec<&str> = RECIPES.iter().map(|r| r.0).collect();
            return Err(SweepError::Config(format!("unknown recipe {name:?}; known: {}", known.join(", "))));
        }
    };
    with_workers(opts.workers, || f(&ctx))?
}

struct Ctx<'a> {
    name: &'a str,
    opts: &'a RecipeOptions,
}

fn desk() -> Numerics {
    Numerics { net_exchange_cutoff: Some(2), ..Numerics::default() }
}

impl Ctx<'_> {
    fn numerics(&self, base: Numerics) -> Result<Numerics> {
        self.opts.numerics.apply(base)
    }

    fn manifest(&self) -> Result<Manifest> {
        let settings = serde_json::json!({ "recipe": self.name, "options": self.opts });
        Ok(Manifest::new(self.name, settings))
    }

    fn observables(&self, orders: Vec<i64>) -> Observables {
        Observables { doc_orders: orders, search: self.opts.search, reference: Reference::Exit, solver: Solver::Lattice, ..Observables::default() }
    }

    fn dataset(&self, suffix: &str, columns: &[&str]) -> Dataset {
        let name = if suffix.is_empty() { self.name.to_string() } else { format!("{}_{suffix}", self.name) };
        Dataset::with_columns(name, columns)
    }
}

fn labels(pairs: &[(&str, f64)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null))).collect()
}

fn at(k: usize) -> impl FnOnce(compton_core::Error) -> SweepError {
    SweepError::at(k)
}

fn velocity_kev(e0_kev: f64) -> Result<f64> {
    Ok(units::electron_kinematics(e0_kev * 1e3).map_err(at(0))?.velocity_ratio)
}

fn beta_problem(v: f64, beta: f64, talbot: Option<f64>, n: &Numerics) -> compton_core::Result<DimensionlessProblem> {
    Ok(DimensionlessProblem::phase_matched(v, C64::new(0.0, beta), talbot, 0.2)?.apply_numerics(n))
}

fn inf(t: Option<f64>) -> f64 {
    t.unwrap_or(f64::INFINITY)
}

/// Sideband probabilities along z, one row per (snapshot, ℓ), starting with the
/// incident δ at `z = -L/2`.
fn trajectory_rows(problem: &DimensionlessProblem, every: usize, prefix: &[f64]) -> compton_core::Result<Vec<Vec<f64>>> {
    let ev = evolve(problem, &EvolveOptions { schedule: Schedule::Every(every), ..EvolveOptions::default() })?;
    let l = problem.l_max as i64;
    let mut rows = Vec::new();
    let mut emit = |z: f64, probs: &[f64]| {
        for (k, p) in (-l..=l).zip(probs) {
            let mut r = prefix.to_vec();
            r.extend([z, k as f64, *p]);
            rows.push(r);
        }
    };
    let mut start = vec![0.0; 2 * problem.l_max + 1];
    start[problem.l_max] = 1.0;
    emit(-0.5 * problem.span, &start);
    for t in ev.trajectory() {
        emit(t.position, &t.resonant_probabilities);
    }
    Ok(rows)
}

fn fig2a(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let mut data = ctx.dataset("", &["E0_keV", "v_over_c", "P_over_hw1_kW_per_eV", "beta_abs", "beta_abs_from_fields"]);
    let mut manifest = ctx.manifest()?;
    for &p in &[0.1, 1.0, 10.0] {
        for e0 in logspace(1.0, 300.0, 64) {
            let spec = PointSpec { kinetic_energy_kev: Some(e0), velocity_ratio: None, beta: None, power_per_photon_energy: Some(p), ..PointSpec::default() };
            let k = manifest.points.len();
            let pt = spec.resolve(&n).map_err(at(k))?;
            let lab = LabConfig::phase_matched(e0, spec.photon_energy_ev, p, spec.na1);
            let fields = units::coupling_beta(&lab).map_err(at(k))?.norm();
            data.push(vec![e0, pt.problem.velocity_ratio, p, pt.beta_abs(), fields]);
            manifest.push(pt.problem, labels(&[("E0_keV", e0), ("P_over_hw1", p)]));
        }
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn fig2b(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let mut data = ctx.dataset("", &["P_over_hw1_kW_per_eV", "beta_abs", "l", "probability"]);
    let mut manifest = ctx.manifest()?;
    let powers = linspace(0.0, 4.0, 41);
    let v = 1.0 / 3.0;
    let l_max = n.l_max.unwrap_or_else(|| compton_core::problem::default_l_max(beta_per_power(v).unwrap_or(0.0) * 4.0));
    for (k, &p) in powers.iter().enumerate() {
        let spec = PointSpec { beta: None, power_per_photon_energy: Some(p), ..PointSpec::default() };
        let mut pt = spec.resolve(&n).map_err(at(k))?;
        pt.problem.l_max = l_max;
        let comb = comb_coefficients_with(pt.problem.focal_beta(), l_max).map_err(at(k))?;
        for (l, a) in comb.iter() {
            data.push(vec![p, pt.beta_abs(), l as f64, a.norm_sqr()]);
        }
        manifest.push(pt.problem, labels(&[("P_over_hw1", p)]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn fig2c(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let problem = beta_problem(1.0 / 3.0, 1.0, None, &n).map_err(at(0))?;
    let comb = comb_coefficients_with(problem.focal_beta(), problem.l_max).map_err(at(0))?;
    let mut data = ctx.dataset("", &["d_over_zT", "t_over_period", "density", "doc1"]);
    for d in linspace(0.0, 0.5, 65) {
        let prof = density_profile(&comb, d, 64);
        let d1 = doc(&comb, d, 1).map_err(at(0))?;
        for (t, rho) in prof.times.iter().zip(&prof.density) {
            data.push(vec![d, *t, *rho, d1]);
        }
    }
    let mut manifest = ctx.manifest()?;
    manifest.push(problem, labels(&[("beta", 1.0)]));
    Ok(RunOutput::new(vec![data], manifest))
}

fn fig3ab(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let talbots = [None, Some(50.0)];
    let problems = talbots.iter().enumerate().map(|(k, &t)| beta_problem(1.0 / 3.0, 12.5, t, &n).map_err(at(k))).collect::<Result<Vec<_>>>()?;
    let blocks = par_map(&problems, |k, p| trajectory_rows(p, 10, &[inf(p.talbot_ratio)]).map_err(at(k)))?;
    let mut data = ctx.dataset("", &["zT_over_z0", "z_over_z0", "l", "probability"]);
    data.extend(blocks.into_iter().flatten());
    let mut manifest = ctx.manifest()?;
    for (p, t) in problems.into_iter().zip(talbots) {
        manifest.push(p, labels(&[("beta", 12.5), ("zT_over_z0", inf(t))]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn fig3c(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let problem = beta_problem(1.0 / 3.0, 12.5, Some(50.0), &n).map_err(at(0))?;
    let mut data = ctx.dataset("", &["z_over_z0", "intensity_over_focal"]);
    for z in linspace(-0.5 * problem.span, 0.5 * problem.span, 201) {
        data.push(vec![z, 1.0 / (1.0 + z * z)]);
    }
    let mut manifest = ctx.manifest()?;
    manifest.push(problem, Map::new());
    Ok(RunOutput::new(vec![data], manifest))
}

fn fig3d(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let mut points = Vec::new();
    for &p in &[0.5, 2.0, 6.0] {
        for e0 in logspace(5.0, 300.0, 16) {
            let spec = PointSpec { kinetic_energy_kev: Some(e0), velocity_ratio: None, beta: None, power_per_photon_energy: Some(p), ..PointSpec::default() };
            points.push(spec.resolve(&n).map_err(at(points.len()))?);
        }
    }
    let obs = ctx.observables(Vec::new());
    let rows = par_map(&points, |k, pt| {
        let out = evaluate(&pt.problem, &obs).map_err(at(k))?;
        let t = pt.talbot_ratio();
        let span = std::f64::consts::SQRT_2 * phase_integral(&pt.problem).beta_span.norm();
        Ok(vec![pt.kinetic_energy_kev, pt.problem.velocity_ratio, pt.power_per_photon_energy, pt.beta_abs(), t, out.sigma, std::f64::consts::SQRT_2 * pt.beta_abs(), span, t.sqrt(), out.resonant_weight])
    })?;
    let mut data = ctx.dataset("", &["E0_keV", "v_over_c", "P_over_hw1_kW_per_eV", "beta_abs", "zT_over_z0", "sigma", "sigma_nonrecoil", "sigma_nonrecoil_span", "sqrt_zT_over_z0", "resonant_weight"]);
    data.extend(rows);
    let mut manifest = ctx.manifest()?;
    for pt in points {
        manifest.push(pt.problem, labels(&[("E0_keV", pt.kinetic_energy_kev), ("P_over_hw1", pt.power_per_photon_energy)]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

/// Max DOC1 over a (|β|, z_T/z0) grid.
fn doc_map(ctx: &Ctx, e0_kev: f64) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let v = velocity_kev(e0_kev)?;
    let per_power = beta_per_power(v).map_err(at(0))?;
    let mut problems = Vec::new();
    for b in logspace(0.5, 4.0, 16) {
        for t in logspace(5.0, 500.0, 16) {
            problems.push(beta_problem(v, b, Some(t), &n).map_err(at(problems.len()))?);
        }
    }
    let obs = ctx.observables(vec![1]);
    let rows = par_map(&problems, |k, p| {
        let out = evaluate(p, &obs).map_err(at(k))?;
        let b = p.focal_beta().norm();
        let (d, m) = out.doc_maxima[0];
        Ok(vec![e0_kev, b, b / per_power, inf(p.talbot_ratio), m, d, out.sigma])
    })?;
    let mut data = ctx.dataset("", &["E0_keV", "beta_abs", "P_over_hw1_kW_per_eV", "zT_over_z0", "doc1_max", "doc1_d_over_zT", "sigma"]);
    data.extend(rows);
    let mut manifest = ctx.manifest()?;
    for p in problems {
        manifest.push(p, labels(&[("E0_keV", e0_kev)]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn operating_problem(n: &Numerics) -> Result<DimensionlessProblem> {
    beta_problem(velocity_kev(31.0)?, OPERATING_BETA, Some(OPERATING_TALBOT), n).map_err(at(0))
}

fn fig4b(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let problem = operating_problem(&n)?;
    let out = evaluate(&problem, &ctx.observables(vec![1])).map_err(at(0))?;
    let mut data = ctx.dataset("", &["d_over_zT", "t_over_period", "density", "doc1"]);
    for d in linspace(0.0, 0.5, 65) {
        let prof = density_profile(&out.spectrum, d, 64);
        let d1 = doc(&out.spectrum, d, 1).map_err(at(0))?;
        for (t, rho) in prof.times.iter().zip(&prof.density) {
            data.push(vec![d, *t, *rho, d1]);
        }
    }
    let mut manifest = ctx.manifest()?;
    manifest.push(problem, labels(&[("E0_keV", 31.0)]));
    Ok(RunOutput::new(vec![data], manifest))
}

const DOC_ORDERS: [i64; 4] = [1, 2, 3, 4];

fn doc_columns(axis: &[&str]) -> Vec<String> {
    let mut c: Vec<String> = axis.iter().map(|s| s.to_string()).collect();
    for m in DOC_ORDERS {
        c.push(format!("doc{m}_max"));
        c.push(format!("doc{m}_d_over_zT"));
        c.push(format!("doc{m}_nonrecoil_max"));
    }
    c
}

fn doc_row(mut row: Vec<f64>, problem: &DimensionlessProblem, obs: &Observables, k: usize) -> Result<Vec<f64>> {
    let out = evaluate(problem, obs).map_err(at(k))?;
    let comb = comb_coefficients_with(problem.focal_beta(), problem.l_max).map_err(at(k))?;
    for (m, &(d, v)) in DOC_ORDERS.iter().zip(&out.doc_maxima) {
        let (_, nr) = max_doc_over_distance(&comb, *m, &obs.search).map_err(at(k))?;
        row.extend([v, d, nr]);
    }
    Ok(row)
}

/// DOC_m maxima across E0 at the P/ħω1 and z_T/z0 of the optimum at `anchor_kev`.
fn doc_vs_energy(ctx: &Ctx, anchor_kev: f64, energies: Vec<f64>) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let power = OPERATING_BETA / beta_per_power(velocity_kev(anchor_kev)?).map_err(at(0))?;
    let mut problems = Vec::new();
    for &e0 in &energies {
        let v = velocity_kev(e0)?;
        let b = beta_per_power(v).map_err(at(problems.len()))? * power;
        problems.push(beta_problem(v, b, Some(OPERATING_TALBOT), &n).map_err(at(problems.len()))?);
    }
    let obs = ctx.observables(DOC_ORDERS.to_vec());
    let rows = par_map(&problems, |k, p| doc_row(vec![energies[k], power, p.focal_beta().norm(), OPERATING_TALBOT], p, &obs, k))?;
    let cols = doc_columns(&["E0_keV", "P_over_hw1_kW_per_eV", "beta_abs", "zT_over_z0"]);
    let mut data = Dataset::new(ctx.name, cols);
    data.extend(rows);
    let mut manifest = ctx.manifest()?;
    for (p, e0) in problems.into_iter().zip(energies) {
        manifest.push(p, labels(&[("E0_keV", e0), ("P_over_hw1", power)]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn fig4d(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let v = velocity_kev(31.0)?;
    let talbots = logspace(2.0, 1.0e4, 24);
    let problems = talbots.iter().enumerate().map(|(k, &t)| beta_problem(v, OPERATING_BETA, Some(t), &n).map_err(at(k))).collect::<Result<Vec<_>>>()?;
    let obs = ctx.observables(DOC_ORDERS.to_vec());
    let rows = par_map(&problems, |k, p| doc_row(vec![31.0, OPERATING_BETA, talbots[k]], p, &obs, k))?;
    let mut data = Dataset::new(ctx.name, doc_columns(&["E0_keV", "beta_abs", "zT_over_z0"]));
    data.extend(rows);
    let mut manifest = ctx.manifest()?;
    for (p, t) in problems.into_iter().zip(talbots) {
        manifest.push(p, labels(&[("zT_over_z0", t)]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn figs1(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(Numerics::default())?;
    let powers = [1.0, 2.0];
    let points = powers
        .iter()
        .enumerate()
        .map(|(k, &p)| PointSpec { kinetic_energy_kev: Some(31.0), velocity_ratio: None, beta: None, power_per_photon_energy: Some(p), ..PointSpec::default() }.resolve(&n).map_err(at(k)))
        .collect::<Result<Vec<_>>>()?;
    let blocks = par_map(&points, |k, pt| {
        let ev = evolve(&pt.problem, &EvolveOptions { schedule: Schedule::Every(5), ..EvolveOptions::default() }).map_err(at(k))?;
        let rows: Vec<Vec<f64>> = ev
            .trajectory()
            .into_iter()
            .map(|t| vec![pt.power_per_photon_energy, pt.beta_abs(), t.position, t.resonant_weight, t.nonresonant_weight, t.nonresonant_weight / t.resonant_weight])
            .collect();
        Ok(rows)
    })?;
    let mut data = ctx.dataset("", &["P_over_hw1_kW_per_eV", "beta_abs", "z_over_z0", "resonant_weight", "nonresonant_weight", "nonresonant_over_resonant"]);
    data.extend(blocks.into_iter().flatten());
    let mut manifest = ctx.manifest()?;
    for pt in points {
        manifest.push(pt.problem, labels(&[("E0_keV", 31.0), ("P_over_hw1", pt.power_per_photon_energy)]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn figs2(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let talbots = [Some(5.0), Some(OPERATING_TALBOT), Some(50.0), Some(200.0), None];
    let points = talbots
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            PointSpec { kinetic_energy_kev: Some(31.0), velocity_ratio: None, beta: None, power_per_photon_energy: Some(4.5), talbot_ratio: t, recoil: t.is_some(), ..PointSpec::default() }
                .resolve(&n)
                .map_err(at(k))
        })
        .collect::<Result<Vec<_>>>()?;
    let blocks = par_map(&points, |k, pt| trajectory_rows(&pt.problem, 10, &[pt.talbot_ratio()]).map_err(at(k)))?;
    let mut data = ctx.dataset("", &["zT_over_z0", "z_over_z0", "l", "probability"]);
    data.extend(blocks.into_iter().flatten());
    let mut manifest = ctx.manifest()?;
    for pt in points {
        let t = pt.talbot_ratio();
        manifest.push(pt.problem, labels(&[("E0_keV", 31.0), ("P_over_hw1", 4.5), ("zT_over_z0", t)]));
    }
    Ok(RunOutput::new(vec![data], manifest))
}

fn figs3(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let e_opt = units::kinematics_from_velocity(1.0 / 3.0).map_err(at(0))?.kinetic_energy * 1e-3;
    let spec = |e0: f64, na: f64| PointSpec {
        kinetic_energy_kev: Some(e0),
        velocity_ratio: None,
        beta: None,
        power_per_photon_energy: Some(1.25),
        na1: na,
        frequency_ratio: Some(0.5),
        ..PointSpec::default()
    };
    let mut evolution = Vec::new();
    let mut spectra = Vec::new();
    for &na in &[0.5, 0.2] {
        for e0 in [e_opt, 34.0] {
            evolution.push(spec(e0, na).resolve(&n).map_err(at(evolution.len()))?);
        }
        for e0 in linspace(e_opt - 6.0, e_opt + 6.0, 25) {
            spectra.push(spec(e0, na).resolve(&n).map_err(at(spectra.len()))?);
        }
    }
    let l_max = spectra.iter().chain(&evolution).map(|p| p.problem.l_max).max().unwrap_or(0);
    let evolution: Vec<_> = evolution.into_iter().map(|mut p| {
        p.problem.l_max = l_max;
        p
    }).collect();
    let spectra: Vec<_> = spectra.into_iter().map(|mut p| {
        p.problem.l_max = l_max;
        p
    }).collect();

    let blocks = par_map(&evolution, |k, pt| trajectory_rows(&pt.problem, 10, &[pt.spec.na1, pt.kinetic_energy_kev]).map_err(at(k)))?;
    let mut evo = ctx.dataset("evolution", &["na1", "E0_keV", "z_over_z0", "l", "probability"]);
    evo.extend(blocks.into_iter().flatten());

    let obs = ctx.observables(Vec::new());
    let offset = evolution.len();
    let blocks = par_map(&spectra, |k, pt| {
        let out = evaluate(&pt.problem, &obs).map_err(at(offset + k))?;
        let beta_eff = phase_integral(&pt.problem).beta_eff.norm();
        Ok(out.spectrum.iter().map(|(l, a)| vec![pt.spec.na1, pt.kinetic_energy_kev, pt.kinetic_energy_kev - e_opt, beta_eff, out.resonant_weight, l as f64, a.norm_sqr()]).collect::<Vec<_>>())
    })?;
    let mut spec_data = ctx.dataset("spectra", &["na1", "E0_keV", "E0_minus_Eopt_keV", "beta_eff_abs", "resonant_weight", "l", "probability"]);
    spec_data.extend(blocks.into_iter().flatten());

    let mut manifest = ctx.manifest()?;
    for pt in evolution.into_iter().chain(spectra) {
        manifest.push(pt.problem, labels(&[("E0_keV", pt.kinetic_energy_kev), ("na1", pt.spec.na1)]));
    }
    Ok(RunOutput::new(vec![evo, spec_data], manifest))
}

fn figs5(ctx: &Ctx) -> Result<RunOutput> {
    let n = ctx.numerics(desk())?;
    let problem = operating_problem(&n)?;
    let out = evaluate(&problem, &ctx.observables(Vec::new())).map_err(at(0))?;
    let comb = comb_coefficients_with(problem.focal_beta(), problem.l_max).map_err(at(0))?;
    let mut data = ctx.dataset("", &["l", "probability", "probability_nonrecoil"]);
    for (l, a) in out.spectrum.iter() {
        data.push(vec![l as f64, a.norm_sqr(), comb.get(l).norm_sqr()]);
    }
    let mut manifest = ctx.manifest()?;
    manifest.push(problem, labels(&[("E0_keV", 31.0)]));
    Ok(RunOutput::new(vec![data], manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_recipe_is_a_config_error() {
        let e = run_recipe("fig9z", &RecipeOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn fig2b_zero_power_edge_is_a_delta() {
        let out = run_recipe("fig2b", &RecipeOptions::default()).unwrap();
        let d = &out.datasets[0];
        let rows: Vec<&Vec<f64>> = d.rows.iter().filter(|r| r[0] == 0.0).collect();
        assert!(!rows.is_empty());
        for r in rows {
            assert_eq!(r[3], if r[2] == 0.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn fig2a_routes_agree() {
        let out = run_recipe("fig2a", &RecipeOptions::default()).unwrap();
        let d = &out.datasets[0];
        assert_eq!(d.len(), 192);
        assert_eq!(out.manifest.points.len(), 192);
        for r in &d.rows {
            assert!((r[3] - r[4]).abs() <= 1e-9 * r[3]);
        }
    }

    #[test]
    fn figs5_probabilities_sum_to_one() {
        let out = run_recipe("figs5", &RecipeOptions::default()).unwrap();
        let d = &out.datasets[0];
        let total: f64 = d.column("probability").unwrap().iter().sum();
        let nr: f64 = d.column("probability_nonrecoil").unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-9 && (nr - 1.0).abs() < 1e-9);
    }
}
