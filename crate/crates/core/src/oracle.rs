//! Brute-force split-step Fourier integration of the envelope equation in the
//! frame comoving with the electron.
//!
//! With `x = (z - vt)/z0` and `τ = vt/z0`, the envelope obeys
//! `i∂_τ φ = ρ K1⁻² (-i∂_x)² φ + V(x, τ) φ` with
//! `V = 4 g(τ) (Σ_j Im{f_j e^{iθ_j}})²`, `θ1 = K1 x - Δ̃1 τ`, `θ2 = -K2 x - Δ̃2 τ`,
//! `g(τ) = 1/(1 + τ²)` and `f_j f_j'* = B̃_jj'`, `f_j f_j' = Ã_jj'`. For
//! `ω2/ω1 = p/q` the potential is periodic on `x ∈ [0, 2πq/K1)`, where sideband
//! ℓ is Fourier mode `ℓ(p + q)`.

use crate::error::{Error, Result};
use crate::problem::DimensionlessProblem;
use crate::spectrum::{Provenance, SidebandSpectrum};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest denominator accepted for `ω2/ω1`.
pub const MAX_DENOMINATOR: u64 = 64;
/// Minimum samples per beat wavelength `2π/(K1 + K2)`.
pub const MIN_POINTS_PER_BEAT: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// FFT size over the periodic domain.
    pub points: usize,
    /// Step in `τ = vt/z0`.
    pub time_step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 256, time_step: 1e-3 }
    }
}

impl GridSpec {
    /// Both steps halved.
    pub fn refined(&self) -> Self {
        Self { points: 2 * self.points, time_step: 0.5 * self.time_step }
    }
}

/// Grid quantities derived for a given problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedGrid {
    pub numerator: u64,
    pub denominator: u64,
    /// Domain length in units of z0.
    pub extent: f64,
    pub steps: usize,
    pub points_per_beat: f64,
    /// Largest potential phase per step.
    pub potential_phase: f64,
}

fn rational(r: f64) -> Result<(u64, u64)> {
    for q in 1..=MAX_DENOMINATOR {
        let p = (r * q as f64).round();
        if p >= 1.0 && (r - p / q as f64).abs() < 1e-10 {
            return Ok((p as u64, q));
        }
    }
    Err(Error::Precondition(format!("frequency ratio {r} has no rational form with denominator <= {MAX_DENOMINATOR}")))
}

/// Beam amplitudes `f_j` consistent with both coupling matrices.
fn beam_amplitudes(problem: &DimensionlessProblem) -> Result<[C64; 2]> {
    let b = &problem.coupling_b;
    let a = &problem.coupling_a;
    let f2 = a[1][1].sqrt();
    let f1 = if f2.norm() > 0.0 { b[0][1] / f2.conj() } else { a[0][0].sqrt() };
    let scale = b.iter().flatten().chain(a.iter().flatten()).map(|z| z.norm()).fold(1e-300, f64::max);
    let tol = 1e-9 * scale;
    let ok = (f1 * f1.conj() - b[0][0]).norm() < tol
        && (f2 * f2.conj() - b[1][1]).norm() < tol
        && (f1 * f2.conj() - b[0][1]).norm() < tol
        && (f1 * f1 - a[0][0]).norm() < tol
        && (f1 * f2 - a[0][1]).norm() < tol;
    if !ok {
        return Err(Error::Precondition("couplings are not generated by two plane-wave amplitudes".into()));
    }
    Ok([f1, f2])
}

pub fn resolve_grid(problem: &DimensionlessProblem, grid: &GridSpec) -> Result<ResolvedGrid> {
    let (p, q) = rational(problem.frequency_ratio)?;
    if !grid.points.is_power_of_two() || grid.points < 16 {
        return Err(Error::Grid(format!("points must be a power of two >= 16, got {}", grid.points)));
    }
    if !(grid.time_step > 0.0) {
        return Err(Error::Grid("time step must be positive".into()));
    }
    let points_per_beat = grid.points as f64 / (p + q) as f64;
    if points_per_beat < MIN_POINTS_PER_BEAT {
        return Err(Error::Precondition(format!("{points_per_beat:.1} points per beat wavelength, need {MIN_POINTS_PER_BEAT}")));
    }
    let f = beam_amplitudes(problem)?;
    let vmax = 4.0 * (f[0].norm() + f[1].norm()).powi(2);
    let potential_phase = vmax * grid.time_step;
    if potential_phase > 0.5 {
        return Err(Error::Grid(format!("potential phase {potential_phase:.3} per step exceeds 0.5")));
    }
    let steps = (problem.span / grid.time_step).round().max(1.0) as usize;
    Ok(ResolvedGrid {
        numerator: p,
        denominator: q,
        extent: 2.0 * PI * q as f64 / problem.optical_wavenumber,
        steps,
        points_per_beat,
        potential_phase,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    /// Renormalized resonant spectrum at the exit plane.
    pub spectrum: SidebandSpectrum,
    /// Weight in the resonant Fourier modes before renormalization.
    pub resonant_weight: f64,
    pub norm_drift: f64,
    pub grid: ResolvedGrid,
}

/// Integrates from `τ = -L/2` to `L/2` starting from `φ = 1`.
pub fn integrate(problem: &DimensionlessProblem, grid: &GridSpec) -> Result<OracleRun> {
    let g = resolve_grid(problem, grid)?;
    let f = beam_amplitudes(problem)?;
    let n = grid.points;
    let k1 = problem.optical_wavenumber;
    let k2 = problem.frequency_ratio * k1;
    let dx = g.extent / n as f64;
    let dt = problem.span / g.steps as f64;

    // spatial carriers e^{iK1 x}, e^{-iK2 x}
    let c1: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, k1 * i as f64 * dx)).collect();
    let c2: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, -k2 * i as f64 * dx)).collect();
    let rho = problem.recoil_coefficient();
    let kinetic = |half: bool| -> Vec<C64> {
        let s = if half { 0.5 } else { 1.0 };
        (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                let wave = 2.0 * PI * m / g.extent;
                C64::from_polar(1.0, -s * rho * (wave / k1).powi(2) * dt)
            })
            .collect()
    };
    let kin_half = kinetic(true);
    let kin_full = kinetic(false);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let inv_n = 1.0 / n as f64;

    let mut psi = vec![C64::new(1.0, 0.0); n];
    fwd.process(&mut psi);
    for (a, k) in psi.iter_mut().zip(&kin_half) {
        *a *= k * inv_n;
    }
    let tau0 = -0.5 * problem.span;
    let [d1, d2] = problem.detuning;
    for s in 0..g.steps {
        inv.process(&mut psi);
        let tau = tau0 + (s as f64 + 0.5) * dt;
        let env = 1.0 / (1.0 + tau * tau);
        let e1 = f[0] * C64::from_polar(1.0, -d1 * tau);
        let e2 = f[1] * C64::from_polar(1.0, -d2 * tau);
        for i in 0..n {
            let field = (e1 * c1[i]).im + (e2 * c2[i]).im;
            let v = 4.0 * env * field * field;
            psi[i] *= C64::from_polar(1.0, -v * dt);
        }
        fwd.process(&mut psi);
        let kin = if s + 1 == g.steps { &kin_half } else { &kin_full };
        for (a, k) in psi.iter_mut().zip(kin) {
            *a *= k * inv_n;
        }
    }
    let total: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let norm_drift = (total - 1.0).abs();
    if norm_drift > 1e-6 {
        return Err(Error::NormDrift { slice: g.steps, drift: norm_drift, limit: 1e-6 });
    }

    let stride = (g.numerator + g.denominator) as i64;
    let l_max = problem.l_max as i64;
    let tau_end = 0.5 * problem.span;
    let mut amps = Vec::with_capacity(2 * problem.l_max + 1);
    for l in -l_max..=l_max {
        let mode = l * stride;
        let a = if mode.unsigned_abs() as usize >= n / 2 {
            C64::new(0.0, 0.0)
        } else {
            psi[mode.rem_euclid(n as i64) as usize]
        };
        amps.push(a * C64::from_polar(1.0, l as f64 * (d1 - d2) * tau_end));
    }
    let mut spectrum = SidebandSpectrum::new(amps, Provenance::Oracle)?;
    let resonant_weight = spectrum.total_probability();
    spectrum = spectrum.normalized();
    spectrum.beta = Some(problem.focal_beta());
    Ok(OracleRun { spectrum, resonant_weight, norm_drift, grid: g })
}

/// Distances between two spectra on their common (zero-padded) support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    /// `min_θ ‖a - e^{iθ} b‖₂`.
    pub l2: f64,
    /// `½ Σ |p_a - p_b|`.
    pub total_variation: f64,
    /// `max_ℓ |a_ℓ - e^{iθ*} b_ℓ|` and its ℓ.
    pub worst: f64,
    pub worst_index: i64,
}

pub fn compare_spectra(a: &SidebandSpectrum, b: &SidebandSpectrum) -> SpectrumComparison {
    let l = a.l_max().max(b.l_max()) as i64;
    let overlap: C64 = (-l..=l).map(|k| a.get(k) * b.get(k).conj()).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let mut l2 = 0.0;
    let mut tv = 0.0;
    let mut worst = 0.0;
    let mut worst_index = 0;
    for k in -l..=l {
        let d = (a.get(k) - phase * b.get(k)).norm();
        l2 += d * d;
        tv += (a.get(k).norm_sqr() - b.get(k).norm_sqr()).abs();
        if d > worst {
            worst = d;
            worst_index = k;
        }
    }
    SpectrumComparison { l2: l2.sqrt(), total_variation: 0.5 * tv, worst, worst_index }
}

/// Result at a grid and at the grid with both steps halved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub coarse: GridSpec,
    pub fine: GridSpec,
    /// Phase-minimized L² change under refinement.
    pub refinement_l2: f64,
    pub norm_drift: f64,
}

pub fn integrate_with_convergence(problem: &DimensionlessProblem, grid: &GridSpec) -> Result<(OracleRun, ConvergenceReport)> {
    let coarse = integrate(problem, grid)?;
    let fine_grid = grid.refined();
    let fine = integrate(problem, &fine_grid)?;
    let report = ConvergenceReport {
        coarse: *grid,
        fine: fine_grid,
        refinement_l2: compare_spectra(&coarse.spectrum, &fine.spectrum).l2,
        norm_drift: coarse.norm_drift.max(fine.norm_drift),
    };
    Ok((fine, report))
}
