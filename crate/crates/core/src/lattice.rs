//! Sliced integration of the two-index amplitude lattice `α_{ℓ1ℓ2}(z)` with
//! recoil.
//!
//! State (ℓ1, ℓ2) is the component `exp(-iℓ1ω1(t - z/c) - iℓ2ω2(t + z/c))` of the
//! envelope, so ℓ1 counts quanta absorbed from beam 1 and ℓ2 quanta emitted
//! into beam 2 (with sign). The resonant manifold is ℓ1 + ℓ2 = 0 and the net
//! sideband index is ℓ = ℓ1 = -ℓ2. Within slice n the generator is
//! `i dα/dz = M⁽ⁿ⁾ α` (lengths in z0) with
//!
//! * diagonal `-(ℓ1Δ̃1 + ℓ2Δ̃2) + ρ(ℓ1 - rℓ2)² + 2 g_n (B̃11 + B̃22)`,
//! * `2 g_n B̃12` from (ℓ1-1, ℓ2+1) and its conjugate from (ℓ1+1, ℓ2-1),
//! * `-2 g_n Ã12` from (ℓ1-1, ℓ2-1), `-g_n Ã11` from (ℓ1-2, ℓ2),
//!   `-g_n Ã22` from (ℓ1, ℓ2-2), and conjugates from the mirrored offsets,
//!
//! where `g_n = 1/(1 + l_n²)` and ρ is [`DimensionlessProblem::recoil_coefficient`].
//! Every coupling changes ℓ1 + ℓ2 by 0 or ±2, so odd-parity states are never
//! populated and are left out of the layout.

use crate::error::{Error, Result};
use crate::expm::{chebyshev_expm_action, expm, hermitian_deviation};
use crate::problem::DimensionlessProblem;
use crate::spectrum::{Provenance, SidebandSpectrum};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const NONE: u32 = u32::MAX;

/// Neighbour offsets `(dℓ1, dℓ2)` of the source state, in coupling order.
pub const STENCIL: [(i64, i64); 8] = [(-1, 1), (1, -1), (-1, -1), (1, 1), (-2, 0), (2, 0), (0, -2), (0, 2)];

/// Largest slice width accepted by [`build_slice_matrix`].
pub const MAX_SLICE_WIDTH: f64 = 0.1;
/// Boundary amplitude above which truncation is flagged.
pub const TRUNCATION_AMPLITUDE: f64 = 1e-8;
/// Dense propagators are refused above this many lattice states.
pub const DENSE_STATE_LIMIT: usize = 1200;

/// Active lattice states and their stencil neighbours.
#[derive(Debug)]
pub struct LatticeLayout {
    l_max: usize,
    net_exchange_cutoff: Option<usize>,
    states: Vec<(i64, i64)>,
    grid_index: Vec<u32>,
    neighbours: Vec<[u32; 8]>,
    boundary: Vec<u32>,
}

impl LatticeLayout {
    pub fn new(l_max: usize, net_exchange_cutoff: Option<usize>) -> Self {
        let side = 2 * l_max + 1;
        let l = l_max as i64;
        let keep = |l1: i64, l2: i64| {
            let n = l1 + l2;
            l1.abs() <= l && l2.abs() <= l && n % 2 == 0 && net_exchange_cutoff.map_or(true, |c| n.unsigned_abs() as usize <= c)
        };
        let mut states = Vec::new();
        let mut grid_index = vec![NONE; side * side];
        for l1 in -l..=l {
            for l2 in -l..=l {
                if keep(l1, l2) {
                    grid_index[((l1 + l) as usize) * side + (l2 + l) as usize] = states.len() as u32;
                    states.push((l1, l2));
                }
            }
        }
        let lookup = |l1: i64, l2: i64| {
            if keep(l1, l2) {
                grid_index[((l1 + l) as usize) * side + (l2 + l) as usize]
            } else {
                NONE
            }
        };
        let neighbours = states.iter().map(|&(l1, l2)| STENCIL.map(|(d1, d2)| lookup(l1 + d1, l2 + d2))).collect();
        let boundary = states
            .iter()
            .enumerate()
            .filter(|(_, &(l1, l2))| l1.abs() == l || l2.abs() == l)
            .map(|(i, _)| i as u32)
            .collect();
        Self { l_max, net_exchange_cutoff, states, grid_index, neighbours, boundary }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn net_exchange_cutoff(&self) -> Option<usize> {
        self.net_exchange_cutoff
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[(i64, i64)] {
        &self.states
    }

    /// Position of (ℓ1, ℓ2) in the active list.
    pub fn index(&self, l1: i64, l2: i64) -> Option<usize> {
        let l = self.l_max as i64;
        if l1.abs() > l || l2.abs() > l {
            return None;
        }
        let side = 2 * self.l_max + 1;
        match self.grid_index[((l1 + l) as usize) * side + (l2 + l) as usize] {
            NONE => None,
            i => Some(i as usize),
        }
    }
}

/// Amplitudes on the full square `[-l_max, l_max]²`, row-major in ℓ1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeLattice {
    l_max: usize,
    amplitudes: Vec<C64>,
    /// Last slice applied, `None` before the first.
    pub slice: Option<usize>,
    /// Position `z/z0` reached (slice exit).
    pub position: f64,
}

impl AmplitudeLattice {
    /// `δ_{ℓ1 0} δ_{ℓ2 0}` at the entrance `z = -L/2`.
    pub fn initial(l_max: usize, span: f64) -> Self {
        let side = 2 * l_max + 1;
        let mut amplitudes = vec![ZERO; side * side];
        amplitudes[l_max * side + l_max] = C64::new(1.0, 0.0);
        Self { l_max, amplitudes, slice: None, position: -0.5 * span }
    }

    fn from_active(layout: &LatticeLayout, v: &[C64], slice: Option<usize>, position: f64) -> Self {
        let side = 2 * layout.l_max + 1;
        let l = layout.l_max as i64;
        let mut amplitudes = vec![ZERO; side * side];
        for (&(l1, l2), a) in layout.states.iter().zip(v) {
            amplitudes[((l1 + l) as usize) * side + (l2 + l) as usize] = *a;
        }
        Self { l_max: layout.l_max, amplitudes, slice, position }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn get(&self, l1: i64, l2: i64) -> C64 {
        let l = self.l_max as i64;
        if l1.abs() > l || l2.abs() > l {
            return ZERO;
        }
        self.amplitudes[((l1 + l) as usize) * (2 * self.l_max + 1) + (l2 + l) as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `Σ_ℓ |α_{ℓ,-ℓ}|²`.
    pub fn resonant_weight(&self) -> f64 {
        let l = self.l_max as i64;
        (-l..=l).map(|k| self.get(k, -k).norm_sqr()).sum()
    }

    /// `Σ_{ℓ1+ℓ2≠0} |α_{ℓ1ℓ2}|²`.
    pub fn nonresonant_weight(&self) -> f64 {
        self.norm_sqr() - self.resonant_weight()
    }

    /// Largest |α| on the edge `|ℓ1| = l_max` or `|ℓ2| = l_max`.
    pub fn boundary_amplitude(&self) -> f64 {
        let l = self.l_max as i64;
        let mut worst = 0.0f64;
        for k in -l..=l {
            for (a, b) in [(k, l), (k, -l), (l, k), (-l, k)] {
                worst = worst.max(self.get(a, b).norm());
            }
        }
        worst
    }
}

/// Generator of slice n, stored as a diagonal plus uniform stencil couplings.
#[derive(Debug, Clone)]
pub struct SliceMatrix {
    layout: Arc<LatticeLayout>,
    pub slice: usize,
    /// Slice centre `l_n/z0`.
    pub position: f64,
    /// `1/(1 + (l_n/z0)²)`.
    pub envelope: f64,
    diagonal: Vec<f64>,
    /// Couplings for [`STENCIL`] offsets, envelope included.
    couplings: [C64; 8],
    /// Kinetic part of the diagonal only (no field shift).
    kinetic: Arc<Vec<f64>>,
    shift: f64,
}

impl SliceMatrix {
    pub fn layout(&self) -> &LatticeLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn couplings(&self) -> &[C64; 8] {
        &self.couplings
    }

    /// `M_{(ℓ1ℓ2),(ℓ1'ℓ2')}`; zero for inactive states.
    pub fn element(&self, row: (i64, i64), col: (i64, i64)) -> C64 {
        if self.layout.index(row.0, row.1).is_none() || self.layout.index(col.0, col.1).is_none() {
            return ZERO;
        }
        if row == col {
            return C64::new(self.diagonal[self.layout.index(row.0, row.1).unwrap()], 0.0);
        }
        let d = (col.0 - row.0, col.1 - row.1);
        STENCIL.iter().position(|&s| s == d).map_or(ZERO, |k| self.couplings[k])
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = C64::new(self.diagonal[i], 0.0);
            for (k, &j) in self.layout.neighbours[i].iter().enumerate() {
                if j != NONE {
                    m[[i, j as usize]] += self.couplings[k];
                }
            }
        }
        m
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.apply_parts(x, y, true);
    }

    fn apply_parts(&self, x: &[C64], y: &mut [C64], with_diagonal: bool) {
        let c = &self.couplings;
        for (i, nb) in self.layout.neighbours.iter().enumerate() {
            let mut s = if with_diagonal { x[i] * self.diagonal[i] } else { ZERO };
            for k in 0..8 {
                let j = nb[k];
                if j != NONE {
                    s += c[k] * x[j as usize];
                }
            }
            y[i] = s;
        }
    }

    fn coupling_radius(&self) -> f64 {
        self.couplings.iter().map(|c| c.norm()).sum()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let r = self.coupling_radius();
        let (lo, hi) = self.kinetic.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
        (lo + self.shift - r, hi + self.shift + r)
    }
}

struct Generator {
    layout: Arc<LatticeLayout>,
    kinetic: Arc<Vec<f64>>,
}

impl Generator {
    fn new(problem: &DimensionlessProblem) -> Self {
        let layout = Arc::new(LatticeLayout::new(problem.l_max, problem.net_exchange_cutoff));
        let kinetic = Arc::new(layout.states.iter().map(|&(l1, l2)| problem.kinetic_diagonal(l1, l2)).collect());
        Self { layout, kinetic }
    }

    fn slice(&self, problem: &DimensionlessProblem, n: usize) -> Result<SliceMatrix> {
        if n >= problem.slices {
            return Err(Error::Precondition(format!("slice {n} outside 0..{}", problem.slices)));
        }
        let dz = problem.slice_width();
        if !(dz > 0.0 && dz <= MAX_SLICE_WIDTH) {
            return Err(Error::Precondition(format!("slice width {dz} z0 exceeds z0/10")));
        }
        let position = problem.slice_center(n);
        let g = 1.0 / (1.0 + position * position);
        let b = &problem.coupling_b;
        let a = &problem.coupling_a;
        let couplings = [
            2.0 * g * b[0][1],
            2.0 * g * b[0][1].conj(),
            -2.0 * g * a[0][1],
            -2.0 * g * a[0][1].conj(),
            -g * a[0][0],
            -g * a[0][0].conj(),
            -g * a[1][1],
            -g * a[1][1].conj(),
        ];
        let shift = 2.0 * g * (b[0][0] + b[1][1]).re;
        let diagonal = self.kinetic.iter().map(|k| k + shift).collect();
        Ok(SliceMatrix {
            layout: self.layout.clone(),
            slice: n,
            position,
            envelope: g,
            diagonal,
            couplings,
            kinetic: self.kinetic.clone(),
            shift,
        })
    }
}

/// Generator `M⁽ⁿ⁾` of slice n.
pub fn build_slice_matrix(problem: &DimensionlessProblem, n: usize) -> Result<SliceMatrix> {
    Generator::new(problem).slice(problem, n)
}

/// Dense `exp(-i M Δz)` after checking Hermiticity to 1e-13 elementwise.
pub fn slice_propagator(m: &SliceMatrix, dz: f64) -> Result<Array2<C64>> {
    if m.dim() > DENSE_STATE_LIMIT {
        return Err(Error::Precondition(format!("{} states is too many for a dense propagator", m.dim())));
    }
    let dense = m.to_dense();
    let deviation = hermitian_deviation(&dense);
    if deviation > 1e-13 {
        return Err(Error::NotHermitian { deviation });
    }
    expm(&dense.mapv(|z| z * C64::new(0.0, -dz)))
}

/// Slice-propagation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Chebyshev action of the exact slice exponential.
    #[default]
    Chebyshev,
    /// Dense scaling-and-squaring Padé exponential (small lattices only).
    Pade,
    /// Second-order splitting: diagonal half steps around the coupling kernel.
    Strang,
}

/// Which slices to snapshot.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    #[default]
    Final,
    Every(usize),
    Slices(Vec<usize>),
}

impl Schedule {
    fn records(&self, n: usize, total: usize) -> bool {
        match self {
            Schedule::Final => false,
            Schedule::Every(k) => *k > 0 && ((n + 1) % k == 0 || n + 1 == total),
            Schedule::Slices(v) => v.contains(&n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub backend: Backend,
    pub schedule: Schedule,
    /// Abort when `|‖α‖² - 1|` exceeds this.
    pub norm_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { backend: Backend::Chebyshev, schedule: Schedule::Final, norm_tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    pub final_lattice: AmplitudeLattice,
    pub snapshots: Vec<AmplitudeLattice>,
    /// Largest boundary amplitude seen at any slice.
    pub boundary_amplitude: f64,
    pub truncation_flagged: bool,
    /// Largest `|‖α‖² - 1|` seen at any slice.
    pub norm_drift: f64,
    /// Largest nonresonant/resonant weight ratio seen at any slice.
    pub peak_nonresonant_ratio: f64,
    pub matvecs: usize,
}

/// One row of a propagation trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub slice: Option<usize>,
    /// `z/z0` at the slice exit.
    pub position: f64,
    /// `|α_{ℓ,-ℓ}|²` for ℓ = -l_max..=l_max.
    pub resonant_probabilities: Vec<f64>,
    pub resonant_weight: f64,
    pub nonresonant_weight: f64,
}

impl Evolution {
    pub fn trajectory(&self) -> Vec<TrajectoryRecord> {
        self.snapshots
            .iter()
            .map(|s| {
                let l = s.l_max as i64;
                TrajectoryRecord {
                    slice: s.slice,
                    position: s.position,
                    resonant_probabilities: (-l..=l).map(|k| s.get(k, -k).norm_sqr()).collect(),
                    resonant_weight: s.resonant_weight(),
                    nonresonant_weight: s.nonresonant_weight(),
                }
            })
            .collect()
    }
}

fn weights(layout: &LatticeLayout, v: &[C64]) -> (f64, f64) {
    let mut res = 0.0;
    let mut non = 0.0;
    for (&(l1, l2), a) in layout.states.iter().zip(v) {
        if l1 + l2 == 0 {
            res += a.norm_sqr();
        } else {
            non += a.norm_sqr();
        }
    }
    (res, non)
}

/// Integrates the lattice through all slices from `δ_{ℓ1 0}δ_{ℓ2 0}`.
pub fn evolve(problem: &DimensionlessProblem, options: &EvolveOptions) -> Result<Evolution> {
    let gen = Generator::new(problem);
    let layout = gen.layout.clone();
    let dim = layout.len();
    if options.backend == Backend::Pade && dim > DENSE_STATE_LIMIT {
        return Err(Error::Precondition(format!("{dim} states is too many for the dense backend")));
    }
    let dz = problem.slice_width();
    let mut v = vec![ZERO; dim];
    v[layout.index(0, 0).expect("origin is always active")] = C64::new(1.0, 0.0);

    let mut snapshots = Vec::new();
    let mut boundary_amplitude = 0.0f64;
    let mut norm_drift = 0.0f64;
    let mut peak_ratio = 0.0f64;
    let mut matvecs = 0;
    let half_phase: Vec<C64> = if options.backend == Backend::Strang {
        gen.kinetic.iter().map(|k| C64::from_polar(1.0, -0.5 * k * dz)).collect()
    } else {
        Vec::new()
    };

    for n in 0..problem.slices {
        let m = gen.slice(problem, n)?;
        v = match options.backend {
            Backend::Chebyshev => {
                let (out, k) = chebyshev_expm_action(|x, y| m.apply(x, y), m.spectral_bounds(), dz, &v);
                matvecs += k;
                out
            }
            Backend::Pade => {
                let u = slice_propagator(&m, dz)?;
                let x = ndarray::Array1::from(v);
                u.dot(&x).to_vec()
            }
            Backend::Strang => {
                let shift = C64::from_polar(1.0, -0.5 * m.shift * dz);
                for (a, p) in v.iter_mut().zip(&half_phase) {
                    *a *= p * shift;
                }
                let r = m.coupling_radius();
                let (mut out, k) = chebyshev_expm_action(|x, y| m.apply_parts(x, y, false), (-r, r), dz, &v);
                matvecs += k;
                for (a, p) in out.iter_mut().zip(&half_phase) {
                    *a *= p * shift;
                }
                out
            }
        };

        let (res, non) = weights(&layout, &v);
        let drift = (res + non - 1.0).abs();
        norm_drift = norm_drift.max(drift);
        if drift > options.norm_tolerance {
            return Err(Error::NormDrift { slice: n, drift, limit: options.norm_tolerance });
        }
        if res > 0.0 {
            peak_ratio = peak_ratio.max(non / res);
        }
        for &i in &layout.boundary {
            boundary_amplitude = boundary_amplitude.max(v[i as usize].norm());
        }
        if options.schedule.records(n, problem.slices) {
            let exit = m.position + 0.5 * dz;
            snapshots.push(AmplitudeLattice::from_active(&layout, &v, Some(n), exit));
        }
    }
    let last = problem.slices.checked_sub(1);
    let final_lattice = AmplitudeLattice::from_active(&layout, &v, last, 0.5 * problem.span);
    if boundary_amplitude > TRUNCATION_AMPLITUDE {
        log::warn!("sideband truncation l_max = {} not converged: boundary |α| = {boundary_amplitude:.3e}", problem.l_max);
    }
    Ok(Evolution {
        final_lattice,
        snapshots,
        boundary_amplitude,
        truncation_flagged: boundary_amplitude > TRUNCATION_AMPLITUDE,
        norm_drift,
        peak_nonresonant_ratio: peak_ratio,
        matvecs,
    })
}

/// Resonant amplitudes `α_ℓ = α_{ℓ,-ℓ}` of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantExtraction {
    /// Renormalized to unit total probability.
    pub spectrum: SidebandSpectrum,
    pub resonant_weight: f64,
    pub nonresonant_weight: f64,
}

pub fn extract_resonant(lattice: &AmplitudeLattice) -> ResonantExtraction {
    let l = lattice.l_max as i64;
    let amps: Vec<C64> = (-l..=l).map(|k| lattice.get(k, -k)).collect();
    let spectrum = SidebandSpectrum::new(amps, Provenance::Recoil).expect("odd support").normalized();
    ResonantExtraction {
        spectrum,
        resonant_weight: lattice.resonant_weight(),
        nonresonant_weight: lattice.nonresonant_weight(),
    }
}

/// Moves the exit spectrum (at `z = L/2`) back to the focal reference plane by
/// undoing free propagation over `L/2`, so that distances downstream are
/// measured from `z = 0` as for the nonrecoil comb.
pub fn refer_to_focus(spectrum: &SidebandSpectrum, problem: &DimensionlessProblem) -> SidebandSpectrum {
    let mut out = spectrum.clone();
    let half = 0.5 * problem.span;
    let l = out.l_max() as i64;
    for (a, k) in out.amplitudes_mut().iter_mut().zip(-l..=l) {
        *a *= C64::from_polar(1.0, problem.kinetic_diagonal(k, -k) * half);
    }
    out
}

/// Resonant outcome of a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoilOutcome {
    /// Renormalized resonant spectrum at the exit plane.
    pub exit: SidebandSpectrum,
    /// Same spectrum referred to the focus.
    pub focal: SidebandSpectrum,
    pub resonant_weight: f64,
    pub nonresonant_weight: f64,
    pub truncation_flagged: bool,
    pub boundary_amplitude: f64,
    pub peak_nonresonant_ratio: f64,
}

/// Runs [`evolve`] with default options and extracts the resonant spectrum.
pub fn solve_recoil(problem: &DimensionlessProblem) -> Result<RecoilOutcome> {
    solve_recoil_with(problem, &EvolveOptions::default())
}

pub fn solve_recoil_with(problem: &DimensionlessProblem, options: &EvolveOptions) -> Result<RecoilOutcome> {
    let ev = evolve(problem, options)?;
    let ex = extract_resonant(&ev.final_lattice);
    let mut focal = refer_to_focus(&ex.spectrum, problem);
    focal.beta = Some(problem.focal_beta());
    let mut exit = ex.spectrum;
    exit.beta = Some(problem.focal_beta());
    Ok(RecoilOutcome {
        exit,
        focal,
        resonant_weight: ex.resonant_weight,
        nonresonant_weight: ex.nonresonant_weight,
        truncation_flagged: ev.truncation_flagged,
        boundary_amplitude: ev.boundary_amplitude,
        peak_nonresonant_ratio: ev.peak_nonresonant_ratio,
    })
}
