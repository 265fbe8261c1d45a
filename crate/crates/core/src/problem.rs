//! The dimensionless problem consumed by every solver, and its reduction from
//! laboratory parameters.
//!
//! Lengths are measured in units of the Rayleigh range `z0`. The couplings are
//! `B̃_jj' = B_jj' z0` and `Ã_jj' = A_jj' z0` with
//! `B_jj' = e² E_j E_j'* / (2ħ m v γ ω_j ω_j')` and `A_jj'` the same with
//! `E_j'` in place of its conjugate. Substituting the beam power
//! `P_j = c² z0 |E_j|² / 2ω_j` gives
//! `|B̃_jj'| = α √((P_j/ω_j)(P_j'/ω_j')) / (m c² βγ)`.

use crate::error::{Error, Result};
use crate::units::{self, constants::*, LabConfig};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Numerical controls for the slice solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Numerics {
    /// Interaction span `L/z0`, used when the lab config gives no mirror separation.
    pub span: f64,
    /// Target slice width `Δz/z0`; ignored when `slices` is set.
    pub slice_width: f64,
    pub slices: Option<usize>,
    /// Sideband truncation; `None` applies [`default_l_max`] to the nonrecoil |β|.
    pub l_max: Option<usize>,
    /// Keep only lattice states with `|ℓ1 + ℓ2| <= cutoff`.
    pub net_exchange_cutoff: Option<usize>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { span: 20.0, slice_width: 0.05, slices: None, l_max: None, net_exchange_cutoff: None }
    }
}

impl Numerics {
    fn slice_count(&self, span: f64) -> usize {
        self.slices.unwrap_or_else(|| (span / self.slice_width).ceil().max(1.0) as usize)
    }
}

/// Sideband truncation that keeps the Bessel comb unitary to < 1e-10:
/// `ceil(2|β|) + max(15, ceil(4√|β|))`.
pub fn default_l_max(beta_abs: f64) -> usize {
    let b = beta_abs.abs();
    (2.0 * b).ceil() as usize + 15usize.max((4.0 * b.sqrt()).ceil() as usize)
}

/// Reduced parameters. All solver outputs depend on the laboratory only through
/// these fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessProblem {
    /// `v/c`.
    pub velocity_ratio: f64,
    /// `B̃_jj'` (Hermitian 2×2).
    pub coupling_b: [[C64; 2]; 2],
    /// `Ã_jj'` (symmetric 2×2).
    pub coupling_a: [[C64; 2]; 2],
    /// `z_T/z0`; `None` switches recoil off (`z_T → ∞`).
    pub talbot_ratio: Option<f64>,
    /// `ω2/ω1`.
    pub frequency_ratio: f64,
    /// `k1 z0` of the copropagating beam.
    pub optical_wavenumber: f64,
    /// `Δ̃_j = (ω_j/v - s_j k_j) z0`.
    pub detuning: [f64; 2],
    /// `L/z0`.
    pub span: f64,
    pub slices: usize,
    pub l_max: usize,
    #[serde(default)]
    pub net_exchange_cutoff: Option<usize>,
}

impl DimensionlessProblem {
    /// Phase-matched problem with equal beam powers, parameterized directly by
    /// the nonrecoil coupling β. Default numerics: `L = 20 z0`, `Δz = z0/20`.
    pub fn phase_matched(velocity_ratio: f64, beta: C64, talbot_ratio: Option<f64>, na1: f64) -> Result<Self> {
        let r = (1.0 - velocity_ratio) / (1.0 + velocity_ratio);
        Self::detuned(velocity_ratio, r, beta, talbot_ratio, na1)
    }

    /// Equal-power problem with an arbitrary frequency ratio `r = ω2/ω1`;
    /// `beta` is `2πi B̃12`, which reaches the comb only when phase matched.
    pub fn detuned(velocity_ratio: f64, frequency_ratio: f64, beta: C64, talbot_ratio: Option<f64>, na1: f64) -> Result<Self> {
        if !(velocity_ratio > 0.0 && velocity_ratio < 1.0) {
            return Err(Error::Domain(format!("v/c must lie in (0, 1), got {velocity_ratio}")));
        }
        if !(frequency_ratio > 0.0 && frequency_ratio < 1.0) {
            return Err(Error::Domain(format!("ω2/ω1 must lie in (0, 1), got {frequency_ratio}")));
        }
        if !(na1 > 0.0) {
            return Err(Error::Domain("zero NA".into()));
        }
        if let Some(t) = talbot_ratio {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("z_T/z0 must be positive, got {t}")));
            }
        }
        let r = frequency_ratio;
        let k1 = 2.0 / (na1 * na1);
        let b12 = beta / (2.0 * PI * C64::i());
        let mag = b12.norm();
        // phase of E2 set to zero, E1 carries arg B̃12
        let couplings = couplings_from_beams([mag * r.sqrt(), mag / r.sqrt()], [b12.arg(), 0.0]);
        let numerics = Numerics::default();
        Ok(Self {
            velocity_ratio,
            coupling_b: couplings.0,
            coupling_a: couplings.1,
            talbot_ratio,
            frequency_ratio: r,
            optical_wavenumber: k1,
            detuning: [k1 * (1.0 / velocity_ratio - 1.0), k1 * r * (1.0 / velocity_ratio + 1.0)],
            span: numerics.span,
            slices: numerics.slice_count(numerics.span),
            l_max: default_l_max(beta.norm()),
            net_exchange_cutoff: None,
        })
    }

    pub fn with_span(mut self, span: f64, slices: usize) -> Self {
        self.span = span;
        self.slices = slices;
        self
    }

    pub fn with_slices(mut self, slices: usize) -> Self {
        self.slices = slices;
        self
    }

    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.l_max = l_max;
        self
    }

    pub fn with_net_exchange_cutoff(mut self, cutoff: Option<usize>) -> Self {
        self.net_exchange_cutoff = cutoff;
        self
    }

    pub fn with_talbot_ratio(mut self, talbot_ratio: Option<f64>) -> Self {
        self.talbot_ratio = talbot_ratio;
        self
    }

    /// Drops the two-photon (nonresonant) couplings.
    pub fn without_nonresonant(mut self) -> Self {
        self.coupling_a = [[C64::new(0.0, 0.0); 2]; 2];
        self
    }

    pub fn apply_numerics(mut self, numerics: &Numerics) -> Self {
        self.span = numerics.span;
        self.slices = numerics.slice_count(numerics.span);
        if let Some(l) = numerics.l_max {
            self.l_max = l;
        }
        self.net_exchange_cutoff = numerics.net_exchange_cutoff;
        self
    }

    /// `β = 2πi B̃12`, the nonrecoil coupling for a full Lorentzian envelope.
    pub fn focal_beta(&self) -> C64 {
        2.0 * PI * C64::i() * self.coupling_b[0][1]
    }

    /// Slice width `Δz/z0`.
    pub fn slice_width(&self) -> f64 {
        self.span / self.slices as f64
    }

    /// Centre of slice `n`, `l_n/z0 = -L/2 + (n + 1/2)Δz`.
    pub fn slice_center(&self, n: usize) -> f64 {
        -0.5 * self.span + (n as f64 + 0.5) * self.slice_width()
    }

    /// `ħ z0 ω1² / (2 m c² v γ³)`: coefficient of `(ℓ1 - rℓ2)²` in the recoil
    /// diagonal, equal to `2π (z0/z_T) (v/c)² / (1 - r)²`.
    pub fn recoil_coefficient(&self) -> f64 {
        match self.talbot_ratio {
            None => 0.0,
            Some(t) => {
                let b = self.velocity_ratio;
                let d = 1.0 - self.frequency_ratio;
                2.0 * PI * b * b / (t * d * d)
            }
        }
    }

    /// Kinematic diagonal (phase mismatch plus recoil) for lattice state (ℓ1, ℓ2).
    pub fn kinetic_diagonal(&self, l1: i64, l2: i64) -> f64 {
        let (l1, l2) = (l1 as f64, l2 as f64);
        let mismatch = -(l1 * self.detuning[0] + l2 * self.detuning[1]);
        let q = l1 - self.frequency_ratio * l2;
        mismatch + self.recoil_coefficient() * q * q
    }

    /// `z0 Ω / v`, the number of beat periods within a Rayleigh range.
    pub fn cycles_per_rayleigh(&self) -> f64 {
        self.optical_wavenumber * (1.0 - self.frequency_ratio) / self.velocity_ratio
    }

    pub fn is_phase_matched(&self) -> bool {
        let d = self.detuning;
        (d[0] - d[1]).abs() <= 1e-12 * d[0].abs().max(d[1].abs()).max(1.0)
    }
}

/// Couplings of two linearly polarized beams with `|B̃_jj| = mags[j]` and field phases `phases`.
fn couplings_from_beams(mags: [f64; 2], phases: [f64; 2]) -> ([[C64; 2]; 2], [[C64; 2]; 2]) {
    let mut b = [[C64::new(0.0, 0.0); 2]; 2];
    let mut a = [[C64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for jp in 0..2 {
            let m = (mags[j] * mags[jp]).sqrt();
            b[j][jp] = C64::from_polar(m, phases[j] - phases[jp]);
            a[j][jp] = C64::from_polar(m, phases[j] + phases[jp]);
        }
    }
    (b, a)
}

/// Reduce a laboratory configuration to the dimensionless problem.
pub fn reduce_to_dimensionless(lab: &LabConfig, numerics: &Numerics) -> Result<DimensionlessProblem> {
    let kin = lab.kinematics()?;
    let beams = lab.beams()?;
    let z0 = units::check_equal_rayleigh(&beams[0], &beams[1])?;
    let beta = kin.velocity_ratio;
    let scale = FINE_STRUCTURE / (ELECTRON_REST_ENERGY_EV * kin.beta_gamma());
    let mags = [scale * beams[0].power_over_frequency(), scale * beams[1].power_over_frequency()];
    let (coupling_b, coupling_a) = couplings_from_beams(mags, [beams[0].phase, beams[1].phase]);

    let w1 = beams[0].photon_energy;
    let w2 = beams[1].photon_energy;
    let k1z0 = beams[0].wavevector() * z0;
    let k2z0 = beams[1].wavevector() * z0;
    let detuning = [k1z0 * (1.0 / beta - 1.0), k2z0 * (1.0 / beta + 1.0)];
    let talbot_ratio = if w1 > w2 { Some(units::talbot_distance(beta, w1 - w2)? / z0) } else { None };
    if talbot_ratio.is_none() {
        return Err(Error::Domain("beam 1 must have the higher frequency (Ω > 0)".into()));
    }

    let span = match lab.interaction_length_mm {
        Some(l) if l > 0.0 => l * 1e-3 / z0,
        Some(l) => return Err(Error::Config(format!("interaction length must be positive, got {l}"))),
        None => numerics.span,
    };
    let beta_abs = 2.0 * PI * coupling_b[0][1].norm();
    Ok(DimensionlessProblem {
        velocity_ratio: beta,
        coupling_b,
        coupling_a,
        talbot_ratio,
        frequency_ratio: w2 / w1,
        optical_wavenumber: k1z0,
        detuning,
        span,
        slices: numerics.slice_count(span),
        l_max: numerics.l_max.unwrap_or_else(|| default_l_max(beta_abs)),
        net_exchange_cutoff: numerics.net_exchange_cutoff,
    })
}

/// `|β|` per unit `P/ħω1` (in kW/eV) for equal powers at phase matching:
/// `2π α ħ / (m c² βγ √r)` times the photon rate.
pub fn beta_per_power(velocity_ratio: f64) -> Result<f64> {
    let kin = units::kinematics_from_velocity(velocity_ratio)?;
    let r = (1.0 - velocity_ratio) / (1.0 + velocity_ratio);
    let photon_rate_energy = 1.0e3 * HBAR_EV_S / JOULE_PER_EV; // ħ × (1 kW/eV) [eV]
    Ok(2.0 * PI * FINE_STRUCTURE * photon_rate_energy / (ELECTRON_REST_ENERGY_EV * kin.beta_gamma() * r.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::coupling_beta;
    use approx::assert_relative_eq;

    #[test]
    fn eq5_matches_b12_route() {
        for &(e0, w1, p, na) in &[(31.0, 2.0, 2.0, 0.2), (200.0, 1.2, 0.3, 0.05), (5.0, 0.117, 80.0, 0.5)] {
            let lab = LabConfig::phase_matched(e0, w1, p, na);
            let beta = coupling_beta(&lab).unwrap();
            let prob = reduce_to_dimensionless(&lab, &Numerics::default()).unwrap();
            let other = prob.focal_beta();
            assert_relative_eq!(beta.re, other.re, epsilon = 1e-12 * beta.norm());
            assert_relative_eq!(beta.im, other.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn beta_constant_at_third_light_speed() {
        let lab = LabConfig::phase_matched(units::kinematics_from_velocity(1.0 / 3.0).unwrap().kinetic_energy / 1e3, 2.0, 1.0, 0.2);
        let beta = coupling_beta(&lab).unwrap().norm();
        assert_relative_eq!(beta, beta_per_power(1.0 / 3.0).unwrap(), max_relative = 1e-12);
        assert!((beta - 1.4748).abs() < 1e-3, "{beta}");
    }

    #[test]
    fn ratio_invariance() {
        // same (P/ħω1, z_T/z0, v/c): scale ω1 by s and NA² by s keeps z_T/z0
        let base = LabConfig::phase_matched(31.0, 2.0, 3.0, 0.2);
        let s: f64 = 1.7;
        let scaled = LabConfig::phase_matched(31.0, 2.0 * s, 3.0, 0.2 * s.sqrt());
        let a = reduce_to_dimensionless(&base, &Numerics::default()).unwrap();
        let b = reduce_to_dimensionless(&scaled, &Numerics::default()).unwrap();
        assert_relative_eq!(a.talbot_ratio.unwrap(), b.talbot_ratio.unwrap(), max_relative = 1e-12);
        for j in 0..2 {
            for jp in 0..2 {
                assert!((a.coupling_b[j][jp] - b.coupling_b[j][jp]).norm() < 1e-12 * a.coupling_b[j][jp].norm());
            }
        }
        assert_relative_eq!(a.frequency_ratio, b.frequency_ratio, max_relative = 1e-14);
    }

    #[test]
    fn fixed_photon_rate_keeps_b12() {
        let a = reduce_to_dimensionless(&LabConfig::phase_matched(31.0, 2.0, 3.0, 0.2), &Numerics::default()).unwrap();
        let b = reduce_to_dimensionless(&LabConfig::phase_matched(31.0, 0.5, 3.0, 0.2), &Numerics::default()).unwrap();
        assert_relative_eq!(a.coupling_b[0][1].norm(), b.coupling_b[0][1].norm(), max_relative = 1e-12);
    }

    #[test]
    fn zero_power_zero_couplings() {
        let lab = LabConfig::phase_matched(31.0, 2.0, 0.0, 0.2);
        let p = reduce_to_dimensionless(&lab, &Numerics::default()).unwrap();
        assert!(p.coupling_b.iter().flatten().chain(p.coupling_a.iter().flatten()).all(|c| c.norm() == 0.0));
    }

    #[test]
    fn phase_matched_constructor_agrees_with_lab() {
        let lab = LabConfig::phase_matched(31.0, 2.0, 2.0, 0.2);
        let p = reduce_to_dimensionless(&lab, &Numerics::default()).unwrap();
        let q = DimensionlessProblem::phase_matched(p.velocity_ratio, p.focal_beta(), p.talbot_ratio, 0.2).unwrap();
        for j in 0..2 {
            for jp in 0..2 {
                assert!((p.coupling_b[j][jp] - q.coupling_b[j][jp]).norm() < 1e-12);
                assert!((p.coupling_a[j][jp] - q.coupling_a[j][jp]).norm() < 1e-12);
            }
        }
        assert_relative_eq!(p.detuning[0], q.detuning[0], max_relative = 1e-12);
        assert_relative_eq!(p.detuning[1], q.detuning[1], max_relative = 1e-12);
        assert!(p.is_phase_matched());
        assert_eq!(p.slices, 400);
    }

    #[test]
    fn recoil_on_resonant_manifold_is_talbot_phase() {
        let p = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::new(0.0, 1.0), Some(50.0), 0.2).unwrap();
        for l in -5i64..=5 {
            let expect = 2.0 * PI * (l * l) as f64 / 50.0;
            assert_relative_eq!(p.kinetic_diagonal(l, -l), expect, epsilon = 1e-11);
        }
    }

    #[test]
    fn cycles_per_rayleigh_value() {
        let p = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::new(0.0, 1.0), None, 0.2).unwrap();
        assert_relative_eq!(p.cycles_per_rayleigh(), 75.0, max_relative = 1e-12);
    }
}
