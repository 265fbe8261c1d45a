//! Physical constants, electron kinematics, phase matching and Gaussian-beam
//! geometry.
//!
//! Internal unit system: energies in eV, lengths in metres, times in seconds,
//! powers in watts. Optical frequencies are carried as photon energies `ħω`
//! in eV; angular frequencies are recovered through [`constants::HBAR_EV_S`].

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// CODATA 2018 values.
pub mod constants {
    /// Electron rest energy `m_e c²` [eV].
    pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.950_00;
    /// Reduced Planck constant [eV s].
    pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
    /// `ħc` [eV m].
    pub const HBAR_C_EV_M: f64 = HBAR_EV_S * SPEED_OF_LIGHT;
    /// Speed of light [m/s].
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Fine-structure constant `e²/ħc` (Gaussian units).
    pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
    /// Joules per electronvolt.
    pub const JOULE_PER_EV: f64 = 1.602_176_634e-19;
    /// Speed of light in cm/s, for Gaussian-unit field amplitudes.
    pub const SPEED_OF_LIGHT_CGS: f64 = 2.997_924_58e10;
    /// V/m per statvolt/cm.
    pub const VOLT_PER_METRE_PER_STATVOLT_PER_CM: f64 = 2.997_924_58e4;
}

use constants::*;

/// Electron kinematic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    /// Kinetic energy `E0` [eV].
    pub kinetic_energy: f64,
    /// `v/c`.
    pub velocity_ratio: f64,
    /// Lorentz factor.
    pub lorentz_gamma: f64,
    /// Central wavevector `q0 = m_e v γ / ħ` [1/m].
    pub central_wavevector: f64,
}

impl Kinematics {
    fn from_parts(kinetic_energy: f64, velocity_ratio: f64, lorentz_gamma: f64) -> Self {
        let central_wavevector = ELECTRON_REST_ENERGY_EV * velocity_ratio * lorentz_gamma / HBAR_C_EV_M;
        Self { kinetic_energy, velocity_ratio, lorentz_gamma, central_wavevector }
    }

    /// `(βγ)` with β = v/c.
    pub fn beta_gamma(&self) -> f64 {
        self.velocity_ratio * self.lorentz_gamma
    }
}

/// Kinematics of an electron with kinetic energy `e0` (eV).
pub fn electron_kinematics(e0: f64) -> Result<Kinematics> {
    if !(e0 > 0.0) || !e0.is_finite() {
        return Err(Error::Domain(format!("kinetic energy must be positive, got {e0}")));
    }
    let gm1 = e0 / ELECTRON_REST_ENERGY_EV;
    let gamma = 1.0 + gm1;
    // β = √((γ-1)(γ+1))/γ avoids cancellation at small E0
    let beta = (gm1 * (gamma + 1.0)).sqrt() / gamma;
    Ok(Kinematics::from_parts(e0, beta, gamma))
}

/// Inverse of [`electron_kinematics`]: kinematics for a velocity ratio `v/c`.
pub fn kinematics_from_velocity(velocity_ratio: f64) -> Result<Kinematics> {
    if !(velocity_ratio > 0.0 && velocity_ratio < 1.0) {
        return Err(Error::Domain(format!("v/c must lie in (0, 1), got {velocity_ratio}")));
    }
    let b2 = velocity_ratio * velocity_ratio;
    let gamma = 1.0 / (1.0 - b2).sqrt();
    let gm1 = b2 * gamma * gamma / (gamma + 1.0);
    Ok(Kinematics::from_parts(ELECTRON_REST_ENERGY_EV * gm1, velocity_ratio, gamma))
}

/// Result of the phase-matching condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatch {
    /// Photon energy of the counterpropagating beam `ħω2` [eV].
    pub omega2: f64,
    /// Exchanged quantum `ħΩ = ħ(ω1 - ω2)` [eV].
    pub omega_diff: f64,
}

/// Frequency of the counterpropagating beam that conserves energy and momentum,
/// `ω2 = ω1 (1 - v/c)/(1 + v/c)`. Frequencies are photon energies in eV.
pub fn phase_matched_omega2(omega1: f64, velocity_ratio: f64) -> Result<PhaseMatch> {
    if !(omega1 > 0.0) {
        return Err(Error::Domain(format!("omega1 must be positive, got {omega1}")));
    }
    if !(0.0..1.0).contains(&velocity_ratio) {
        return Err(Error::Domain(format!("v/c must lie in [0, 1), got {velocity_ratio}")));
    }
    let omega2 = omega1 * (1.0 - velocity_ratio) / (1.0 + velocity_ratio);
    Ok(PhaseMatch { omega2, omega_diff: omega1 - omega2 })
}

/// Talbot distance `z_T = 4π m_e v³ γ³ / ħΩ²` [m] for exchanged quantum `ħΩ` (eV).
pub fn talbot_distance(velocity_ratio: f64, omega_diff: f64) -> Result<f64> {
    if !(omega_diff > 0.0) {
        return Err(Error::Domain("Talbot distance needs a positive frequency difference".into()));
    }
    let kin = kinematics_from_velocity(velocity_ratio)?;
    let bg = kin.beta_gamma();
    Ok(4.0 * PI * ELECTRON_REST_ENERGY_EV * bg * bg * bg * HBAR_C_EV_M / (omega_diff * omega_diff))
}

/// Rayleigh range `z0 = 2c/(ω NA²)` [m].
pub fn rayleigh_range(photon_energy: f64, numerical_aperture: f64) -> Result<f64> {
    if !(photon_energy > 0.0) || !(numerical_aperture > 0.0) {
        return Err(Error::Domain("Rayleigh range needs positive frequency and NA".into()));
    }
    Ok(2.0 * HBAR_C_EV_M / (photon_energy * numerical_aperture * numerical_aperture))
}

/// One focused CW laser beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Photon energy `ħω` [eV].
    pub photon_energy: f64,
    /// +1 copropagating with the electron, -1 counterpropagating.
    pub propagation_sign: i8,
    pub numerical_aperture: f64,
    /// Beam power [W].
    pub power: f64,
    /// Phase of the focal field amplitude [rad].
    pub phase: f64,
}

impl BeamParams {
    pub fn angular_frequency(&self) -> f64 {
        self.photon_energy / HBAR_EV_S
    }

    /// `k = ω/c` [1/m].
    pub fn wavevector(&self) -> f64 {
        self.photon_energy / HBAR_C_EV_M
    }

    pub fn rayleigh_range(&self) -> Result<f64> {
        rayleigh_range(self.photon_energy, self.numerical_aperture)
    }

    /// Focal field amplitude in Gaussian units (statvolt/cm), from
    /// `P = c² z0 |E|² / 2ω`.
    pub fn focal_amplitude_gaussian(&self) -> Result<C64> {
        let z0_cm = self.rayleigh_range()? * 100.0;
        let power_cgs = self.power * 1.0e7;
        let c = SPEED_OF_LIGHT_CGS;
        let mag = (2.0 * self.angular_frequency() * power_cgs / (c * c * z0_cm)).sqrt();
        Ok(C64::from_polar(mag, self.phase))
    }

    /// Focal field amplitude in V/m.
    pub fn focal_amplitude(&self) -> Result<C64> {
        Ok(self.focal_amplitude_gaussian()? * VOLT_PER_METRE_PER_STATVOLT_PER_CM)
    }

    /// `P/ω` expressed as an energy [eV]; the combination entering the couplings.
    pub fn power_over_frequency(&self) -> f64 {
        self.power * HBAR_EV_S / (JOULE_PER_EV * self.photon_energy)
    }
}

/// Laboratory parameters. Energies in keV/eV, powers in kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabConfig {
    pub kinetic_energy_kev: f64,
    pub photon_energy1_ev: f64,
    /// `None` selects the phase-matched value.
    #[serde(default)]
    pub photon_energy2_ev: Option<f64>,
    pub power1_kw: f64,
    pub power2_kw: f64,
    pub na1: f64,
    /// `None` selects the NA giving the same Rayleigh range as beam 1.
    #[serde(default)]
    pub na2: Option<f64>,
    #[serde(default)]
    pub phase1: f64,
    #[serde(default)]
    pub phase2: f64,
    /// Mirror separation `L` [mm]; `None` defers to the numerics span.
    #[serde(default)]
    pub interaction_length_mm: Option<f64>,
}

impl LabConfig {
    /// Phase-matched configuration with equal powers given as `P/ħω1` in kW/eV.
    pub fn phase_matched(kinetic_energy_kev: f64, photon_energy1_ev: f64, power_per_photon_energy: f64, na1: f64) -> Self {
        let p = power_per_photon_energy * photon_energy1_ev;
        Self {
            kinetic_energy_kev,
            photon_energy1_ev,
            photon_energy2_ev: None,
            power1_kw: p,
            power2_kw: p,
            na1,
            na2: None,
            phase1: 0.0,
            phase2: 0.0,
            interaction_length_mm: None,
        }
    }

    pub fn kinematics(&self) -> Result<Kinematics> {
        electron_kinematics(self.kinetic_energy_kev * 1.0e3)
    }

    pub fn photon_energy2(&self) -> Result<f64> {
        match self.photon_energy2_ev {
            Some(w2) if w2 > 0.0 => Ok(w2),
            Some(w2) => Err(Error::Domain(format!("photon energy 2 must be positive, got {w2}"))),
            None => Ok(phase_matched_omega2(self.photon_energy1_ev, self.kinematics()?.velocity_ratio)?.omega2),
        }
    }

    /// The two beams; beam 1 copropagates with the electron.
    pub fn beams(&self) -> Result<[BeamParams; 2]> {
        if !(self.na1 > 0.0) || !(self.photon_energy1_ev > 0.0) {
            return Err(Error::Domain("zero NA or zero frequency".into()));
        }
        if self.power1_kw < 0.0 || self.power2_kw < 0.0 {
            return Err(Error::Domain("beam powers must be non-negative".into()));
        }
        let w1 = self.photon_energy1_ev;
        let w2 = self.photon_energy2()?;
        let na2 = self.na2.unwrap_or(self.na1 * (w1 / w2).sqrt());
        if !(na2 > 0.0) {
            return Err(Error::Domain("zero NA in beam 2".into()));
        }
        Ok([
            BeamParams { photon_energy: w1, propagation_sign: 1, numerical_aperture: self.na1, power: self.power1_kw * 1e3, phase: self.phase1 },
            BeamParams { photon_energy: w2, propagation_sign: -1, numerical_aperture: na2, power: self.power2_kw * 1e3, phase: self.phase2 },
        ])
    }
}

/// Coupling coefficient β evaluated from the focal field amplitudes (Gaussian units),
/// `β = 2πi e²c/(ħ m v γ) · (ω1/ω2) · E1 E2* / (NA1² ω1³)`.
/// At phase matching `ω1/ω2 = (1 + v/c)/(1 - v/c)`.
pub fn coupling_beta(lab: &LabConfig) -> Result<C64> {
    let kin = lab.kinematics()?;
    let [b1, b2] = lab.beams()?;
    check_equal_rayleigh(&b1, &b2)?;
    let e1 = b1.focal_amplitude_gaussian()?;
    let e2 = b2.focal_amplitude_gaussian()?;
    let w1 = b1.angular_frequency();
    let w2 = b2.angular_frequency();
    let c = SPEED_OF_LIGHT_CGS;
    let mc2_erg = ELECTRON_REST_ENERGY_EV * JOULE_PER_EV * 1e7;
    let m = mc2_erg / (c * c);
    let v = kin.velocity_ratio * c;
    // e² = α ħ c, so e² c / ħ = α c²
    let prefactor = 2.0 * PI * FINE_STRUCTURE * c * c / (m * v * kin.lorentz_gamma);
    let na1 = b1.numerical_aperture;
    Ok(C64::i() * prefactor * (w1 / w2) * e1 * e2.conj() / (na1 * na1 * w1 * w1 * w1))
}

pub(crate) fn check_equal_rayleigh(b1: &BeamParams, b2: &BeamParams) -> Result<f64> {
    let z1 = b1.rayleigh_range()?;
    let z2 = b2.rayleigh_range()?;
    if ((z1 - z2) / z1).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "beams must share the Rayleigh range (z0 = {z1:.6e} m vs {z2:.6e} m)"
        )));
    }
    Ok(z1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn third_of_light_speed_is_31_kev() {
        let k = kinematics_from_velocity(1.0 / 3.0).unwrap();
        assert!((k.kinetic_energy / 1e3 - 31.0).abs() < 0.1, "{}", k.kinetic_energy);
    }

    #[test]
    fn rest_limit() {
        let k = electron_kinematics(1e-9).unwrap();
        assert!(k.velocity_ratio < 1e-6);
        assert_relative_eq!(k.lorentz_gamma, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn round_trip_200_kev() {
        let k = electron_kinematics(200e3).unwrap();
        let back = kinematics_from_velocity(k.velocity_ratio).unwrap();
        assert_relative_eq!(back.kinetic_energy, 200e3, max_relative = 1e-12);
        let g = 1.0 / (1.0 - k.velocity_ratio.powi(2)).sqrt();
        assert_relative_eq!(g, k.lorentz_gamma, max_relative = 1e-14);
    }

    #[test]
    fn non_positive_energy_rejected() {
        assert!(matches!(electron_kinematics(0.0), Err(Error::Domain(_))));
        assert!(matches!(electron_kinematics(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn phase_matching_examples() {
        let pm = phase_matched_omega2(2.0, 1.0 / 3.0).unwrap();
        assert_relative_eq!(pm.omega2, 1.0, max_relative = 1e-15);
        assert_relative_eq!(pm.omega_diff, 1.0, max_relative = 1e-15);
        let pm = phase_matched_omega2(2.0, 0.0).unwrap();
        assert_eq!(pm.omega2, 2.0);
        assert_eq!(pm.omega_diff, 0.0);
        assert!(phase_matched_omega2(2.0, 1.0).is_err());
    }

    #[test]
    fn detunings_equal_at_phase_matching() {
        for &beta in &[0.05, 1.0 / 3.0, 0.5, 0.776, 0.95] {
            let pm = phase_matched_omega2(1.7, beta).unwrap();
            // Δ_j = ω_j/v - s_j k_j, in units of 1/(c) with ħω in eV
            let d1 = 1.7 / beta - 1.7;
            let d2 = pm.omega2 / beta + pm.omega2;
            assert_relative_eq!(d1, d2, max_relative = 1e-14);
        }
    }

    #[test]
    fn talbot_scaling_and_value() {
        let z1 = talbot_distance(1.0 / 3.0, 1.0).unwrap();
        let z2 = talbot_distance(1.0 / 3.0, 2.0).unwrap();
        assert_relative_eq!(z1 / z2, 4.0, max_relative = 1e-14);
        // one-line constant arithmetic: 4π m v³γ³/(ħΩ²) in SI
        let m = 9.109_383_701_5e-31;
        let hbar = 1.054_571_817e-34;
        let v = SPEED_OF_LIGHT / 3.0;
        let g = 1.0 / (1.0f64 - 1.0 / 9.0).sqrt();
        let omega = JOULE_PER_EV / hbar;
        let expect = 4.0 * PI * m * (v * g).powi(3) / (hbar * omega * omega);
        assert_relative_eq!(z1, expect, max_relative = 1e-8);
        assert!(talbot_distance(1.0 / 3.0, 0.0).is_err());
    }

    #[test]
    fn detuned_velocity_breaks_matching() {
        // 2 eV and 1 eV beams are matched at v = c/3 only
        let k = electron_kinematics(34e3).unwrap();
        let b = k.velocity_ratio;
        let d1 = 2.0 / b - 2.0;
        let d2 = 1.0 / b + 1.0;
        assert!((d1 - d2).abs() > 1e-3);
    }

    #[test]
    fn zero_field_gives_zero_beta() {
        let mut lab = LabConfig::phase_matched(31.0, 2.0, 1.0, 0.2);
        lab.power2_kw = 0.0;
        assert_eq!(coupling_beta(&lab).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn beta_invariant_to_na_at_fixed_power() {
        let vals: Vec<f64> = [0.1, 0.2, 0.5]
            .iter()
            .map(|&na| coupling_beta(&LabConfig::phase_matched(31.0, 2.0, 2.0, na)).unwrap().norm())
            .collect();
        assert_relative_eq!(vals[0], vals[1], max_relative = 1e-12);
        assert_relative_eq!(vals[0], vals[2], max_relative = 1e-12);
    }

    #[test]
    fn unequal_rayleigh_ranges_rejected() {
        let mut lab = LabConfig::phase_matched(31.0, 2.0, 1.0, 0.2);
        lab.na2 = Some(0.2);
        assert!(matches!(coupling_beta(&lab), Err(Error::Config(_))));
    }
}
