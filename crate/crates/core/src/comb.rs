//! Nonrecoil solution: the phase integral over the two-beam ponderomotive
//! potential and the resulting Bessel energy comb.

use crate::error::{Error, Result};
use crate::problem::{default_l_max, DimensionlessProblem};
use crate::special::bessel_j_sequence;
use crate::spectrum::{Provenance, SidebandSpectrum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Span below which the full-Lorentzian phase integral is a poor approximation.
pub const MIN_ANALYTIC_SPAN: f64 = 20.0;

/// A two-photon (absorption or emission) term of the phase integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonresonantTerm {
    pub beams: (usize, usize),
    /// `iπ Ã_jj' e^{-z0|Δ_j + Δ_j'|}`, coefficient of `e^{i(s_j k_j + s_j' k_j')(z - vt)}`.
    pub amplitude: C64,
    /// `e^{-z0|Δ_j + Δ_j'|}`.
    pub suppression: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseIntegralResult {
    /// Coefficient of `e^{iΩ(z/v - t)}`: `2πi B̃12 e^{-z0|Δ1 - Δ2|}` (infinite span).
    pub beta_eff: C64,
    /// Same coupling integrated over the finite span `[-L/2, L/2]` only.
    pub beta_span: C64,
    /// Global phase `χ = 2π (B̃11 + B̃22)`.
    pub chi: f64,
    /// Resonant suppression `e^{-z0|Δ1 - Δ2|}`.
    pub resonant_suppression: f64,
    pub nonresonant: Vec<NonresonantTerm>,
    /// Set when `L/z0` is below [`MIN_ANALYTIC_SPAN`].
    pub short_span: bool,
}

/// `(1/π) ∫_{-a}^{a} cos(q u) / (1 + u²) du`; tends to `e^{-|q|}` as `a → ∞`.
pub fn lorentzian_window(q: f64, half_span: f64) -> f64 {
    if q == 0.0 {
        return 2.0 * half_span.atan() / PI;
    }
    if !half_span.is_finite() {
        return (-q.abs()).exp();
    }
    let mut n = ((200.0 * q.abs() * half_span).ceil() as usize).max(4000);
    if n % 2 == 1 {
        n += 1;
    }
    let h = 2.0 * half_span / n as f64;
    let f = |u: f64| (q * u).cos() / (1.0 + u * u);
    let mut s = f(-half_span) + f(half_span);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(-half_span + k as f64 * h);
    }
    s * h / 3.0 / PI
}

/// Analytic phase integral of the interaction Hamiltonian along the
/// unperturbed trajectory, for arbitrary detuning.
pub fn phase_integral(problem: &DimensionlessProblem) -> PhaseIntegralResult {
    let d = problem.detuning;
    let short_span = problem.span < MIN_ANALYTIC_SPAN;
    if short_span {
        log::warn!("phase integral assumes L >> z0 but L/z0 = {}", problem.span);
    }
    let resonant_suppression = (-(d[0] - d[1]).abs()).exp();
    let b12 = problem.coupling_b[0][1];
    let beta = 2.0 * PI * C64::i() * b12;
    let window = lorentzian_window(d[0] - d[1], 0.5 * problem.span);

    let mut nonresonant = Vec::with_capacity(4);
    for j in 0..2 {
        for jp in 0..2 {
            let suppression = (-(d[j] + d[jp]).abs()).exp();
            nonresonant.push(NonresonantTerm {
                beams: (j + 1, jp + 1),
                amplitude: PI * C64::i() * problem.coupling_a[j][jp] * suppression,
                suppression,
            });
        }
    }
    PhaseIntegralResult {
        beta_eff: beta * resonant_suppression,
        beta_span: beta * window,
        chi: 2.0 * PI * (problem.coupling_b[0][0] + problem.coupling_b[1][1]).re,
        resonant_suppression,
        nonresonant,
        short_span,
    }
}

/// Bessel comb `α_ℓ = J_ℓ(2|β|) e^{iℓ arg(-β)}` with the default truncation.
pub fn comb_coefficients(beta: C64) -> Result<SidebandSpectrum> {
    comb_coefficients_with(beta, default_l_max(beta.norm()))
}

/// Bessel comb truncated at `l_max`; errors when the discarded probability exceeds 1e-10.
pub fn comb_coefficients_with(beta: C64, l_max: usize) -> Result<SidebandSpectrum> {
    if !beta.re.is_finite() || !beta.im.is_finite() {
        return Err(Error::Domain("non-finite coupling".into()));
    }
    let x = 2.0 * beta.norm();
    let j = bessel_j_sequence(l_max, x);
    let phase = if beta.norm() > 0.0 { (-beta).arg() } else { 0.0 };
    let mut amps = vec![C64::new(0.0, 0.0); 2 * l_max + 1];
    for (n, &jn) in j.iter().enumerate() {
        let l = n as i64;
        amps[l_max + n] = jn * C64::from_polar(1.0, l as f64 * phase);
        if n > 0 {
            // J_{-n} = (-1)^n J_n
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            amps[l_max - n] = sign * jn * C64::from_polar(1.0, -(l as f64) * phase);
        }
    }
    let mut s = SidebandSpectrum::new(amps, Provenance::Analytic)?;
    s.beta = Some(beta);
    let missing = 1.0 - s.total_probability();
    if missing > 1e-10 {
        return Err(Error::Truncation { l_max, missing });
    }
    Ok(s)
}

/// `σ_ℓ = √(Σ ℓ² |α_ℓ|²)` of a normalized spectrum.
pub fn sideband_sigma(spectrum: &SidebandSpectrum) -> Result<f64> {
    spectrum.check_normalized(1e-8)?;
    Ok(spectrum.iter().map(|(l, a)| (l * l) as f64 * a.norm_sqr()).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phase_matched_has_unit_resonant_factor() {
        let p = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::new(0.0, 2.0), None, 0.2).unwrap();
        let r = phase_integral(&p);
        assert!((r.resonant_suppression - 1.0).abs() < 1e-12);
        assert!((r.beta_eff - C64::new(0.0, 2.0)).norm() < 1e-12);
        assert!(r.nonresonant.iter().all(|t| t.suppression < 1e-80));
        assert_relative_eq!(r.beta_span.norm() / 2.0, 2.0 * 10f64.atan() / PI, max_relative = 1e-14);
    }

    #[test]
    fn zero_coupling() {
        let p = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::new(0.0, 0.0), None, 0.2).unwrap();
        let r = phase_integral(&p);
        assert_eq!(r.beta_eff.norm(), 0.0);
        assert_eq!(r.chi, 0.0);
    }

    #[test]
    fn chi_from_diagonal_couplings() {
        let p = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::new(0.0, 3.0), None, 0.2).unwrap();
        let r = phase_integral(&p);
        let expect = 2.0 * PI * (p.coupling_b[0][0].re + p.coupling_b[1][1].re);
        assert_relative_eq!(r.chi, expect, max_relative = 1e-14);
    }

    #[test]
    fn window_converges_to_exponential() {
        for &q in &[0.3, 1.0, 3.57] {
            let w = lorentzian_window(q, 400.0);
            assert!((w - (-q).exp()).abs() < 2e-3, "q={q}: {w}");
        }
        assert_relative_eq!(lorentzian_window(0.0, 10.0), 2.0 * 10f64.atan() / PI);
    }

    #[test]
    fn suppression_factors_in_unit_interval() {
        let p = DimensionlessProblem::phase_matched(0.3, C64::new(1.0, 1.0), None, 0.7).unwrap();
        for t in phase_integral(&p).nonresonant {
            assert!(t.suppression > 0.0 && t.suppression < 1.0);
        }
    }

    #[test]
    fn zero_beta_is_delta() {
        let s = comb_coefficients(C64::new(0.0, 0.0)).unwrap();
        for (l, a) in s.iter() {
            let expect = if l == 0 { 1.0 } else { 0.0 };
            assert!((a - C64::new(expect, 0.0)).norm() < 1e-15);
        }
        assert_eq!(sideband_sigma(&s).unwrap(), 0.0);
    }

    #[test]
    fn unit_beta_values() {
        // J_0(2)², J_1(2)² from the power series
        let s = comb_coefficients(C64::new(0.0, 1.0)).unwrap();
        let j0 = 0.223_890_779_141_235_67f64;
        let j1 = 0.576_724_807_756_873_4f64;
        assert_relative_eq!(s.get(0).norm_sqr(), j0 * j0, max_relative = 1e-13);
        assert_relative_eq!(s.get(1).norm_sqr(), j1 * j1, max_relative = 1e-13);
        for l in 1..10 {
            assert_relative_eq!(s.get(l).norm_sqr(), s.get(-l).norm_sqr(), max_relative = 1e-12, epsilon = 1e-300);
        }
        assert_relative_eq!(sideband_sigma(&s).unwrap(), 2f64.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn large_beta_extent() {
        let s = comb_coefficients(C64::new(12.5, 0.0)).unwrap();
        assert_relative_eq!(sideband_sigma(&s).unwrap(), 12.5 * 2f64.sqrt(), max_relative = 1e-6);
        let ext = s.occupied_extent(1e-4);
        assert!((24..=30).contains(&ext), "{ext}");
    }

    #[test]
    fn truncation_is_flagged() {
        assert!(matches!(comb_coefficients_with(C64::new(5.0, 0.0), 6), Err(Error::Truncation { .. })));
    }

    #[test]
    fn unnormalized_sigma_is_an_error() {
        let mut s = comb_coefficients(C64::new(1.0, 0.0)).unwrap();
        s.amplitudes_mut()[0] += C64::new(0.3, 0.0);
        assert!(matches!(sideband_sigma(&s), Err(Error::Unnormalized { .. })));
    }

    #[test]
    fn jacobi_anger_reconstruction() {
        for &beta in &[C64::new(0.3, -0.8), C64::new(0.0, 2.5), C64::new(-4.0, 1.0)] {
            let s = comb_coefficients(beta).unwrap();
            for k in 0..64 {
                let th = 2.0 * PI * k as f64 / 64.0;
                let sum: C64 = s.iter().map(|(l, a)| a * C64::from_polar(1.0, l as f64 * th)).sum();
                let e = C64::from_polar(1.0, th);
                let exact = (-beta * e + beta.conj() * e.conj()).exp();
                assert!((sum - exact).norm() < 1e-9, "beta={beta} th={th}");
            }
        }
    }
}
