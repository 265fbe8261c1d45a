//! Free propagation after the interaction, temporal density over one beat
//! period, and the degree of coherence `DOC_m = |I_m/I_0|²`.
//!
//! Downstream distance d enters only through `c_ℓ = α_ℓ e^{-2πiℓ² d/z_T}`, and
//! at fixed z the envelope is `Σ c_ℓ e^{-iℓΩt'}`. Hence
//! `I_m = ∫ |φ|² e^{imΩt'} dt' ∝ Σ_ℓ c_{ℓ+m} c_ℓ*`.

use crate::error::{Error, Result};
use crate::special::bessel_j;
use crate::spectrum::SidebandSpectrum;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Phase `e^{-2πi ℓ² x}` with the argument reduced modulo one period first.
fn talbot_phase(l: i64, x: f64) -> C64 {
    let x = x.rem_euclid(1.0);
    let l2 = (l * l) as f64;
    C64::from_polar(1.0, -2.0 * PI * (l2 * x).rem_euclid(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatedComb {
    /// `c_ℓ` for ℓ = -l_max..=l_max.
    pub coefficients: Vec<C64>,
    pub l_max: usize,
    /// `d/z_T`.
    pub distance_ratio: f64,
}

impl PropagatedComb {
    pub fn get(&self, l: i64) -> C64 {
        if l.unsigned_abs() as usize > self.l_max {
            return C64::new(0.0, 0.0);
        }
        self.coefficients[(l + self.l_max as i64) as usize]
    }

    /// `Σ_ℓ c_{ℓ+m} c_ℓ*`.
    pub fn harmonic(&self, m: i64) -> C64 {
        let l = self.l_max as i64;
        let mut s = C64::new(0.0, 0.0);
        for k in -l..=(l - m.abs()) {
            if m >= 0 {
                s += self.get(k + m) * self.get(k).conj();
            } else {
                s += self.get(k) * self.get(k - m).conj();
            }
        }
        s
    }

    /// `|φ(t')|²` at `t'/τ = x`.
    pub fn density_at(&self, x: f64) -> f64 {
        let l = self.l_max as i64;
        let w = C64::from_polar(1.0, -2.0 * PI * x);
        // Horner in e^{-iΩt'} starting from the top order
        let mut s = C64::new(0.0, 0.0);
        for k in (-l..=l).rev() {
            s = s * w + self.get(k);
        }
        (s * w.powi(-(l as i32))).norm_sqr()
    }
}

pub fn propagate_comb(spectrum: &SidebandSpectrum, distance_ratio: f64) -> PropagatedComb {
    let coefficients = spectrum.iter().map(|(l, a)| a * talbot_phase(l, distance_ratio)).collect();
    PropagatedComb { coefficients, l_max: spectrum.l_max(), distance_ratio }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    /// `t'/τ` on a uniform grid over `[-1/2, 1/2)`.
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    pub distance_ratio: f64,
}

impl DensityProfile {
    pub fn mean(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len() as f64
    }

    pub fn to_columns(&self) -> String {
        let mut s = String::from("t_over_tau,density\n");
        for (t, d) in self.times.iter().zip(&self.density) {
            s.push_str(&format!("{t:.9e},{d:.15e}\n"));
        }
        s
    }
}

/// Density over one period on `points` samples (raised to at least `4 l_max + 1`).
pub fn density_profile(spectrum: &SidebandSpectrum, distance_ratio: f64, points: usize) -> DensityProfile {
    let comb = propagate_comb(spectrum, distance_ratio);
    let n = points.max(4 * spectrum.l_max() + 1);
    let times: Vec<f64> = (0..n).map(|k| -0.5 + k as f64 / n as f64).collect();
    let density = times.iter().map(|&t| comb.density_at(t)).collect();
    DensityProfile { times, density, distance_ratio }
}

fn check_order(m: i64) -> Result<()> {
    if m <= 0 {
        return Err(Error::Domain(format!("DOC order must be positive, got {m}")));
    }
    Ok(())
}

fn doc_of(comb: &PropagatedComb, m: i64) -> f64 {
    let i0 = comb.harmonic(0).re;
    if i0 <= 0.0 {
        return 0.0;
    }
    (comb.harmonic(m).norm_sqr() / (i0 * i0)).min(1.0)
}

/// `DOC_m` at `d/z_T` from the harmonic identity.
pub fn doc(spectrum: &SidebandSpectrum, distance_ratio: f64, m: i64) -> Result<f64> {
    check_order(m)?;
    spectrum.check_normalized(1e-6)?;
    Ok(doc_of(&propagate_comb(spectrum, distance_ratio), m))
}

/// `DOC_m` by trapezoidal quadrature of the defining integrals on `points`
/// samples (at least `8 l_max`).
pub fn doc_quadrature(spectrum: &SidebandSpectrum, distance_ratio: f64, m: i64, points: usize) -> Result<f64> {
    check_order(m)?;
    let comb = propagate_comb(spectrum, distance_ratio);
    let n = points.max(8 * spectrum.l_max()).max(8);
    let mut i0 = 0.0;
    let mut im = C64::new(0.0, 0.0);
    for k in 0..n {
        let x = k as f64 / n as f64;
        let rho = comb.density_at(x);
        i0 += rho;
        im += rho * C64::from_polar(1.0, 2.0 * PI * m as f64 * x);
    }
    Ok(im.norm_sqr() / (i0 * i0))
}

/// `J_m²(4|β| sin(2πm d/z_T))`, valid for the nonrecoil comb.
pub fn doc_nonrecoil_closed_form(beta: C64, distance_ratio: f64, m: i64) -> f64 {
    let x = 4.0 * beta.norm() * (2.0 * PI * m as f64 * distance_ratio).sin();
    bessel_j(m, x).powi(2)
}

/// Controls for [`max_doc_over_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceSearch {
    pub scan_points: usize,
    /// Golden-section stopping width in `d/z_T`.
    pub tolerance: f64,
}

impl Default for DistanceSearch {
    fn default() -> Self {
        Self { scan_points: 2048, tolerance: 1e-10 }
    }
}

/// Global maximum of `DOC_m` over one Talbot period `d/z_T ∈ [0, 1)`.
///
/// Shifting d by `z_T/2` multiplies `c_ℓ` by `(-1)^ℓ`, a half-period time
/// translation, so every maximum recurs at `d ± z_T/2`. The earlier one, in
/// `[0, 1/2)`, is reported.
pub fn max_doc_over_distance(spectrum: &SidebandSpectrum, m: i64, search: &DistanceSearch) -> Result<(f64, f64)> {
    check_order(m)?;
    spectrum.check_normalized(1e-6)?;
    let n = search.scan_points.max(16);
    let f = |x: f64| doc_of(&propagate_comb(spectrum, x), m);
    let scan: Vec<f64> = (0..n).into_par_iter().map(|k| f(k as f64 / n as f64)).collect();
    let mut best = 0;
    for (k, v) in scan.iter().enumerate() {
        if *v > scan[best] {
            best = k;
        }
    }
    let h = 1.0 / n as f64;
    let (mut a, mut b) = (best as f64 * h - h, best as f64 * h + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > search.tolerance {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx >= scan[best] {
        Ok((x.rem_euclid(0.5), fx))
    } else {
        Ok(((best as f64 * h).rem_euclid(0.5), scan[best]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocSeries {
    pub orders: Vec<i64>,
    pub distances: Vec<f64>,
    /// `values[i][k]` is `DOC_{orders[i]}` at `distances[k]`.
    pub values: Vec<Vec<f64>>,
    /// Global argmax `(d/z_T, DOC)` per order.
    pub maxima: Vec<(f64, f64)>,
}

impl DocSeries {
    pub fn to_columns(&self) -> String {
        let mut s = String::from("d_over_zT");
        for m in &self.orders {
            s.push_str(&format!(",doc{m}"));
        }
        s.push('\n');
        for (k, d) in self.distances.iter().enumerate() {
            s.push_str(&format!("{d:.9e}"));
            for row in &self.values {
                s.push_str(&format!(",{:.15e}", row[k]));
            }
            s.push('\n');
        }
        s
    }
}

pub fn doc_series(spectrum: &SidebandSpectrum, orders: &[i64], distances: &[f64], search: &DistanceSearch) -> Result<DocSeries> {
    let mut values = Vec::with_capacity(orders.len());
    let mut maxima = Vec::with_capacity(orders.len());
    for &m in orders {
        values.push(distances.iter().map(|&d| doc(spectrum, d, m)).collect::<Result<Vec<_>>>()?);
        maxima.push(max_doc_over_distance(spectrum, m, search)?);
    }
    Ok(DocSeries { orders: orders.to_vec(), distances: distances.to_vec(), values, maxima })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::comb_coefficients;
    use crate::special::first_bessel_maximum;
    use crate::spectrum::Provenance;
    use proptest::prelude::*;

    fn random_comb(seed: &[(f64, f64)]) -> SidebandSpectrum {
        let mut a: Vec<C64> = seed.iter().map(|&(x, y)| C64::new(x, y)).collect();
        if a.len() % 2 == 0 {
            a.push(C64::new(0.3, -0.1));
        }
        SidebandSpectrum::new(a, Provenance::Constructed).unwrap().normalized()
    }

    #[test]
    fn single_sideband_is_flat() {
        let mut a = vec![C64::new(0.0, 0.0); 7];
        a[5] = C64::new(0.0, 1.0);
        let s = SidebandSpectrum::new(a, Provenance::Constructed).unwrap();
        for m in 1..=6 {
            assert_eq!(doc(&s, 0.37, m).unwrap(), 0.0);
        }
        let p = density_profile(&s, 0.2, 64);
        assert!(p.density.iter().all(|d| (d - 1.0).abs() < 1e-14));
        assert_eq!(max_doc_over_distance(&SidebandSpectrum::delta(4), 1, &DistanceSearch::default()).unwrap().1, 0.0);
    }

    #[test]
    fn order_must_be_positive() {
        let s = SidebandSpectrum::delta(2);
        assert!(matches!(doc(&s, 0.1, 0), Err(Error::Domain(_))));
        assert!(matches!(doc(&s, 0.1, -2), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_zero_at_zero_distance() {
        for m in 1..5 {
            assert_eq!(doc_nonrecoil_closed_form(C64::new(3.0, 1.0), 0.0, m), 0.0);
        }
    }

    #[test]
    fn closed_form_matches_definition_on_grid() {
        for &b in &[0.3, 1.0, 2.5, 7.0] {
            let beta = C64::from_polar(b, 0.7);
            let s = comb_coefficients(beta).unwrap();
            for m in 1..=4 {
                for k in 0..40 {
                    let d = k as f64 / 40.0 + 0.003;
                    let a = doc(&s, d, m).unwrap();
                    let c = doc_nonrecoil_closed_form(beta, d, m);
                    assert!((a - c).abs() < 1e-8, "b={b} m={m} d={d}: {a} vs {c}");
                }
            }
        }
    }

    #[test]
    fn unit_beta_optimum() {
        let s = comb_coefficients(C64::new(0.0, 1.0)).unwrap();
        let (d, v) = max_doc_over_distance(&s, 1, &DistanceSearch::default()).unwrap();
        let (x1, j1) = first_bessel_maximum(1);
        let d_exact = (x1 / 4.0).asin() / (2.0 * PI);
        // |sin(2πd)| also peaks at 1/2 - d
        let d_fold = if d > 0.25 { 0.5 - d } else { d };
        assert!((v - j1 * j1).abs() < 1e-6, "{v}");
        assert!((d_fold - d_exact).abs() < 1e-5, "{d}");
        assert!((d_exact - 0.0761).abs() < 1e-3);
    }

    #[test]
    fn second_order_maximum_is_beta_independent() {
        let (_, j2) = first_bessel_maximum(2);
        for &b in &[2.0, 5.0] {
            let s = comb_coefficients(C64::new(b, 0.0)).unwrap();
            let (_, v) = max_doc_over_distance(&s, 2, &DistanceSearch::default()).unwrap();
            assert!((v - j2 * j2).abs() < 1e-6, "b={b}: {v}");
        }
    }

    #[test]
    fn talbot_period_exact_on_dyadic_grid() {
        let s = comb_coefficients(C64::new(1.3, -2.0)).unwrap();
        for k in 0..64 {
            let d = k as f64 / 64.0;
            for m in 1..4 {
                assert_eq!(doc(&s, d, m).unwrap(), doc(&s, d + 1.0, m).unwrap());
                assert_eq!(doc(&s, d, m).unwrap(), doc(&s, d + 3.0, m).unwrap());
            }
        }
    }

    #[test]
    fn half_period_symmetry() {
        let s = random_comb(&[(0.3, 0.1), (-0.5, 0.9), (0.2, 0.2), (0.7, -0.4), (0.1, 0.0)]);
        for k in 0..50 {
            let d = k as f64 / 100.0;
            for m in 1..4 {
                assert!((doc(&s, d, m).unwrap() - doc(&s, d + 0.5, m).unwrap()).abs() < 1e-13);
            }
        }
        let (d, _) = max_doc_over_distance(&s, 1, &DistanceSearch::default()).unwrap();
        assert!((0.0..0.5).contains(&d));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn identity_matches_quadrature(seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..25), d in 0.0f64..1.0, m in 1i64..7) {
            let s = random_comb(&seed);
            let a = doc(&s, d, m).unwrap();
            let q = doc_quadrature(&s, d, m, 0).unwrap();
            prop_assert!((a - q).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn global_phase_and_period_invariance(seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..25), d in 0.0f64..1.0, th in 0.0f64..6.3, m in 1i64..5) {
            let s = random_comb(&seed);
            let mut t = s.clone();
            for a in t.amplitudes_mut() { *a *= C64::from_polar(1.0, th); }
            prop_assert!((doc(&s, d, m).unwrap() - doc(&t, d, m).unwrap()).abs() < 1e-14);
            prop_assert!((doc(&s, d, m).unwrap() - doc(&s, d + 1.0, m).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn density_mean_and_parseval(seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..25), d in 0.0f64..1.0) {
            let s = random_comb(&seed);
            let p = density_profile(&s, d, 0);
            prop_assert!((p.mean() - 1.0).abs() < 1e-10);
            prop_assert!(p.density.iter().all(|&x| x >= 0.0));
            // Σ_m |I_m|² = <|φ|⁴> with I_m normalized by the period
            let c = propagate_comb(&s, d);
            let l = s.l_max() as i64;
            let lhs: f64 = (-2 * l..=2 * l).map(|m| c.harmonic(m).norm_sqr()).sum();
            let n = 8 * s.l_max() + 8;
            let rhs: f64 = (0..n).map(|k| c.density_at(k as f64 / n as f64).powi(2)).sum::<f64>() / n as f64;
            prop_assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0));
        }

        #[test]
        fn propagation_preserves_moduli(seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..25), d in -3.0f64..3.0) {
            let s = random_comb(&seed);
            let c = propagate_comb(&s, d);
            for (a, b) in s.amplitudes().iter().zip(&c.coefficients) {
                prop_assert!((a.norm() - b.norm()).abs() < 1e-15);
            }
        }
    }
}
