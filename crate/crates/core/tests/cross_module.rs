use compton_core::lattice::solve_recoil;
use compton_core::observables::{max_doc_over_distance, DistanceSearch};
use compton_core::oracle::compare_spectra;
use compton_core::problem::reduce_to_dimensionless;
use compton_core::{comb_coefficients_with, phase_integral, sideband_sigma, DimensionlessProblem, LabConfig, Numerics, C64};
use proptest::prelude::*;

fn desk() -> Numerics {
    Numerics { net_exchange_cutoff: Some(2), ..Numerics::default() }
}

#[test]
fn spectrum_depends_on_lab_only_through_reduced_groups() {
    // z_T/z0 ∝ NA²/ω1: halving ħω1 and NA² keeps it, and P/ħω1 keeps β
    let a = LabConfig::phase_matched(31.0, 2.0, 1.2, 0.2);
    let b = LabConfig::phase_matched(31.0, 1.0, 1.2, 0.2 / 2f64.sqrt());
    let pa = reduce_to_dimensionless(&a, &desk()).unwrap().with_talbot_ratio(Some(15.0));
    let pb = reduce_to_dimensionless(&b, &desk()).unwrap().with_talbot_ratio(Some(15.0));
    assert!((pa.focal_beta() - pb.focal_beta()).norm() < 1e-12);
    assert!(pa.optical_wavenumber != pb.optical_wavenumber);
    let sa = solve_recoil(&pa).unwrap();
    let sb = solve_recoil(&pb).unwrap();
    assert!(compare_spectra(&sa.exit, &sb.exit).l2 < 1e-3);
}

#[test]
fn lab_talbot_ratio_scales_with_na_squared_over_frequency() {
    let a = reduce_to_dimensionless(&LabConfig::phase_matched(31.0, 2.0, 1.0, 0.2), &desk()).unwrap();
    let b = reduce_to_dimensionless(&LabConfig::phase_matched(31.0, 1.0, 1.0, 0.2 / 2f64.sqrt()), &desk()).unwrap();
    let (ta, tb) = (a.talbot_ratio.unwrap(), b.talbot_ratio.unwrap());
    assert!((ta / tb - 1.0).abs() < 1e-12, "{ta} {tb}");
}

#[test]
fn recoil_free_lattice_keeps_the_nonrecoil_doc_optimum() {
    let p = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::new(0.0, 1.0), None, 0.2).unwrap();
    let out = solve_recoil(&p).unwrap();
    let (_, v) = max_doc_over_distance(&out.focal, 1, &DistanceSearch::default()).unwrap();
    // first maximum of J1²
    assert!((v - 0.338_567).abs() < 1e-5, "{v}");
}

#[test]
fn recoil_narrows_the_spectrum() {
    let free = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::new(0.0, 6.0), None, 0.2).unwrap().with_net_exchange_cutoff(Some(0));
    let tight = free.clone().with_talbot_ratio(Some(20.0));
    let s_free = sideband_sigma(&solve_recoil(&free).unwrap().exit).unwrap();
    let s_tight = sideband_sigma(&solve_recoil(&tight).unwrap().exit).unwrap();
    assert!(s_tight < 0.5 * s_free, "{s_tight} {s_free}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn resonant_band_reproduces_the_finite_span_comb(b in 0.1f64..4.0, phase in 0.0f64..6.28) {
        let p = DimensionlessProblem::phase_matched(1.0 / 3.0, C64::from_polar(b, phase), None, 0.2)
            .unwrap()
            .with_net_exchange_cutoff(Some(0));
        let lat = solve_recoil(&p).unwrap();
        let comb = comb_coefficients_with(phase_integral(&p).beta_span, p.l_max).unwrap();
        prop_assert!(compare_spectra(&lat.exit, &comb).l2 < 1e-4);
    }

    #[test]
    fn coupling_phase_does_not_change_doc(b in 0.5f64..2.5, phase in 0.0f64..6.28, t in 8.0f64..60.0) {
        let mk = |ph: f64| DimensionlessProblem::phase_matched(1.0 / 3.0, C64::from_polar(b, ph), Some(t), 0.2).unwrap().with_net_exchange_cutoff(Some(0));
        let s0 = solve_recoil(&mk(std::f64::consts::FRAC_PI_2)).unwrap().exit;
        let s1 = solve_recoil(&mk(phase)).unwrap().exit;
        let search = DistanceSearch { scan_points: 512, tolerance: 1e-9 };
        let (_, a) = max_doc_over_distance(&s0, 1, &search).unwrap();
        let (_, c) = max_doc_over_distance(&s1, 1, &search).unwrap();
        prop_assert!((a - c).abs() < 1e-8);
        for l in -5i64..=5 {
            prop_assert!((s0.get(l).norm() - s1.get(l).norm()).abs() < 1e-9);
        }
    }
}
