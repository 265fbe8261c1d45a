use compton_core::lattice::solve_recoil;
use compton_core::observables::{max_doc_over_distance, DistanceSearch};
use compton_core::{sideband_sigma, Numerics};
use compton_sweep::{replay, run_recipe, sweep, Axis, ExperimentConfig, GridConfig, PointSpec, RecipeOptions};

fn small_grid() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.name = "grid".into();
    c.grid = GridConfig {
        kinetic_energy_kev: Axis::Values(vec![31.0]),
        beta: Axis::Values(vec![0.8, 1.6]),
        talbot_ratio: Axis::Values(vec![13.3, 40.0]),
        ..GridConfig::default()
    };
    c.numerics.net_exchange_cutoff = Some(2);
    c.observables.doc_orders = vec![1, 2];
    c
}

#[test]
fn two_by_two_grid_emits_four_rows_and_manifest_points() {
    let out = sweep(&small_grid()).unwrap();
    let d = &out.datasets[0];
    assert_eq!(d.len(), 4);
    assert_eq!(out.manifest.points.len(), 4);
    assert_eq!(out.manifest.datasets, vec!["grid".to_string()]);
    for (k, p) in out.manifest.points.iter().enumerate() {
        assert_eq!(p.index, k);
        assert!(p.labels.contains_key("spec"));
        assert_eq!(p.problem.net_exchange_cutoff, Some(2));
    }
    // last axis fastest
    assert_eq!(d.column("zT_over_z0").unwrap(), vec![13.3, 40.0, 13.3, 40.0]);
    let betas = d.column("beta_abs").unwrap();
    assert!((betas[0] - 0.8).abs() < 1e-12 && (betas[3] - 1.6).abs() < 1e-12);
    for c in ["doc1_max", "doc1_d_over_zT", "doc2_max", "doc2_d_over_zT"] {
        assert!(d.columns.iter().any(|x| x == c));
    }
}

#[test]
fn one_point_grid_equals_direct_call() {
    let mut c = small_grid();
    c.grid.beta = Axis::Values(vec![1.6]);
    c.grid.talbot_ratio = Axis::Values(vec![13.3]);
    let out = sweep(&c).unwrap();
    let d = &out.datasets[0];
    assert_eq!(d.len(), 1);

    let numerics = Numerics { net_exchange_cutoff: Some(2), ..Numerics::default() };
    let spec = PointSpec { kinetic_energy_kev: Some(31.0), velocity_ratio: None, beta: Some(1.6), talbot_ratio: Some(13.3), ..PointSpec::default() };
    let problem = spec.resolve(&numerics).unwrap().problem;
    assert_eq!(problem, out.manifest.points[0].problem);
    let direct = solve_recoil(&problem).unwrap();
    let (dist, val) = max_doc_over_distance(&direct.exit, 1, &DistanceSearch::default()).unwrap();
    assert_eq!(d.column("doc1_max").unwrap()[0], val);
    assert_eq!(d.column("doc1_d_over_zT").unwrap()[0], dist);
    assert_eq!(d.column("sigma").unwrap()[0], sideband_sigma(&direct.exit).unwrap());
    assert_eq!(d.column("resonant_weight").unwrap()[0], direct.resonant_weight);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let c = small_grid();
    let a = sweep(&c).unwrap();
    let b = sweep(&c).unwrap();
    assert_eq!(a.datasets[0].to_csv(15).unwrap(), b.datasets[0].to_csv(15).unwrap());
    assert_eq!(a.manifest.to_json().unwrap(), b.manifest.to_json().unwrap());
}

#[test]
fn worker_count_does_not_change_output() {
    let mut c = small_grid();
    c.workers = Some(1);
    let serial = sweep(&c).unwrap();
    c.workers = Some(4);
    let parallel = sweep(&c).unwrap();
    assert_eq!(serial.datasets[0].rows, parallel.datasets[0].rows);
    assert_eq!(serial.datasets[0].to_json(17).unwrap(), parallel.datasets[0].to_json(17).unwrap());
}

#[test]
fn manifest_replay_reproduces_sweep_and_recipe() {
    let out = sweep(&small_grid()).unwrap();
    let text = out.manifest.to_json().unwrap();
    let again = replay(&compton_sweep::Manifest::from_json(&text).unwrap(), Some(2)).unwrap();
    assert_eq!(out.datasets[0].to_csv(12).unwrap(), again.datasets[0].to_csv(12).unwrap());

    let rec = run_recipe("fig2c", &RecipeOptions::default()).unwrap();
    let again = replay(&rec.manifest, None).unwrap();
    assert_eq!(rec.datasets, again.datasets);
}

#[test]
fn written_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep(&small_grid()).unwrap();
    let paths = out.write(dir.path(), 12).unwrap();
    assert_eq!(paths.len(), 3);
    let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(csv.starts_with("# schema_version=1 dataset=grid\nindex,E0_keV,"));
    assert_eq!(csv.lines().count(), 6);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("grid.json")).unwrap()).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 4);
    let manifest = compton_sweep::Manifest::from_json(&std::fs::read_to_string(dir.path().join("grid.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest, out.manifest);
}

#[test]
fn invalid_grid_point_reports_its_index() {
    let mut c = small_grid();
    c.grid.talbot_ratio = Axis::Values(vec![13.3, -1.0]);
    let e = sweep(&c).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("grid point 1"), "{e}");
}

#[test]
fn analytic_solver_matches_nonrecoil_closed_form() {
    let mut c = small_grid();
    c.grid = GridConfig { velocity_ratio: Axis::Values(vec![1.0 / 3.0]), beta: Axis::Values(vec![1.0]), recoil: false, ..GridConfig::default() };
    c.observables.solver = compton_sweep::Solver::Analytic;
    c.observables.doc_orders = vec![1];
    let d = sweep(&c).unwrap().datasets.remove(0);
    assert!((d.column("doc1_max").unwrap()[0] - 0.3386).abs() < 1e-4);
    assert!((d.column("sigma").unwrap()[0] - std::f64::consts::SQRT_2).abs() < 1e-6);
    assert!(d.column("zT_over_z0").unwrap()[0].is_infinite());
}
