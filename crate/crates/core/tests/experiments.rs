use std::fs::File;

use ctqw_search::dynamics::NonlinearForm;
use ctqw_search::experiments::{
    read_trajectory_csv, run_scenario, run_sweep, GRule, GammaRule, GraphSpec, Scenario, SweepSpec,
};

#[test]
fn csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rt.csv");
    let scenario = Scenario {
        out: Some(path.clone()),
        t_max: Some(4.0),
        ..Scenario::new(GraphSpec::Paley(29), NonlinearForm::Cubic, GRule::NMinus1, GammaRule::Feedback)
    };
    let run = run_scenario(&scenario).unwrap();
    let table = read_trajectory_csv(File::open(&path).unwrap()).unwrap();
    let tr = &run.trajectory;
    assert_eq!(table.times, tr.times);
    assert_eq!(table.gammas, tr.gammas);
    assert_eq!(table.norm_drift, tr.norm_drift);
    assert_eq!(table.singular, tr.singular);
    for k in 0..tr.len() {
        assert_eq!(table.probabilities[k], tr.probabilities_at(k));
    }
}

#[test]
fn complete_graph_cubic_peaks_early() {
    let run = run_scenario(&Scenario::new(
        GraphSpec::Complete(1000),
        NonlinearForm::Cubic,
        GRule::NMinus1,
        GammaRule::Feedback,
    ))
    .unwrap();
    let peak = run.peak.unwrap();
    assert!(peak.t_star < 5.0, "{peak:?}");
    assert!(peak.p_star > 0.99);
}

#[test]
fn hypercube_linear_scenario() {
    let run = run_scenario(&Scenario::linear(GraphSpec::Hypercube(10))).unwrap();
    let t = run.peak.unwrap().t_star;
    assert!((t / 50.265 - 1.0).abs() < 0.15);
}

#[test]
fn hypercube_loglinear_sweep_has_no_constant_runtime() {
    let spec = SweepSpec::new(
        GraphSpec::Hypercube(0),
        vec![8, 9, 10],
        NonlinearForm::Loglinear,
        GRule::SqrtNOverLogN,
        GammaRule::Feedback,
    );
    let r = run_sweep(&spec).unwrap();
    // the dropped terms are never small, so the reduction to a rescaled linear walk fails
    assert!(r.rows.iter().all(|row| row.max_dropped_ratio.unwrap() > 0.1));
}
