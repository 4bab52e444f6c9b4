//! Cross-module flows: scenario files driving runs, harness aggregation
//! agreeing with single runs, and CSV output surviving a parse round trip.
//! Heavier statistical protocols live in the acceptance suite.

use cvtseek::harness::{
    builtin_scenario, builtin_scenarios, monte_carlo, radius_sweep, run_trial, symmetric_twin,
    write_trajectory_csv, Scenario,
};

fn truncated(name: &str, max_iters: usize) -> Scenario {
    let mut s = builtin_scenario(name).expect("builtin name");
    s.cfg.max_iters = max_iters;
    s
}

#[test]
fn builtin_scenarios_all_validate_and_resolve_by_name() {
    let all = builtin_scenarios();
    assert_eq!(all.len(), 5);
    for s in &all {
        s.validate().unwrap();
        assert_eq!(builtin_scenario(&s.name).as_ref(), Some(s));
    }
    assert!(builtin_scenario("fig2").is_none());

    // the twin differs only in formation kind and estimator choice
    let base = builtin_scenario("fig5-faulty").unwrap();
    let twin = symmetric_twin(&base);
    twin.validate().unwrap();
    assert_eq!(twin.noise, base.noise);
    assert_eq!(twin.base_seed, base.base_seed);
    assert_eq!(twin.c0, base.c0);
    assert_ne!(twin.formation.kind, base.formation.kind);
}

#[test]
fn scenario_file_round_trip_drives_an_identical_run() {
    let mut s = truncated("fig5-uniform", 40);
    s.trials = 1;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    std::fs::write(&path, s.to_json().unwrap()).unwrap();

    let loaded = Scenario::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(loaded, s);

    let a = run_trial(&s, 0).unwrap();
    let b = run_trial(&loaded, 0).unwrap();
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.c, y.c);
        assert_eq!(x.grad_hat, y.grad_hat);
        assert_eq!(x.dist_to_source, y.dist_to_source);
    }
}

#[test]
fn malformed_scenario_text_is_rejected() {
    assert!(Scenario::from_json("{").is_err());
    // structurally valid JSON, inconsistent contents: 3 noise levels, 6 robots
    let mut s = truncated("fig1", 5);
    s.noise.nu.truncate(3);
    let text = serde_json::to_string(&s).unwrap();
    assert!(Scenario::from_json(&text).is_err());
}

#[test]
fn radius_sweep_agrees_with_individual_noise_free_runs() {
    let base = truncated("fig4", 30);
    let radii = [1.0, 4.0];
    let traces = radius_sweep(&base, &radii).unwrap();
    assert_eq!(traces.len(), radii.len());
    for (trace, &d) in traces.iter().zip(&radii) {
        let mut one = base.clone();
        one.formation.d = d;
        let traj = run_trial(&one, 0).unwrap();
        assert_eq!(trace.d, d);
        assert_eq!(trace.err.len(), traj.records.len());
        for (e, r) in trace.err.iter().zip(&traj.records) {
            assert_eq!(*e, r.est_error_norm);
        }
    }
}

#[test]
fn monte_carlo_with_one_trial_reduces_to_that_trial() {
    let mut s = truncated("fig5-faulty", 25);
    s.trials = 1;
    let stats = monte_carlo(&s).unwrap();
    let traj = run_trial(&s, 0).unwrap();
    assert_eq!(stats.per_iter.len(), traj.records.len());
    assert!(stats.aborted_trials.is_empty());
    for (st, r) in stats.per_iter.iter().zip(&traj.records) {
        assert_eq!(st.k, r.k);
        assert_eq!(st.mean_dist, r.dist_to_source);
        assert_eq!(st.std_dist, 0.0);
    }
}

#[test]
fn trajectory_csv_survives_a_parse_round_trip() {
    let s = truncated("fig1", 20);
    let traj = run_trial(&s, 0).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj).unwrap();

    let mut rdr = csv::ReaderBuilder::new().from_reader(buf.as_slice());
    let rows: Vec<Vec<String>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), traj.records.len());
    for (row, rec) in rows.iter().zip(&traj.records) {
        assert_eq!(row[0].parse::<usize>().unwrap(), rec.k);
        // shortest-representation float formatting parses back exactly
        assert_eq!(row[1].parse::<f64>().unwrap(), rec.c.x);
        assert_eq!(row[10].parse::<f64>().unwrap(), rec.dist_to_source);
        assert_eq!(row[11].parse::<f64>().unwrap(), rec.est_error_norm);
    }
}
