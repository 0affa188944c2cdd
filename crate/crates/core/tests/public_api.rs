use vnfscale_core::*;

#[test]
fn params_json_round_trip() {
    let p: SystemParams =
        serde_json::from_str(r#"{"lambda": 130, "mu": 1, "alpha": 0.005, "n0": 110, "k": 28, "K": 250}"#).unwrap();
    assert_eq!(p, SystemParams::new(130.0, 1.0, 0.005, 110, 28, 250).unwrap());
    let back: SystemParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
    let err = serde_json::from_str::<SystemParams>(r#"{"lambda": 1, "mu": 1, "alpha": 1, "n0": 60, "k": 0, "K": 50}"#);
    assert!(err.unwrap_err().to_string().contains("K must be >= N"));
}

#[test]
fn metrics_json_field_names() {
    let m = solve(&SystemParams::new(1.0, 1.0, 1.0, 1, 0, 1).unwrap()).unwrap().metrics;
    let v = serde_json::to_value(m).unwrap();
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["L", "Pb", "S", "W", "Wq"]);
}

#[test]
fn defaults_operating_point() {
    let r = solve(&SystemParams::new(130.0, 1.0, 0.005, 110, 28, 250).unwrap()).unwrap();
    let m = r.metrics;
    assert!((m.wq - 0.80503).abs() < 1e-5, "{}", m.wq);
    assert!((m.s - 27.8838).abs() < 1e-4);
    assert!((m.pb - 0.047972).abs() < 1e-6);
    assert!(r.max_balance_residual < 1e-8);
}

#[test]
fn calibrated_weights_select_k_28() {
    // w2 sits between the marginal Wq savings per instance on either side
    // of k = 28 (3.593e-3 for 28 -> 29 and 3.660e-3 for 27 -> 28).
    let base = BaseParams::new(130.0, 1.0, 0.005, 110, 250).unwrap();
    let r = KScan::new(base).argmin(&CostSpec::from_weights(1.0, 0.003626)).unwrap();
    assert_eq!(r.k_op, 28);
    assert!(r.feasible);
    assert_eq!(r.scan.len(), 141);
    // Scaling both weights leaves the choice alone.
    let r = KScan::new(base).argmin(&CostSpec::from_weights(4.0, 4.0 * 0.003626)).unwrap();
    assert_eq!(r.k_op, 28);
}

#[test]
fn threshold_walk_stays_within_budget() {
    let base = BaseParams::new(130.0, 1.0, 0.005, 100, 250).unwrap();
    let mut scan = KScan::new(base);
    let k = scan.threshold_walk(&CostSpec::from_delta(1.0, 150.0, 10.0)).unwrap();
    assert!(scan.solver_calls() <= base.k_max() + 1);
    assert_eq!(scan.solver_calls(), k + 1);
}

#[test]
fn simulation_lines_up_with_solver() {
    let p = SystemParams::new(20.0, 1.0, 0.05, 15, 8, 40).unwrap();
    let exact = solve(&p).unwrap().metrics;
    let sim = simulate(
        &p,
        &SimConfig {
            horizon: 2e4,
            replications: 10,
            seed: 42,
            ..Default::default()
        },
    )
    .unwrap();
    let c = compare(&p, &exact, &sim).unwrap();
    for row in &c.rows {
        let hw = row.half_width.unwrap();
        assert!(row.abs_gap <= 4.0 * hw + 1e-9, "{:?}", row);
    }
}
