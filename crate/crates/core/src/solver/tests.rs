use super::*;

fn params(lambda: f64, mu: f64, alpha: f64, n0: usize, k: usize, cap: usize) -> SystemParams {
    SystemParams::new(lambda, mu, alpha, n0, k, cap).unwrap()
}

fn assert_close_states(a: &StationaryDistribution, b: &StationaryDistribution, rel: f64) {
    for (idx, (x, y)) in a.as_slice().iter().zip(b.as_slice()).enumerate() {
        let err = (x - y).abs();
        assert!(
            err <= rel * y.abs() || err <= 1e-14,
            "state {:?}: {x} vs {y}",
            a.state_space().decode(idx)
        );
    }
}

/// M/M/c/K stationary probabilities from the textbook product form,
/// evaluated in log space.
fn mmck(lambda: f64, mu: f64, c: usize, cap: usize) -> Vec<f64> {
    let a = lambda / mu;
    let logs: Vec<f64> = (0..=cap)
        .map(|j| {
            if j <= c {
                j as f64 * a.ln() - (1..=j).map(|t| (t as f64).ln()).sum::<f64>()
            } else {
                c as f64 * a.ln() - (1..=c).map(|t| (t as f64).ln()).sum::<f64>()
                    + (j - c) as f64 * (a / c as f64).ln()
            }
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::MIN, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

#[test]
fn level0_leading_coefficients() {
    let p = params(1.0, 1.0, 0.5, 2, 2, 7);
    let c = level0_coefficients(&p).unwrap();
    assert_eq!(c.b(1), 1.0);
    assert_eq!(c.b(2), 0.5);
    assert!((c.b(7) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn level0_masses_track_the_oracle() {
    let p = params(1.0, 1.0, 0.5, 2, 2, 7);
    let (_, mass) = solve_level0(&p).unwrap();
    let oracle = dense_oracle(&p).unwrap();
    let level0 = oracle.level(0);
    let scale = level0[0];
    for (j, (m, o)) in mass.iter().zip(level0).enumerate() {
        assert!((m * scale - o).abs() <= 1e-10 * o, "j = {j}");
    }
}

#[test]
fn boundary_masses_track_the_oracle() {
    let p = params(1.0, 1.0, 0.5, 2, 2, 7);
    let oracle = dense_oracle(&p).unwrap();
    let ss = oracle.state_space();
    for level in 0..2 {
        let got = boundary_mass(&p, level, oracle.level(level));
        let want = oracle.get(level + 1, ss.min_jobs(level + 1)).unwrap();
        assert!((got - want).abs() <= 1e-10 * want, "level {level}: {got} vs {want}");
    }
}

#[test]
fn boundary_mass_edge_cases() {
    let p = params(1.0, 2.0, 0.5, 2, 2, 7);
    // Mass only at n_i: nothing is in setup.
    let mut level0 = vec![0.0; 8];
    level0[2] = 1.0;
    assert_eq!(boundary_mass(&p, 0, &level0), 0.0);
    // Single term at n_i + 1: alpha * pi / (n_{i+1} mu) * min(1, N - n_i).
    let mut level1 = vec![0.0; 5];
    level1[1] = 0.7;
    let got = boundary_mass(&p, 1, &level1);
    assert!((got - 0.5 * 0.7 / (4.0 * 2.0)).abs() < 1e-16);
}

#[test]
fn level_by_level_matches_oracle() {
    let p = params(1.0, 1.0, 0.5, 2, 2, 7);
    let oracle = dense_oracle(&p).unwrap();
    let (_, l0) = solve_level0(&p).unwrap();
    let scale = oracle.level(0)[0];
    let b1 = boundary_mass(&p, 0, &l0);
    let (_, l1) = solve_level(&p, 1, &l0, b1).unwrap();
    let b2 = boundary_mass(&p, 1, &l1);
    let (_, l2) = solve_level(&p, 2, &l1, b2).unwrap();
    for (level, mass) in [(1, &l1), (2, &l2)] {
        for (m, o) in mass.iter().zip(oracle.level(level)) {
            assert!((m * scale - o).abs() <= 1e-10 * o, "level {level}");
        }
    }
}

#[test]
fn top_level_last_coefficient() {
    let p = params(1.0, 1.0, 0.5, 2, 2, 9);
    let (_, trace) = solve_traced(&p).unwrap();
    let top = &trace[2];
    assert!((top.b(9) - 1.0 / 4.0).abs() < 1e-15);
}

#[test]
fn empty_top_level_range() {
    // K = N: the top level has the single state (k, n_k).
    let p = params(1.3, 1.0, 0.7, 2, 2, 4);
    let (report, trace) = solve_traced(&p).unwrap();
    assert!(trace[2].b.is_empty());
    assert_eq!(report.distribution.level(2).len(), 1);
    assert_close_states(&report.distribution, &dense_oracle(&p).unwrap(), 1e-10);
}

#[test]
fn two_state_chain() {
    let r = solve(&params(1.0, 1.0, 1.0, 1, 0, 1)).unwrap();
    assert_eq!(r.distribution.as_slice(), &[0.5, 0.5]);
    let m = r.metrics;
    assert_eq!((m.l, m.pb, m.w, m.wq, m.s), (0.5, 0.5, 1.0, 0.0, 0.0));
}

#[test]
fn small_chain_state_by_state() {
    let p = params(1.5, 1.0, 0.25, 2, 2, 7);
    let r = solve(&p).unwrap();
    let oracle = dense_oracle(&p).unwrap();
    assert_close_states(&r.distribution, &oracle, 1e-10);
    let om = PerformanceMetrics::from_distribution(&oracle).unwrap();
    for metric in crate::Metric::ALL {
        let (x, y) = (r.metrics.get(metric), om.get(metric));
        assert!((x - y).abs() <= 1e-10 * y.abs().max(1e-300), "{metric}: {x} vs {y}");
    }
    assert!(r.max_balance_residual <= 1e-8);
}

#[test]
fn no_dynamic_instances_is_mmck() {
    for &(lambda, c, cap) in &[(3.0, 5, 20), (60.0, 110, 250), (160.0, 110, 250), (0.4, 1, 1)] {
        let p = params(lambda, 1.0, 0.3, c, 0, cap);
        let r = solve(&p).unwrap();
        let want = mmck(lambda, 1.0, c, cap);
        for (x, y) in r.distribution.as_slice().iter().zip(&want) {
            assert!((x - y).abs() <= 1e-10 * y || (x - y).abs() < 1e-300);
        }
    }
}

#[test]
fn large_alpha_approaches_no_setup_queue() {
    let p = params(9.0, 1.0, 1e6, 4, 6, 30);
    let r = solve(&p).unwrap();
    let oracle = PerformanceMetrics::from_distribution(&dense_oracle(&p).unwrap()).unwrap();
    let full = mmck(9.0, 1.0, 10, 30);
    let l_full: f64 = full.iter().enumerate().map(|(j, x)| j as f64 * x).sum();
    let pb_full = full[30];
    assert!((r.metrics.l - oracle.l).abs() <= 1e-9 * oracle.l);
    assert!((r.metrics.l - l_full).abs() <= 1e-3 * l_full);
    assert!((r.metrics.pb - pb_full).abs() <= 1e-3 * pb_full);
}

#[test]
fn overflow_guard_rescales_and_stays_exact() {
    // Level 0 alone grows past 1e250 before normalization.
    let p = params(600.0, 1.0, 0.05, 500, 3, 700);
    let r = solve(&p).unwrap();
    assert!(r.rescale_events > 0);
    let total: f64 = r.distribution.as_slice().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(r.max_balance_residual < 1e-8, "{}", r.max_balance_residual);
    assert!(r.distribution.as_slice().iter().all(|x| x.is_finite() && *x >= 0.0));
}

#[test]
fn work_grows_linearly() {
    let small = solve(&params(18.0, 1.0, 0.5, 10, 10, 60)).unwrap();
    let large = solve(&params(18.0, 1.0, 0.5, 10, 20, 110)).unwrap();
    let ratio = large.op_count as f64 / small.op_count as f64;
    let states = large.distribution.state_space().total_states() as f64
        / small.distribution.state_space().total_states() as f64;
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    assert!((ratio / states - 1.0).abs() < 0.05, "ops {ratio} vs states {states}");
}

#[test]
fn metric_identities() {
    let p = params(130.0, 1.0, 0.005, 110, 28, 250);
    let m = solve(&p).unwrap().metrics;
    assert!((m.w - m.wq - 1.0).abs() < 1e-12);
    assert!(m.s >= 0.0 && m.s <= 28.0);
    assert!((0.0..=1.0).contains(&m.pb));
    assert!(m.l <= 250.0);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn recursion_equals_dense_oracle(
            n0 in 1usize..12,
            k in 0usize..10,
            extra in 0usize..30,
            load in prop::sample::select(vec![0.3, 0.9, 1.5]),
            alpha in prop::sample::select(vec![0.005, 0.5, 50.0]),
        ) {
            let p = params(load * (n0 + k) as f64, 1.0, alpha, n0, k, n0 + k + extra);
            prop_assume!(StateSpace::new(p).total_states() <= 2000);
            let (r, trace) = solve_traced(&p).unwrap();
            let oracle = dense_oracle(&p).unwrap();
            for (x, y) in r.distribution.as_slice().iter().zip(oracle.as_slice()) {
                let err = (x - y).abs();
                prop_assert!(err <= 1e-9 * y || err <= 1e-14, "{} vs {}", x, y);
            }
            prop_assert!(r.max_balance_residual <= 1e-8);
            for c in &trace {
                prop_assert!(c.verify_bounds(&p).is_ok());
            }
            let m = r.metrics;
            prop_assert!((m.w - m.wq - 1.0).abs() < 1e-12);
            prop_assert!(m.s >= 0.0 && m.s <= k as f64 + 1e-12);
        }
    }
}
