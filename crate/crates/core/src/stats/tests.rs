use super::*;

#[test]
fn wilson_matches_reported_intervals() {
    let (lo, hi) = wilson_ci(131, 270, 0.95).unwrap();
    assert!((lo - 0.426).abs() < 0.001, "lo = {lo}");
    assert!((hi - 0.545).abs() < 0.001, "hi = {hi}");

    let (lo, hi) = wilson_ci(29, 30, 0.95).unwrap();
    assert!((lo - 0.833).abs() < 0.002, "lo = {lo}");
    assert!((hi - 0.994).abs() < 0.002, "hi = {hi}");
}

#[test]
fn wilson_boundaries_and_errors() {
    let (lo, hi) = wilson_ci(0, 10, 0.95).unwrap();
    assert_eq!(lo, 0.0);
    assert!(hi > 0.0 && hi < 1.0);

    let (lo, hi) = wilson_ci(10, 10, 0.95).unwrap();
    assert!(lo > 0.0 && lo < 1.0);
    assert_eq!(hi, 1.0);

    assert!(matches!(wilson_ci(0, 0, 0.95), Err(StatsError::ZeroSample)));
    assert!(matches!(
        wilson_ci(5, 3, 0.95),
        Err(StatsError::MoreSuccessesThanTrials)
    ));
}

#[test]
fn wilson_contains_point_estimate_and_narrows_with_n() {
    let mut prev_width = f64::INFINITY;
    for scale in [1u64, 2, 5, 10, 50] {
        let (lo, hi) = wilson_ci(13 * scale, 30 * scale, 0.95).unwrap();
        let p = 13.0 / 30.0;
        assert!(lo <= p && p <= hi);
        let width = hi - lo;
        assert!(width < prev_width);
        prev_width = width;
    }
}

#[test]
fn fisher_matches_reported_p_value() {
    let p = fisher_exact_2x2(29, 1, 26, 4).unwrap();
    assert!((p - 0.3532).abs() < 0.005, "p = {p}");
}

#[test]
fn fisher_oracle_by_hypergeometric_sum() {
    // Margins for (29, 1, 26, 4): rows 30/30, columns 55/5.
    // The support of x = top-left cell is 25..=30.
    let table_prob = |x: u64| -> f64 {
        (special::ln_choose(30, x) + special::ln_choose(30, 55 - x)
            - special::ln_choose(60, 55))
        .exp()
    };
    let observed = table_prob(29);
    let expected: f64 = (25..=30)
        .map(table_prob)
        .filter(|&p| p <= observed * (1.0 + 1e-7))
        .sum();
    let p = fisher_exact_2x2(29, 1, 26, 4).unwrap();
    assert!((p - expected).abs() < 1e-12, "p = {p}, oracle = {expected}");
}

#[test]
fn fisher_edge_tables() {
    assert!((fisher_exact_2x2(5, 5, 5, 5).unwrap() - 1.0).abs() < 1e-9);
    assert!(fisher_exact_2x2(10, 0, 0, 10).unwrap() < 1e-4);
    assert!(matches!(
        fisher_exact_2x2(0, 0, 0, 0),
        Err(StatsError::DegenerateTable)
    ));
}

#[test]
fn fisher_transposition_invariance() {
    let p1 = fisher_exact_2x2(29, 1, 26, 4).unwrap();
    let p2 = fisher_exact_2x2(29, 26, 1, 4).unwrap();
    assert!((p1 - p2).abs() < 1e-12);
}

#[test]
fn chi_square_on_the_five_strategy_table() {
    let table = [[131, 139], [30, 240], [4, 266], [1, 269], [1, 269]];
    let (stat, p) = chi_square_independence(&table).unwrap();
    assert!(stat > 200.0, "statistic = {stat}");
    assert!(p < 0.001, "p = {p}");
}

#[test]
fn chi_square_hand_oracle_and_edges() {
    let (stat, p) = chi_square_independence(&[[10, 0], [0, 10]]).unwrap();
    assert!((stat - 20.0).abs() < 1e-9);
    assert!(p < 0.001);

    let (stat, p) = chi_square_independence(&[[7, 13], [7, 13]]).unwrap();
    assert!(stat.abs() < 1e-9);
    assert!((p - 1.0).abs() < 1e-9);

    assert!(matches!(
        chi_square_independence(&[[0, 10], [0, 20]]),
        Err(StatsError::DegenerateTable)
    ));
    assert!(matches!(
        chi_square_independence(&[[1, 2]]),
        Err(StatsError::NotEnoughRows)
    ));
}

#[test]
fn cohens_h_matches_reported_effect() {
    let h = cohens_h(0.867, 0.333);
    assert!((h - 1.16).abs() < 0.01, "h = {h}");
    assert!((cohens_h(0.333, 0.867) + h).abs() < 1e-12);
    assert_eq!(cohens_h(0.42, 0.42), 0.0);
    assert!(cohens_h(1.0, 0.0) <= std::f64::consts::PI + 1e-12);
}

#[test]
fn transition_hand_count() {
    let stats = analyze_transitions([[10.0, 8.0, 8.0, 5.0].as_slice()]);
    assert_eq!(stats.improved, 2);
    assert_eq!(stats.degraded, 0);
    assert_eq!(stats.unchanged, 1);
    assert!((stats.mean_improvement - 2.5).abs() < 1e-12);
    assert_eq!(stats.total(), 3);
}

#[test]
fn transitions_constant_history_and_concatenation() {
    let constant = analyze_transitions([[4.0, 4.0, 4.0].as_slice()]);
    assert_eq!(constant.improved, 0);
    assert_eq!(constant.unchanged, 2);

    let a = [10.0, 8.0, 9.0];
    let b = [3.0, 3.0, 1.0];
    let joint = analyze_transitions([a.as_slice(), b.as_slice()]);
    let solo_a = analyze_transitions([a.as_slice()]);
    let solo_b = analyze_transitions([b.as_slice()]);
    assert_eq!(joint.improved, solo_a.improved + solo_b.improved);
    assert_eq!(joint.degraded, solo_a.degraded + solo_b.degraded);
    assert_eq!(joint.unchanged, solo_a.unchanged + solo_b.unchanged);
    assert_eq!(joint.degraded, 1);
}

#[test]
fn convergence_check_bound_formula() {
    let ticks = vec![
        TickTrace {
            pressure_before: 12.7,
            pressure_after: 10.7,
            region_pressures_before: vec![6.0, 6.7, 0.0],
            region_pressures_after: vec![4.0, 6.7, 0.0],
            activated: vec![0, 1],
            applied_regions: vec![0],
            applied_deltas: vec![-2.0],
        },
        TickTrace {
            pressure_before: 10.7,
            pressure_after: 9.7,
            region_pressures_before: vec![4.0, 6.7, 0.0],
            region_pressures_after: vec![4.0, 5.7, 0.0],
            activated: vec![0, 1],
            applied_regions: vec![1],
            applied_deltas: vec![-1.0],
        },
    ];
    let check = convergence_check(12.7, &ticks).unwrap();
    assert_eq!(check.epsilon, 0.0);
    assert_eq!(check.delta_min, 1.0);
    assert!((check.bound - 12.7).abs() < 1e-12);
    assert_eq!(check.observed_active_ticks, 2);
    assert_eq!(check.n_regions, 3);
    assert!(check.holds());
}

#[test]
fn convergence_check_requires_applied_patches() {
    let ticks = vec![TickTrace {
        pressure_before: 1.0,
        pressure_after: 1.0,
        region_pressures_before: vec![1.0],
        region_pressures_after: vec![1.0],
        activated: vec![0],
        applied_regions: vec![],
        applied_deltas: vec![],
    }];
    assert!(convergence_check(1.0, &ticks).is_none());
}

#[test]
fn convergence_check_detects_cross_region_coupling() {
    let ticks = vec![TickTrace {
        pressure_before: 8.0,
        pressure_after: 5.9,
        region_pressures_before: vec![5.0, 3.0],
        region_pressures_after: vec![3.0, 2.9],
        activated: vec![0],
        applied_regions: vec![0],
        applied_deltas: vec![-2.0],
    }];
    let check = convergence_check(8.0, &ticks).unwrap();
    assert!((check.epsilon - 0.1).abs() < 1e-12);
}

#[test]
fn parallel_ticks_drop_at_least_k_delta_min() {
    let tick = TickTrace {
        pressure_before: 12.0,
        pressure_after: 8.5,
        region_pressures_before: vec![5.0, 4.0, 3.0],
        region_pressures_after: vec![3.5, 2.0, 3.0],
        activated: vec![0, 1],
        applied_regions: vec![0, 1],
        applied_deltas: vec![-1.5, -2.0],
    };
    assert!(parallel_drop_holds(&[tick], 1.5));
}
