use phoscil::cycle::{
    compare, find_limit_cycle, reference_cycle, return_map_contraction, segment_times,
    write_compare_csv, CycleReport, COMPARE_HEADER,
};
use phoscil::error::AnalysisError;
use phoscil::gspt::{cell_params, fixed_point};
use phoscil::integrator::IntegratorConfig;
use phoscil::params::{DimlessParams, EpsSplit, PhysicalParams, DEFAULT_EPS_REF};

fn setup() -> (DimlessParams, EpsSplit) {
    let dp = PhysicalParams::table1().derive_dimensionless().unwrap();
    let es = dp.derive_eps_split(DEFAULT_EPS_REF).unwrap();
    (dp, es)
}

fn cycle_at(eps: f64) -> CycleReport {
    let (dp, es) = setup();
    find_limit_cycle(&dp, &es.at(eps), None, &IntegratorConfig::default())
        .unwrap()
        .require_converged()
        .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// (eps, period, tau_b_to_a, tau_a_to_b) from the published timescale table
const TABLE: [(f64, f64, f64, f64); 3] = [
    (1e-3, 90.2, 23.0, 67.2),
    (1e-4, 945.0, 120.0, 825.0),
    (1e-5, 8.46e3, 975.0, 7.48e3),
];

#[test]
fn periods_match_table() {
    for (eps, period, _, _) in TABLE {
        let c = cycle_at(eps);
        assert!(
            rel(c.period, period) < 0.02,
            "eps {eps}: period {}",
            c.period
        );
    }
}

#[test]
fn segments_match_table() {
    for (eps, _, ba, ab) in TABLE {
        let c = cycle_at(eps);
        assert!(rel(c.tau_b_to_a, ba) < 0.05, "eps {eps}: {}", c.tau_b_to_a);
        assert!(rel(c.tau_a_to_b, ab) < 0.05, "eps {eps}: {}", c.tau_a_to_b);
    }
}

#[test]
fn period_is_sum_of_segments() {
    let c = cycle_at(1e-3);
    assert_eq!(c.period, c.tau_b_to_a + c.tau_a_to_b);
    let (ba, ab) = segment_times(&c.trajectory).unwrap();
    assert_eq!((ba, ab), (c.tau_b_to_a, c.tau_a_to_b));
}

#[test]
fn period_does_not_depend_on_anchor() {
    for eps in [1e-3, 1e-4] {
        let c = cycle_at(eps);
        assert!(
            rel(c.period_min_anchor, c.period) < 1e-6,
            "{} vs {}",
            c.period_min_anchor,
            c.period
        );
    }
}

#[test]
fn cycle_winds_once_around_equilibrium() {
    for eps in [1e-3, 1e-4, 1e-5] {
        let c = cycle_at(eps);
        // traversed clockwise in (s, h)
        assert!(
            (c.winding_number.abs() - 1.0).abs() < 1e-6,
            "eps {eps}: {}",
            c.winding_number
        );
    }
}

#[test]
fn turning_points_are_extrema_of_s() {
    let c = cycle_at(1e-4);
    let (max, min) = c.turning_points;
    assert!(max.s > min.s);
    for x in &c.trajectory.x {
        assert!(x[0] <= max.s * (1.0 + 1e-9) && x[0] >= min.s * (1.0 - 1e-9));
    }
    // s-maximum on the acidic side, s-minimum on the basic side
    assert!(max.h > min.h);
}

#[test]
fn small_eps_segments_overshoot_slow_drift() {
    for eps in [1e-5, 1e-4] {
        let c = cycle_at(eps);
        let a = c.analytic.unwrap();
        assert!(c.tau_b_to_a >= a.t_acid, "eps {eps}");
        assert!(
            rel(c.measured_ratio(), a.ratio) < 0.15,
            "eps {eps}: {}",
            c.measured_ratio()
        );
    }
}

#[test]
fn measured_ratios_match_table() {
    for (eps, ratio) in [(1e-5, 7.67), (1e-4, 6.88), (1e-3, 2.92)] {
        let c = cycle_at(eps);
        assert!(
            (c.measured_ratio() - ratio).abs() < 0.01,
            "eps {eps}: {}",
            c.measured_ratio()
        );
    }
}

#[test]
fn tolerance_refinement_is_self_consistent() {
    let (dp, es) = setup();
    let coarse = find_limit_cycle(
        &dp,
        &es,
        None,
        &IntegratorConfig::with_tolerances(1e-7, 1e-9),
    )
    .unwrap();
    let fine = find_limit_cycle(
        &dp,
        &es,
        None,
        &IntegratorConfig::with_tolerances(1e-11, 1e-13),
    )
    .unwrap();
    assert!(fine.converged);
    assert!(
        rel(coarse.period, fine.period) < 1e-5,
        "{} vs {}",
        coarse.period,
        fine.period
    );
}

#[test]
fn initial_state_does_not_matter() {
    let (dp, es) = setup();
    let cfg = IntegratorConfig::default();
    let a = find_limit_cycle(&dp, &es, None, &cfg).unwrap();
    let b = find_limit_cycle(&dp, &es, Some([0.5, 0.8]), &cfg).unwrap();
    assert!(rel(a.period, b.period) < 1e-7);
}

#[test]
fn trajectory_stays_positive() {
    for eps in [1e-3, 1e-5] {
        let c = cycle_at(eps);
        assert!(c.trajectory.x.iter().all(|x| x[0] > 0.0 && x[1] > 0.0));
    }
}

#[test]
fn stable_equilibrium_is_reported() {
    let (dp, es) = setup();
    let cell = cell_params(&dp, dp.k_h / dp.k_s, 3.0);
    assert!(!fixed_point(&cell).unwrap().oscillates());
    let err = find_limit_cycle(&cell, &es, None, &IntegratorConfig::default()).unwrap_err();
    assert!(
        matches!(err, AnalysisError::ConvergesToEquilibrium(_)),
        "{err}"
    );
}

#[test]
fn exhausted_budget_is_not_converged() {
    // a coarse tolerance leaves return differences above the threshold
    let (dp, es) = setup();
    let cfg = IntegratorConfig::with_tolerances(1e-3, 1e-3);
    let c = find_limit_cycle(&dp, &es, None, &cfg).unwrap();
    assert!(!c.converged);
    assert_eq!(c.n_transient_periods, phoscil::cycle::TRANSIENT_BUDGET);
    assert!(c.period > 0.0);
    assert!(matches!(
        c.require_converged(),
        Err(AnalysisError::NotConverged { .. })
    ));
}

#[test]
fn analytic_ratio_is_eps_free() {
    let (dp, es) = setup();
    let rows = compare(&dp, &es, &[1e-5, 1e-4, 1e-3], &IntegratorConfig::default());
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio_analytic.unwrap()).collect();
    assert!(ratios.iter().all(|&r| r.to_bits() == ratios[0].to_bits()));
    assert!((ratios[0] - 7.9632).abs() < 5e-5);
    let total: Vec<f64> = rows.iter().map(|r| r.t_total.unwrap()).collect();
    assert!((total[0] / total[1] - 10.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| r.error.is_none()));
}

#[test]
fn failing_row_leaves_others_intact() {
    let (dp, es) = setup();
    let rows = compare(&dp, &es, &[1e-3, -1.0], &IntegratorConfig::default());
    assert!(rows[0].error.is_none() && rows[0].tau.is_some());
    assert!(rows[1].error.is_some() && rows[1].tau.is_none());
    let mut buf = Vec::new();
    write_compare_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], COMPARE_HEADER);
    assert_eq!(lines[0].split(',').count(), 9);
    assert!(lines[2].contains("nan"));
}

#[test]
fn return_map_contracts() {
    let (dp, es) = setup();
    let rep = return_map_contraction(&dp, &es, &IntegratorConfig::default(), 0.01, 2).unwrap();
    assert_eq!(rep.displacements.len(), 3);
    assert!(rep.max_ratio() < 0.1, "{rep:?}");
}

#[test]
fn reference_model_cycle() {
    let rc = reference_cycle(&PhysicalParams::table1(), &IntegratorConfig::default()).unwrap();
    assert!(rc.converged);
    // regression value; see the acceptance suite for the cross-model comparison
    assert!((rc.period - 65.0877).abs() < 1e-3, "{rc:?}");
    assert!((rc.period_s * PhysicalParams::table1().k_max() - rc.period).abs() < 1e-9 * rc.period);
}
