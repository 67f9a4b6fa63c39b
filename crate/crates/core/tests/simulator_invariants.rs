use boundcop::{run_des, run_des_detailed, ServiceModel, SimConfig, SimMode, SystemSpec, Variant};

fn system(theta: f64) -> SystemSpec {
    SystemSpec::new(
        0.25,
        ServiceModel::shifted_exponential(0.5, 1.0).unwrap(),
        theta,
        Variant::ExactPiecewise,
    )
    .unwrap()
}

#[test]
fn utilization_converges_to_offered_load() {
    let sys = system(0.2);
    let load = sys.arrival_rate * sys.min_law().m1;
    let res = run_des(&SimConfig::new(sys, 1_000_000, 1, 1, SimMode::ReducedMinService)).unwrap();
    assert!(
        (res.utilization_estimate - load).abs() <= 0.01 * load,
        "{} vs {load}",
        res.utilization_estimate
    );
}

#[test]
fn literal_and_reduced_modes_agree_where_both_apply() {
    for theta in [-1.0, 0.0, 1.0] {
        let reduced = run_des(&SimConfig::new(system(theta), 40_000, 6, 3, SimMode::ReducedMinService)).unwrap();
        let literal = run_des(&SimConfig::new(system(theta), 40_000, 6, 3, SimMode::LiteralTwoQueue)).unwrap();
        let gap = (reduced.mean_wait - literal.mean_wait).abs();
        let slack = 1.5 * (reduced.mean_wait_ci_halfwidth + literal.mean_wait_ci_halfwidth);
        assert!(
            gap <= slack,
            "theta {theta}: {} vs {}",
            reduced.mean_wait,
            literal.mean_wait
        );
        let effort_gap = (reduced.mean_service_effort - literal.mean_service_effort).abs();
        assert!(effort_gap <= 1.5 * (reduced.mean_service_ci_halfwidth + literal.mean_service_ci_halfwidth));
    }
}

#[test]
fn replication_rows_are_in_index_order() {
    let (agg, reps) = run_des_detailed(&SimConfig::new(system(0.5), 2_000, 5, 8, SimMode::ReducedMinService)).unwrap();
    assert_eq!(
        reps.iter().map(|r| r.replication).collect::<Vec<_>>(),
        vec![0, 1, 2, 3, 4]
    );
    let mean = reps.iter().map(|r| r.mean_wait).sum::<f64>() / 5.0;
    assert!((agg.mean_wait - mean).abs() < 1e-12);
    assert_eq!(agg.arrivals_counted, 5 * 1_800);
}
