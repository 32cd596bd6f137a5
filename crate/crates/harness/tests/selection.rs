use ism_harness::measure::*;
use ism_harness::perturb::{generate_perturbed_test_set, PerturbationKind, PerturbationSpec};
use ism_harness::scenario::{generate_demonstration, GroupMotion, MotionModel, ScenarioSpec};
use ism_tree::prelude::*;

#[test]
fn optimized_topology_is_no_worse_than_star() {
    let pair = |members: Vec<usize>| GroupMotion { members, max_shift: [0.3, 0.0, 0.0], max_yaw_deg: 0.0 };
    let p = |x: f64, y: f64| Pose::from_position_yaw(x, y, 0.75, 0.0);
    let spec = ScenarioSpec {
        layout: Some(vec![p(0.1, 0.0), p(0.0, 0.5), p(0.2, 0.5)]),
        ..ScenarioSpec::new("pair", 3, 30, MotionModel::RigidGroups { groups: vec![pair(vec![1, 2])] }, 5)
    };
    let ds = generate_demonstration(&spec).unwrap();
    let swaps = generate_perturbed_test_set(&ds, &PerturbationSpec::new(PerturbationKind::Swap, 0.0, 60, 5)).unwrap();
    let params = RecognitionParams { assembly_threshold: 0.9, ..RecognitionParams::default() };
    let mut scorer = TopologyScorer { dataset: &ds, test_set: &swaps, params, lambda_fp: 1.0, cost: CostModel::default() };
    let outcome = optimize_topology(&mut scorer, &SearchParams::default()).unwrap();
    let star = scorer.evaluate(&star_topology(&ds)).unwrap();
    let best = scorer.evaluate(&outcome.topology).unwrap();
    assert!(star.num_fps > 0.0);
    assert!(best.num_fps <= star.num_fps);
    assert!(best.score <= star.score);
    assert_eq!(outcome.start_score, star.score);
    assert!(outcome.topology.is_connected());
    assert!(outcome.topology.relation_count() <= complete_topology(&ds).relation_count());
    assert!(outcome.evaluations <= SearchParams::default().max_evaluations);
}
