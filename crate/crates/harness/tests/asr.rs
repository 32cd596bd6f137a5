use ism_harness::asr::*;
use ism_harness::measure::{build_tree, star_topology};
use ism_tree::prelude::*;

fn trees(scene: &TwoRegionWorld) -> Vec<IsmTree> {
    vec![build_tree(&scene.dataset, &star_topology(&scene.dataset)).unwrap()]
}

#[test]
fn everything_in_the_first_view_needs_one_view() {
    let scene = two_region_world(0.0, 1).unwrap();
    let mut world = scene.world.clone();
    // pull the shelf objects onto the table
    for s in world.objects.iter_mut().filter(|s| ["Jar", "Box"].contains(&s.id.class_label.as_str())) {
        s.pose = Pose::from_translation(1.4 - s.pose.position.x, -1.6, 0.0).compose(&s.pose);
    }
    let log = run_asr_simulation(&world, &trees(&scene), &AsrParams::default()).unwrap();
    assert!(log.complete);
    assert_eq!(log.views, 1);
    assert_eq!(log.adopted_views().count(), 1);
}

#[test]
fn guided_search_beats_sweep_and_boxes() {
    let scene = two_region_world(0.0, 2).unwrap();
    let trees = trees(&scene);
    let guided = run_asr_simulation(&scene.world, &trees, &AsrParams::default()).unwrap();
    let sweep = run_asr_simulation(&scene.world, &trees, &AsrParams { strategy: SearchStrategy::Sweep, ..AsrParams::default() }).unwrap();
    let boxes = run_asr_simulation(
        &scene.world,
        &trees,
        &AsrParams { strategy: SearchStrategy::BoundingBoxes { regions: scene.regions.clone() }, ..AsrParams::default() },
    )
    .unwrap();
    assert!(guided.complete && sweep.complete && boxes.complete);
    assert!(guided.views <= boxes.views);
    assert!(2 * guided.views <= sweep.views);
    assert!(guided.cost < sweep.cost);
    assert!(guided.steps.iter().any(|s| s.state == AsrState::RelationBasedSearch));
}

#[test]
fn rotated_world_is_still_found() {
    for yaw in [35.0, 120.0, -150.0] {
        let scene = two_region_world(yaw, 3).unwrap();
        let log = run_asr_simulation(&scene.world, &trees(&scene), &AsrParams::default()).unwrap();
        assert!(log.complete, "yaw {yaw}");
        assert_eq!(log.found.len(), 5);
    }
}

#[test]
fn logs_replay_and_repeat() {
    let scene = two_region_world(0.0, 4).unwrap();
    let trees = trees(&scene);
    let params = AsrParams { seed: 9, ..AsrParams::default() };
    let a = run_asr_simulation(&scene.world, &trees, &params).unwrap();
    let b = run_asr_simulation(&scene.world, &trees, &params).unwrap();
    let text = a.to_json_lines().unwrap();
    assert_eq!(text, b.to_json_lines().unwrap());
    assert_eq!(AsrLog::from_json_lines(&text).unwrap(), a);
}
