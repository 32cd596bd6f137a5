use ism_harness::measure::star_topology;
use ism_harness::oracle::brute_force_recognition_oracle;
use ism_harness::scenario::{generate_demonstration, MotionModel, ScenarioSpec};
use ism_tree::prelude::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accumulator_matches_exhaustive_search(
        n in 2usize..=4,
        l in 1usize..=6,
        seed in 0u64..1000,
        t in 0usize..6,
        drop in proptest::collection::vec(any::<bool>(), 4),
        shifts in proptest::collection::vec((-0.12f64..0.12, -0.12f64..0.12, -35.0f64..35.0), 4),
    ) {
        let motion = MotionModel::Jitter { sigma_pos: 0.05, sigma_rot_deg: 10.0 };
        let ds = generate_demonstration(&ScenarioSpec::new("z", n, l, motion, seed)).unwrap();
        let mut inputs: Vec<ObjectState> = Vec::new();
        for (k, mut s) in ds.configuration_at(t % l).into_iter().enumerate() {
            if drop[k] && k > 0 {
                continue;
            }
            let (dx, dy, yaw) = shifts[k];
            s.pose = Pose::from_translation(dx, dy, 0.0).compose(&s.pose).compose(&Pose::from_yaw_degrees(yaw));
            inputs.push(s);
        }
        let trajs: Vec<&Trajectory> = ds.trajectories().collect();
        let (ism, _) = learn_single_ism("z", trajs[0], &trajs[1..]).unwrap();
        let params = RecognitionParams { result_keep_threshold: 0.0, ..RecognitionParams::default() };
        let best = recognize_single_ism(&inputs, &ism, &params).iter().map(|r| r.objective).fold(0.0, f64::max);
        let oracle = brute_force_recognition_oracle(&inputs, &ds, &star_topology(&ds), &params).unwrap().map_or(0.0, |r| r.objective);
        prop_assert!((best - oracle).abs() <= 1e-9, "accumulator {} oracle {}", best, oracle);
    }
}
