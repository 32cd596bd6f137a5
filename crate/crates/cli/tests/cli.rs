use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ism_tree::io::{self, ReportBody};
use ism_tree::prelude::*;

fn ismtree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ismtree")).current_dir(dir).args(args).env_remove("ISM_SEED").output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ismtree(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> (i32, serde_json::Value) {
    let out = ismtree(dir, args);
    let stderr = String::from_utf8(out.stderr).unwrap();
    let record = stderr.lines().last().unwrap();
    (out.status.code().unwrap(), serde_json::from_str(record).unwrap())
}

fn path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn two_static_objects_learn_one_ism_and_recognize_themselves() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["demo-gen", "--objects", "2", "--length", "4", "--motion", "static", "--out", "ds.json"]);
    ok(d, &["learn", "--dataset", "ds.json", "--out", "tree.json"]);
    let tree: IsmTree = io::load(path(&dir, "tree.json")).unwrap();
    assert_eq!(tree.ism_count(), 1);
    let table = ok(d, &["recognize", "--tree", "tree.json", "--input", "ds.json", "--timestep", "3", "--out", "report.json"]);
    assert!(table.contains("confidence 1.00"));
    assert!(table.contains("Obj. Function"));
    let report: ReportBody = io::load(path(&dir, "report.json")).unwrap();
    assert!((report.instances[0].confidence - 1.0).abs() < 1e-9);
    assert_eq!(ok(d, &["report", "--input", "report.json"]), table);
}

#[test]
fn files_match_the_in_memory_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["demo-gen", "--objects", "4", "--length", "8", "--out", "ds.json", "--seed", "5"]);
    ok(d, &["learn", "--dataset", "ds.json", "--topology", "complete", "--out", "tree.json"]);
    ok(d, &["recognize", "--tree", "tree.json", "--input", "ds.json", "--timestep", "2", "--out", "report.json"]);

    let ds = io::load_dataset(path(&dir, "ds.json")).unwrap();
    let (stars, heights) = partition_into_stars(&RelationTopology::complete(ds.objects().cloned())).unwrap();
    let tree = generate_ism_tree(&ds.category, &stars, &heights, &ds).unwrap();
    let instances = recognize_scene(&ds.configuration_at(2), &tree, &RecognitionParams::default()).unwrap();
    let report: ReportBody = io::load(path(&dir, "report.json")).unwrap();
    assert_eq!(report.instances, instances);
    let loaded: IsmTree = io::load(path(&dir, "tree.json")).unwrap();
    assert_eq!(loaded, tree);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["a", "b"] {
        ok(
            d,
            &["demo-gen", "--motion", "pairs", "--out", &format!("{name}.json"), "--test-out", &format!("{name}-set.json"), "--seed", "4"],
        );
        ok(d, &["learn", "--dataset", &format!("{name}.json"), "--out", &format!("{name}-tree.json")]);
        ok(d, &["asr-sim", "--log", &format!("{name}.jsonl"), "--seed", "2"]);
    }
    for (a, b) in [("a.json", "b.json"), ("a-set.json", "b-set.json"), ("a-tree.json", "b-tree.json"), ("a.jsonl", "b.jsonl")] {
        assert_eq!(fs::read(path(&dir, a)).unwrap(), fs::read(path(&dir, b)).unwrap(), "{a}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_ismtree"))
        .current_dir(d)
        .args(["demo-gen", "--motion", "pairs", "--out", "c.json"])
        .env("ISM_SEED", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(path(&dir, "a.json")).unwrap(), fs::read(path(&dir, "c.json")).unwrap());
}

#[test]
fn optimized_pipeline_has_no_more_false_positives_than_star() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "demo-gen",
            "--objects",
            "4",
            "--length",
            "30",
            "--motion",
            "pairs",
            "--out",
            "ds.json",
            "--test-out",
            "swaps.json",
            "--count",
            "60",
            "--seed",
            "7",
        ],
    );
    let summary = ok(d, &["optimize-topology", "--dataset", "ds.json", "--test-set", "swaps.json", "--eps-r", "0.9", "--out", "topo.json"]);
    let fps = |name: &str| -> f64 {
        let line = summary.lines().find(|l| l.starts_with(name)).unwrap();
        let tail = line.split("numFPs ").nth(1).unwrap();
        tail.split(' ').next().unwrap().parse().unwrap()
    };
    assert!(fps("optimized") <= fps("star"));
    ok(d, &["learn", "--dataset", "ds.json", "--topology", "file:topo.json", "--out", "opt.json"]);
    ok(d, &["learn", "--dataset", "ds.json", "--out", "star.json"]);

    let set: ism_tree::io::TestSetBody = io::load(path(&dir, "swaps.json")).unwrap();
    let mut hits = [0usize; 2];
    for (k, tree) in ["star.json", "opt.json"].iter().enumerate() {
        for (i, c) in set.configurations.iter().enumerate().filter(|(_, c)| !c.valid) {
            let name = format!("c{i}.json");
            io::save(path(&dir, &name), &ism_tree::io::ConfigurationBody { objects: c.objects.clone() }).unwrap();
            let table = ok(d, &["recognize", "--tree", tree, "--input", &name, "--eps-r", "0.9"]);
            hits[k] += usize::from(table.starts_with("Instance"));
        }
    }
    assert!(hits[1] <= hits[0]);
}

#[test]
fn prediction_writes_poses_for_missing_objects() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["demo-gen", "--objects", "3", "--length", "5", "--out", "ds.json"]);
    ok(d, &["learn", "--dataset", "ds.json", "--out", "tree.json"]);
    let ds = io::load_dataset(path(&dir, "ds.json")).unwrap();
    let partial: Vec<ObjectState> = ds.configuration_at(0).into_iter().take(2).collect();
    io::save(path(&dir, "partial.json"), &ism_tree::io::ConfigurationBody { objects: partial }).unwrap();
    ok(d, &["predict", "--tree", "tree.json", "--input", "partial.json", "--n-p", "7", "--out", "cloud.json"]);
    let cloud: ism_tree::io::CloudBody = io::load(path(&dir, "cloud.json")).unwrap();
    assert_eq!(cloud.cloud.poses.len(), 1);
    assert_eq!(cloud.cloud.len(), 7);
}

#[test]
fn asr_replay_matches_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let live = ok(d, &["asr-sim", "--log", "run.jsonl"]);
    assert!(live.contains("complete true"));
    assert_eq!(ok(d, &["asr-sim", "--replay", "run.jsonl"]), live);
    let sweep = ok(d, &["asr-sim", "--strategy", "sweep"]);
    let views = |s: &str| s.lines().filter(|l| l.starts_with("view")).count();
    assert!(2 * views(&live) <= views(&sweep));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(dir.path(), &["bench", "--n", "3,4", "--l", "5", "--configurations", "2"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,l,mean_s,std_s");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,5,"));
}

#[test]
fn errors_carry_exit_codes_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["demo-gen", "--objects", "3", "--length", "4", "--out", "ds.json"]);

    let (code, rec) = fails(d, &["learn", "--dataset", "missing.json", "--out", "t.json"]);
    assert_eq!(code, 3);
    assert_eq!(rec["error"], "file");
    assert_eq!(rec["path"], "missing.json");

    fs::write(path(&dir, "junk.json"), "{ not json").unwrap();
    assert_eq!(fails(d, &["learn", "--dataset", "junk.json", "--out", "t.json"]).0, 3);

    let (code, rec) = fails(d, &["learn", "--dataset", "ds.json", "--topology", "ring", "--out", "t.json"]);
    assert_eq!(code, 2);
    assert_eq!(rec["code"], 2);
    assert_eq!(fails(d, &["recognize", "--tree", "t.json", "--input", "ds.json", "--tau-pos", "-1"]).0, 2);
    assert_eq!(fails(d, &["no-such-command"]).0, 2);

    let ds = io::load_dataset(path(&dir, "ds.json")).unwrap();
    let ids: Vec<ObjectId> = ds.objects().cloned().collect();
    let topology = RelationTopology::new(ids.clone(), [Relation::new(ids[0].clone(), ids[1].clone()).unwrap()]).unwrap();
    io::save(path(&dir, "split.json"), &topology).unwrap();
    let (code, rec) = fails(d, &["learn", "--dataset", "ds.json", "--topology", "file:split.json", "--out", "t.json"]);
    assert_eq!(code, 4);
    assert_eq!(rec["error"], "domain");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["demo-gen", "--objects", "2", "--length", "3", "--motion", "static", "--out", "ds.json"]);
    ok(d, &["learn", "--dataset", "ds.json", "--out", "tree.json"]);
    let ds = io::load_dataset(path(&dir, "ds.json")).unwrap();
    let mut objects = ds.configuration_at(0);
    objects[1].pose = Pose::from_translation(0.05, 0.0, 0.0).compose(&objects[1].pose);
    io::save(path(&dir, "moved.json"), &ism_tree::io::ConfigurationBody { objects }).unwrap();
    // 0.05 m off with a 0.1 m tolerance: confidence 0.75
    fs::write(path(&dir, "strict.json"), "{\"version\": \"1\", \"kind\": \"params\", \"assemblyThreshold\": 0.8}").unwrap();
    let strict = ok(d, &["recognize", "--tree", "tree.json", "--input", "moved.json", "--config", "strict.json"]);
    assert!(strict.starts_with("No instance"));
    let loose = ok(d, &["recognize", "--tree", "tree.json", "--input", "moved.json", "--config", "strict.json", "--eps-r", "0.7"]);
    assert!(loose.contains("confidence 0.75"));
}
