//! A planar active scene recognition simulation.
//!
//! A robot with a frustum camera searches a world for the objects of one or
//! more scene categories. Direct search adopts views without using scene
//! knowledge. Once something is found the indirect loop alternates scene
//! recognition, pose prediction for missing objects, and adoption of the view
//! that covers the most predicted poses net of travel.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::{PI, TAU};

use ism_tree::geometry::Pose;
use ism_tree::model::{DemonstrationDataset, ObjectId, ObjectState};
use ism_tree::prediction::{compute_shortest_paths, generate_cloud_of_pose_predictions, RandomSampler};
use ism_tree::recognition::RecognitionParams;
use ism_tree::tree::{recognize_scene, IsmTree, SceneInstance};
use nalgebra::{UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::scenario::{generate_demonstration, MotionModel, ScenarioSpec};

/// Planar robot pose; the camera looks along `yaw_deg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct View {
    pub x: f64,
    pub y: f64,
    pub yaw_deg: f64,
}

impl View {
    pub fn new(x: f64, y: f64, yaw_deg: f64) -> Self {
        Self { x, y, yaw_deg }
    }

    /// A view at `(x, y)` facing `target`.
    pub fn looking_at(x: f64, y: f64, target: [f64; 2]) -> Self {
        Self::new(x, y, (target[1] - y).atan2(target[0] - x).to_degrees())
    }

    fn same_as(&self, other: &View) -> bool {
        (self.x - other.x).abs() < 1e-9
            && (self.y - other.y).abs() < 1e-9
            && wrap(self.yaw_deg.to_radians() - other.yaw_deg.to_radians()).abs() < 1e-9
    }
}

fn wrap(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Camera {
    pub fov_deg: f64,
    pub min_range: f64,
    pub max_range: f64,
}

impl Default for Camera {
    fn default() -> Self {
        Self { fov_deg: 60.0, min_range: 0.3, max_range: 2.5 }
    }
}

impl Camera {
    /// Range and bearing test against the horizontal position only.
    pub fn sees(&self, view: &View, point: &Vector3<f64>) -> bool {
        let (dx, dy) = (point.x - view.x, point.y - view.y);
        let r = dx.hypot(dy);
        if r < self.min_range || r > self.max_range {
            return false;
        }
        wrap(dy.atan2(dx) - view.yaw_deg.to_radians()).abs() <= (self.fov_deg / 2.0).to_radians()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimWorld {
    pub objects: Vec<ObjectState>,
    #[serde(default)]
    pub clutter: Vec<ObjectState>,
    pub robot: View,
    #[serde(default)]
    pub camera: Camera,
    pub noise_pos: f64,
    pub noise_rot_deg: f64,
}

impl SimWorld {
    pub fn new(objects: Vec<ObjectState>, robot: View) -> Self {
        Self { objects, clutter: Vec::new(), robot, camera: Camera::default(), noise_pos: 0.005, noise_rot_deg: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.camera;
        if !(c.fov_deg > 0.0 && c.fov_deg < 180.0) {
            return Err(HarnessError::InvalidWorld("field of view must lie in (0, 180) degrees".into()));
        }
        if !(c.min_range > 0.0 && c.max_range > c.min_range) {
            return Err(HarnessError::InvalidWorld("camera ranges must be positive and ordered".into()));
        }
        if !(self.noise_pos >= 0.0 && self.noise_rot_deg >= 0.0) {
            return Err(HarnessError::InvalidWorld("detection noise must be non-negative".into()));
        }
        Ok(())
    }
}

impl ism_tree::io::DocumentKind for SimWorld {
    const KIND: &'static str = "world";
}

/// Uninformed views: every grid position with `yaw_steps` headings,
/// row by row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepGrid {
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub spacing: f64,
    pub yaw_steps: usize,
}

impl SweepGrid {
    pub fn views(&self) -> Vec<View> {
        let steps = |lo: f64, hi: f64| ((hi - lo) / self.spacing + 1e-9).floor() as usize + 1;
        let mut out = Vec::new();
        for iy in 0..steps(self.min[1], self.max[1]) {
            for ix in 0..steps(self.min[0], self.max[0]) {
                for k in 0..self.yaw_steps.max(1) {
                    out.push(View::new(
                        self.min[0] + ix as f64 * self.spacing,
                        self.min[1] + iy as f64 * self.spacing,
                        360.0 * k as f64 / self.yaw_steps.max(1) as f64,
                    ));
                }
            }
        }
        out
    }
}

/// Axis-aligned search region `[min, max]` on the floor plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum SearchStrategy {
    /// Direct search, then the recognition/prediction loop.
    PredictionGuided,
    /// Start view and sweep grid only.
    Sweep,
    /// Greedy coverage of the given regions with the view scorer; no
    /// prediction.
    BoundingBoxes { regions: Vec<Region> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AsrParams {
    pub strategy: SearchStrategy,
    pub recognition: RecognitionParams,
    pub sweep: SweepGrid,
    /// Floor positions where objects were demonstrated, looked at first.
    #[serde(default)]
    pub informed_targets: Vec<[f64; 2]>,
    pub informed_distance: f64,
    /// Consecutive views without a new object before the indirect loop gives up.
    pub no_progress_limit: usize,
    pub predictions_per_object: usize,
    pub lambda_travel: f64,
    /// Travel cost per radian of turning.
    pub turn_cost: f64,
    pub polar_radii: Vec<f64>,
    pub polar_directions: usize,
    pub seed: u64,
}

impl Default for AsrParams {
    fn default() -> Self {
        Self {
            strategy: SearchStrategy::PredictionGuided,
            recognition: RecognitionParams { result_keep_threshold: 0.0, assembly_threshold: 0.0, ..RecognitionParams::default() },
            sweep: SweepGrid { min: [-2.0, -2.0], max: [2.0, 2.0], spacing: 1.0, yaw_steps: 8 },
            informed_targets: Vec::new(),
            informed_distance: 1.0,
            no_progress_limit: 3,
            predictions_per_object: 50,
            lambda_travel: 0.05,
            turn_cost: 0.2,
            polar_radii: vec![0.8, 1.2, 1.6],
            polar_directions: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AsrState {
    DirectSearch,
    SceneRecognition,
    ObjectPosePrediction,
    RelationBasedSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AsrStep {
    pub state: AsrState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<View>,
    #[serde(default)]
    pub detected: Vec<ObjectId>,
    /// Travel cost accumulated so far.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AsrLog {
    pub steps: Vec<AsrStep>,
    pub instances: Vec<SceneInstance>,
    pub found: Vec<ObjectId>,
    pub views: usize,
    pub cost: f64,
    /// Whether every category object was found.
    pub complete: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "camelCase")]
enum LogLine {
    Step(AsrStep),
    #[serde(rename_all = "camelCase")]
    Summary {
        instances: Vec<SceneInstance>,
        found: Vec<ObjectId>,
        views: usize,
        cost: f64,
        complete: bool,
    },
}

impl AsrLog {
    /// One JSON record per line: every step, then a summary.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        let mut push = |line: &LogLine| -> Result<()> {
            out.push_str(&serde_json::to_string(line).map_err(ism_tree::Error::from)?);
            out.push('\n');
            Ok(())
        };
        for s in &self.steps {
            push(&LogLine::Step(s.clone()))?;
        }
        push(&LogLine::Summary {
            instances: self.instances.clone(),
            found: self.found.clone(),
            views: self.views,
            cost: self.cost,
            complete: self.complete,
        })?;
        Ok(out)
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            match serde_json::from_str(line).map_err(ism_tree::Error::from)? {
                LogLine::Step(s) => steps.push(s),
                LogLine::Summary { instances, found, views, cost, complete } => {
                    return Ok(Self { steps, instances, found, views, cost, complete })
                }
            }
        }
        Err(HarnessError::InvalidWorld("log has no summary record".into()))
    }

    pub fn adopted_views(&self) -> impl Iterator<Item = (AsrState, &View)> {
        self.steps.iter().filter_map(|s| s.view.as_ref().map(|v| (s.state, v)))
    }
}

struct Sim<'a> {
    world: &'a SimWorld,
    trees: &'a [IsmTree],
    params: &'a AsrParams,
    rng: ChaCha8Rng,
    pos_noise: Normal<f64>,
    rot_noise: Normal<f64>,
    targets: BTreeSet<ObjectId>,
    found: BTreeMap<ObjectId, ObjectState>,
    adopted: Vec<View>,
    at: View,
    cost: f64,
    steps: Vec<AsrStep>,
    instances: Vec<SceneInstance>,
    /// Tree index of each instance.
    instance_tree: Vec<usize>,
}

impl<'a> Sim<'a> {
    fn new(world: &'a SimWorld, trees: &'a [IsmTree], params: &'a AsrParams) -> Result<Self> {
        world.validate()?;
        if trees.is_empty() {
            return Err(HarnessError::InvalidWorld("at least one ISM tree is required".into()));
        }
        let normal = |s: f64| Normal::new(0.0, s).map_err(|e| HarnessError::InvalidWorld(e.to_string()));
        Ok(Self {
            world,
            trees,
            params,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            pos_noise: normal(world.noise_pos)?,
            rot_noise: normal(world.noise_rot_deg.to_radians())?,
            targets: trees.iter().flat_map(|t| t.objects()).cloned().collect(),
            found: BTreeMap::new(),
            adopted: Vec::new(),
            at: world.robot,
            cost: 0.0,
            steps: Vec::new(),
            instances: Vec::new(),
            instance_tree: Vec::new(),
        })
    }

    fn travel(&self, to: &View) -> f64 {
        let d = (to.x - self.at.x).hypot(to.y - self.at.y);
        let turn = wrap(to.yaw_deg.to_radians() - self.at.yaw_deg.to_radians()).abs();
        d + self.params.turn_cost * turn
    }

    fn was_adopted(&self, view: &View) -> bool {
        self.adopted.iter().any(|v| v.same_as(view))
    }

    fn complete(&self) -> bool {
        self.targets.iter().all(|t| self.found.contains_key(t))
    }

    fn noisy(&mut self, s: &ObjectState) -> ObjectState {
        let dp = Pose::from_translation(
            self.pos_noise.sample(&mut self.rng),
            self.pos_noise.sample(&mut self.rng),
            self.pos_noise.sample(&mut self.rng),
        );
        let axis =
            Vector3::new(self.rot_noise.sample(&mut self.rng), self.rot_noise.sample(&mut self.rng), self.rot_noise.sample(&mut self.rng));
        let dr = Pose::new(Vector3::zeros(), UnitQuaternion::from_scaled_axis(axis));
        ObjectState::detected(s.id.clone(), dp.compose(&s.pose).compose(&dr))
    }

    /// Moves to `view`, detects everything in the frustum and returns the
    /// newly found category objects.
    fn adopt(&mut self, state: AsrState, view: View) -> Vec<ObjectId> {
        self.cost += self.travel(&view);
        self.at = view;
        self.adopted.push(view);
        let world = self.world;
        let mut new = Vec::new();
        for s in world.objects.iter().chain(&world.clutter) {
            if self.found.contains_key(&s.id) || !world.camera.sees(&view, &s.pose.position) {
                continue;
            }
            let detection = self.noisy(s);
            if self.targets.contains(&s.id) {
                new.push(s.id.clone());
            }
            self.found.insert(s.id.clone(), detection);
        }
        self.steps.push(AsrStep { state, view: Some(view), detected: new.clone(), cost: self.cost });
        new
    }

    fn log(&mut self, state: AsrState) {
        self.steps.push(AsrStep { state, view: None, detected: Vec::new(), cost: self.cost });
    }

    fn recognize(&mut self) -> Result<()> {
        let inputs: Vec<ObjectState> = self.found.values().cloned().collect();
        self.instances.clear();
        self.instance_tree.clear();
        for (i, tree) in self.trees.iter().enumerate() {
            if let Some(best) = recognize_scene(&inputs, tree, &self.params.recognition)?.into_iter().next() {
                self.instances.push(best);
                self.instance_tree.push(i);
            }
        }
        self.log(AsrState::SceneRecognition);
        Ok(())
    }

    /// Predicted positions of objects not yet found, with the confidence of
    /// the instance they were predicted from.
    fn predict(&mut self) -> Result<Vec<(f64, Vec<Vector3<f64>>)>> {
        let mut out = Vec::new();
        let n_p = self.params.predictions_per_object;
        for (instance, &i) in self.instances.iter().zip(&self.instance_tree) {
            let tree = &self.trees[i];
            let paths = compute_shortest_paths(tree);
            let cloud = generate_cloud_of_pose_predictions(instance, tree, &paths, n_p, &mut RandomSampler(&mut self.rng))?;
            for (id, poses) in cloud.poses {
                if !self.found.contains_key(&id) {
                    out.push((instance.confidence, poses.iter().map(|p| p.position).collect()));
                }
            }
        }
        self.log(AsrState::ObjectPosePrediction);
        Ok(out)
    }

    fn polar_views(&self, center: [f64; 2]) -> Vec<View> {
        let mut out = Vec::new();
        for &r in &self.params.polar_radii {
            for k in 0..self.params.polar_directions.max(1) {
                let a = TAU * k as f64 / self.params.polar_directions.max(1) as f64;
                out.push(View::looking_at(center[0] + r * a.cos(), center[1] + r * a.sin(), center));
            }
        }
        out
    }

    /// Best unadopted candidate by `gain(view) - lambda * travel`, among
    /// views with positive gain.
    fn best_view(&self, candidates: &[View], gain: impl Fn(&View) -> f64) -> Option<View> {
        let mut best: Option<(f64, View)> = None;
        for v in candidates {
            if self.was_adopted(v) {
                continue;
            }
            let g = gain(v);
            if g <= 0.0 {
                continue;
            }
            let u = g - self.params.lambda_travel * self.travel(v);
            if best.is_none_or(|(b, _)| u > b) {
                best = Some((u, *v));
            }
        }
        best.map(|(_, v)| v)
    }

    fn finish(self) -> AsrLog {
        let complete = self.complete();
        AsrLog {
            views: self.adopted.len(),
            found: self.found.keys().filter(|id| self.targets.contains(*id)).cloned().collect(),
            cost: self.cost,
            instances: self.instances,
            steps: self.steps,
            complete,
        }
    }
}

/// Runs the search until every category object is found or the strategy
/// runs out of views.
pub fn run_asr_simulation(world: &SimWorld, trees: &[IsmTree], params: &AsrParams) -> Result<AsrLog> {
    let mut sim = Sim::new(world, trees, params)?;
    match &params.strategy {
        SearchStrategy::PredictionGuided => guided(&mut sim)?,
        SearchStrategy::Sweep => sweep(&mut sim)?,
        SearchStrategy::BoundingBoxes { regions } => boxes(&mut sim, regions)?,
    }
    Ok(sim.finish())
}

fn direct_queue(sim: &Sim, informed: bool) -> VecDeque<View> {
    let mut queue = VecDeque::from([sim.world.robot]);
    if informed {
        let (rx, ry) = (sim.world.robot.x, sim.world.robot.y);
        for t in &sim.params.informed_targets {
            let (dx, dy) = (rx - t[0], ry - t[1]);
            let d = dx.hypot(dy).max(1e-9);
            let s = sim.params.informed_distance / d;
            queue.push_back(View::looking_at(t[0] + dx * s, t[1] + dy * s, *t));
        }
    }
    queue.extend(sim.params.sweep.views());
    queue
}

fn sweep(sim: &mut Sim) -> Result<()> {
    let mut queue = direct_queue(sim, false);
    while let Some(view) = queue.pop_front() {
        if sim.was_adopted(&view) {
            continue;
        }
        if !sim.adopt(AsrState::DirectSearch, view).is_empty() {
            sim.recognize()?;
            if sim.complete() {
                break;
            }
        }
    }
    Ok(())
}

fn guided(sim: &mut Sim) -> Result<()> {
    let mut queue = direct_queue(sim, true);
    let sweep_views = sim.params.sweep.views();
    'search: loop {
        // direct search until something new shows up
        loop {
            let Some(view) = queue.pop_front() else {
                break 'search;
            };
            if !sim.was_adopted(&view) && !sim.adopt(AsrState::DirectSearch, view).is_empty() {
                break;
            }
        }
        let mut idle = 0;
        loop {
            sim.recognize()?;
            if sim.complete() {
                break 'search;
            }
            if sim.instances.is_empty() {
                break;
            }
            let predictions = sim.predict()?;
            if predictions.is_empty() {
                break;
            }
            let mut candidates = Vec::new();
            for (_, positions) in &predictions {
                let k = positions.len() as f64;
                let c = positions.iter().sum::<Vector3<f64>>() / k;
                candidates.extend(sim.polar_views([c.x, c.y]));
            }
            candidates.extend(sweep_views.iter().copied());
            let camera = sim.world.camera;
            let gain = |v: &View| {
                predictions.iter().map(|(b, ps)| b * ps.iter().filter(|p| camera.sees(v, p)).count() as f64 / ps.len() as f64).sum::<f64>()
            };
            let Some(view) = sim.best_view(&candidates, gain) else {
                break;
            };
            if sim.adopt(AsrState::RelationBasedSearch, view).is_empty() {
                idle += 1;
                if idle >= sim.params.no_progress_limit {
                    break;
                }
            } else {
                idle = 0;
            }
        }
    }
    Ok(())
}

fn boxes(sim: &mut Sim, regions: &[Region]) -> Result<()> {
    let step = sim.params.sweep.spacing / 2.0;
    let mut points: Vec<Vector3<f64>> = Vec::new();
    for r in regions {
        let nx = ((r.max[0] - r.min[0]) / step).floor() as usize + 1;
        let ny = ((r.max[1] - r.min[1]) / step).floor() as usize + 1;
        for ix in 0..nx {
            for iy in 0..ny {
                points.push(Vector3::new(r.min[0] + ix as f64 * step, r.min[1] + iy as f64 * step, 0.0));
            }
        }
    }
    let mut covered = vec![false; points.len()];
    let mut candidates: Vec<View> = Vec::new();
    for r in regions {
        candidates.extend(sim.polar_views([(r.min[0] + r.max[0]) / 2.0, (r.min[1] + r.max[1]) / 2.0]));
    }
    candidates.extend(sim.params.sweep.views());
    let mut next = Some(sim.world.robot);
    while let Some(view) = next {
        for (p, c) in points.iter().zip(covered.iter_mut()) {
            *c |= sim.world.camera.sees(&view, p);
        }
        if !sim.adopt(AsrState::DirectSearch, view).is_empty() {
            sim.recognize()?;
            if sim.complete() {
                break;
            }
        }
        let camera = sim.world.camera;
        next = sim.best_view(&candidates, |v| {
            points.iter().zip(&covered).filter(|(p, c)| !**c && camera.sees(v, p)).count() as f64 / points.len().max(1) as f64
        });
    }
    Ok(())
}

/// Demonstration, world and search regions of a five-object breakfast scene
/// split between a table ahead of the robot and a shelf to its left.
#[derive(Debug, Clone)]
pub struct TwoRegionWorld {
    pub dataset: DemonstrationDataset,
    pub world: SimWorld,
    pub regions: Vec<Region>,
}

const TABLE: [(&str, [f64; 2], f64); 3] = [("Plate", [1.5, 0.0], 0.0), ("Cup", [1.6, 0.2], 30.0), ("Fork", [1.5, -0.2], 90.0)];
const SHELF: [(&str, [f64; 2], f64); 2] = [("Jar", [0.0, 1.6], 0.0), ("Box", [-0.25, 1.6], 45.0)];

/// The whole world, robot included, is turned by `yaw_deg` about the origin.
pub fn two_region_world(yaw_deg: f64, seed: u64) -> Result<TwoRegionWorld> {
    let layout: Vec<(&str, [f64; 2], f64)> = TABLE.iter().chain(&SHELF).copied().collect();
    let spec = ScenarioSpec {
        layout: Some(layout.iter().map(|(_, p, yaw)| Pose::from_position_yaw(p[0], p[1], 0.75, *yaw)).collect()),
        names: Some(layout.iter().map(|(n, _, _)| n.to_string()).collect()),
        ..ScenarioSpec::new("breakfast", layout.len(), 20, MotionModel::Jitter { sigma_pos: 0.01, sigma_rot_deg: 2.0 }, seed)
    };
    let dataset = generate_demonstration(&spec)?;
    let turn = Pose::from_yaw_degrees(yaw_deg);
    let objects = dataset.configuration_at(0).iter().map(|s| s.transformed(&turn)).collect();
    let region = |objs: &[(&str, [f64; 2], f64)]| {
        let pts: Vec<Vector3<f64>> = objs.iter().map(|(_, p, _)| turn.transform_point(&Vector3::new(p[0], p[1], 0.0))).collect();
        let lo = |k: usize| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - 0.3;
        let hi = |k: usize| pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max) + 0.3;
        Region { min: [lo(0), lo(1)], max: [hi(0), hi(1)] }
    };
    Ok(TwoRegionWorld {
        dataset,
        world: SimWorld::new(objects, View::new(0.0, 0.0, yaw_deg)),
        regions: vec![region(&TABLE), region(&SHELF)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frustum_test() {
        let cam = Camera::default();
        let v = View::new(0.0, 0.0, 90.0);
        assert!(cam.sees(&v, &Vector3::new(0.0, 1.0, 0.7)));
        assert!(cam.sees(&v, &Vector3::new(0.5, 1.0, 0.0)));
        assert!(!cam.sees(&v, &Vector3::new(1.0, 0.5, 0.0)));
        assert!(!cam.sees(&v, &Vector3::new(0.0, -1.0, 0.0)));
        assert!(!cam.sees(&v, &Vector3::new(0.0, 0.1, 0.0)));
        assert!(!cam.sees(&v, &Vector3::new(0.0, 3.0, 0.0)));
    }

    #[test]
    fn sweep_grid_order() {
        let g = SweepGrid { min: [0.0, 0.0], max: [1.0, 2.0], spacing: 1.0, yaw_steps: 4 };
        let views = g.views();
        assert_eq!(views.len(), 2 * 3 * 4);
        assert_eq!(views[0], View::new(0.0, 0.0, 0.0));
        assert_eq!(views[5], View::new(1.0, 0.0, 90.0));
    }

    #[test]
    fn angles_wrap() {
        assert!((wrap(3.0 * PI) - PI).abs() < 1e-12);
        assert!(wrap(-PI).abs() - PI < 1e-12);
        assert!(View::new(0.0, 0.0, 350.0).same_as(&View::new(0.0, 0.0, -10.0)));
    }

    #[test]
    fn bad_worlds_are_rejected() {
        let mut w = SimWorld::new(Vec::new(), View::new(0.0, 0.0, 0.0));
        w.camera.fov_deg = 180.0;
        assert!(w.validate().is_err());
        w.camera.fov_deg = 60.0;
        w.camera.min_range = 3.0;
        assert!(w.validate().is_err());
    }
}
