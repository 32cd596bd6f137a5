//! Pose prediction for objects missing from a recognized scene instance.
//!
//! For every object the shortest chain of ISMs from the root down to an ISM
//! that has the object as a leaf is precomputed. A prediction starts at the
//! instance pose and follows the chain, applying one randomly chosen
//! reference-to-object pose per hop.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::model::ObjectId;
use crate::tree::{IsmTree, SceneInstance};

/// Shortest ISM chain from the root to an ISM containing `target` as a leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IsmPath {
    pub target: ObjectId,
    pub isms: Vec<String>,
}

impl IsmPath {
    pub fn len(&self) -> usize {
        self.isms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.isms.is_empty()
    }
}

/// Breadth-first over the tree from the root, visiting children in label
/// order, so each object gets its shallowest leaf and ties go to the
/// smallest ISM label.
pub fn compute_shortest_paths(tree: &IsmTree) -> BTreeMap<ObjectId, IsmPath> {
    let mut paths = BTreeMap::new();
    let mut queue = VecDeque::from([vec![tree.root_label().to_string()]]);
    while let Some(chain) = queue.pop_front() {
        let label = chain.last().expect("non-empty chain");
        for leaf in tree.leaves_of(label) {
            paths.entry(leaf.clone()).or_insert_with(|| IsmPath { target: leaf.clone(), isms: chain.clone() });
        }
        for child in tree.children_of(label) {
            let mut next = chain.clone();
            next.push(child.to_string());
            queue.push_back(next);
        }
    }
    paths
}

/// Chooses which demonstrated relative pose to use at each hop.
pub trait VoteSampler {
    /// Index in `0..count` for hop `hop` of the current prediction.
    fn pick(&mut self, hop: usize, count: usize) -> usize;
}

/// Uniform, independent choice per hop.
pub struct RandomSampler<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> VoteSampler for RandomSampler<'_, R> {
    fn pick(&mut self, _hop: usize, count: usize) -> usize {
        self.0.random_range(0..count)
    }
}

/// Fixed sample index per hop; the last entry repeats for deeper hops.
#[derive(Debug, Clone)]
pub struct ReplaySampler(pub Vec<usize>);

impl VoteSampler for ReplaySampler {
    fn pick(&mut self, hop: usize, count: usize) -> usize {
        let idx = self.0.get(hop).or(self.0.last()).copied().unwrap_or(0);
        idx.min(count - 1)
    }
}

/// Predicts a pose of `target` from the instance pose `reference` by
/// chaining one sampled reference-to-object pose per ISM on `path`.
pub fn predict_pose(target: &ObjectId, path: &IsmPath, reference: &Pose, tree: &IsmTree, sampler: &mut dyn VoteSampler) -> Result<Pose> {
    let mut pose = *reference;
    for (hop, label) in path.isms.iter().enumerate() {
        let ism = tree.ism(label).ok_or_else(|| Error::InvalidTree(format!("path refers to unknown ISM {label}")))?;
        let next = match path.isms.get(hop + 1) {
            Some(child) => ObjectId::placeholder_for(child),
            None => target.clone(),
        };
        let samples = ism
            .votes_for(&next)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::MissingVoteEntry { ism: label.clone(), object: next.clone() })?;
        let k = sampler.pick(hop, samples.len());
        pose = pose.compose(&samples[k].back_to_object);
    }
    Ok(pose)
}

/// Sampled poses for every object missing from an instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "CloudRecord", from = "CloudRecord")]
pub struct PredictionCloud {
    pub poses: BTreeMap<ObjectId, Vec<Pose>>,
}

#[derive(Serialize, Deserialize)]
struct ObjectPoses {
    object: ObjectId,
    poses: Vec<Pose>,
}

#[derive(Serialize, Deserialize)]
struct CloudRecord {
    predictions: Vec<ObjectPoses>,
}

impl From<PredictionCloud> for CloudRecord {
    fn from(c: PredictionCloud) -> Self {
        Self { predictions: c.poses.into_iter().map(|(object, poses)| ObjectPoses { object, poses }).collect() }
    }
}

impl From<CloudRecord> for PredictionCloud {
    fn from(r: CloudRecord) -> Self {
        Self { poses: r.predictions.into_iter().map(|p| (p.object, p.poses)).collect() }
    }
}

impl PredictionCloud {
    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.poses.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ObjectId, &Pose)> {
        self.poses.iter().flat_map(|(id, ps)| ps.iter().map(move |p| (id, p)))
    }
}

/// `n_p` predicted poses for each category object that is not a real
/// participant of `instance`, objects in identity order.
pub fn generate_cloud_of_pose_predictions(
    instance: &SceneInstance,
    tree: &IsmTree,
    paths: &BTreeMap<ObjectId, IsmPath>,
    n_p: usize,
    sampler: &mut dyn VoteSampler,
) -> Result<PredictionCloud> {
    if n_p == 0 {
        return Err(Error::InvalidParams("at least one prediction per object is required".into()));
    }
    let present = instance.real_participants();
    let mut cloud = PredictionCloud::default();
    for (id, path) in paths {
        if present.contains(id) {
            continue;
        }
        let poses = (0..n_p).map(|_| predict_pose(id, path, &instance.pose, tree, sampler)).collect::<Result<Vec<_>>>()?;
        cloud.poses.insert(id.clone(), poses);
    }
    Ok(cloud)
}
