//! Single implicit shape models: vote tables of relative poses toward a
//! reference object, learned from demonstrated trajectories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::model::{ObjectId, Trajectory};

/// One demonstrated relative pose between an object and the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePoseSample {
    /// 1-based demonstration time step.
    pub timestep: usize,
    /// Object pose to reference pose: `object ∘ vote = reference`.
    pub vote_to_reference: Pose,
    /// Reference pose to object pose, the inverse of `vote_to_reference`.
    pub back_to_object: Pose,
}

impl RelativePoseSample {
    pub fn new(timestep: usize, vote_to_reference: Pose) -> Self {
        Self { timestep, vote_to_reference, back_to_object: vote_to_reference.inverse() }
    }
}

/// A star-shaped scene model: every input object votes for the pose of a
/// reference object through its demonstrated relative poses.
///
/// Immutable once learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "IsmDocument", try_from = "IsmDocument")]
pub struct SingleIsm {
    pub label: String,
    /// Identity under which results of this ISM are passed on.
    pub reference_id: ObjectId,
    votes: BTreeMap<ObjectId, Vec<RelativePoseSample>>,
    weights: BTreeMap<ObjectId, u32>,
    length: usize,
    max_lever: f64,
}

impl SingleIsm {
    fn from_tables(
        label: String,
        reference_id: ObjectId,
        votes: BTreeMap<ObjectId, Vec<RelativePoseSample>>,
        weights: BTreeMap<ObjectId, u32>,
    ) -> Result<Self> {
        let length = votes.values().next().map(Vec::len).unwrap_or(0);
        if votes.len() < 2 {
            return Err(Error::EmptyNeighborhood);
        }
        for (id, samples) in &votes {
            if samples.len() != length || length == 0 {
                return Err(Error::LengthMismatch { object: id.clone(), expected: length, actual: samples.len() });
            }
            match weights.get(id) {
                Some(w) if *w > 0 => {}
                _ => return Err(Error::InvalidTree(format!("ISM {label} lacks a positive weight for {id}"))),
            }
        }
        if weights.len() != votes.len() {
            return Err(Error::InvalidTree(format!("ISM {label} has weights for objects without votes")));
        }
        let max_lever = votes.values().flatten().map(|s| s.back_to_object.position.norm()).fold(0.0, f64::max);
        Ok(Self { label, reference_id, votes, weights, length, max_lever })
    }

    /// Demonstration length `l` shared by all vote sequences.
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn votes_for(&self, id: &ObjectId) -> Option<&[RelativePoseSample]> {
        self.votes.get(id).map(Vec::as_slice)
    }

    pub fn vote_table(&self) -> &BTreeMap<ObjectId, Vec<RelativePoseSample>> {
        &self.votes
    }

    pub fn inputs(&self) -> impl Iterator<Item = &ObjectId> {
        self.votes.keys()
    }

    pub fn contains(&self, id: &ObjectId) -> bool {
        self.votes.contains_key(id)
    }

    pub fn weight(&self, id: &ObjectId) -> u32 {
        self.weights.get(id).copied().unwrap_or(0)
    }

    pub fn weights(&self) -> &BTreeMap<ObjectId, u32> {
        &self.weights
    }

    /// Sum of input weights: the objective value of a perfect match.
    pub fn total_weight(&self) -> u32 {
        self.weights.values().sum()
    }

    /// Largest distance between the reference and an object over all samples.
    pub fn max_lever(&self) -> f64 {
        self.max_lever
    }

    /// Number of stored relative pose samples.
    pub fn sample_count(&self) -> usize {
        self.votes.values().map(Vec::len).sum()
    }
}

/// Learns an ISM whose reference follows `center`, with every input
/// counting as one real object.
///
/// The center itself is an input too: it votes with identity relative poses,
/// so a configuration lacking the center still locates the reference while a
/// present center contributes to the objective.
pub fn learn_single_ism(label: &str, center: &Trajectory, neighbors: &[&Trajectory]) -> Result<(SingleIsm, Trajectory)> {
    let weighted: Vec<(&Trajectory, u32)> = neighbors.iter().map(|t| (*t, 1)).collect();
    learn_weighted_ism(label, center, 1, &weighted)
}

/// Like [`learn_single_ism`] but with explicit input weights, used when a
/// neighbor is a placeholder for a whole sub-ISM.
pub fn learn_weighted_ism(
    label: &str,
    center: &Trajectory,
    center_weight: u32,
    neighbors: &[(&Trajectory, u32)],
) -> Result<(SingleIsm, Trajectory)> {
    if neighbors.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    let l = center.len();
    if l == 0 {
        return Err(Error::InvalidDataset("empty center trajectory".into()));
    }
    let mut votes = BTreeMap::new();
    let mut weights = BTreeMap::new();
    for (traj, weight) in std::iter::once((center, center_weight)).chain(neighbors.iter().copied()) {
        if traj.len() != l {
            return Err(Error::LengthMismatch { object: traj.object_id.clone(), expected: l, actual: traj.len() });
        }
        if votes.contains_key(&traj.object_id) {
            return Err(Error::CenterInNeighborhood(traj.object_id.clone()));
        }
        let samples = traj
            .poses
            .iter()
            .zip(&center.poses)
            .enumerate()
            .map(|(t, (obj, reference))| RelativePoseSample::new(t + 1, obj.relative_to(reference)))
            .collect();
        votes.insert(traj.object_id.clone(), samples);
        weights.insert(traj.object_id.clone(), weight);
    }
    let reference_id = ObjectId::placeholder_for(label);
    let ism = SingleIsm::from_tables(label.to_string(), reference_id.clone(), votes, weights)?;
    let reference_trajectory = Trajectory::new(reference_id, center.poses.clone());
    Ok((ism, reference_trajectory))
}

/// Serialized form of a [`SingleIsm`]; back-poses are recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IsmDocument {
    pub label: String,
    pub reference: ObjectId,
    pub votes: Vec<VoteRecord>,
    pub weights: Vec<WeightRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VoteRecord {
    pub object: ObjectId,
    pub timestep: usize,
    pub vote_to_reference: Pose,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightRecord {
    pub object: ObjectId,
    pub weight: u32,
}

impl From<SingleIsm> for IsmDocument {
    fn from(ism: SingleIsm) -> Self {
        let votes = ism
            .votes
            .iter()
            .flat_map(|(id, samples)| {
                samples.iter().map(move |s| VoteRecord { object: id.clone(), timestep: s.timestep, vote_to_reference: s.vote_to_reference })
            })
            .collect();
        let weights = ism.weights.iter().map(|(id, w)| WeightRecord { object: id.clone(), weight: *w }).collect();
        IsmDocument { label: ism.label, reference: ism.reference_id, votes, weights }
    }
}

impl TryFrom<IsmDocument> for SingleIsm {
    type Error = Error;

    fn try_from(doc: IsmDocument) -> Result<Self> {
        let mut votes: BTreeMap<ObjectId, Vec<RelativePoseSample>> = BTreeMap::new();
        for v in doc.votes {
            votes.entry(v.object).or_default().push(RelativePoseSample::new(v.timestep, v.vote_to_reference));
        }
        for samples in votes.values_mut() {
            samples.sort_by_key(|s| s.timestep);
        }
        let weights = doc.weights.into_iter().map(|w| (w.object, w.weight)).collect();
        SingleIsm::from_tables(doc.label, doc.reference, votes, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::POSE_EPS;

    fn moving(name: &str, offset: [f64; 3], l: usize) -> Trajectory {
        Trajectory::new(
            ObjectId::named(name),
            (0..l).map(|t| Pose::from_position_yaw(offset[0] + 0.1 * t as f64, offset[1] + 0.05 * t as f64, offset[2], 0.0)).collect(),
        )
    }

    #[test]
    fn identical_neighbor_votes_identity() {
        let center = moving("box", [0.0; 3], 4);
        let twin = Trajectory::new(ObjectId::named("twin"), center.poses.clone());
        let (ism, _) = learn_single_ism("s", &center, &[&twin]).unwrap();
        for s in ism.votes_for(&ObjectId::named("twin")).unwrap() {
            assert!(s.vote_to_reference.approx_eq(&Pose::identity(), POSE_EPS));
        }
    }

    #[test]
    fn offset_neighbor_votes_constant_translation() {
        let center = moving("box", [0.0; 3], 5);
        let cup = moving("cup", [-0.3, 0.0, 0.0], 5);
        let (ism, reference) = learn_single_ism("s", &center, &[&cup]).unwrap();
        let samples = ism.votes_for(&ObjectId::named("cup")).unwrap();
        for (t, s) in samples.iter().enumerate() {
            assert!(s.vote_to_reference.approx_eq(&Pose::from_translation(0.3, 0.0, 0.0), POSE_EPS));
            assert!(cup.poses[t].compose(&s.vote_to_reference).approx_eq(&center.poses[t], POSE_EPS));
            assert!(s.back_to_object.approx_eq(&s.vote_to_reference.inverse(), POSE_EPS));
            assert_eq!(s.timestep, t + 1);
        }
        assert_eq!(reference.poses, center.poses);
        assert_eq!(reference.object_id, ObjectId::placeholder_for("s"));
    }

    #[test]
    fn sample_count_includes_center() {
        let l = 7;
        let center = moving("c", [0.0; 3], l);
        let ns: Vec<Trajectory> = (0..3).map(|i| moving(&format!("n{i}"), [i as f64, 1.0, 0.0], l)).collect();
        let refs: Vec<&Trajectory> = ns.iter().collect();
        let (ism, _) = learn_single_ism("s", &center, &refs).unwrap();
        assert_eq!(ism.sample_count(), (3 + 1) * l);
        assert_eq!(ism.total_weight(), 4);
    }

    #[test]
    fn learning_errors() {
        let center = moving("c", [0.0; 3], 3);
        assert!(matches!(learn_single_ism("s", &center, &[]), Err(Error::EmptyNeighborhood)));
        let short = moving("n", [0.0; 3], 2);
        assert!(matches!(learn_single_ism("s", &center, &[&short]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(learn_single_ism("s", &center, &[&center]), Err(Error::CenterInNeighborhood(_))));
    }

    #[test]
    fn document_round_trip_preserves_bits() {
        let center = moving("c", [0.0; 3], 3);
        let n = Trajectory::new(
            ObjectId::named("n"),
            (0..3).map(|t| Pose::from_position_yaw(0.1, 0.2 * t as f64, 0.3, 17.0 * t as f64)).collect(),
        );
        let (ism, _) = learn_single_ism("s", &center, &[&n]).unwrap();
        let text = serde_json::to_string(&ism).unwrap();
        let back: SingleIsm = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ism);
    }
}
