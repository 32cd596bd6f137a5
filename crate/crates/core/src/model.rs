//! Objects, their states and demonstrated trajectories.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;

/// Object identity: a class label plus an instance label distinguishing
/// objects of the same class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId {
    #[serde(rename = "class")]
    pub class_label: String,
    #[serde(rename = "instance")]
    pub instance_label: String,
}

impl ObjectId {
    pub fn new(class_label: impl Into<String>, instance_label: impl Into<String>) -> Self {
        Self { class_label: class_label.into(), instance_label: instance_label.into() }
    }

    /// Object of class `name` with the default instance label `"0"`.
    pub fn named(name: impl Into<String>) -> Self {
        Self::new(name, "0")
    }

    /// Identity of the reference object standing in for the ISM `label`.
    pub fn placeholder_for(label: &str) -> Self {
        Self::new(label, "0")
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.class_label, self.instance_label)
    }
}

/// Opaque identifier of one recognition result within a recognition call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResultToken(pub u64);

/// An observed (or synthesized) object: identity, pose and confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    #[serde(rename = "object")]
    pub id: ObjectId,
    pub pose: Pose,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub is_placeholder: bool,
    #[serde(default = "full_confidence")]
    pub confidence: f64,
    /// Result that produced this placeholder state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<ResultToken>,
}

fn full_confidence() -> f64 {
    1.0
}

impl ObjectState {
    /// A directly detected object with confidence 1.
    pub fn detected(id: ObjectId, pose: Pose) -> Self {
        Self { id, pose, is_placeholder: false, confidence: 1.0, source: None }
    }

    pub fn placeholder(id: ObjectId, pose: Pose, confidence: f64, source: ResultToken) -> Self {
        Self { id, pose, is_placeholder: true, confidence: confidence.clamp(0.0, 1.0), source: Some(source) }
    }

    /// Same state with `transform` applied to its pose from the left.
    pub fn transformed(&self, transform: &Pose) -> Self {
        Self { pose: transform.compose(&self.pose), ..self.clone() }
    }
}

/// Poses of one object over the demonstrated time steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(rename = "object")]
    pub object_id: ObjectId,
    pub poses: Vec<Pose>,
}

impl Trajectory {
    pub fn new(object_id: ObjectId, poses: Vec<Pose>) -> Self {
        Self { object_id, poses }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Demonstration of one scene category: equally long trajectories of at
/// least two objects.
#[derive(Debug, Clone, PartialEq)]
pub struct DemonstrationDataset {
    pub category: String,
    trajectories: BTreeMap<ObjectId, Trajectory>,
    length: usize,
}

impl DemonstrationDataset {
    pub fn new(category: impl Into<String>, trajectories: Vec<Trajectory>) -> Result<Self> {
        let category = category.into();
        if trajectories.len() < 2 {
            return Err(Error::InvalidDataset(format!("category {category} needs at least two objects, got {}", trajectories.len())));
        }
        let length = trajectories[0].len();
        if length == 0 {
            return Err(Error::InvalidDataset("trajectories must not be empty".into()));
        }
        let mut map = BTreeMap::new();
        for traj in trajectories {
            if traj.len() != length {
                return Err(Error::LengthMismatch { object: traj.object_id.clone(), expected: length, actual: traj.len() });
            }
            let id = traj.object_id.clone();
            if map.insert(id.clone(), traj).is_some() {
                return Err(Error::InvalidDataset(format!("duplicate object {id}")));
            }
        }
        Ok(Self { category, trajectories: map, length })
    }

    /// Number of time steps `l`.
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn object_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectId> {
        self.trajectories.keys()
    }

    pub fn trajectories(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.values()
    }

    pub fn trajectory(&self, id: &ObjectId) -> Option<&Trajectory> {
        self.trajectories.get(id)
    }

    /// All objects at time step `t` (0-based) as detected states.
    pub fn configuration_at(&self, t: usize) -> Vec<ObjectState> {
        self.trajectories.values().map(|traj| ObjectState::detected(traj.object_id.clone(), traj.poses[t])).collect()
    }
}

/// An object configuration together with whether it truly belongs to the
/// scene category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledConfiguration {
    pub valid: bool,
    /// Short description of how the configuration was produced.
    #[serde(default)]
    pub kind: String,
    pub objects: Vec<ObjectState>,
}
