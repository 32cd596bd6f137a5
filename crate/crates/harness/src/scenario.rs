//! Seeded synthetic demonstrations.

use std::collections::BTreeSet;

use ism_tree::geometry::Pose;
use ism_tree::model::{DemonstrationDataset, ObjectId, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Axis-aligned box objects are placed in, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Default for Bounds {
    fn default() -> Self {
        Self { min: [-1.0, -1.0, 0.75], max: [1.0, 1.0, 0.75] }
    }
}

/// A set of objects moved together, their relative poses left untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupMotion {
    /// Object indices.
    pub members: Vec<usize>,
    /// Per-axis bound of the uniform group shift, meters.
    pub max_shift: [f64; 3],
    /// Bound of the uniform group rotation about the vertical axis through
    /// the group centroid, degrees.
    pub max_yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum MotionModel {
    Static,
    /// Independent Gaussian noise per object and time step (x, y, yaw).
    #[serde(rename_all = "camelCase")]
    Jitter {
        sigma_pos: f64,
        sigma_rot_deg: f64,
    },
    /// Objects outside every group stay where they are.
    RigidGroups {
        groups: Vec<GroupMotion>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioSpec {
    pub category: String,
    pub object_count: usize,
    pub length: usize,
    pub motion: MotionModel,
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default)]
    pub seed: u64,
    /// Explicit start poses instead of random placement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<Pose>>,
    /// Object class labels; `Obj00`, `Obj01`, ... by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl ScenarioSpec {
    pub fn new(category: impl Into<String>, object_count: usize, length: usize, motion: MotionModel, seed: u64) -> Self {
        Self { category: category.into(), object_count, length, motion, bounds: Bounds::default(), seed, layout: None, names: None }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::InvalidScenario(m));
        if self.object_count < 2 {
            return bad(format!("need at least 2 objects, got {}", self.object_count));
        }
        if self.length == 0 {
            return bad("trajectory length must be at least 1".into());
        }
        if (0..3).any(|d| self.bounds.min[d].partial_cmp(&self.bounds.max[d]).is_none_or(|o| o.is_gt())) {
            return bad("workspace bounds are inverted".into());
        }
        if let Some(layout) = &self.layout {
            if layout.len() != self.object_count {
                return bad(format!("layout has {} poses for {} objects", layout.len(), self.object_count));
            }
        }
        if let Some(names) = &self.names {
            let distinct: BTreeSet<&String> = names.iter().collect();
            if names.len() != self.object_count || distinct.len() != names.len() {
                return bad("names must be distinct, one per object".into());
            }
        }
        match &self.motion {
            MotionModel::Static => {}
            MotionModel::Jitter { sigma_pos, sigma_rot_deg } => {
                if !(*sigma_pos >= 0.0 && *sigma_rot_deg >= 0.0) {
                    return bad("jitter must be non-negative".into());
                }
            }
            MotionModel::RigidGroups { groups } => {
                let mut seen = BTreeSet::new();
                for g in groups {
                    if g.members.iter().any(|&m| m >= self.object_count || !seen.insert(m)) {
                        return bad("group members must be distinct object indices".into());
                    }
                    if g.max_shift.iter().any(|s| *s < 0.0) || g.max_yaw_deg < 0.0 {
                        return bad("group motion bounds must be non-negative".into());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn object_id(&self, i: usize) -> ObjectId {
        match &self.names {
            Some(names) => ObjectId::named(names[i].clone()),
            None => ObjectId::named(format!("Obj{i:02}")),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    if bound > 0.0 {
        rng.random_range(-bound..=bound)
    } else {
        0.0
    }
}

/// Demonstration for `spec`; a pure function of its fields and seed.
pub fn generate_demonstration(spec: &ScenarioSpec) -> Result<DemonstrationDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.object_count;
    let l = spec.length;
    let base: Vec<Pose> = match &spec.layout {
        Some(layout) => layout.clone(),
        None => (0..n)
            .map(|_| {
                let mut p = [0.0; 3];
                for (d, v) in p.iter_mut().enumerate() {
                    let (lo, hi) = (spec.bounds.min[d], spec.bounds.max[d]);
                    *v = if hi > lo { rng.random_range(lo..hi) } else { lo };
                }
                Pose::from_position_yaw(p[0], p[1], p[2], rng.random_range(0.0..360.0))
            })
            .collect(),
    };
    let mut poses: Vec<Vec<Pose>> = vec![Vec::with_capacity(l); n];

    match &spec.motion {
        MotionModel::Static => {
            for (i, p) in base.iter().enumerate() {
                poses[i] = vec![*p; l];
            }
        }
        MotionModel::Jitter { sigma_pos, sigma_rot_deg } => {
            let pos = Normal::new(0.0, *sigma_pos).map_err(|e| HarnessError::InvalidScenario(e.to_string()))?;
            let rot = Normal::new(0.0, *sigma_rot_deg).map_err(|e| HarnessError::InvalidScenario(e.to_string()))?;
            for _ in 0..l {
                for (i, p) in base.iter().enumerate() {
                    if *sigma_pos == 0.0 && *sigma_rot_deg == 0.0 {
                        poses[i].push(*p);
                        continue;
                    }
                    let (dx, dy, dyaw) = (pos.sample(&mut rng), pos.sample(&mut rng), rot.sample(&mut rng));
                    let shifted = Pose::from_translation(dx, dy, 0.0).compose(p);
                    poses[i].push(shifted.compose(&Pose::from_yaw_degrees(dyaw)));
                }
            }
        }
        MotionModel::RigidGroups { groups } => {
            for (i, p) in base.iter().enumerate() {
                if !groups.iter().any(|g| g.members.contains(&i)) {
                    poses[i] = vec![*p; l];
                }
            }
            for _ in 0..l {
                for g in groups {
                    if g.members.is_empty() {
                        continue;
                    }
                    let k = g.members.len() as f64;
                    let c = g.members.iter().map(|&m| base[m].position).sum::<nalgebra::Vector3<f64>>() / k;
                    let shift = [uniform(&mut rng, g.max_shift[0]), uniform(&mut rng, g.max_shift[1]), uniform(&mut rng, g.max_shift[2])];
                    let yaw = uniform(&mut rng, g.max_yaw_deg);
                    let motion = Pose::from_translation(c.x + shift[0], c.y + shift[1], c.z + shift[2])
                        .compose(&Pose::from_yaw_degrees(yaw))
                        .compose(&Pose::from_translation(-c.x, -c.y, -c.z));
                    for &m in &g.members {
                        poses[m].push(motion.compose(&base[m]));
                    }
                }
            }
        }
    }

    let trajectories = poses.into_iter().enumerate().map(|(i, ps)| Trajectory::new(spec.object_id(i), ps)).collect();
    Ok(DemonstrationDataset::new(spec.category.clone(), trajectories)?)
}
