//! Exhaustive single-ISM recognition on 4x4 matrices, used as ground truth
//! for the accumulator search.

use ism_tree::geometry::Pose;
use ism_tree::model::{DemonstrationDataset, ObjectId, ObjectState};
use ism_tree::recognition::RecognitionParams;
use ism_tree::topology::{partition_into_stars, RelationTopology};
use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::error::{HarnessError, Result};

pub const ORACLE_MAX_OBJECTS: usize = 4;
pub const ORACLE_MAX_LENGTH: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMatch {
    pub object: ObjectId,
    /// Index into the oracle's input slice.
    pub input: usize,
    /// 1-based demonstration time step.
    pub timestep: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub objective: f64,
    pub reference_pose: Pose,
    pub assignment: Vec<OracleMatch>,
}

fn rotation_angle_deg(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let r = a.transpose() * b;
    let s = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]).norm() / 2.0;
    let c = (r.trace() - 1.0) / 2.0;
    s.atan2(c).to_degrees()
}

fn falloff(deviation: f64, tolerance: f64) -> f64 {
    (1.0 - deviation / tolerance).max(0.0)
}

fn rigid_inverse(m: &Matrix4<f64>) -> Matrix4<f64> {
    let r = m.fixed_view::<3, 3>(0, 0).transpose();
    let t = -(r * m.fixed_view::<3, 1>(0, 3));
    let mut out = Matrix4::identity();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    out.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
    out
}

/// Best objective of the single ISM learned from the star `topology` over
/// `dataset`, found by trying every vote as the reference pose and, for each
/// object, every input and every demonstrated relative pose.
///
/// Returns `None` when no input belongs to the star.
pub fn brute_force_recognition_oracle(
    inputs: &[ObjectState],
    dataset: &DemonstrationDataset,
    topology: &RelationTopology,
    params: &RecognitionParams,
) -> Result<Option<OracleResult>> {
    let (stars, _) = partition_into_stars(topology)?;
    if stars.len() != 1 {
        return Err(ism_tree::Error::InvalidTopology("the oracle needs a star topology".into()).into());
    }
    let star = &stars[0];
    let objects: Vec<&ObjectId> = std::iter::once(&star.center).chain(&star.neighborhood).collect();
    let l = dataset.len();
    if objects.len() > ORACLE_MAX_OBJECTS || l > ORACLE_MAX_LENGTH {
        return Err(HarnessError::TooLargeForOracle { n: objects.len(), l });
    }
    let traj = |id: &ObjectId| dataset.trajectory(id).ok_or_else(|| HarnessError::Model(ism_tree::Error::UnknownObject(id.clone())));
    let center = traj(&star.center)?;
    // relation[o][t]: center frame to object frame at step t
    let mut relation: Vec<Vec<Matrix4<f64>>> = Vec::new();
    for o in &objects {
        let j = traj(o)?;
        relation.push((0..l).map(|t| rigid_inverse(&center.poses[t].to_matrix()) * j.poses[t].to_matrix()).collect());
    }
    let members: Vec<Vec<usize>> = objects.iter().map(|o| (0..inputs.len()).filter(|&i| inputs[i].id == **o).collect()).collect();

    let mut best: Option<OracleResult> = None;
    for (k, idxs) in members.iter().enumerate() {
        for &i in idxs {
            let observed = inputs[i].pose.to_matrix();
            for rel in &relation[k] {
                let reference = observed * rigid_inverse(rel);
                let mut objective = 0.0;
                let mut assignment = Vec::new();
                for (o, idxs) in members.iter().enumerate() {
                    let mut top: Option<(f64, OracleMatch)> = None;
                    for &j in idxs {
                        let actual = inputs[j].pose.to_matrix();
                        for (t, rel) in relation[o].iter().enumerate() {
                            let expected = reference * rel;
                            let dp = (expected.fixed_view::<3, 1>(0, 3) - actual.fixed_view::<3, 1>(0, 3)).norm();
                            let dr = rotation_angle_deg(
                                &expected.fixed_view::<3, 3>(0, 0).into_owned(),
                                &actual.fixed_view::<3, 3>(0, 0).into_owned(),
                            );
                            let sim = falloff(dp, params.position_tolerance) * falloff(dr, params.orientation_tolerance_deg);
                            let rating = sim * inputs[j].confidence;
                            if rating > 0.0 && top.as_ref().is_none_or(|(r, _)| rating > *r) {
                                top =
                                    Some((rating, OracleMatch { object: objects[o].clone(), input: j, timestep: t + 1, similarity: sim }));
                            }
                        }
                    }
                    if let Some((rating, m)) = top {
                        objective += rating;
                        assignment.push(m);
                    }
                }
                if best.as_ref().is_none_or(|b| objective > b.objective) {
                    best = Some(OracleResult { objective, reference_pose: Pose::from_matrix(&reference), assignment });
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::star_topology;
    use crate::scenario::{generate_demonstration, MotionModel, ScenarioSpec};

    fn dataset() -> DemonstrationDataset {
        generate_demonstration(&ScenarioSpec::new("s", 3, 5, MotionModel::Jitter { sigma_pos: 0.03, sigma_rot_deg: 5.0 }, 4)).unwrap()
    }

    #[test]
    fn demonstrated_configuration_scores_total_weight() {
        let ds = dataset();
        let r = brute_force_recognition_oracle(&ds.configuration_at(2), &ds, &star_topology(&ds), &RecognitionParams::default())
            .unwrap()
            .unwrap();
        assert!((r.objective - 3.0).abs() < 1e-9);
        assert_eq!(r.assignment.len(), 3);
    }

    #[test]
    fn far_object_is_excluded() {
        let ds = dataset();
        let mut inputs = ds.configuration_at(0);
        inputs[2].pose = Pose::from_translation(10.0, 0.0, 0.0).compose(&inputs[2].pose);
        let r = brute_force_recognition_oracle(&inputs, &ds, &star_topology(&ds), &RecognitionParams::default()).unwrap().unwrap();
        assert!((r.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn size_guard() {
        let ds = generate_demonstration(&ScenarioSpec::new("s", 5, 3, MotionModel::Static, 0)).unwrap();
        let err = brute_force_recognition_oracle(&ds.configuration_at(0), &ds, &star_topology(&ds), &RecognitionParams::default());
        assert!(matches!(err, Err(HarnessError::TooLargeForOracle { n: 5, l: 3 })));
        let ds = generate_demonstration(&ScenarioSpec::new("s", 2, 11, MotionModel::Static, 0)).unwrap();
        let err = brute_force_recognition_oracle(&ds.configuration_at(0), &ds, &star_topology(&ds), &RecognitionParams::default());
        assert!(matches!(err, Err(HarnessError::TooLargeForOracle { .. })));
    }

    #[test]
    fn angle_is_accurate_near_identity() {
        let a = Pose::from_yaw_degrees(1e-7).orientation.to_rotation_matrix().into_inner();
        let b = Matrix3::identity();
        assert!((rotation_angle_deg(&a, &b) - 1e-7).abs() < 1e-15);
    }
}
