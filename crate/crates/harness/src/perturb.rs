//! Labeled test configurations derived from a demonstration.

use ism_tree::geometry::Pose;
use ism_tree::model::{DemonstrationDataset, LabeledConfiguration, ObjectState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    /// Exchange the poses of two objects.
    Swap,
    /// Move one object horizontally by the magnitude (meters).
    Shift,
    /// Turn one object about its vertical axis by the magnitude (degrees).
    Rotate,
    /// Half valid (demonstrated, lightly jittered), half invalid (swaps and
    /// shifts beyond the position tolerance, alternating).
    Mixed,
}

impl std::str::FromStr for PerturbationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "swap" => Ok(Self::Swap),
            "shift" => Ok(Self::Shift),
            "rotate" => Ok(Self::Rotate),
            "mixed" => Ok(Self::Mixed),
            other => Err(format!("unknown perturbation kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub magnitude: f64,
    pub count: usize,
    pub seed: u64,
    /// Tolerances that decide the labels.
    pub position_tolerance: f64,
    pub orientation_tolerance_deg: f64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, magnitude: f64, count: usize, seed: u64) -> Self {
        Self { kind, magnitude, count, seed, position_tolerance: 0.1, orientation_tolerance_deg: 30.0 }
    }
}

fn horizontal_shift(rng: &mut ChaCha8Rng, distance: f64) -> Pose {
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    Pose::from_translation(distance * a.cos(), distance * a.sin(), 0.0)
}

fn swap(rng: &mut ChaCha8Rng, objects: &mut [ObjectState]) -> bool {
    let n = objects.len();
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    let (a, b) = (objects[i].pose, objects[j].pose);
    objects[i].pose = b;
    objects[j].pose = a;
    a.approx_eq(&b, 1e-9)
}

fn shift(rng: &mut ChaCha8Rng, objects: &mut [ObjectState], distance: f64) {
    let i = rng.random_range(0..objects.len());
    objects[i].pose = horizontal_shift(rng, distance).compose(&objects[i].pose);
}

fn rotate(rng: &mut ChaCha8Rng, objects: &mut [ObjectState], degrees: f64) {
    let i = rng.random_range(0..objects.len());
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    objects[i].pose = objects[i].pose.compose(&Pose::from_yaw_degrees(sign * degrees));
}

/// Every object moved by less than a quarter of each tolerance.
fn jitter(rng: &mut ChaCha8Rng, objects: &mut [ObjectState], spec: &PerturbationSpec) {
    for o in objects.iter_mut() {
        let r = rng.random_range(0.0..spec.position_tolerance / 4.0);
        let q = spec.orientation_tolerance_deg / 4.0;
        let yaw = rng.random_range(-q..q);
        o.pose = horizontal_shift(rng, r).compose(&o.pose).compose(&Pose::from_yaw_degrees(yaw));
    }
}

/// `spec.count` configurations, each built from a random demonstrated time
/// step. A swap is valid only when both poses coincide; a shift or rotation
/// is valid while it stays below the matching tolerance.
pub fn generate_perturbed_test_set(dataset: &DemonstrationDataset, spec: &PerturbationSpec) -> Result<Vec<LabeledConfiguration>> {
    if matches!(spec.kind, PerturbationKind::Shift | PerturbationKind::Rotate)
        && spec.magnitude.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
    {
        return Err(HarnessError::InvalidScenario("shift and rotate need a positive magnitude".into()));
    }
    if !(spec.position_tolerance > 0.0 && spec.orientation_tolerance_deg > 0.0) {
        return Err(HarnessError::InvalidScenario("tolerances must be positive".into()));
    }
    if dataset.object_count() < 2 && matches!(spec.kind, PerturbationKind::Swap | PerturbationKind::Mixed) {
        return Err(HarnessError::InvalidScenario("swapping needs two objects".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    for k in 0..spec.count {
        let t = rng.random_range(0..dataset.len());
        let mut objects = dataset.configuration_at(t);
        let (valid, kind) = match spec.kind {
            PerturbationKind::Swap => (swap(&mut rng, &mut objects), "swap"),
            PerturbationKind::Shift => {
                shift(&mut rng, &mut objects, spec.magnitude);
                (spec.magnitude < spec.position_tolerance, "shift")
            }
            PerturbationKind::Rotate => {
                rotate(&mut rng, &mut objects, spec.magnitude);
                (spec.magnitude < spec.orientation_tolerance_deg, "rotate")
            }
            PerturbationKind::Mixed if k % 2 == 0 => {
                jitter(&mut rng, &mut objects, spec);
                (true, "demonstrated")
            }
            PerturbationKind::Mixed => {
                let far = spec.magnitude.max(2.0 * spec.position_tolerance);
                let degenerate = k % 4 == 1 && swap(&mut rng, &mut objects);
                if k % 4 == 3 || degenerate {
                    objects = dataset.configuration_at(t);
                    shift(&mut rng, &mut objects, far);
                    (false, "shift")
                } else {
                    (false, "swap")
                }
            }
        };
        out.push(LabeledConfiguration { valid, kind: kind.to_string(), objects });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ism_tree::model::{ObjectId, Trajectory};

    fn dataset() -> DemonstrationDataset {
        let traj = |n: &str, x: f64| {
            Trajectory::new(ObjectId::named(n), (0..4).map(|t| Pose::from_position_yaw(x + 0.05 * t as f64, 0.0, 0.7, 0.0)).collect())
        };
        DemonstrationDataset::new("s", vec![traj("A", 0.0), traj("B", 0.5), traj("C", 1.0)]).unwrap()
    }

    #[test]
    fn mixed_sets_are_balanced() {
        let set = generate_perturbed_test_set(&dataset(), &PerturbationSpec::new(PerturbationKind::Mixed, 0.05, 100, 1)).unwrap();
        assert_eq!(set.len(), 100);
        assert_eq!(set.iter().filter(|c| c.valid).count(), 50);
        assert!(set.iter().any(|c| c.kind == "swap"));
        assert!(set.iter().any(|c| c.kind == "shift"));
    }

    #[test]
    fn degenerate_swap_is_valid() {
        let same = |n: &str| Trajectory::new(ObjectId::named(n), vec![Pose::from_translation(1.0, 2.0, 0.7); 2]);
        let ds = DemonstrationDataset::new("s", vec![same("A"), same("B")]).unwrap();
        let set = generate_perturbed_test_set(&ds, &PerturbationSpec::new(PerturbationKind::Swap, 0.0, 10, 2)).unwrap();
        assert!(set.iter().all(|c| c.valid));
        let set = generate_perturbed_test_set(&dataset(), &PerturbationSpec::new(PerturbationKind::Swap, 0.0, 10, 2)).unwrap();
        assert!(set.iter().all(|c| !c.valid));
    }

    #[test]
    fn shifts_label_by_tolerance() {
        let ds = dataset();
        let far = generate_perturbed_test_set(&ds, &PerturbationSpec::new(PerturbationKind::Shift, 0.1, 20, 3)).unwrap();
        assert!(far.iter().all(|c| !c.valid));
        let near = generate_perturbed_test_set(&ds, &PerturbationSpec::new(PerturbationKind::Shift, 0.02, 20, 3)).unwrap();
        assert!(near.iter().all(|c| c.valid));
        // exactly one object moved, by the magnitude
        for c in &far {
            let moved: Vec<f64> = (0..ds.len())
                .map(|t| {
                    ds.configuration_at(t).iter().zip(&c.objects).filter(|(a, b)| a.pose.position_distance(&b.pose) > 1e-12).count() as f64
                })
                .collect();
            assert!(moved.contains(&1.0));
        }
        assert!(generate_perturbed_test_set(&ds, &PerturbationSpec::new(PerturbationKind::Rotate, 0.0, 5, 3)).is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let ds = dataset();
        let spec = PerturbationSpec::new(PerturbationKind::Mixed, 0.3, 30, 9);
        assert_eq!(generate_perturbed_test_set(&ds, &spec).unwrap(), generate_perturbed_test_set(&ds, &spec).unwrap());
    }
}
