//! Position and orientation compliance: how well an observed pose agrees
//! with the pose a relation expects, normalized to `[0, 1]`.
//!
//! Both measures fall off linearly from 1 at zero deviation to 0 at the
//! tolerance. Objects at or beyond a tolerance are excluded from results.

use nalgebra::{UnitQuaternion, Vector3};

use crate::geometry::quaternion_angle_deg;

/// `max(0, 1 - deviation / tolerance)`
#[inline]
pub fn linear_falloff(deviation: f64, tolerance: f64) -> f64 {
    (1.0 - deviation / tolerance).max(0.0)
}

pub fn position_compliance(expected: &Vector3<f64>, actual: &Vector3<f64>, tolerance_m: f64) -> f64 {
    linear_falloff((expected - actual).norm(), tolerance_m)
}

pub fn orientation_compliance(expected: &UnitQuaternion<f64>, actual: &UnitQuaternion<f64>, tolerance_deg: f64) -> f64 {
    linear_falloff(quaternion_angle_deg(expected, actual), tolerance_deg)
}
