//! Rigid 6-DoF pose algebra.
//!
//! Poses are stored as a translation plus a unit quaternion. The 4x4 matrix
//! form only appears at conversion boundaries.

use nalgebra::{Matrix3, Matrix4, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Absolute tolerance used for pose comparisons.
pub const POSE_EPS: f64 = 1e-9;

/// A rigid transform: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self { position: Vector3::zeros(), orientation: UnitQuaternion::identity() }
    }

    /// Builds a pose from a position and an orientation.
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation: renormalize(orientation) }
    }

    /// Builds a pose from raw `(w, x, y, z)` quaternion components, normalizing them.
    pub fn from_parts(position: [f64; 3], quaternion_wxyz: [f64; 4]) -> Self {
        let [w, x, y, z] = quaternion_wxyz;
        Self { position: Vector3::from(position), orientation: UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z)) }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self { position: Vector3::new(x, y, z), orientation: UnitQuaternion::identity() }
    }

    /// Rotation about the z axis by `degrees`, no translation.
    pub fn from_yaw_degrees(degrees: f64) -> Self {
        Self { position: Vector3::zeros(), orientation: UnitQuaternion::from_axis_angle(&Vector3::z_axis(), degrees.to_radians()) }
    }

    /// Position plus a rotation of `degrees` about the z axis.
    pub fn from_position_yaw(x: f64, y: f64, z: f64, yaw_degrees: f64) -> Self {
        Self { position: Vector3::new(x, y, z), orientation: UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw_degrees.to_radians()) }
    }

    /// Pose chaining: `self` then `other`, i.e. the matrix product `self * other`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose { position: self.position + self.orientation * other.position, orientation: renormalize(self.orientation * other.orientation) }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose { position: -(inv * self.position), orientation: inv }
    }

    /// The pose `r` with `self.compose(r) == to`.
    pub fn relative_to(&self, to: &Pose) -> Pose {
        self.inverse().compose(to)
    }

    pub fn transform_point(&self, point: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation * point
    }

    pub fn position_distance(&self, other: &Pose) -> f64 {
        (self.position - other.position).norm()
    }

    /// Minimal rotation angle between the two orientations, in degrees within `[0, 180]`.
    pub fn orientation_angle_deg(&self, other: &Pose) -> f64 {
        quaternion_angle_deg(&self.orientation, &other.orientation)
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let r = self.orientation.to_rotation_matrix();
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(r.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }

    /// Converts a homogeneous matrix. The upper-left block must be a rotation.
    pub fn from_matrix(m: &Matrix4<f64>) -> Pose {
        let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
        let rotation = Rotation3::from_matrix_unchecked(r);
        Pose { position: Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]), orientation: UnitQuaternion::from_rotation_matrix(&rotation) }
    }

    /// `[px, py, pz, qw, qx, qy, qz]`
    pub fn to_array(&self) -> [f64; 7] {
        let q = self.orientation.quaternion();
        [self.position.x, self.position.y, self.position.z, q.w, q.i, q.j, q.k]
    }

    /// Inverse of [`Pose::to_array`]. Components are taken as-is so that a
    /// serialized unit quaternion comes back bit-identical.
    pub fn from_array(a: [f64; 7]) -> Pose {
        let q = Quaternion::new(a[3], a[4], a[5], a[6]);
        let norm = q.norm();
        let orientation =
            if (norm - 1.0).abs() <= POSE_EPS { UnitQuaternion::new_unchecked(q) } else { UnitQuaternion::from_quaternion(q) };
        Pose { position: Vector3::new(a[0], a[1], a[2]), orientation }
    }

    /// True when both position and orientation agree within `eps`
    /// (orientation compared up to quaternion sign).
    pub fn approx_eq(&self, other: &Pose, eps: f64) -> bool {
        if (self.position - other.position).amax() > eps {
            return false;
        }
        let a = self.orientation.quaternion().coords;
        let b = other.orientation.quaternion().coords;
        (a - b).amax() <= eps || (a + b).amax() <= eps
    }
}

/// Minimal angle between two unit quaternions in degrees, respecting `q == -q`.
pub fn quaternion_angle_deg(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    // 2*acos(|dot|) loses precision near zero; the atan2 form does not.
    let d = a.inverse() * b;
    let v = d.quaternion().imag().norm();
    let w = d.quaternion().w.abs();
    (2.0 * v.atan2(w)).to_degrees()
}

fn renormalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_quaternion(q.into_inner())
}

impl Serialize for Pose {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let a = <[f64; 7]>::deserialize(deserializer)?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(serde::de::Error::custom("pose components must be finite"));
        }
        let qn = (a[3] * a[3] + a[4] * a[4] + a[5] * a[5] + a[6] * a[6]).sqrt();
        if qn < 1e-12 {
            return Err(serde::de::Error::custom("zero-norm quaternion"));
        }
        Ok(Pose::from_array(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Plain 4x4 product used as an independent check of `compose`.
    fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    /// Rotation matrix from a unit quaternion, written out by hand.
    fn to_rows(p: &Pose) -> [[f64; 4]; 4] {
        let q = p.orientation.quaternion();
        let (w, x, y, z) = (q.w, q.i, q.j, q.k);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y), p.position.x],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x), p.position.y],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y), p.position.z],
            [0.0, 0.0, 0.0, 1.0],
        ]
    }

    fn random_pose(rng: &mut impl Rng) -> Pose {
        let q = Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        Pose::new(
            Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            UnitQuaternion::from_quaternion(q),
        )
    }

    #[test]
    fn identity_is_neutral() {
        let p = Pose::from_position_yaw(0.3, -1.0, 2.0, 37.0);
        assert!(Pose::identity().compose(&p).approx_eq(&p, POSE_EPS));
        assert!(p.compose(&Pose::identity()).approx_eq(&p, POSE_EPS));
    }

    #[test]
    fn translations_add() {
        let r = Pose::from_translation(1.0, 0.0, 0.0).compose(&Pose::from_translation(0.0, 1.0, 0.0));
        assert!(r.approx_eq(&Pose::from_translation(1.0, 1.0, 0.0), POSE_EPS));
    }

    #[test]
    fn rotation_then_translation_matches_matrix_product() {
        let rot = Pose::from_yaw_degrees(90.0);
        let tr = Pose::from_translation(1.0, 0.0, 0.0);
        let r = rot.compose(&tr);
        let m = matmul(&to_rows(&rot), &to_rows(&tr));
        assert_abs_diff_eq!(m[0][3], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[1][3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.position.x, 0.0, epsilon = POSE_EPS);
        assert_abs_diff_eq!(r.position.y, 1.0, epsilon = POSE_EPS);
        assert_abs_diff_eq!(r.orientation_angle_deg(&rot), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn compose_matches_matrix_product_on_random_poses() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let expected = matmul(&to_rows(&a), &to_rows(&b));
            let got = to_rows(&a.compose(&b));
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(got[i][j], expected[i][j], epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn inverse_cases() {
        assert!(Pose::identity().inverse().approx_eq(&Pose::identity(), POSE_EPS));
        let inv = Pose::from_translation(1.0, 2.0, 3.0).inverse();
        assert!(inv.approx_eq(&Pose::from_translation(-1.0, -2.0, -3.0), POSE_EPS));
    }

    #[test]
    fn inverse_composes_to_identity_on_seeded_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        for _ in 0..1000 {
            let p = random_pose(&mut rng);
            assert!(p.compose(&p.inverse()).approx_eq(&Pose::identity(), POSE_EPS));
            assert!(p.inverse().inverse().approx_eq(&p, POSE_EPS));
        }
    }

    #[test]
    fn relative_pose_cases() {
        let p = Pose::from_position_yaw(1.0, 2.0, 0.5, 20.0);
        assert!(p.relative_to(&p).approx_eq(&Pose::identity(), POSE_EPS));
        assert!(Pose::identity().relative_to(&p).approx_eq(&p, POSE_EPS));

        let from = Pose::from_position_yaw(1.0, 0.0, 0.0, 90.0);
        let r = from.relative_to(&Pose::identity());
        assert!(r.approx_eq(&from.inverse(), POSE_EPS));
        assert!(from.compose(&r).approx_eq(&Pose::identity(), POSE_EPS));
    }

    #[test]
    fn distances_and_angles() {
        let q = Pose::from_yaw_degrees(33.0);
        assert_abs_diff_eq!(q.orientation_angle_deg(&q), 0.0, epsilon = 1e-9);
        let neg = Pose::from_array({
            let mut a = q.to_array();
            for v in &mut a[3..] {
                *v = -*v;
            }
            a
        });
        assert_abs_diff_eq!(q.orientation_angle_deg(&neg), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(Pose::identity().orientation_angle_deg(&Pose::from_yaw_degrees(90.0)), 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(Pose::identity().position_distance(&Pose::from_translation(3.0, 4.0, 0.0)), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn angle_is_symmetric_and_satisfies_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (a, b, c) = (random_pose(&mut rng), random_pose(&mut rng), random_pose(&mut rng));
            let ab = a.orientation_angle_deg(&b);
            assert_abs_diff_eq!(ab, b.orientation_angle_deg(&a), epsilon = 1e-9);
            assert!((0.0..=180.0).contains(&ab));
            assert!(a.orientation_angle_deg(&c) <= ab + b.orientation_angle_deg(&c) + 1e-9);
        }
    }

    #[test]
    fn matrix_round_trip_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let p = random_pose(&mut rng);
            assert!(Pose::from_matrix(&p.to_matrix()).approx_eq(&p, POSE_EPS));
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = random_pose(&mut rng);
            let s = serde_json::to_string(&p).unwrap();
            let back: Pose = serde_json::from_str(&s).unwrap();
            assert_eq!(p.to_array().map(f64::to_bits), back.to_array().map(f64::to_bits));
        }
    }

    proptest! {
        #[test]
        fn composition_is_associative(
            a in prop::array::uniform7(-1.0f64..1.0),
            b in prop::array::uniform7(-1.0f64..1.0),
            c in prop::array::uniform7(-1.0f64..1.0),
        ) {
            let mk = |v: [f64; 7]| {
                let q = [v[3], v[4], v[5], v[6] + 1.5];
                Pose::from_parts([v[0], v[1], v[2]], q)
            };
            let (a, b, c) = (mk(a), mk(b), mk(c));
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            prop_assert!(left.approx_eq(&right, POSE_EPS));
            let n = left.orientation.quaternion().norm();
            prop_assert!((n - 1.0).abs() < 1e-9);
        }
    }
}
