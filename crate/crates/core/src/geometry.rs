//! Rigid poses, oriented boxes and the intersection tests built on them.

use nalgebra::{Quaternion, Translation3, UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::InputError;

pub type Vec3 = Vector3<f64>;
pub type Rot = UnitQuaternion<f64>;

/// A rigid transform: rotation followed by translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub translation: Vec3,
    pub rotation: Rot,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            translation: Vec3::zeros(),
            rotation: Rot::identity(),
        }
    }

    pub fn new(translation: Vec3, rotation: Rot) -> Self {
        Self { translation, rotation }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vec3::new(x, y, z), Rot::identity())
    }

    pub fn from_xyz_yaw(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Self::new(Vec3::new(x, y, z), Rot::from_axis_angle(&Vec3::z_axis(), yaw))
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let rotation = renormalize(self.rotation * other.rotation);
        Pose {
            translation: self.translation + self.rotation * other.translation,
            rotation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rotation = self.rotation.inverse();
        Pose {
            translation: -(rotation * self.translation),
            rotation,
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Heading of the rotated x axis in the horizontal plane.
    pub fn yaw(&self) -> f64 {
        let x = self.rotation * Vec3::x();
        x.y.atan2(x.x)
    }

    /// Angle between the rotated z axis and world up.
    pub fn tilt(&self) -> f64 {
        let z = self.rotation * Vec3::z();
        z.z.clamp(-1.0, 1.0).acos()
    }

    /// `(tx, ty, tz, qx, qy, qz, qw)`.
    pub fn to_array(&self) -> [f64; 7] {
        let q = self.rotation.quaternion();
        [
            self.translation.x,
            self.translation.y,
            self.translation.z,
            q.i,
            q.j,
            q.k,
            q.w,
        ]
    }

    /// Inverse of [`Pose::to_array`]. The quaternion is normalized unless it
    /// already is to within 1e-12, so round trips are bit-exact; a zero or
    /// non-finite quaternion is rejected.
    pub fn from_array(a: [f64; 7]) -> Result<Pose, InputError> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(InputError::new("pose contains a non-finite value"));
        }
        let q = Quaternion::new(a[6], a[3], a[4], a[5]);
        let n = q.norm();
        if n < 1e-12 {
            return Err(InputError::new("pose quaternion has zero norm"));
        }
        Ok(Pose {
            translation: Vec3::new(a[0], a[1], a[2]),
            rotation: UnitQuaternion::new_unchecked(if (n - 1.0).abs() <= 1e-12 { q } else { q / n }),
        })
    }

    pub fn isometry(&self) -> nalgebra::Isometry3<f64> {
        nalgebra::Isometry3::from_parts(Translation3::from(self.translation), self.rotation)
    }

    /// Bit pattern of the seven coordinates; used as an exact hashing key.
    pub fn bits(&self) -> [u64; 7] {
        self.to_array().map(f64::to_bits)
    }
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let a = <[f64; 7]>::deserialize(d)?;
        Pose::from_array(a).map_err(serde::de::Error::custom)
    }
}

fn renormalize(q: Rot) -> Rot {
    UnitQuaternion::new_normalize(q.into_inner())
}

/// Geodesic angle between two rotations in `[0, π]`, insensitive to the sign
/// of either quaternion.
pub fn rotation_angle(a: &Rot, b: &Rot) -> f64 {
    let r = a.inverse() * b;
    2.0 * r.imag().norm().atan2(r.w.abs())
}

/// Translational Euclidean distance plus `w_rot` times the rotation angle.
pub fn pose_distance(a: &Pose, b: &Pose, w_rot: f64) -> f64 {
    (a.translation - b.translation).norm() + w_rot * rotation_angle(&a.rotation, &b.rotation)
}

/// Linear interpolation of translation, shortest-arc slerp of rotation.
pub fn interpolate_pose(a: &Pose, b: &Pose, s: f64) -> Pose {
    if s <= 0.0 {
        return *a;
    }
    if s >= 1.0 {
        return *b;
    }
    let translation = a.translation + (b.translation - a.translation) * s;
    let mut qb = b.rotation.into_inner();
    if a.rotation.coords.dot(&qb.coords) < 0.0 {
        qb = -qb;
    }
    let qa = a.rotation.into_inner();
    let dot = qa.coords.dot(&qb.coords).min(1.0);
    let q = if dot > 0.9995 {
        qa.lerp(&qb, s)
    } else {
        let theta = dot.acos();
        let sin = theta.sin();
        qa * (((1.0 - s) * theta).sin() / sin) + qb * ((s * theta).sin() / sin)
    };
    Pose {
        translation,
        rotation: UnitQuaternion::new_normalize(q),
    }
}

/// Uniformly distributed rotation (Haar measure on SO(3)).
pub fn uniform_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rot {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let u3: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    UnitQuaternion::new_normalize(Quaternion::new(b * u3.cos(), a * u2.sin(), a * u2.cos(), b * u3.sin()))
}

/// A solid box. Mass zero marks a static body.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxShape {
    pub half_extents: Vec3,
    pub mass: f64,
}

impl BoxShape {
    pub fn new(half_extents: Vec3, mass: f64) -> Result<Self, InputError> {
        if !half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(InputError::new("box half-extents must be strictly positive"));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(InputError::new("box mass must be non-negative"));
        }
        Ok(Self { half_extents, mass })
    }

    pub fn cube(edge: f64, mass: f64) -> Self {
        Self {
            half_extents: Vec3::repeat(edge * 0.5),
            mass,
        }
    }

    pub fn is_static(&self) -> bool {
        self.mass == 0.0
    }

    /// Half-height of the world-axis-aligned bounding box at `rotation`.
    pub fn vertical_half_extent(&self, rotation: &Rot) -> f64 {
        let m = rotation.to_rotation_matrix();
        (0..3).map(|i| m[(2, i)].abs() * self.half_extents[i]).sum()
    }

    pub fn corners(&self, pose: &Pose) -> [Vec3; 8] {
        let h = self.half_extents;
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let local = Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            );
            *c = pose.transform_point(&local);
        }
        out
    }
}

/// Separating-axis test for two oriented boxes. Overlap of `tol` or less along
/// any candidate axis counts as separation, so resting contact is not an
/// intersection.
pub fn boxes_intersect(sa: &BoxShape, pa: &Pose, sb: &BoxShape, pb: &Pose, tol: f64) -> bool {
    let ra = pa.rotation.to_rotation_matrix();
    let rb = pb.rotation.to_rotation_matrix();
    let axes_a = [
        ra.matrix().column(0).into_owned(),
        ra.matrix().column(1).into_owned(),
        ra.matrix().column(2).into_owned(),
    ];
    let axes_b = [
        rb.matrix().column(0).into_owned(),
        rb.matrix().column(1).into_owned(),
        rb.matrix().column(2).into_owned(),
    ];
    let d = pb.translation - pa.translation;

    let separated_on = |axis: &Vec3| -> bool {
        let proj_a: f64 = (0..3).map(|i| sa.half_extents[i] * axes_a[i].dot(axis).abs()).sum();
        let proj_b: f64 = (0..3).map(|i| sb.half_extents[i] * axes_b[i].dot(axis).abs()).sum();
        proj_a + proj_b - d.dot(axis).abs() <= tol
    };

    for axis in axes_a.iter().chain(axes_b.iter()) {
        if separated_on(axis) {
            return false;
        }
    }
    for a in &axes_a {
        for b in &axes_b {
            let c = a.cross(b);
            let n = c.norm();
            // parallel edges: the face axes already cover this direction
            if n < 1e-9 {
                continue;
            }
            if separated_on(&(c / n)) {
                return false;
            }
        }
    }
    true
}

/// Signed distance from a point to the surface of a box (negative inside).
pub fn box_point_signed_distance(shape: &BoxShape, pose: &Pose, p: &Vec3) -> f64 {
    let local = pose.inverse().transform_point(p);
    let q = local.abs() - shape.half_extents;
    let outside = q.map(|v| v.max(0.0)).norm();
    let inside = q.x.max(q.y).max(q.z).min(0.0);
    outside + inside
}

/// True when the sphere penetrates the box by more than `tol`.
pub fn box_sphere_intersect(shape: &BoxShape, pose: &Pose, center: &Vec3, radius: f64, tol: f64) -> bool {
    box_point_signed_distance(shape, pose, center) < radius - tol
}

/// Lowest world z reached by the box.
pub fn box_min_z(shape: &BoxShape, pose: &Pose) -> f64 {
    pose.translation.z - shape.vertical_half_extent(&pose.rotation)
}

/// Axis-aligned region of space, inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self, InputError> {
        if (0..3).any(|i| !(min[i].is_finite() && max[i].is_finite() && min[i] < max[i])) {
            return Err(InputError::new("workspace bounds must satisfy min < max on every axis"));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn contains_xy(&self, p: &Vec3) -> bool {
        (0..2).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        Vec3::new(
            rng.random_range(self.min.x..=self.max.x),
            rng.random_range(self.min.y..=self.max.y),
            rng.random_range(self.min.z..=self.max.z),
        )
    }
}
