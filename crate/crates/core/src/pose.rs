//! Pose, camera and rigid-transform types.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{PoseError, Result};
use crate::scalar::Real;
use crate::skeleton::{Skeleton, BONE_COUNT, JOINT_COUNT};

/// Absolute 3D pose in the camera frame, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose3D<T: Real> {
    pub joints: [Vector3<T>; JOINT_COUNT],
}

impl<T: Real> Pose3D<T> {
    pub fn new(joints: [Vector3<T>; JOINT_COUNT]) -> Self {
        Self { joints }
    }

    pub fn from_rows(rows: &[[T; 3]]) -> Result<Self> {
        if rows.len() != JOINT_COUNT {
            return Err(PoseError::ShapeMismatch(format!(
                "expected {JOINT_COUNT} joints, got {}",
                rows.len()
            )));
        }
        let mut joints = [Vector3::zeros(); JOINT_COUNT];
        for (j, r) in rows.iter().enumerate() {
            joints[j] = Vector3::new(r[0], r[1], r[2]);
        }
        Ok(Self { joints })
    }

    pub fn root(&self) -> Vector3<T> {
        self.joints[0]
    }

    /// Same articulation with the root subtracted from every joint.
    pub fn root_relative(&self) -> Self {
        let root = self.root();
        Self {
            joints: self.joints.map(|j| j - root),
        }
    }

    /// Joint-wise translation.
    pub fn translated(&self, offset: &Vector3<T>) -> Self {
        Self {
            joints: self.joints.map(|j| j + offset),
        }
    }

    /// Euclidean length of every bone, in skeleton bone order.
    pub fn bone_lengths(&self, skel: &Skeleton) -> [T; BONE_COUNT] {
        let mut lengths = [T::zero(); BONE_COUNT];
        for (l, &(parent, child)) in skel.bones().iter().enumerate() {
            lengths[l] = (self.joints[child] - self.joints[parent]).norm();
        }
        lengths
    }

    pub fn is_finite(&self) -> bool {
        self.joints.iter().all(|j| j.iter().all(|c| c.is_finite()))
    }
}

/// 2D pose in image pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose2D<T: Real> {
    pub joints: [nalgebra::Vector2<T>; JOINT_COUNT],
}

impl<T: Real> Pose2D<T> {
    pub fn new(joints: [nalgebra::Vector2<T>; JOINT_COUNT]) -> Self {
        Self { joints }
    }

    pub fn is_finite(&self) -> bool {
        self.joints.iter().all(|j| j.iter().all(|c| c.is_finite()))
    }
}

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics<T: Real> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T) -> Result<Self> {
        if fx <= T::zero() || fy <= T::zero() {
            return Err(PoseError::InvalidParameter(
                "focal lengths must be positive".into(),
            ));
        }
        Ok(Self { fx, fy, cx, cy })
    }
}

/// Proper rigid transform: rotation (det +1) plus translation in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform<T: Real> {
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> RigidTransform<T> {
    pub const ORTHONORMALITY_TOL: f64 = 1e-9;

    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self> {
        let t = Self {
            rotation,
            translation,
        };
        t.check_rotation()?;
        Ok(t)
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Verifies R·Rᵀ = I and det R = +1 within tolerance.
    pub fn check_rotation(&self) -> Result<()> {
        let tol = T::c(Self::ORTHONORMALITY_TOL);
        let err = (self.rotation * self.rotation.transpose() - Matrix3::identity()).abs().max();
        let det = self.rotation.determinant();
        if err > tol || (det - T::one()).abs() > tol {
            return Err(PoseError::InvalidParameter(format!(
                "rotation is not proper orthonormal (orthogonality error {:.3e}, det {:.12})",
                err.to_double(),
                det.to_double()
            )));
        }
        Ok(())
    }

    pub fn apply_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation * p + self.translation
    }

    /// The inverse transform.
    pub fn inverse(&self) -> Self {
        let rot = self.rotation.transpose();
        Self {
            rotation: rot,
            translation: -(rot * self.translation),
        }
    }

    /// Composition: (self ∘ other)(p) = self(other(p)).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}
