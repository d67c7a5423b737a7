//! Human-centric coordinate frame and the global rigid transformation
//! between source and target camera frames.
//!
//! The human frame H is anchored at the hip midpoint. Its x-axis points from
//! the right hip to the left hip, its x-y plane contains both hips and the
//! thorax (thorax at positive y), and its z-axis is the plane normal.

use nalgebra::{Matrix3, Vector3};

use crate::error::{PoseError, Result};
use crate::pose::{Pose3D, RigidTransform};
use crate::scalar::Real;
use crate::skeleton::Skeleton;

/// Transform from the camera frame to the human-centric frame H.
///
/// Rotation rows are the H axes expressed in camera coordinates; the
/// translation maps the hip midpoint to the origin of H.
pub fn human_frame<T: Real>(pose: &Pose3D<T>, skel: &Skeleton) -> Result<RigidTransform<T>> {
    let right_hip = pose.joints[skel.right_hip()];
    let left_hip = pose.joints[skel.left_hip()];
    let thorax = pose.joints[skel.thorax()];

    let mid = (right_hip + left_hip) * T::c(0.5);
    let hip_axis = left_hip - right_hip;
    let hip_len = hip_axis.norm();
    if hip_len <= T::c(1e-12) {
        return Err(PoseError::DegenerateFrame(
            "left and right hip joints coincide".into(),
        ));
    }
    let x_axis = hip_axis / hip_len;

    // In-plane component of the thorax direction gives the y-axis; it
    // vanishes exactly when the three defining joints are collinear.
    let to_thorax = thorax - mid;
    let y_raw = to_thorax - x_axis * to_thorax.dot(&x_axis);
    let y_len = y_raw.norm();
    if y_len <= T::c(1e-12) {
        return Err(PoseError::DegenerateFrame(
            "hips and thorax are collinear".into(),
        ));
    }
    let y_axis = y_raw / y_len;
    let z_axis = x_axis.cross(&y_axis);

    let rotation = Matrix3::from_rows(&[
        x_axis.transpose(),
        y_axis.transpose(),
        z_axis.transpose(),
    ]);
    let translation = -(rotation * mid);
    RigidTransform::new(rotation, translation)
}

/// Global transform: R2⁻¹·R1·(source − source_root) + target_root.
pub fn global_transform<T: Real>(
    source: &Pose3D<T>,
    r1: &Matrix3<T>,
    r2: &Matrix3<T>,
    target_root: &Vector3<T>,
) -> Pose3D<T> {
    let combined = r2.transpose() * r1;
    let source_root = source.root();
    let mut joints = source.joints;
    for j in joints.iter_mut() {
        *j = combined * (*j - source_root) + target_root;
    }
    // The root maps to target_root exactly by construction; pin it to avoid
    // drift from the matrix product.
    joints[0] = *target_root;
    Pose3D::new(joints)
}

/// Aligns `source` to `target` using the human frame H as a bridge.
pub fn align_to_target<T: Real>(
    source: &Pose3D<T>,
    target: &Pose3D<T>,
    skel: &Skeleton,
) -> Result<Pose3D<T>> {
    let r1 = human_frame(source, skel)?.rotation;
    let r2 = human_frame(target, skel)?.rotation;
    Ok(global_transform(source, &r1, &r2, &target.root()))
}

/// Joint-wise R·p + T.
pub fn apply_rigid<T: Real>(pose: &Pose3D<T>, transform: &RigidTransform<T>) -> Pose3D<T> {
    Pose3D::new(pose.joints.map(|j| transform.apply_point(&j)))
}
