//! Pinhole projection and back-projection.

use nalgebra::{Vector2, Vector3};

use crate::error::{PoseError, Result};
use crate::pose::{CameraIntrinsics, Pose2D, Pose3D};
use crate::scalar::Real;
use crate::skeleton::JOINT_COUNT;

/// Projects a single camera-frame point; depth must be positive.
pub fn project_point<T: Real>(
    p: &Vector3<T>,
    cam: &CameraIntrinsics<T>,
    joint: usize,
) -> Result<Vector2<T>> {
    if p.z <= T::zero() {
        return Err(PoseError::DegenerateProjection {
            joint,
            depth: p.z.to_double(),
        });
    }
    Ok(Vector2::new(
        cam.fx * p.x / p.z + cam.cx,
        cam.fy * p.y / p.z + cam.cy,
    ))
}

/// Projects all 16 joints to pixel coordinates.
pub fn project<T: Real>(pose: &Pose3D<T>, cam: &CameraIntrinsics<T>) -> Result<Pose2D<T>> {
    let mut joints = [Vector2::zeros(); JOINT_COUNT];
    for (j, p) in pose.joints.iter().enumerate() {
        joints[j] = project_point(p, cam, j)?;
    }
    Ok(Pose2D::new(joints))
}

/// Lifts pixel coordinates back to 3D given one depth per joint.
pub fn backproject<T: Real>(
    pose2d: &Pose2D<T>,
    depths: &[T; JOINT_COUNT],
    cam: &CameraIntrinsics<T>,
) -> Result<Pose3D<T>> {
    let mut joints = [Vector3::zeros(); JOINT_COUNT];
    for j in 0..JOINT_COUNT {
        let z = depths[j];
        if z <= T::zero() {
            return Err(PoseError::DegenerateProjection {
                joint: j,
                depth: z.to_double(),
            });
        }
        let uv = pose2d.joints[j];
        joints[j] = Vector3::new(
            (uv.x - cam.cx) * z / cam.fx,
            (uv.y - cam.cy) * z / cam.fy,
            z,
        );
    }
    Ok(Pose3D::new(joints))
}
