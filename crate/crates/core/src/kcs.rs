//! Part-aware Kinematic Chain Space: per-part Gram matrices of bone vectors.

use nalgebra::{DMatrix, Vector3};

use crate::pose::Pose3D;
use crate::scalar::Real;
use crate::skeleton::{Skeleton, BONE_COUNT, PARTS, PART_COUNT};

/// Five Gram matrices, one per body part, ordered as `skeleton::PARTS`.
///
/// Each matrix is symmetric PSD with squared bone lengths on the diagonal
/// (when bone vectors are left unnormalized).
#[derive(Debug, Clone, PartialEq)]
pub struct PartKCS<T: Real> {
    pub matrices: [DMatrix<T>; PART_COUNT],
}

/// Unnormalized bone vectors (child - parent) in skeleton bone order.
pub fn bone_vectors<T: Real>(pose: &Pose3D<T>, skel: &Skeleton) -> [Vector3<T>; BONE_COUNT] {
    let mut bones = [Vector3::zeros(); BONE_COUNT];
    for (l, &(parent, child)) in skel.bones().iter().enumerate() {
        bones[l] = pose.joints[child] - pose.joints[parent];
    }
    bones
}

/// Part-aware KCS with unnormalized bone vectors, so the diagonal carries
/// squared bone lengths.
pub fn part_kcs<T: Real>(pose: &Pose3D<T>, skel: &Skeleton) -> PartKCS<T> {
    part_kcs_with(pose, skel, false)
}

/// Part-aware KCS; with `normalize` the bone vectors are scaled to unit
/// length first, leaving only inter-bone angles.
pub fn part_kcs_with<T: Real>(pose: &Pose3D<T>, skel: &Skeleton, normalize: bool) -> PartKCS<T> {
    let mut bones = bone_vectors(pose, skel);
    if normalize {
        for b in bones.iter_mut() {
            let n = b.norm();
            if n > T::zero() {
                *b /= n;
            }
        }
    }
    let matrices = PARTS.map(|part| {
        let idx = skel.part_bones(part);
        let m = idx.len();
        DMatrix::from_fn(m, m, |r, c| bones[idx[r]].dot(&bones[idx[c]]))
    });
    PartKCS { matrices }
}
