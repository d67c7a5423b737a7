//! Pose-sequence augmentation: per-bone axis rotations with linearly growing
//! angle across frames, plus bone-length rescaling.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{PoseError, Result};
use crate::pose::Pose3D;
use crate::scalar::Real;
use crate::skeleton::{Skeleton, BONE_COUNT, JOINT_COUNT};

/// N consecutive frames sharing one skeleton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSequence<T: Real> {
    pub frames: Vec<Pose3D<T>>,
}

impl<T: Real> PoseSequence<T> {
    pub fn new(frames: Vec<Pose3D<T>>) -> Result<Self> {
        if frames.is_empty() {
            return Err(PoseError::EmptyInput("a pose sequence needs at least one frame"));
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Per-bone rotation axes, total rotation angles and length ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams<T: Real> {
    /// Unit rotation axes, one per bone.
    pub axes: [Vector3<T>; BONE_COUNT],
    /// Total rotation angle per bone, radians; frame n rotates by n·θ/N.
    pub angles: [T; BONE_COUNT],
    /// Length ratios λ; the new bone length is (1+λ)·old.
    pub length_ratios: [T; BONE_COUNT],
}

impl<T: Real> AugmentParams<T> {
    pub fn identity() -> Self {
        Self {
            axes: [Vector3::new(T::zero(), T::zero(), T::one()); BONE_COUNT],
            angles: [T::zero(); BONE_COUNT],
            length_ratios: [T::zero(); BONE_COUNT],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (l, axis) in self.axes.iter().enumerate() {
            if (axis.norm() - T::one()).abs() > T::c(1e-9) {
                return Err(PoseError::InvalidParameter(format!(
                    "axis of bone {l} is not unit length"
                )));
            }
        }
        for (l, &ratio) in self.length_ratios.iter().enumerate() {
            if T::one() + ratio <= T::zero() {
                return Err(PoseError::InvalidParameter(format!(
                    "length ratio of bone {l} must satisfy 1 + lambda > 0"
                )));
            }
        }
        Ok(())
    }
}

/// Sampling ranges for the stochastic parameter generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig<T: Real> {
    /// Total rotation angle range in radians.
    pub angle_range: (T, T),
    /// Length-ratio range; the lower bound must stay above -1.
    pub ratio_range: (T, T),
    pub seed: u64,
}

impl<T: Real> AugmentConfig<T> {
    pub fn new(angle_range: (T, T), ratio_range: (T, T), seed: u64) -> Result<Self> {
        if angle_range.0 > angle_range.1 || ratio_range.0 > ratio_range.1 {
            return Err(PoseError::InvalidParameter("empty sampling range".into()));
        }
        if ratio_range.0 <= -T::one() {
            return Err(PoseError::InvalidParameter(
                "ratio range lower bound must be greater than -1".into(),
            ));
        }
        Ok(Self {
            angle_range,
            ratio_range,
            seed,
        })
    }
}

impl<T: Real> Default for AugmentConfig<T> {
    /// Anatomically mild defaults: θ within ±20°, lengths within ±15%.
    fn default() -> Self {
        let a = T::c(std::f64::consts::PI / 9.0);
        let r = T::c(0.15);
        Self {
            angle_range: (-a, a),
            ratio_range: (-r, r),
            seed: 0,
        }
    }
}

/// Bone vectors per frame plus the root trajectory; together lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct BoneDecomposition<T: Real> {
    pub bones: Vec<[Vector3<T>; BONE_COUNT]>,
    pub roots: Vec<Vector3<T>>,
}

/// Converts a sequence into bone vectors and root trajectory.
pub fn poses_to_bones<T: Real>(seq: &PoseSequence<T>, skel: &Skeleton) -> BoneDecomposition<T> {
    let mut bones = Vec::with_capacity(seq.len());
    let mut roots = Vec::with_capacity(seq.len());
    for frame in &seq.frames {
        let mut frame_bones = [Vector3::zeros(); BONE_COUNT];
        for (l, &(parent, child)) in skel.bones().iter().enumerate() {
            frame_bones[l] = frame.joints[child] - frame.joints[parent];
        }
        bones.push(frame_bones);
        roots.push(frame.root());
    }
    BoneDecomposition { bones, roots }
}

/// Forward-kinematic accumulation from each frame's root.
pub fn bones_to_poses<T: Real>(
    decomp: &BoneDecomposition<T>,
    skel: &Skeleton,
) -> Result<PoseSequence<T>> {
    if decomp.bones.len() != decomp.roots.len() {
        return Err(PoseError::ShapeMismatch(format!(
            "{} bone frames vs {} roots",
            decomp.bones.len(),
            decomp.roots.len()
        )));
    }
    let mut frames = Vec::with_capacity(decomp.bones.len());
    for (frame_bones, &root) in decomp.bones.iter().zip(&decomp.roots) {
        let mut joints = [Vector3::zeros(); JOINT_COUNT];
        joints[0] = root;
        // Children are ordered after their parents in the canonical model.
        for (l, &(parent, child)) in skel.bones().iter().enumerate() {
            joints[child] = joints[parent] + frame_bones[l];
        }
        frames.push(Pose3D::new(joints));
    }
    PoseSequence::new(frames)
}

/// Axis-angle rotation matrix.
pub fn rodrigues<T: Real>(axis: &Vector3<T>, angle: T) -> Result<Matrix3<T>> {
    if (axis.norm() - T::one()).abs() > T::c(1e-9) {
        return Err(PoseError::InvalidParameter(
            "rodrigues axis must be unit length".into(),
        ));
    }
    let k = Matrix3::new(
        T::zero(),
        -axis.z,
        axis.y,
        axis.z,
        T::zero(),
        -axis.x,
        -axis.y,
        axis.x,
        T::zero(),
    );
    Ok(Matrix3::identity() + k * angle.sin() + k * k * (T::one() - angle.cos()))
}

/// Rotates and rescales every bone: frame n, bone l becomes
/// (1+λ_l)·R(w_l, n·θ_l/N)·b, with the root trajectory passed through.
pub fn augment_sequence<T: Real>(
    seq: &PoseSequence<T>,
    params: &AugmentParams<T>,
    skel: &Skeleton,
) -> Result<PoseSequence<T>> {
    params.validate()?;
    // Zero angles and ratios must be a bit-for-bit identity; skip the
    // decompose/rebuild cycle, which could otherwise reassociate sums.
    if params.angles.iter().all(|a| *a == T::zero())
        && params.length_ratios.iter().all(|r| *r == T::zero())
    {
        return Ok(seq.clone());
    }
    let n_frames = seq.len();
    let decomp = poses_to_bones(seq, skel);
    let mut out_bones = Vec::with_capacity(n_frames);
    let frame_count = T::from_usize(n_frames).unwrap();
    for (n, frame_bones) in decomp.bones.iter().enumerate() {
        let frame_frac = T::from_usize(n).unwrap() / frame_count;
        let mut new_bones = [Vector3::zeros(); BONE_COUNT];
        for l in 0..BONE_COUNT {
            let angle = params.angles[l] * frame_frac;
            let rot = rodrigues(&params.axes[l], angle)?;
            new_bones[l] = rot * frame_bones[l] * (T::one() + params.length_ratios[l]);
        }
        out_bones.push(new_bones);
    }
    bones_to_poses(
        &BoneDecomposition {
            bones: out_bones,
            roots: decomp.roots,
        },
        skel,
    )
}

/// Uniform sampling of augmentation parameters: axes on the unit sphere,
/// angles and ratios in the configured ranges.
pub fn sample_params<T: Real, R: Rng + ?Sized>(
    config: &AugmentConfig<T>,
    rng: &mut R,
) -> AugmentParams<T> {
    let mut params = AugmentParams::identity();
    for l in 0..BONE_COUNT {
        let a: [f64; 3] = UnitSphere.sample(rng);
        params.axes[l] = Vector3::new(T::c(a[0]), T::c(a[1]), T::c(a[2]));
        params.angles[l] = sample_uniform(config.angle_range, rng);
        params.length_ratios[l] = sample_uniform(config.ratio_range, rng);
    }
    params
}

fn sample_uniform<T: Real, R: Rng + ?Sized>(range: (T, T), rng: &mut R) -> T {
    let u: f64 = rng.random();
    range.0 + (range.1 - range.0) * T::c(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::apply_rigid;
    use crate::pose::RigidTransform;
    use crate::synthetic::template_poses;
    use nalgebra::Rotation3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn walk_sequence(n: usize) -> PoseSequence<f64> {
        let base: Pose3D<f64> = template_poses()[1].clone();
        let frames = (0..n)
            .map(|i| base.translated(&Vector3::new(0.01 * i as f64, 0.0, 3.0 + 0.02 * i as f64)))
            .collect();
        PoseSequence::new(frames).unwrap()
    }

    #[test]
    fn bone_roundtrip_is_exact() {
        let skel = Skeleton::canonical();
        let seq = walk_sequence(8);
        let decomp = poses_to_bones(&seq, &skel);
        let back = bones_to_poses(&decomp, &skel).unwrap();
        for (a, b) in seq.frames.iter().zip(&back.frames) {
            for j in 0..JOINT_COUNT {
                assert!((a.joints[j] - b.joints[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn collapsed_pose_gives_zero_bones() {
        let skel = Skeleton::canonical();
        let pose = Pose3D::new([Vector3::new(1.0, 2.0, 3.0); JOINT_COUNT]);
        let seq = PoseSequence::new(vec![pose]).unwrap();
        let decomp = poses_to_bones(&seq, &skel);
        for bone in &decomp.bones[0] {
            assert_eq!(bone.norm(), 0.0);
        }
    }

    #[test]
    fn zero_bones_collapse_to_root() {
        let skel = Skeleton::canonical();
        let root = Vector3::new(-1.0, 0.5, 2.0);
        let decomp = BoneDecomposition {
            bones: vec![[Vector3::zeros(); BONE_COUNT]],
            roots: vec![root],
        };
        let seq = bones_to_poses(&decomp, &skel).unwrap();
        for j in 0..JOINT_COUNT {
            assert_eq!(seq.frames[0].joints[j], root);
        }
    }

    #[test]
    fn chain_accumulates_along_tree() {
        // r_hip -> r_knee -> r_ankle is a two-bone chain under the root.
        let skel = Skeleton::canonical();
        let mut bones = [Vector3::zeros(); BONE_COUNT];
        bones[0] = Vector3::new(1.0, 0.0, 0.0); // hip -> r_hip
        bones[1] = Vector3::new(2.0, 0.0, 0.0); // r_hip -> r_knee
        let decomp = BoneDecomposition {
            bones: vec![bones],
            roots: vec![Vector3::zeros()],
        };
        let seq = bones_to_poses(&decomp, &skel).unwrap();
        assert_eq!(seq.frames[0].joints[0].x, 0.0);
        assert_eq!(seq.frames[0].joints[1].x, 1.0);
        assert_eq!(seq.frames[0].joints[2].x, 3.0);
    }

    #[test]
    fn rodrigues_zero_angle_is_identity() {
        let r = rodrigues(&Vector3::new(0.0, 1.0, 0.0), 0.0).unwrap();
        assert!((r - Matrix3::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn rodrigues_quarter_turn_about_z() {
        let r = rodrigues(&Vector3::new(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2).unwrap();
        let v = r * Vector3::new(1.0, 0.0, 0.0);
        assert!((v - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rodrigues_fixes_its_axis_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let a: [f64; 3] = UnitSphere.sample(&mut rng);
            let axis = Vector3::new(a[0], a[1], a[2]);
            let alpha: f64 = rng.random_range(-3.0..3.0);
            let beta: f64 = rng.random_range(-3.0..3.0);
            let ra = rodrigues(&axis, alpha).unwrap();
            assert!((ra * axis - axis).norm() < 1e-12);
            let rb = rodrigues(&axis, beta).unwrap();
            let rab = rodrigues(&axis, alpha + beta).unwrap();
            assert!((ra * rb - rab).abs().max() < 1e-12);
        }
    }

    #[test]
    fn rodrigues_rejects_non_unit_axis() {
        assert!(rodrigues(&Vector3::new(0.0, 0.0, 2.0), 1.0).is_err());
    }

    #[test]
    fn identity_params_are_identity() {
        let skel = Skeleton::canonical();
        let seq = walk_sequence(6);
        let out = augment_sequence(&seq, &AugmentParams::identity(), &skel).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn unit_ratio_doubles_lengths() {
        let skel = Skeleton::canonical();
        let seq = walk_sequence(4);
        let mut params = AugmentParams::identity();
        params.length_ratios = [1.0; BONE_COUNT];
        let out = augment_sequence(&seq, &params, &skel).unwrap();
        for (orig, aug) in seq.frames.iter().zip(&out.frames) {
            let lo = orig.bone_lengths(&skel);
            let la = aug.bone_lengths(&skel);
            for l in 0..BONE_COUNT {
                assert!((la[l] - 2.0 * lo[l]).abs() < 1e-9);
            }
        }
        // Directions unchanged.
        let orig_bones = poses_to_bones(&seq, &skel);
        let aug_bones = poses_to_bones(&out, &skel);
        for n in 0..seq.len() {
            for l in 0..BONE_COUNT {
                let cross = orig_bones.bones[n][l].cross(&aug_bones.bones[n][l]);
                assert!(cross.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn per_frame_rotation_angle_is_linear() {
        let skel = Skeleton::canonical();
        let seq = walk_sequence(10);
        let n_frames = seq.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = sample_params(&AugmentConfig::default(), &mut rng);
        let out = augment_sequence(&seq, &params, &skel).unwrap();
        let orig = poses_to_bones(&seq, &skel);
        let aug = poses_to_bones(&out, &skel);
        for n in 0..seq.len() {
            for l in 0..BONE_COUNT {
                let b0 = orig.bones[n][l];
                let b1 = aug.bones[n][l];
                // Skip bones nearly parallel to the rotation axis.
                let perp = b0 - params.axes[l] * b0.dot(&params.axes[l]);
                if perp.norm() < 0.05 * b0.norm() {
                    continue;
                }
                // The rotation angle shows up in the component perpendicular
                // to the axis; measure it independently per frame.
                let expected = (n as f64 * params.angles[l] / n_frames).abs();
                let p1 = b1 - params.axes[l] * b1.dot(&params.axes[l]);
                let cosp = (perp.dot(&p1) / (perp.norm() * p1.norm())).clamp(-1.0, 1.0);
                let measured = cosp.acos();
                assert!(
                    (measured - expected).abs() < 1e-6,
                    "frame {n} bone {l}: measured {measured}, expected {expected}"
                );
            }
        }
    }

    #[test]
    fn augmentation_commutes_with_rigid_rotation() {
        let skel = Skeleton::canonical();
        let seq = walk_sequence(5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = sample_params(&AugmentConfig::default(), &mut rng);
        let rot = *Rotation3::from_euler_angles(0.5, -0.3, 1.1).matrix();
        let rigid = RigidTransform::new(rot, Vector3::zeros()).unwrap();

        let rotated_seq = PoseSequence::new(
            seq.frames.iter().map(|f| apply_rigid(f, &rigid)).collect(),
        )
        .unwrap();
        let mut rotated_params = params.clone();
        for axis in rotated_params.axes.iter_mut() {
            *axis = rot * *axis;
        }

        let lhs = augment_sequence(&rotated_seq, &rotated_params, &skel).unwrap();
        let aug = augment_sequence(&seq, &params, &skel).unwrap();
        let rhs = PoseSequence::new(
            aug.frames.iter().map(|f| apply_rigid(f, &rigid)).collect(),
        )
        .unwrap();
        for (a, b) in lhs.frames.iter().zip(&rhs.frames) {
            for j in 0..JOINT_COUNT {
                assert!((a.joints[j] - b.joints[j]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn sample_params_is_deterministic_and_in_range() {
        let config: AugmentConfig<f64> = AugmentConfig::default();
        let a = sample_params(&config, &mut ChaCha8Rng::seed_from_u64(99));
        let b = sample_params(&config, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 / BONE_COUNT as u64 {
            let p = sample_params(&config, &mut rng);
            for l in 0..BONE_COUNT {
                assert!((p.axes[l].norm() - 1.0).abs() < 1e-9);
                assert!(p.angles[l] >= config.angle_range.0 && p.angles[l] <= config.angle_range.1);
                assert!(
                    p.length_ratios[l] >= config.ratio_range.0
                        && p.length_ratios[l] <= config.ratio_range.1
                );
            }
        }
    }
}
