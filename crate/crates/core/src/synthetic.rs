//! Synthetic pose and camera generation for oracle-based testing, the
//! elevated virtual-camera simulation, and the pairwise alignment
//! experiment harness.

use nalgebra::{Matrix3, Vector3};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::augment::rodrigues;
use crate::camera::project;
use crate::error::{PoseError, Result};
use crate::frame::{align_to_target, apply_rigid, human_frame};
use crate::metrics::mpjpe;
use crate::pose::{CameraIntrinsics, Pose3D, RigidTransform};
use crate::scalar::Real;
use crate::skeleton::{Skeleton, BONE_COUNT, JOINT_COUNT};

/// Scene sampling parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneConfig<T: Real> {
    pub camera: CameraIntrinsics<T>,
    /// Root depth range in meters.
    pub depth_range: (T, T),
    /// Upper bound on the per-bone perturbation rotation, radians.
    pub perturb_scale: T,
    /// Image bounds the sampled pose must project into, pixels.
    pub frame_size: (T, T),
    pub seed: u64,
    pub count: usize,
}

impl<T: Real> SceneConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.depth_range.0 <= T::zero() || self.depth_range.1 < self.depth_range.0 {
            return Err(PoseError::InvalidParameter(
                "depth range must be positive and ordered".into(),
            ));
        }
        Ok(())
    }
}

impl<T: Real> Default for SceneConfig<T> {
    fn default() -> Self {
        Self {
            camera: CameraIntrinsics::new(T::c(1000.0), T::c(1000.0), T::c(1000.0), T::c(1000.0))
                .unwrap(),
            depth_range: (T::c(3.0), T::c(6.0)),
            perturb_scale: T::c(0.3),
            frame_size: (T::c(2000.0), T::c(2000.0)),
            seed: 0,
            count: 100,
        }
    }
}

/// Alignment methods compared by the experiment harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMethod {
    None,
    Kabsch,
    HumanCentric,
}

impl AlignMethod {
    pub fn label(&self) -> &'static str {
        match self {
            AlignMethod::None => "none",
            AlignMethod::Kabsch => "kabsch",
            AlignMethod::HumanCentric => "human_centric",
        }
    }
}

/// Result of the pairwise alignment experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignmentReport<T: Real> {
    pub method: AlignMethod,
    /// Mean pairwise MPJPE (mm) per trial, after alignment.
    pub trial_means_mm: Vec<T>,
    pub average_mm: T,
    /// Mean pairwise MPJPE (mm) per trial with no alignment, same pairings.
    pub baseline_trial_means_mm: Vec<T>,
    pub baseline_average_mm: T,
    /// Percent reduction of the average versus the unaligned baseline.
    pub reduction_percent: T,
}

/// Built-in template poses (root-relative), parsed from the bundled data file.
pub fn template_poses<T: Real>() -> Vec<Pose3D<T>> {
    #[derive(Deserialize)]
    struct TemplateFile {
        poses: Vec<TemplateEntry>,
    }
    #[derive(Deserialize)]
    struct TemplateEntry {
        joints: Vec<[f64; 3]>,
    }
    let file: TemplateFile =
        serde_json::from_str(include_str!("../data/templates.json")).expect("bundled templates");
    file.poses
        .into_iter()
        .map(|entry| {
            let rows: Vec<[T; 3]> = entry
                .joints
                .iter()
                .map(|r| [T::c(r[0]), T::c(r[1]), T::c(r[2])])
                .collect();
            Pose3D::from_rows(&rows).expect("template joint count")
        })
        .collect()
}

const SAMPLE_RETRIES: usize = 200;

/// Samples a pose by perturbing template bone directions with bounded random
/// rotations and placing the root inside the configured frustum region.
///
/// Bone lengths are preserved exactly (direction-only perturbation).
pub fn sample_pose<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    skel: &Skeleton,
    template: &Pose3D<T>,
    config: &SceneConfig<T>,
) -> Result<Pose3D<T>> {
    config.validate()?;
    let mut bones = [Vector3::zeros(); BONE_COUNT];
    for (l, &(parent, child)) in skel.bones().iter().enumerate() {
        bones[l] = template.joints[child] - template.joints[parent];
    }
    if bones.iter().all(|b| b.norm() == T::zero()) {
        return Err(PoseError::Degenerate("template has no nonzero bones".into()));
    }

    for _ in 0..SAMPLE_RETRIES {
        // Direction-only perturbation of each bone.
        let mut new_bones = bones;
        if config.perturb_scale > T::zero() {
            for b in new_bones.iter_mut() {
                let a: [f64; 3] = UnitSphere.sample(rng);
                let axis = Vector3::new(T::c(a[0]), T::c(a[1]), T::c(a[2]));
                let angle = T::c(rng.random::<f64>()) * config.perturb_scale;
                *b = rodrigues(&axis, angle)? * *b;
            }
        }

        // Forward kinematics from the origin, then place the root.
        let mut joints = [Vector3::zeros(); JOINT_COUNT];
        for (l, &(parent, child)) in skel.bones().iter().enumerate() {
            joints[child] = joints[parent] + new_bones[l];
        }
        let depth = sample_range(config.depth_range, rng);
        let lateral = depth * T::c(0.25);
        let root = Vector3::new(
            sample_range((-lateral, lateral), rng),
            sample_range((-lateral, lateral), rng),
            depth,
        );
        let pose = Pose3D::new(joints.map(|j| j + root));

        if pose.joints.iter().any(|j| j.z <= T::zero()) {
            continue;
        }
        if human_frame(&pose, skel).is_err() {
            continue;
        }
        let Ok(projected) = project(&pose, &config.camera) else {
            continue;
        };
        let inside = projected.joints.iter().all(|uv| {
            uv.x >= T::zero()
                && uv.x <= config.frame_size.0
                && uv.y >= T::zero()
                && uv.y <= config.frame_size.1
        });
        if inside {
            return Ok(pose);
        }
    }
    Err(PoseError::SamplingFailed(format!(
        "no feasible pose within {SAMPLE_RETRIES} retries"
    )))
}

fn sample_range<T: Real, R: Rng + ?Sized>(range: (T, T), rng: &mut R) -> T {
    let u: f64 = rng.random();
    range.0 + (range.1 - range.0) * T::c(u)
}

/// Moves a pose into the frame of a virtual camera elevated by `height_m`
/// and pitched down by `depression_deg` about the x-axis.
///
/// Uses the proper x-axis rotation [[1,0,0],[0,c,s],[0,-s,c]].
pub fn virtual_camera<T: Real>(pose: &Pose3D<T>, height_m: T, depression_deg: T) -> Pose3D<T> {
    let transform = virtual_camera_transform(height_m, depression_deg);
    apply_rigid(pose, &transform)
}

/// The rigid transform applied by `virtual_camera`.
pub fn virtual_camera_transform<T: Real>(height_m: T, depression_deg: T) -> RigidTransform<T> {
    let angle = depression_deg * T::c(std::f64::consts::PI / 180.0);
    let (s, c) = (angle.sin(), angle.cos());
    let rotation = Matrix3::new(
        T::one(),
        T::zero(),
        T::zero(),
        T::zero(),
        c,
        s,
        T::zero(),
        -s,
        c,
    );
    let lift = Vector3::new(T::zero(), height_m, T::zero());
    RigidTransform {
        translation: rotation * lift,
        rotation,
    }
}

/// Random pairwise alignment experiment between two pose sets.
///
/// Each trial subsamples the larger set to the size of the smaller one,
/// shuffles the pairing, and measures mean pairwise MPJPE before and after
/// the chosen alignment.
pub fn pairwise_alignment_experiment<T: Real, R: Rng + ?Sized>(
    set_a: &[Pose3D<T>],
    set_b: &[Pose3D<T>],
    method: AlignMethod,
    trials: usize,
    rng: &mut R,
    skel: &Skeleton,
) -> Result<AlignmentReport<T>> {
    if set_a.is_empty() || set_b.is_empty() {
        return Err(PoseError::EmptyInput("both pose sets must be non-empty"));
    }
    if trials == 0 {
        return Err(PoseError::InvalidParameter("trials must be positive".into()));
    }
    let pairs = set_a.len().min(set_b.len());

    let mut trial_means = Vec::with_capacity(trials);
    let mut baseline_means = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut idx_a: Vec<usize> = (0..set_a.len()).collect();
        let mut idx_b: Vec<usize> = (0..set_b.len()).collect();
        idx_a.shuffle(rng);
        idx_b.shuffle(rng);

        let mut aligned_sum = T::zero();
        let mut baseline_sum = T::zero();
        for k in 0..pairs {
            let source = &set_a[idx_a[k]];
            let target = &set_b[idx_b[k]];
            baseline_sum += mpjpe(source, target);
            aligned_sum += match method {
                AlignMethod::None => mpjpe(source, target),
                AlignMethod::Kabsch => {
                    let (_, residual) = crate::metrics::kabsch(&source.joints, &target.joints)?;
                    residual
                }
                AlignMethod::HumanCentric => {
                    let aligned = align_to_target(source, target, skel)?;
                    mpjpe(&aligned, target)
                }
            };
        }
        let n = T::from_usize(pairs).unwrap();
        trial_means.push(aligned_sum / n);
        baseline_means.push(baseline_sum / n);
    }

    let trials_t = T::from_usize(trials).unwrap();
    let average = trial_means.iter().fold(T::zero(), |a, &b| a + b) / trials_t;
    let baseline_average = baseline_means.iter().fold(T::zero(), |a, &b| a + b) / trials_t;
    let reduction = if baseline_average > T::zero() {
        (T::one() - average / baseline_average) * T::c(100.0)
    } else {
        T::zero()
    };

    Ok(AlignmentReport {
        method,
        trial_means_mm: trial_means,
        average_mm: average,
        baseline_trial_means_mm: baseline_means,
        baseline_average_mm: baseline_average,
        reduction_percent: reduction,
    })
}
