//! Geometric and optimization core for pseudo-label-guided cross-domain 3D
//! human pose alignment.
//!
//! The crate covers:
//! - pinhole projection/back-projection and the human-centric global
//!   transformation between camera frames ([`camera`], [`frame`]),
//! - absolute-pose recovery from 2D keypoints via a two-stage least-squares
//!   fit ([`pseudo_label`]),
//! - pose-sequence augmentation by per-bone rotations and length rescaling
//!   ([`augment`]),
//! - part-aware Kinematic Chain Space features ([`kcs`]),
//! - LSGAN/MSE loss formulas as pure functions ([`losses`]),
//! - MPJPE / PA-MPJPE / PCK / AUC metrics and a Kabsch solver ([`metrics`]),
//! - synthetic scene generation and the pairwise-alignment experiment
//!   harness ([`synthetic`]).
//!
//! All geometry is generic over the scalar type ([`scalar::Real`], f32 or
//! f64); concrete f64 aliases live at the crate root.

pub mod augment;
pub mod camera;
pub mod error;
pub mod frame;
pub mod kcs;
pub mod losses;
pub mod metrics;
pub mod pose;
pub mod pseudo_label;
pub mod scalar;
pub mod skeleton;
pub mod synthetic;

pub use error::{PoseError, Result};
pub use scalar::Real;
pub use skeleton::{BodyPart, Skeleton, BONE_COUNT, JOINT_COUNT, PART_COUNT};

// Concrete f64 aliases, the precision used by the CLI and the test suites.
pub type Pose3D64 = pose::Pose3D<f64>;
pub type Pose2D64 = pose::Pose2D<f64>;
pub type CameraIntrinsics64 = pose::CameraIntrinsics<f64>;
pub type RigidTransform64 = pose::RigidTransform<f64>;
pub type PoseSequence64 = augment::PoseSequence<f64>;
pub type AugmentParams64 = augment::AugmentParams<f64>;
pub type AugmentConfig64 = augment::AugmentConfig<f64>;
pub type BoneLengthProfile64 = pseudo_label::BoneLengthProfile<f64>;
pub type SceneConfig64 = synthetic::SceneConfig<f64>;
pub type MetricReport64 = metrics::MetricReport<f64>;

// f32 variants for callers that trade precision for footprint.
pub type Pose3D32 = pose::Pose3D<f32>;
pub type Pose2D32 = pose::Pose2D<f32>;
pub type CameraIntrinsics32 = pose::CameraIntrinsics<f32>;
pub type RigidTransform32 = pose::RigidTransform<f32>;
