//! LSGAN discriminator/generator losses and the MSE pose loss, as pure
//! functions over score batches.
//!
//! Note the generator loss penalizes real scores toward 0 inside the
//! generator objective; this mirrors the printed formulation even though
//! standard LSGAN omits the real-score term there.

use serde::{Deserialize, Serialize};

use crate::error::{PoseError, Result};
use crate::pose::Pose3D;
use crate::scalar::Real;
use crate::skeleton::JOINT_COUNT;

/// Weights of the 2D and 3D adversarial terms (α = 1, β = 6 by default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights<T: Real> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> LossWeights<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if alpha < T::zero() || beta < T::zero() {
            return Err(PoseError::InvalidParameter(
                "loss weights must be non-negative".into(),
            ));
        }
        Ok(Self { alpha, beta })
    }
}

impl<T: Real> Default for LossWeights<T> {
    fn default() -> Self {
        Self {
            alpha: T::one(),
            beta: T::c(6.0),
        }
    }
}

fn mean_sq_dev<T: Real>(scores: &[T], target: T) -> Result<T> {
    if scores.is_empty() {
        return Err(PoseError::EmptyInput("score batch must be non-empty"));
    }
    let mut acc = T::zero();
    for &s in scores {
        let d = s - target;
        acc += d * d;
    }
    Ok(acc / T::from_usize(scores.len()).unwrap())
}

/// ½·mean((real-1)²) + ½·mean(fake²).
pub fn lsgan_discriminator_loss<T: Real>(real_scores: &[T], fake_scores: &[T]) -> Result<T> {
    let half = T::c(0.5);
    Ok(half * mean_sq_dev(real_scores, T::one())? + half * mean_sq_dev(fake_scores, T::zero())?)
}

/// α·[½·mean((fake2d-1)²) + ½·mean(real2d²)] + β·[same for 3D].
pub fn lsgan_generator_adv_loss<T: Real>(
    fake2d: &[T],
    real2d: &[T],
    fake3d: &[T],
    real3d: &[T],
    weights: &LossWeights<T>,
) -> Result<T> {
    let half = T::c(0.5);
    let term2d = half * mean_sq_dev(fake2d, T::one())? + half * mean_sq_dev(real2d, T::zero())?;
    let term3d = half * mean_sq_dev(fake3d, T::one())? + half * mean_sq_dev(real3d, T::zero())?;
    Ok(weights.alpha * term2d + weights.beta * term3d)
}

/// Mean over joints and coordinates of the squared difference.
pub fn mse_pose_loss<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>) -> T {
    let mut acc = T::zero();
    for j in 0..JOINT_COUNT {
        acc += (pred.joints[j] - gt.joints[j]).norm_squared();
    }
    acc / T::from_usize(JOINT_COUNT * 3).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::template_poses;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_discriminator_has_zero_loss() {
        let loss = lsgan_discriminator_loss(&[1.0, 1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn maximally_fooled_discriminator() {
        let loss = lsgan_discriminator_loss(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(loss, 1.0);
    }

    #[test]
    fn discriminator_midpoint_arithmetic() {
        let loss: f64 = lsgan_discriminator_loss(&[0.5], &[0.5]).unwrap();
        assert!((loss - 0.25).abs() < 1e-15);
    }

    #[test]
    fn discriminator_rejects_empty_batch() {
        assert!(lsgan_discriminator_loss::<f64>(&[], &[0.0]).is_err());
        assert!(lsgan_discriminator_loss::<f64>(&[1.0], &[]).is_err());
    }

    #[test]
    fn generator_optimum_is_zero() {
        let w = LossWeights::default();
        let loss = lsgan_generator_adv_loss(&[1.0, 1.0], &[0.0], &[1.0], &[0.0, 0.0], &w).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn generator_weighted_sum_with_default_weights() {
        // With every score at 1 the fake terms vanish and each real term
        // contributes ½, so the brackets are 0.5 each and α=1, β=6 give 3.5.
        let w = LossWeights::<f64>::default();
        let loss = lsgan_generator_adv_loss(&[1.0], &[1.0], &[1.0], &[1.0], &w).unwrap();
        assert!((loss - 3.5).abs() < 1e-15);
    }

    #[test]
    fn zero_alpha_ignores_2d_scores() {
        let w = LossWeights::new(0.0, 6.0).unwrap();
        let a = lsgan_generator_adv_loss(&[0.9], &[0.1], &[0.5], &[0.5], &w).unwrap();
        let b = lsgan_generator_adv_loss(&[0.0], &[1.0], &[0.5], &[0.5], &w).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn losses_are_exchange_symmetric() {
        // Swapping real/fake labels turns one formula into the other.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let real: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..2.0)).collect();
            let fake: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..2.0)).collect();
            let dis = lsgan_discriminator_loss(&real, &fake).unwrap();
            let w = LossWeights::new(1.0, 0.0).unwrap();
            let gen = lsgan_generator_adv_loss(&real, &fake, &[0.0], &[0.0], &w).unwrap();
            // With β = 0 the generator 2D bracket under (fake2d=real,
            // real2d=fake) is exactly the discriminator formula.
            assert!((gen - dis).abs() < 1e-12);
        }
    }

    #[test]
    fn mse_zero_at_equality_and_unit_offset() {
        let pose: Pose3D<f64> = template_poses()[0].clone();
        assert_eq!(mse_pose_loss(&pose, &pose), 0.0);
        let offset = pose.translated(&Vector3::new(1.0, 1.0, 1.0));
        assert!((mse_pose_loss(&offset, &pose) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mse_matches_elementwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a: Pose3D<f64> = template_poses()[0].clone();
        let b = Pose3D::new(a.joints.map(|j| {
            j + Vector3::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            )
        }));
        let mut acc = 0.0;
        let mut count = 0.0;
        for j in 0..JOINT_COUNT {
            for c in 0..3 {
                let d = a.joints[j][c] - b.joints[j][c];
                acc += d * d;
                count += 1.0;
            }
        }
        assert!((mse_pose_loss(&a, &b) - acc / count).abs() < 1e-15);
    }
}
