//! Pose evaluation metrics (MPJPE, PA-MPJPE, PCK, AUC) and the Kabsch
//! rigid-alignment solver.
//!
//! Poses are in meters; metric values are reported in millimeters to match
//! the usual benchmark tables.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{PoseError, Result};
use crate::pose::{Pose3D, RigidTransform};
use crate::scalar::Real;
use crate::skeleton::JOINT_COUNT;

pub const DEFAULT_PCK_THRESHOLD_MM: f64 = 150.0;

/// AUC grid: 5 mm steps from 5 to 150 mm (3DHP protocol).
pub fn default_auc_thresholds<T: Real>() -> Vec<T> {
    (1..=30).map(|i| T::c(5.0 * i as f64)).collect()
}

/// Aggregate metric values for one pose pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport<T: Real> {
    pub mpjpe_mm: T,
    pub pa_mpjpe_mm: T,
    pub pck_percent: T,
    pub auc: T,
    pub per_joint_mm: Vec<T>,
}

fn meters_to_mm<T: Real>(m: T) -> T {
    m * T::c(1000.0)
}

/// Per-joint Euclidean errors in millimeters.
pub fn per_joint_errors_mm<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>) -> [T; JOINT_COUNT] {
    let mut errors = [T::zero(); JOINT_COUNT];
    for j in 0..JOINT_COUNT {
        errors[j] = meters_to_mm((pred.joints[j] - gt.joints[j]).norm());
    }
    errors
}

/// Mean per-joint position error in millimeters.
pub fn mpjpe<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>) -> T {
    let errors = per_joint_errors_mm(pred, gt);
    let mut acc = T::zero();
    for e in errors {
        acc += e;
    }
    acc / T::from_usize(JOINT_COUNT).unwrap()
}

/// Optimal proper rigid alignment of `p` onto `q` (Kabsch), with the
/// post-alignment MPJPE in millimeters.
pub fn kabsch<T: Real>(p: &[Vector3<T>], q: &[Vector3<T>]) -> Result<(RigidTransform<T>, T)> {
    if p.len() != q.len() {
        return Err(PoseError::ShapeMismatch(format!(
            "{} vs {} points",
            p.len(),
            q.len()
        )));
    }
    if p.len() < 3 {
        return Err(PoseError::Degenerate("need at least 3 points".into()));
    }
    let n = T::from_usize(p.len()).unwrap();
    let mut mu_p = Vector3::zeros();
    let mut mu_q = Vector3::zeros();
    for i in 0..p.len() {
        mu_p += p[i];
        mu_q += q[i];
    }
    mu_p /= n;
    mu_q /= n;

    // Cross-covariance H = Σ (p - mu_p)(q - mu_q)ᵀ.
    let mut h = Matrix3::<T>::zeros();
    for i in 0..p.len() {
        h += (p[i] - mu_p) * (q[i] - mu_q).transpose();
    }

    let svd = h.svd(true, true);
    let u = svd.u.ok_or_else(|| PoseError::Degenerate("SVD failed".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| PoseError::Degenerate("SVD failed".into()))?;
    let s = svd.singular_values;
    if s[1] <= T::c(1e-12) * s[0].max(T::one()) {
        return Err(PoseError::Degenerate(
            "point configuration is rank deficient (collinear or coincident)".into(),
        ));
    }

    let mut d = Matrix3::identity();
    if (v_t.transpose() * u.transpose()).determinant() < T::zero() {
        d[(2, 2)] = -T::one();
    }
    let rotation = v_t.transpose() * d * u.transpose();
    let translation = mu_q - rotation * mu_p;
    let transform = RigidTransform::new(rotation, translation)?;

    let mut acc = T::zero();
    for i in 0..p.len() {
        acc += (transform.apply_point(&p[i]) - q[i]).norm();
    }
    let residual = meters_to_mm(acc / n);
    Ok((transform, residual))
}

/// MPJPE after optimal similarity (rotation, translation, uniform scale)
/// alignment of `pred` onto `gt`, in millimeters.
pub fn pa_mpjpe<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>) -> Result<T> {
    let n = T::from_usize(JOINT_COUNT).unwrap();
    let mut mu_p = Vector3::zeros();
    let mut mu_q = Vector3::zeros();
    for j in 0..JOINT_COUNT {
        mu_p += pred.joints[j];
        mu_q += gt.joints[j];
    }
    mu_p /= n;
    mu_q /= n;

    let mut h = Matrix3::<T>::zeros();
    let mut var_p = T::zero();
    for j in 0..JOINT_COUNT {
        let pc = pred.joints[j] - mu_p;
        let qc = gt.joints[j] - mu_q;
        h += pc * qc.transpose();
        var_p += pc.norm_squared();
    }
    if var_p <= T::c(1e-18) {
        return Err(PoseError::Degenerate(
            "prediction has zero spread; similarity alignment undefined".into(),
        ));
    }

    let svd = h.svd(true, true);
    let u = svd.u.ok_or_else(|| PoseError::Degenerate("SVD failed".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| PoseError::Degenerate("SVD failed".into()))?;
    let s = svd.singular_values;
    if s[1] <= T::c(1e-12) * s[0].max(T::one()) {
        return Err(PoseError::Degenerate(
            "joint configuration is rank deficient".into(),
        ));
    }

    let mut d = Matrix3::identity();
    if (v_t.transpose() * u.transpose()).determinant() < T::zero() {
        d[(2, 2)] = -T::one();
    }
    let rotation = v_t.transpose() * d * u.transpose();
    // Umeyama scale: trace of D·S over the prediction variance.
    let trace = s[0] + s[1] + d[(2, 2)] * s[2];
    let scale = trace / var_p;

    let mut acc = T::zero();
    for j in 0..JOINT_COUNT {
        let aligned = rotation * (pred.joints[j] - mu_p) * scale + mu_q;
        acc += (aligned - gt.joints[j]).norm();
    }
    Ok(meters_to_mm(acc / n))
}

/// Percentage of joints with error strictly below the threshold.
pub fn pck<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>, threshold_mm: T) -> T {
    let errors = per_joint_errors_mm(pred, gt);
    let mut hits = 0usize;
    for e in errors {
        if e < threshold_mm {
            hits += 1;
        }
    }
    T::from_usize(hits).unwrap() / T::from_usize(JOINT_COUNT).unwrap() * T::c(100.0)
}

/// Mean PCK (as a fraction) over a threshold grid.
pub fn auc_over<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>, thresholds_mm: &[T]) -> Result<T> {
    if thresholds_mm.is_empty() {
        return Err(PoseError::EmptyInput("AUC needs at least one threshold"));
    }
    let mut acc = T::zero();
    for &t in thresholds_mm {
        acc += pck(pred, gt, t) / T::c(100.0);
    }
    Ok(acc / T::from_usize(thresholds_mm.len()).unwrap())
}

/// AUC over the default 5..150 mm grid.
pub fn auc<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>) -> T {
    auc_over(pred, gt, &default_auc_thresholds()).unwrap()
}

/// Full metric report for one pair.
pub fn evaluate<T: Real>(pred: &Pose3D<T>, gt: &Pose3D<T>, pck_threshold_mm: T) -> Result<MetricReport<T>> {
    Ok(MetricReport {
        mpjpe_mm: mpjpe(pred, gt),
        pa_mpjpe_mm: pa_mpjpe(pred, gt)?,
        pck_percent: pck(pred, gt, pck_threshold_mm),
        auc: auc(pred, gt),
        per_joint_mm: per_joint_errors_mm(pred, gt).to_vec(),
    })
}
