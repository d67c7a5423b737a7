//! The JSONL interchange record carried between commands, plus conversions
//! to and from the core geometry types.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::{Vector2, Vector3};
use poselign_core::pose::{CameraIntrinsics, Pose2D, Pose3D};
use poselign_core::JOINT_COUNT;
use serde::{Deserialize, Serialize};

/// Pinhole intrinsics as stored on disk (pixels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraSpec {
    pub fn to_intrinsics(self) -> Result<CameraIntrinsics<f64>> {
        CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy)
            .context("invalid camera intrinsics")
    }

}

/// One dataset entry. All 3D coordinates are meters in the camera frame;
/// 2D coordinates are pixels. At least one of `joints3d` / `joints2d` must
/// be present; `pseudo3d` and the residual/iteration fields are appended by
/// the pseudo-label command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joints3d: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joints2d: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_pose3d: Option<Vec<[f64; 3]>>,
    pub camera: CameraSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudo3d: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage1_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage2_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage1_iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage2_iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

impl DatasetRecord {
    pub fn validate(&self) -> Result<()> {
        if self.joints3d.is_none() && self.joints2d.is_none() {
            bail!("record {}: needs joints3d or joints2d", self.id);
        }
        for (name, len) in [
            ("joints3d", self.joints3d.as_ref().map(Vec::len)),
            ("rel_pose3d", self.rel_pose3d.as_ref().map(Vec::len)),
            ("pseudo3d", self.pseudo3d.as_ref().map(Vec::len)),
        ] {
            if let Some(len) = len {
                if len != JOINT_COUNT {
                    bail!("record {}: {name} has {len} joints, expected {JOINT_COUNT}", self.id);
                }
            }
        }
        if let Some(j2d) = &self.joints2d {
            if j2d.len() != JOINT_COUNT {
                bail!("record {}: joints2d has {} joints, expected {JOINT_COUNT}", self.id, j2d.len());
            }
        }
        Ok(())
    }

    pub fn pose3d(&self) -> Option<Pose3D<f64>> {
        self.joints3d.as_deref().map(rows_to_pose3d)
    }

    /// Ground-truth 3D when present, otherwise the pseudo-label.
    pub fn any_pose3d(&self) -> Option<Pose3D<f64>> {
        self.joints3d
            .as_deref()
            .or(self.pseudo3d.as_deref())
            .map(rows_to_pose3d)
    }

    pub fn rel_pose(&self) -> Option<Pose3D<f64>> {
        self.rel_pose3d.as_deref().map(rows_to_pose3d)
    }

    pub fn pose2d(&self) -> Option<Pose2D<f64>> {
        self.joints2d.as_deref().map(|rows| {
            let mut joints = [Vector2::zeros(); JOINT_COUNT];
            for (j, row) in rows.iter().enumerate() {
                joints[j] = Vector2::new(row[0], row[1]);
            }
            Pose2D::new(joints)
        })
    }
}

fn rows_to_pose3d(rows: &[[f64; 3]]) -> Pose3D<f64> {
    let mut joints = [Vector3::zeros(); JOINT_COUNT];
    for (j, row) in rows.iter().enumerate() {
        joints[j] = Vector3::new(row[0], row[1], row[2]);
    }
    Pose3D::new(joints)
}

pub fn pose3d_rows(pose: &Pose3D<f64>) -> Vec<[f64; 3]> {
    pose.joints.iter().map(|j| [j.x, j.y, j.z]).collect()
}

pub fn pose2d_rows(pose: &Pose2D<f64>) -> Vec<[f64; 2]> {
    pose.joints.iter().map(|j| [j.x, j.y]).collect()
}

pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed record", path.display(), n + 1))?;
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_records(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
