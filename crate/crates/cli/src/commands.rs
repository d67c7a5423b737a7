//! One function per CLI verb; thin wrappers over the core modules with
//! JSONL in, JSONL/CSV out and a run manifest next to every primary output.

use std::path::Path;

use anyhow::{bail, Context, Result};
use poselign_core::augment::{augment_sequence, sample_params, AugmentConfig, PoseSequence};
use poselign_core::camera::project;
use poselign_core::frame::{align_to_target, apply_rigid};
use poselign_core::kcs::part_kcs_with;
use poselign_core::metrics::{evaluate, kabsch, mpjpe};
use poselign_core::pose::Pose3D;
use poselign_core::pseudo_label::{generate_pseudo_label, mean_bone_lengths, BoneLengthProfile};
use poselign_core::skeleton::PARTS;
use poselign_core::synthetic::{
    pairwise_alignment_experiment, sample_pose, template_poses, virtual_camera, AlignMethod,
    SceneConfig,
};
use poselign_core::{BodyPart, Skeleton};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::manifest::write_manifest;
use crate::record::{
    pose2d_rows, pose3d_rows, read_records, write_records, CameraSpec, DatasetRecord,
};

fn part_label(part: BodyPart) -> &'static str {
    match part {
        BodyPart::Torso => "torso",
        BodyPart::LeftArm => "left_arm",
        BodyPart::RightArm => "right_arm",
        BodyPart::LeftLeg => "left_leg",
        BodyPart::RightLeg => "right_leg",
    }
}

/// Counts record-level failures and reports them once at the end.
struct SkipLog {
    skipped: Vec<String>,
    succeeded: usize,
}

impl SkipLog {
    fn new() -> Self {
        Self {
            skipped: Vec::new(),
            succeeded: 0,
        }
    }

    fn skip(&mut self, id: &str, reason: impl std::fmt::Display) {
        eprintln!("skip {id}: {reason}");
        self.skipped.push(id.to_string());
    }

    /// Errors out when nothing succeeded; otherwise prints the summary.
    fn finish(self, command: &str) -> Result<()> {
        eprintln!(
            "{command}: {} succeeded, {} skipped",
            self.succeeded,
            self.skipped.len()
        );
        if self.succeeded == 0 {
            bail!("{command}: no record succeeded");
        }
        Ok(())
    }
}

pub fn gen_data(
    output: &Path,
    count: usize,
    seed: u64,
    camera: CameraSpec,
    depth_range: (f64, f64),
    perturb: f64,
    frame_size: (f64, f64),
) -> Result<()> {
    if count == 0 {
        bail!("--count 0 would produce an empty dataset");
    }
    let config = SceneConfig {
        camera: camera.to_intrinsics()?,
        depth_range,
        perturb_scale: perturb,
        frame_size,
        seed,
        count,
    };
    config.validate()?;
    let skel = Skeleton::canonical();
    let templates = template_poses::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let template = &templates[i % templates.len()];
        let pose = sample_pose(&mut rng, &skel, template, &config)?;
        let projected = project(&pose, &config.camera)?;
        records.push(DatasetRecord {
            id: format!("rec{i:06}"),
            joints3d: Some(pose3d_rows(&pose)),
            joints2d: Some(pose2d_rows(&projected)),
            rel_pose3d: Some(pose3d_rows(&pose.root_relative())),
            camera,
            frame_index: Some(i as u64),
            sequence_id: None,
            pseudo3d: None,
            stage1_residual: None,
            stage2_residual: None,
            stage1_iterations: None,
            stage2_iterations: None,
            converged: None,
        });
    }
    write_records(output, &records)?;
    write_manifest("gen-data", Some(seed), &[], &[output])
}

pub fn pseudo_label(input: &Path, output: &Path, init_depth: f64) -> Result<()> {
    let records = read_records(input)?;
    let skel = Skeleton::canonical();
    let rel_poses: Vec<Pose3D<f64>> = records.iter().filter_map(|r| r.rel_pose()).collect();
    let profile: BoneLengthProfile<f64> = mean_bone_lengths(&rel_poses, &skel)
        .context("no record carries rel_pose3d; cannot build a bone-length profile")?;

    let mut log = SkipLog::new();
    let mut out = Vec::new();
    for record in &records {
        let (Some(p2d), Some(rel)) = (record.pose2d(), record.rel_pose()) else {
            log.skip(&record.id, "missing joints2d or rel_pose3d");
            continue;
        };
        let cam = match record.camera.to_intrinsics() {
            Ok(cam) => cam,
            Err(err) => {
                log.skip(&record.id, err);
                continue;
            }
        };
        match generate_pseudo_label(&p2d, &rel, &cam, &profile, init_depth, &skel) {
            Ok(label) => {
                let mut record = record.clone();
                record.pseudo3d = Some(pose3d_rows(&label.absolute_pose));
                record.stage1_residual = Some(label.stage1_residual);
                record.stage2_residual = Some(label.stage2_residual);
                record.stage1_iterations = Some(label.stage1_iterations as u64);
                record.stage2_iterations = Some(label.stage2_iterations as u64);
                record.converged = Some(label.converged);
                out.push(record);
                log.succeeded += 1;
            }
            Err(err) => log.skip(&record.id, err),
        }
    }
    write_records(output, &out)?;
    write_manifest("pseudo-label", None, &[input], &[output])?;
    log.finish("pseudo-label")
}

#[derive(Serialize)]
struct AlignRow<'a> {
    id: &'a str,
    mpjpe_before_mm: f64,
    mpjpe_after_mm: f64,
}

pub fn align(
    source: &Path,
    target: &Path,
    output: &Path,
    method: AlignMethod,
    report_csv: Option<&Path>,
) -> Result<()> {
    let src = read_records(source)?;
    let tgt = read_records(target)?;
    let skel = Skeleton::canonical();

    let mut log = SkipLog::new();
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for (s, t) in src.iter().zip(tgt.iter()) {
        let (Some(sp), Some(tp)) = (s.any_pose3d(), t.any_pose3d()) else {
            log.skip(&s.id, "source or target record lacks 3D joints");
            continue;
        };
        let aligned = match method {
            AlignMethod::None => sp.clone(),
            AlignMethod::HumanCentric => match align_to_target(&sp, &tp, &skel) {
                Ok(pose) => pose,
                Err(err) => {
                    log.skip(&s.id, err);
                    continue;
                }
            },
            AlignMethod::Kabsch => match kabsch(&sp.joints, &tp.joints) {
                Ok((transform, _)) => apply_rigid(&sp, &transform),
                Err(err) => {
                    log.skip(&s.id, err);
                    continue;
                }
            },
        };
        let cam = match t.camera.to_intrinsics() {
            Ok(cam) => cam,
            Err(err) => {
                log.skip(&s.id, err);
                continue;
            }
        };
        rows.push(AlignRow {
            id: &s.id,
            mpjpe_before_mm: mpjpe(&sp, &tp),
            mpjpe_after_mm: mpjpe(&aligned, &tp),
        });
        out.push(DatasetRecord {
            id: s.id.clone(),
            joints3d: Some(pose3d_rows(&aligned)),
            joints2d: project(&aligned, &cam).ok().map(|p| pose2d_rows(&p)),
            rel_pose3d: Some(pose3d_rows(&aligned.root_relative())),
            camera: t.camera,
            frame_index: s.frame_index,
            sequence_id: s.sequence_id.clone(),
            pseudo3d: None,
            stage1_residual: None,
            stage2_residual: None,
            stage1_iterations: None,
            stage2_iterations: None,
            converged: None,
        });
        log.succeeded += 1;
    }
    write_records(output, &out)?;
    if let Some(csv_path) = report_csv {
        let mut writer = csv::Writer::from_path(csv_path)
            .with_context(|| format!("cannot write {}", csv_path.display()))?;
        let n = rows.len().max(1) as f64;
        let before = rows.iter().map(|r| r.mpjpe_before_mm).sum::<f64>() / n;
        let after = rows.iter().map(|r| r.mpjpe_after_mm).sum::<f64>() / n;
        for row in &rows {
            writer.serialize(row)?;
        }
        writer.serialize(AlignRow {
            id: "average",
            mpjpe_before_mm: before,
            mpjpe_after_mm: after,
        })?;
        writer.flush()?;
    }
    let mut outputs: Vec<&Path> = vec![output];
    if let Some(csv_path) = report_csv {
        outputs.push(csv_path);
    }
    write_manifest("align", None, &[source, target], &outputs)?;
    log.finish("align")
}

pub fn augment(
    input: &Path,
    output: &Path,
    seed: u64,
    angle_range: (f64, f64),
    ratio_range: (f64, f64),
) -> Result<()> {
    let records = read_records(input)?;
    let config = AugmentConfig::new(angle_range, ratio_range, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skel = Skeleton::canonical();

    // Group consecutive records into sequences; a change of sequence_id (or
    // no id at all, treated as one anonymous sequence) starts a new group.
    let mut groups: Vec<(Option<String>, Vec<usize>)> = Vec::new();
    for (i, record) in records.iter().enumerate() {
        match groups.last_mut() {
            Some((key, members)) if *key == record.sequence_id => members.push(i),
            _ => groups.push((record.sequence_id.clone(), vec![i])),
        }
    }

    let mut log = SkipLog::new();
    let mut out = Vec::new();
    for (_, members) in &groups {
        let mut frames = Vec::with_capacity(members.len());
        let mut kept = Vec::with_capacity(members.len());
        for &i in members {
            match records[i].pose3d() {
                Some(pose) => {
                    frames.push(pose);
                    kept.push(i);
                }
                None => log.skip(&records[i].id, "missing joints3d"),
            }
        }
        if frames.is_empty() {
            continue;
        }
        let seq = PoseSequence::new(frames)?;
        let params = sample_params(&config, &mut rng);
        let augmented = match augment_sequence(&seq, &params, &skel) {
            Ok(seq) => seq,
            Err(err) => {
                for &i in &kept {
                    log.skip(&records[i].id, &err);
                }
                continue;
            }
        };
        for (&i, pose) in kept.iter().zip(augmented.frames.iter()) {
            let record = &records[i];
            let cam = record.camera.to_intrinsics()?;
            out.push(DatasetRecord {
                joints3d: Some(pose3d_rows(pose)),
                joints2d: record
                    .joints2d
                    .as_ref()
                    .and_then(|_| project(pose, &cam).ok())
                    .map(|p| pose2d_rows(&p)),
                rel_pose3d: record
                    .rel_pose3d
                    .as_ref()
                    .map(|_| pose3d_rows(&pose.root_relative())),
                pseudo3d: None,
                stage1_residual: None,
                stage2_residual: None,
                stage1_iterations: None,
                stage2_iterations: None,
                converged: None,
                ..record.clone()
            });
            log.succeeded += 1;
        }
    }
    write_records(output, &out)?;
    write_manifest("augment", Some(seed), &[input], &[output])?;
    log.finish("augment")
}

#[derive(Serialize)]
struct KcsPart {
    part: &'static str,
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct KcsRecord<'a> {
    id: &'a str,
    normalize: bool,
    parts: Vec<KcsPart>,
}

pub fn kcs(input: &Path, output: &Path, normalize: bool) -> Result<()> {
    let records = read_records(input)?;
    let skel = Skeleton::canonical();
    let mut log = SkipLog::new();
    let mut lines = Vec::new();
    for record in &records {
        let Some(pose) = record.any_pose3d().or_else(|| record.rel_pose()) else {
            log.skip(&record.id, "no 3D joints");
            continue;
        };
        let features = part_kcs_with(&pose, &skel, normalize);
        let parts = PARTS
            .iter()
            .zip(features.matrices.iter())
            .map(|(&part, m)| KcsPart {
                part: part_label(part),
                matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
            })
            .collect();
        lines.push(serde_json::to_string(&KcsRecord {
            id: &record.id,
            normalize,
            parts,
        })?);
        log.succeeded += 1;
    }
    std::fs::write(output, lines.join("\n") + "\n")
        .with_context(|| format!("cannot write {}", output.display()))?;
    write_manifest("kcs", None, &[input], &[output])?;
    log.finish("kcs")
}

#[derive(Serialize)]
struct EvalRow<'a> {
    id: &'a str,
    mpjpe_mm: f64,
    pa_mpjpe_mm: f64,
    pck_percent: f64,
    auc: f64,
}

pub fn eval(
    pred: &Path,
    gt: &Path,
    threshold_mm: f64,
    use_pseudo: bool,
    report_csv: &Path,
) -> Result<()> {
    let pred_records = read_records(pred)?;
    let gt_records = read_records(gt)?;
    let mut log = SkipLog::new();
    let mut rows = Vec::new();
    for (p, g) in pred_records.iter().zip(gt_records.iter()) {
        let pred_pose = if use_pseudo {
            let mut record = p.clone();
            record.joints3d = None;
            record.any_pose3d() // now resolves to pseudo3d only
        } else {
            p.any_pose3d()
        };
        let (Some(pp), Some(gp)) = (pred_pose, g.any_pose3d()) else {
            log.skip(&p.id, "missing 3D joints on one side");
            continue;
        };
        match evaluate(&pp, &gp, threshold_mm) {
            Ok(report) => {
                rows.push(EvalRow {
                    id: &p.id,
                    mpjpe_mm: report.mpjpe_mm,
                    pa_mpjpe_mm: report.pa_mpjpe_mm,
                    pck_percent: report.pck_percent,
                    auc: report.auc,
                });
                log.succeeded += 1;
            }
            Err(err) => log.skip(&p.id, err),
        }
    }
    let mut writer = csv::Writer::from_path(report_csv)
        .with_context(|| format!("cannot write {}", report_csv.display()))?;
    let n = rows.len().max(1) as f64;
    let mean = EvalRow {
        id: "mean",
        mpjpe_mm: rows.iter().map(|r| r.mpjpe_mm).sum::<f64>() / n,
        pa_mpjpe_mm: rows.iter().map(|r| r.pa_mpjpe_mm).sum::<f64>() / n,
        pck_percent: rows.iter().map(|r| r.pck_percent).sum::<f64>() / n,
        auc: rows.iter().map(|r| r.auc).sum::<f64>() / n,
    };
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.serialize(&mean)?;
    writer.flush()?;
    write_manifest("eval", None, &[pred, gt], &[report_csv])?;
    log.finish("eval")
}

pub fn sim_camera(input: &Path, output: &Path, height_m: f64, depression_deg: f64) -> Result<()> {
    let records = read_records(input)?;
    let mut log = SkipLog::new();
    let mut out = Vec::new();
    for record in &records {
        let Some(pose) = record.pose3d() else {
            log.skip(&record.id, "missing joints3d");
            continue;
        };
        let moved = virtual_camera(&pose, height_m, depression_deg);
        let cam = record.camera.to_intrinsics()?;
        out.push(DatasetRecord {
            joints3d: Some(pose3d_rows(&moved)),
            joints2d: project(&moved, &cam).ok().map(|p| pose2d_rows(&p)),
            rel_pose3d: Some(pose3d_rows(&moved.root_relative())),
            pseudo3d: None,
            stage1_residual: None,
            stage2_residual: None,
            stage1_iterations: None,
            stage2_iterations: None,
            converged: None,
            ..record.clone()
        });
        log.succeeded += 1;
    }
    write_records(output, &out)?;
    write_manifest("sim-camera", None, &[input], &[output])?;
    log.finish("sim-camera")
}

#[derive(Serialize)]
struct CompareRow<'a> {
    method: &'a str,
    trial: String,
    aligned_mm: f64,
    baseline_mm: f64,
    reduction_percent: f64,
}

pub fn compare_align(
    report_csv: &Path,
    count: usize,
    trials: usize,
    seed: u64,
    height_m: f64,
    depression_deg: f64,
) -> Result<()> {
    if count == 0 {
        bail!("--count must be positive");
    }
    let skel = Skeleton::canonical();
    let templates = template_poses::<f64>();
    let config = SceneConfig::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Two sets with the same articulation statistics; the second is observed
    // from the elevated, pitched-down camera.
    let sample_set = |rng: &mut ChaCha8Rng| -> Result<Vec<Pose3D<f64>>> {
        (0..count)
            .map(|i| {
                sample_pose(rng, &skel, &templates[i % templates.len()], &config)
                    .map_err(Into::into)
            })
            .collect()
    };
    let set_a = sample_set(&mut rng)?;
    let set_b: Vec<Pose3D<f64>> = sample_set(&mut rng)?
        .iter()
        .map(|p| virtual_camera(p, height_m, depression_deg))
        .collect();

    let mut rows = Vec::new();
    for method in [AlignMethod::Kabsch, AlignMethod::HumanCentric] {
        let report =
            pairwise_alignment_experiment(&set_a, &set_b, method, trials, &mut rng, &skel)?;
        for (t, (aligned, baseline)) in report
            .trial_means_mm
            .iter()
            .zip(report.baseline_trial_means_mm.iter())
            .enumerate()
        {
            rows.push(CompareRow {
                method: method.label(),
                trial: t.to_string(),
                aligned_mm: *aligned,
                baseline_mm: *baseline,
                reduction_percent: (1.0 - aligned / baseline) * 100.0,
            });
        }
        rows.push(CompareRow {
            method: method.label(),
            trial: "average".into(),
            aligned_mm: report.average_mm,
            baseline_mm: report.baseline_average_mm,
            reduction_percent: report.reduction_percent,
        });
    }
    let mut writer = csv::Writer::from_path(report_csv)
        .with_context(|| format!("cannot write {}", report_csv.display()))?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    write_manifest("compare-align", Some(seed), &[], &[report_csv])
}

/// Parses "a,b,..." into exactly N floats.
pub fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated values, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (i, part) in parts.iter().enumerate() {
        out[i] = part
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number {part:?}: {e}"))?;
    }
    Ok(out)
}
