//! `poselign`: batch pipelines over JSONL pose datasets — synthetic data
//! generation, pseudo-labeling, cross-camera alignment, augmentation, KCS
//! features, metrics, and the virtual elevated camera.
//!
//! Every command writes a `<output>.manifest.json` capturing argv, seed and
//! input digests; rerunning with the manifest's argv reproduces the outputs
//! byte-for-byte.

mod commands;
mod manifest;
mod record;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use poselign_core::synthetic::AlignMethod;

use commands::parse_floats;
use record::CameraSpec;

#[derive(Parser)]
#[command(name = "poselign", version, about = "Cross-camera 3D pose alignment pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    HumanCentric,
    Kabsch,
}

impl From<MethodArg> for AlignMethod {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::HumanCentric => AlignMethod::HumanCentric,
            MethodArg::Kabsch => AlignMethod::Kabsch,
        }
    }
}

fn parse_camera(s: &str) -> Result<CameraSpec, String> {
    let [fx, fy, cx, cy] = parse_floats::<4>(s)?;
    Ok(CameraSpec { fx, fy, cx, cy })
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let [a, b] = parse_floats::<2>(s)?;
    Ok((a, b))
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with ground-truth 3D, projected 2D and camera.
    GenData {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pinhole intrinsics as fx,fy,cx,cy (pixels).
        #[arg(long, value_parser = parse_camera, default_value = "1000,1000,1000,1000")]
        camera: CameraSpec,
        /// Root depth range in meters, min,max.
        #[arg(long, value_parser = parse_pair, default_value = "3,6")]
        depth_range: (f64, f64),
        /// Per-bone perturbation rotation bound, radians.
        #[arg(long, default_value_t = 0.3)]
        perturb: f64,
        /// Image bounds the samples must project into, width,height (pixels).
        #[arg(long, value_parser = parse_pair, default_value = "2000,2000")]
        frame_size: (f64, f64),
    },
    /// Recover absolute 3D pseudo-labels from 2D poses and root-relative 3D.
    PseudoLabel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Initial root depth in meters.
        #[arg(long, default_value_t = 3.0)]
        init_depth: f64,
    },
    /// Align source poses into the target camera frame, record by record.
    Align {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::HumanCentric)]
        method: MethodArg,
        /// Optional per-record MPJPE report.
        #[arg(long)]
        report_csv: Option<PathBuf>,
    },
    /// Rotate and rescale bones across each sequence, root trajectory fixed.
    Augment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Total rotation angle range in radians, min,max.
        #[arg(long, value_parser = parse_pair, default_value = "-0.3490658503988659,0.3490658503988659")]
        angle_range: (f64, f64),
        /// Bone length ratio (lambda) range, min,max.
        #[arg(long, value_parser = parse_pair, default_value = "-0.15,0.15")]
        ratio_range: (f64, f64),
    },
    /// Part-aware Kinematic Chain Space features per record.
    Kcs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Normalize bone vectors before the Gram matrices.
        #[arg(long)]
        normalize: bool,
    },
    /// MPJPE / PA-MPJPE / PCK / AUC per record pair plus a mean row.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = 150.0)]
        threshold_mm: f64,
        /// Take predictions from the pseudo3d field instead of joints3d.
        #[arg(long)]
        use_pseudo: bool,
        #[arg(long)]
        report_csv: PathBuf,
    },
    /// Re-observe each pose from an elevated, pitched-down virtual camera.
    SimCamera {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Camera height above the original one, meters.
        #[arg(long, default_value_t = 2.0)]
        height: f64,
        /// Depression angle, degrees.
        #[arg(long, default_value_t = 45.0)]
        depression: f64,
    },
    /// Pairwise alignment experiment between two synthetic camera placements.
    CompareAlign {
        #[arg(long)]
        report_csv: PathBuf,
        /// Poses per set.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        height: f64,
        #[arg(long, default_value_t = 45.0)]
        depression: f64,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::GenData {
            output,
            count,
            seed,
            camera,
            depth_range,
            perturb,
            frame_size,
        } => commands::gen_data(&output, count, seed, camera, depth_range, perturb, frame_size),
        Command::PseudoLabel {
            input,
            output,
            init_depth,
        } => commands::pseudo_label(&input, &output, init_depth),
        Command::Align {
            source,
            target,
            output,
            method,
            report_csv,
        } => commands::align(&source, &target, &output, method.into(), report_csv.as_deref()),
        Command::Augment {
            input,
            output,
            seed,
            angle_range,
            ratio_range,
        } => commands::augment(&input, &output, seed, angle_range, ratio_range),
        Command::Kcs {
            input,
            output,
            normalize,
        } => commands::kcs(&input, &output, normalize),
        Command::Eval {
            pred,
            gt,
            threshold_mm,
            use_pseudo,
            report_csv,
        } => commands::eval(&pred, &gt, threshold_mm, use_pseudo, &report_csv),
        Command::SimCamera {
            input,
            output,
            height,
            depression,
        } => commands::sim_camera(&input, &output, height, depression),
        Command::CompareAlign {
            report_csv,
            count,
            trials,
            seed,
            height,
            depression,
        } => commands::compare_align(&report_csv, count, trials, seed, height, depression),
    }
}
