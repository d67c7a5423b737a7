//! The canonical 16-joint human model and its bone/part structure.
//!
//! Joint layout (H3.6M-style, hip center as root):
//!
//! ```text
//!  0 hip         4 l_hip        8 neck         12 l_wrist
//!  1 r_hip       5 l_knee       9 head         13 r_shoulder
//!  2 r_knee      6 l_ankle     10 l_shoulder   14 r_elbow
//!  3 r_ankle     7 thorax      11 l_elbow      15 r_wrist
//! ```
//!
//! Bones are ordered by child joint; the five body parts partition the 15
//! bones into torso, left/right arm and left/right leg.

use crate::error::{PoseError, Result};

pub const JOINT_COUNT: usize = 16;
pub const BONE_COUNT: usize = 15;
pub const PART_COUNT: usize = 5;

pub const JOINT_NAMES: [&str; JOINT_COUNT] = [
    "hip",
    "r_hip",
    "r_knee",
    "r_ankle",
    "l_hip",
    "l_knee",
    "l_ankle",
    "thorax",
    "neck",
    "head",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
];

/// Body parts used by the part-aware KCS representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BodyPart {
    Torso,
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
}

pub const PARTS: [BodyPart; PART_COUNT] = [
    BodyPart::Torso,
    BodyPart::LeftArm,
    BodyPart::RightArm,
    BodyPart::LeftLeg,
    BodyPart::RightLeg,
];

/// Kinematic structure shared by every pose in this crate.
#[derive(Debug, Clone)]
pub struct Skeleton {
    joint_names: [&'static str; JOINT_COUNT],
    parents: [Option<usize>; JOINT_COUNT],
    bones: [(usize, usize); BONE_COUNT],
    part_bones: [Vec<usize>; PART_COUNT],
    right_hip: usize,
    left_hip: usize,
    thorax: usize,
}

impl Skeleton {
    /// The canonical 16-joint model.
    pub fn canonical() -> Self {
        let parents: [Option<usize>; JOINT_COUNT] = [
            None,     // hip (root)
            Some(0),  // r_hip
            Some(1),  // r_knee
            Some(2),  // r_ankle
            Some(0),  // l_hip
            Some(4),  // l_knee
            Some(5),  // l_ankle
            Some(0),  // thorax
            Some(7),  // neck
            Some(8),  // head
            Some(7),  // l_shoulder
            Some(10), // l_elbow
            Some(11), // l_wrist
            Some(7),  // r_shoulder
            Some(13), // r_elbow
            Some(14), // r_wrist
        ];
        let mut bones = [(0usize, 0usize); BONE_COUNT];
        for child in 1..JOINT_COUNT {
            bones[child - 1] = (parents[child].unwrap(), child);
        }
        let part_bones = [
            vec![0, 3, 6, 7, 8],  // torso: hip bones, hip->thorax, thorax->neck, neck->head
            vec![9, 10, 11],      // left arm
            vec![12, 13, 14],     // right arm
            vec![4, 5],           // left leg
            vec![1, 2],           // right leg
        ];
        let skel = Self {
            joint_names: JOINT_NAMES,
            parents,
            bones,
            part_bones,
            right_hip: 1,
            left_hip: 4,
            thorax: 7,
        };
        skel.validate().expect("canonical skeleton must be valid");
        skel
    }

    /// Checks the tree/partition invariants.
    pub fn validate(&self) -> Result<()> {
        if self.parents[0].is_some() {
            return Err(PoseError::InvalidParameter("joint 0 must be the root".into()));
        }
        for (j, &p) in self.parents.iter().enumerate().skip(1) {
            match p {
                Some(p) if p < j => {}
                _ => {
                    return Err(PoseError::InvalidParameter(format!(
                        "joint {j} must have a parent with smaller index"
                    )))
                }
            }
        }
        let mut seen = [false; BONE_COUNT];
        for part in &self.part_bones {
            for &b in part {
                if b >= BONE_COUNT || seen[b] {
                    return Err(PoseError::InvalidParameter(format!(
                        "bone {b} missing or assigned to multiple parts"
                    )));
                }
                seen[b] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(PoseError::InvalidParameter(
                "the 5 parts must cover all 15 bones".into(),
            ));
        }
        let idx = [self.right_hip, self.left_hip, self.thorax];
        if idx.iter().any(|&i| i >= JOINT_COUNT)
            || idx[0] == idx[1]
            || idx[0] == idx[2]
            || idx[1] == idx[2]
        {
            return Err(PoseError::InvalidParameter(
                "right-hip, left-hip, thorax indices must be distinct and valid".into(),
            ));
        }
        Ok(())
    }

    pub fn joint_names(&self) -> &[&'static str; JOINT_COUNT] {
        &self.joint_names
    }

    pub fn parent(&self, joint: usize) -> Option<usize> {
        self.parents[joint]
    }

    /// Ordered (parent, child) pairs.
    pub fn bones(&self) -> &[(usize, usize); BONE_COUNT] {
        &self.bones
    }

    /// Bone indices belonging to the given part.
    pub fn part_bones(&self, part: BodyPart) -> &[usize] {
        let i = PARTS.iter().position(|&p| p == part).unwrap();
        &self.part_bones[i]
    }

    pub fn right_hip(&self) -> usize {
        self.right_hip
    }

    pub fn left_hip(&self) -> usize {
        self.left_hip
    }

    pub fn thorax(&self) -> usize {
        self.thorax
    }
}

impl Default for Skeleton {
    fn default() -> Self {
        Self::canonical()
    }
}
