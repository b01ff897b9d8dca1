//! Asymmetric sequences made from symmetric ones by freezing one half of
//! the face at its first-frame appearance.

use serde::{Deserialize, Serialize};

use crate::error::{Result, Stage, StageExt};
use crate::frame::{Frame, FrameSequence};
use crate::landmarks::LandmarkSet;
use crate::plane::Plane;
use crate::regions::{compute_midline, face_crop_from_landmarks, CropRect, RegionConfig, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub frozen_side: Side,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frozen_side: Side::Right,
        }
    }
}

/// Frame columns that are frozen; the seam column `⌈midline⌉` always
/// belongs to the frozen side.
pub fn frozen_columns(crop: &CropRect, midline_x: f64, side: Side) -> std::ops::Range<usize> {
    let seam = (midline_x.ceil().max(0.0) as usize).clamp(crop.x0, crop.x1);
    match side {
        Side::Right => seam..crop.x1,
        Side::Left => crop.x0..(seam + 1).min(crop.x1),
    }
}

pub fn synthesize_asymmetric(
    seq: &FrameSequence,
    lm: &LandmarkSet,
    config: &SynthConfig,
    region_config: &RegionConfig,
) -> Result<FrameSequence> {
    let (w, h) = seq.dims();
    let crop = face_crop_from_landmarks(lm, w, h, region_config).stage(Stage::Crop)?;
    let midline = compute_midline(lm);
    let cols = frozen_columns(&crop, midline, config.frozen_side);

    let first = &seq.frames()[0];
    let frames = seq
        .frames()
        .iter()
        .map(|frame| {
            let mut plane: Plane = frame.plane().clone();
            for y in crop.y0..crop.y1 {
                for x in cols.clone() {
                    plane.set(x, y, first.get(x, y));
                }
            }
            Frame::new(plane)
        })
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Synthesis)?;
    FrameSequence::new(frames, seq.source_ids().to_vec()).stage(Stage::Synthesis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seam_goes_to_frozen_side() {
        let crop = CropRect {
            x0: 10,
            y0: 0,
            x1: 50,
            y1: 40,
        };
        assert_eq!(frozen_columns(&crop, 29.5, Side::Right), 30..50);
        assert_eq!(frozen_columns(&crop, 29.5, Side::Left), 10..31);
        assert_eq!(frozen_columns(&crop, 30.0, Side::Right), 30..50);
    }
}
