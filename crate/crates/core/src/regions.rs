//! Face crop, vertical midline and the six left/right region masks.
//!
//! Geometry is derived once from the first frame's landmarks and reused for
//! the whole sequence. Regions are axis-aligned horizontal bands over the
//! crop (forehead, eye, cheek including the mouth), each cut at the midline.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmarks::{LandmarkSet, Point, CHIN, EYEBROWS, EYES, JAW, MOUTH, NOSE_BRIDGE};

pub const MIN_CROP_SIDE: usize = 32;

// Float slack so margins like 0.45 * 120 snap to the integer they denote.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Forehead,
    Eye,
    Cheek,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Forehead, Region::Eye, Region::Cheek];

    pub fn name(self) -> &'static str {
        match self {
            Region::Forehead => "forehead",
            Region::Eye => "eye",
            Region::Cheek => "cheek",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Image side: `Left` is the image's left (smaller x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    fn index(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::InvalidParams(format!(
                "side must be left or right, got {other:?}"
            ))),
        }
    }
}

/// Pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl CropRect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }
}

/// Fractional margins for the crop and the eye band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    /// Horizontal padding on each side, as a fraction of landmark box width.
    pub crop_side: f64,
    /// Headroom above the landmarks, as a fraction of landmark box height.
    pub crop_top: f64,
    /// Padding below the landmarks, as a fraction of landmark box height.
    pub crop_bottom: f64,
    /// Extension of the eye band below the lowest eye point, as a fraction
    /// of the eye band height.
    pub eye_margin: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            crop_side: 0.20,
            crop_top: 0.45,
            crop_bottom: 0.05,
            eye_margin: 0.15,
        }
    }
}

impl RegionConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.crop_side, self.crop_top, self.crop_bottom, self.eye_margin];
        if all.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidParams(format!(
                "region margins must be finite and nonnegative: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParams(format!("region config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Boolean pixel mask over the crop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "mask length mismatch");
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn from_rect(width: usize, height: usize, cols: Range<usize>, rows: Range<usize>) -> Self {
        let mut bits = vec![false; width * height];
        for y in rows {
            for x in cols.clone() {
                bits[y * width + x] = true;
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn flipped_horizontal(&self) -> Mask {
        let mut bits = Vec::with_capacity(self.bits.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                bits.push(self.contains(x, y));
            }
        }
        Mask::new(self.width, self.height, bits)
    }
}

/// A region band in crop coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub region: Region,
    pub rows: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    pub crop: CropRect,
    /// Subpixel midline column in crop coordinates.
    pub midline_x: f64,
    pub bands: [Band; 3],
    masks: [[Mask; 2]; 3],
    pixel_counts: [[usize; 2]; 3],
}

impl RegionSet {
    pub fn mask(&self, region: Region, side: Side) -> &Mask {
        &self.masks[region.index()][side.index()]
    }

    pub fn pixel_count(&self, region: Region, side: Side) -> usize {
        self.pixel_counts[region.index()][side.index()]
    }

    pub fn band(&self, region: Region) -> &Band {
        &self.bands[region.index()]
    }

    /// Number of crop columns on the left of the midline.
    pub fn left_columns(&self) -> usize {
        split_column(self.midline_x, self.crop.width())
    }
}

/// First column at or right of `midline_x`, clipped to `[0, width]`.
fn split_column(midline_x: f64, width: usize) -> usize {
    if midline_x <= 0.0 {
        0
    } else {
        (midline_x.ceil() as usize).min(width)
    }
}

fn bounds(points: &[Point]) -> (f64, f64, f64, f64) {
    points.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
    )
}

/// Landmark bounding box padded by the configured margins and clamped to
/// the frame.
pub fn face_crop_from_landmarks(
    lm: &LandmarkSet,
    frame_w: usize,
    frame_h: usize,
    config: &RegionConfig,
) -> Result<CropRect> {
    config.validate()?;
    lm.check_bounds(frame_w, frame_h)?;
    let (min_x, min_y, max_x, max_y) = bounds(lm.points());
    let (bw, bh) = (max_x - min_x, max_y - min_y);

    let lo = |v: f64| (v + SNAP).floor().max(0.0) as usize;
    let hi = |v: f64, limit: usize| ((v - SNAP).ceil().max(0.0) as usize).min(limit);

    let crop = CropRect {
        x0: lo(min_x - config.crop_side * bw),
        y0: lo(min_y - config.crop_top * bh),
        x1: hi(max_x + config.crop_side * bw, frame_w),
        y1: hi(max_y + config.crop_bottom * bh, frame_h),
    };
    if crop.x1 <= crop.x0
        || crop.y1 <= crop.y0
        || crop.width() < MIN_CROP_SIDE
        || crop.height() < MIN_CROP_SIDE
    {
        return Err(Error::CropTooSmall {
            width: crop.x1.saturating_sub(crop.x0),
            height: crop.y1.saturating_sub(crop.y0),
        });
    }
    Ok(crop)
}

/// Midline column in frame coordinates: mean x of the nose bridge and chin.
pub fn compute_midline(lm: &LandmarkSet) -> f64 {
    let xs: Vec<f64> = lm
        .group(NOSE_BRIDGE)
        .iter()
        .chain(std::iter::once(&lm.point(CHIN)))
        .map(|p| p.x)
        .collect();
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn build_regions(lm: &LandmarkSet, crop: CropRect, config: &RegionConfig) -> Result<RegionSet> {
    config.validate()?;
    let (cw, ch) = (crop.width(), crop.height());
    let local = lm.translated(-(crop.x0 as f64), -(crop.y0 as f64));
    local.check_bounds(cw, ch)?;

    let min_y = |r: Range<usize>| local.group(r).iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_y = |r: Range<usize>| {
        local
            .group(r)
            .iter()
            .map(|p| p.y)
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let brow_top = min_y(EYEBROWS);
    let eye_low = max_y(EYES);
    let eye_bottom = eye_low + config.eye_margin * (eye_low - brow_top).max(0.0);
    let cheek_bottom = max_y(JAW).max(max_y(MOUTH));

    let row = |v: f64| (v.round().max(0.0) as usize).min(ch);
    let edges = [0, row(brow_top), row(eye_bottom), row(cheek_bottom)];

    let midline_x = compute_midline(lm) - crop.x0 as f64;
    let split = split_column(midline_x, cw);

    let mut bands: Vec<Band> = Vec::with_capacity(3);
    let mut masks: Vec<[Mask; 2]> = Vec::with_capacity(3);
    let mut pixel_counts = [[0; 2]; 3];
    for (i, region) in Region::ALL.into_iter().enumerate() {
        let rows = edges[i]..edges[i + 1].max(edges[i]);
        if rows.is_empty() || split == 0 || split == cw {
            return Err(Error::DegenerateRegion(Some(region)));
        }
        let left = Mask::from_rect(cw, ch, 0..split, rows.clone());
        let right = Mask::from_rect(cw, ch, split..cw, rows.clone());
        pixel_counts[i] = [left.count(), right.count()];
        masks.push([left, right]);
        bands.push(Band { region, rows });
    }

    Ok(RegionSet {
        crop,
        midline_x,
        bands: bands.try_into().expect("three bands"),
        masks: masks.try_into().expect("three mask pairs"),
        pixel_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::symmetric_landmarks;

    fn box_landmarks(x0: f64, y0: f64, x1: f64, y1: f64) -> LandmarkSet {
        // Points spread over the box with the nose bridge descending.
        let pts = (0..68)
            .map(|i| {
                let t = i as f64 / 67.0;
                Point::new(x0 + (x1 - x0) * t, y0 + (y1 - y0) * ((i * 37 % 68) as f64 / 67.0))
            })
            .collect::<Vec<_>>();
        let mut pts = pts;
        pts[0] = Point::new(x0, y0);
        pts[1] = Point::new(x1, y1);
        for (k, i) in (27..31).enumerate() {
            pts[i] = Point::new((x0 + x1) / 2.0, y0 + 10.0 + 5.0 * k as f64);
        }
        LandmarkSet::new(pts).unwrap()
    }

    #[test]
    fn crop_margins_match_arithmetic() {
        let lm = box_landmarks(100.0, 100.0, 200.0, 220.0);
        let crop = face_crop_from_landmarks(&lm, 400, 400, &RegionConfig::default()).unwrap();
        assert_eq!(
            crop,
            CropRect {
                x0: 80,
                y0: 46,
                x1: 220,
                y1: 226
            }
        );
    }

    #[test]
    fn crop_clamps_to_frame() {
        let lm = box_landmarks(0.0, 0.0, 99.0, 99.0);
        let crop = face_crop_from_landmarks(&lm, 100, 100, &RegionConfig::default()).unwrap();
        assert_eq!(
            crop,
            CropRect {
                x0: 0,
                y0: 0,
                x1: 100,
                y1: 100
            }
        );
    }

    #[test]
    fn tiny_face_is_rejected() {
        let lm = box_landmarks(50.0, 50.0, 60.0, 60.0);
        assert!(matches!(
            face_crop_from_landmarks(&lm, 100, 100, &RegionConfig::default()),
            Err(Error::CropTooSmall { .. })
        ));
    }

    #[test]
    fn out_of_frame_landmark_is_rejected() {
        let lm = box_landmarks(50.0, 50.0, 120.0, 90.0);
        assert!(matches!(
            face_crop_from_landmarks(&lm, 100, 100, &RegionConfig::default()),
            Err(Error::LandmarkOutOfBounds { .. })
        ));
    }

    #[test]
    fn midline_is_mean_of_bridge_and_chin() {
        let mut pts: Vec<Point> = (0..68).map(|i| Point::new(10.0, i as f64)).collect();
        for (i, x) in [(27, 63.0), (28, 64.0), (29, 65.0), (30, 64.0), (8, 64.0)] {
            pts[i].x = x;
        }
        let lm = LandmarkSet::new(pts).unwrap();
        assert_eq!(compute_midline(&lm), 64.0);
        assert_eq!(compute_midline(&symmetric_landmarks(64.0, 64.0, 1.0)), 64.0);
    }

    #[test]
    fn symmetric_face_splits_evenly() {
        let lm = symmetric_landmarks(80.0, 80.0, 1.0);
        let cfg = RegionConfig::default();
        let crop = face_crop_from_landmarks(&lm, 160, 160, &cfg).unwrap();
        let rs = build_regions(&lm, crop, &cfg).unwrap();
        for r in Region::ALL {
            let (l, rr) = (rs.pixel_count(r, Side::Left), rs.pixel_count(r, Side::Right));
            assert!(l.abs_diff(rr) <= crop.height(), "{r}: {l} vs {rr}");
            assert!(l > 0 && rr > 0);
        }
    }

    #[test]
    fn masks_are_disjoint_and_split_at_midline() {
        let lm = symmetric_landmarks(80.0, 80.0, 1.0);
        let cfg = RegionConfig::default();
        let crop = face_crop_from_landmarks(&lm, 160, 160, &cfg).unwrap();
        let rs = build_regions(&lm, crop, &cfg).unwrap();
        for side in Side::BOTH {
            for y in 0..crop.height() {
                for x in 0..crop.width() {
                    let hits = Region::ALL
                        .iter()
                        .filter(|&&r| rs.mask(r, side).contains(x, y))
                        .count();
                    assert!(hits <= 1);
                    if hits == 1 {
                        match side {
                            Side::Left => assert!((x as f64) < rs.midline_x),
                            Side::Right => assert!((x as f64) >= rs.midline_x),
                        }
                    }
                }
            }
            for r in Region::ALL {
                assert_eq!(rs.mask(r, side).count(), rs.pixel_count(r, side));
            }
        }
    }

    #[test]
    fn eyebrow_at_crop_top_degenerates_forehead() {
        let lm = symmetric_landmarks(80.0, 80.0, 1.0);
        let cfg = RegionConfig::default();
        let mut crop = face_crop_from_landmarks(&lm, 160, 160, &cfg).unwrap();
        let brow_top = lm
            .group(EYEBROWS)
            .iter()
            .map(|p| p.y)
            .fold(f64::INFINITY, f64::min);
        crop.y0 = brow_top as usize;
        assert!(brow_top.fract() == 0.0);
        assert!(matches!(
            build_regions(&lm, crop, &cfg),
            Err(Error::DegenerateRegion(Some(Region::Forehead)))
        ));
    }

    #[test]
    fn mirrored_landmarks_give_mirrored_masks() {
        // Midline at a half-integer crop column.
        let frame_w = 160;
        let lm = symmetric_landmarks(79.5, 80.0, 1.0);
        let cfg = RegionConfig::default();
        let crop = face_crop_from_landmarks(&lm, frame_w, 160, &cfg).unwrap();
        let rs = build_regions(&lm, crop, &cfg).unwrap();
        assert_eq!(rs.midline_x.fract(), 0.5);

        let mirrored = lm.mirrored(frame_w);
        let mcrop = CropRect {
            x0: frame_w - crop.x1,
            x1: frame_w - crop.x0,
            ..crop
        };
        let ms = build_regions(&mirrored, mcrop, &cfg).unwrap();
        for r in Region::ALL {
            assert_eq!(ms.mask(r, Side::Left), &rs.mask(r, Side::Right).flipped_horizontal());
            assert_eq!(ms.mask(r, Side::Right), &rs.mask(r, Side::Left).flipped_horizontal());
        }
    }

    #[test]
    fn region_config_json() {
        let cfg = RegionConfig::from_json(r#"{"eye_margin": 0.3}"#).unwrap();
        assert_eq!(cfg.eye_margin, 0.3);
        assert_eq!(cfg.crop_top, 0.45);
        assert!(RegionConfig::from_json(r#"{"eye_margin": -1}"#).is_err());
        assert!(RegionConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
