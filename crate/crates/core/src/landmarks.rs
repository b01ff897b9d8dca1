//! 68-point facial landmarks in the iBUG / 300-W index convention.
//!
//! Index groups: jaw 0–16, eyebrows 17–26, nose bridge 27–30, lower nose
//! 31–35, eyes 36–47, mouth 48–67. Points are in pixel coordinates with
//! `x` rightward and `y` downward.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LANDMARK_COUNT: usize = 68;

pub const JAW: Range<usize> = 0..17;
pub const EYEBROWS: Range<usize> = 17..27;
pub const NOSE_BRIDGE: Range<usize> = 27..31;
pub const EYES: Range<usize> = 36..48;
pub const MOUTH: Range<usize> = 48..68;
pub const CHIN: usize = 8;
pub const NOSE_TIP: usize = 30;

/// Index each point maps to when the face is mirrored left-right.
const MIRROR_INDEX: [usize; LANDMARK_COUNT] = [
    16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0, // jaw
    26, 25, 24, 23, 22, 21, 20, 19, 18, 17, // eyebrows
    27, 28, 29, 30, // nose bridge
    35, 34, 33, 32, 31, // lower nose
    45, 44, 43, 42, 47, 46, // right eye <-> left eye
    39, 38, 37, 36, 41, 40, //
    54, 53, 52, 51, 50, 49, 48, // outer lip, upper
    59, 58, 57, 56, 55, // outer lip, lower
    64, 63, 62, 61, 60, // inner lip, upper
    67, 66, 65, // inner lip, lower
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: [Point; LANDMARK_COUNT],
}

impl LandmarkSet {
    /// Checks the point count, finiteness, and that the nose bridge runs
    /// strictly downward.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let points: [Point; LANDMARK_COUNT] = points
            .try_into()
            .map_err(|p: Vec<Point>| Error::LandmarkCountError { found: p.len() })?;
        if let Some(i) = points
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidLandmarks(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        for i in NOSE_BRIDGE.start..NOSE_BRIDGE.end - 1 {
            if points[i + 1].y <= points[i].y {
                return Err(Error::InvalidLandmarks(format!(
                    "nose bridge points {} and {} are not in increasing y order",
                    i,
                    i + 1
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point; LANDMARK_COUNT] {
        &self.points
    }

    #[inline]
    pub fn point(&self, index: usize) -> Point {
        self.points[index]
    }

    pub fn group(&self, range: Range<usize>) -> &[Point] {
        &self.points[range]
    }

    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        for (index, p) in self.points.iter().enumerate() {
            if p.x < 0.0 || p.y < 0.0 || p.x > (width - 1) as f64 || p.y > (height - 1) as f64 {
                return Err(Error::LandmarkOutOfBounds {
                    index,
                    x: p.x,
                    y: p.y,
                    width,
                    height,
                });
            }
        }
        Ok(())
    }

    /// Landmarks of the left-right mirrored image of width `frame_width`.
    ///
    /// Coordinates map as `x -> frame_width - 1 - x` and indices are permuted
    /// so that, e.g., the mirrored right eye corner is again labelled as a
    /// right eye corner.
    pub fn mirrored(&self, frame_width: usize) -> LandmarkSet {
        let w = (frame_width - 1) as f64;
        let mut points = self.points;
        for (i, p) in self.points.iter().enumerate() {
            points[MIRROR_INDEX[i]] = Point::new(w - p.x, p.y);
        }
        LandmarkSet { points }
    }

    pub fn scaled(&self, factor: f64) -> LandmarkSet {
        let mut points = self.points;
        for p in &mut points {
            p.x *= factor;
            p.y *= factor;
        }
        LandmarkSet { points }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> LandmarkSet {
        let mut points = self.points;
        for p in &mut points {
            p.x += dx;
            p.y += dy;
        }
        LandmarkSet { points }
    }
}
