//! Deterministic synthetic faces for tests and demos.
//!
//! A face is a mirror-symmetric textured ellipse with a 68-point landmark
//! layout. Optional motion moves small patches vertically inside one band,
//! on one or both sides of the midline. No RNG is involved: texture comes
//! from a hashed value-noise lattice keyed by `texture_seed`.

use crate::frame::{Frame, FrameSequence};
use crate::landmarks::{LandmarkSet, Point};
use crate::regions::{Region, Side};

/// Offsets from the face center for the image-left half, at scale 1.
/// Midline points have `dx = 0`.
const JAW_LEFT: [(f64, f64); 9] = [
    (-40.0, -10.0),
    (-39.0, 0.0),
    (-38.0, 10.0),
    (-36.0, 19.0),
    (-32.0, 28.0),
    (-26.0, 35.0),
    (-19.0, 40.0),
    (-10.0, 44.0),
    (0.0, 45.0),
];
const BROW_LEFT: [(f64, f64); 5] = [
    (-33.0, -24.0),
    (-27.0, -29.0),
    (-20.0, -31.0),
    (-13.0, -30.0),
    (-6.0, -27.0),
];
const NOSE: [(f64, f64); 9] = [
    (0.0, -22.0),
    (0.0, -15.0),
    (0.0, -8.0),
    (0.0, -1.0),
    (-8.0, 6.0),
    (-4.0, 7.0),
    (0.0, 8.0),
    (4.0, 7.0),
    (8.0, 6.0),
];
const EYE_LEFT: [(f64, f64); 6] = [
    (-28.0, -17.0),
    (-23.0, -20.0),
    (-17.0, -20.0),
    (-12.0, -16.0),
    (-17.0, -14.0),
    (-23.0, -14.0),
];
const MOUTH: [(f64, f64); 20] = [
    (-17.0, 22.0),
    (-11.0, 19.0),
    (-5.0, 17.0),
    (0.0, 18.0),
    (5.0, 17.0),
    (11.0, 19.0),
    (17.0, 22.0),
    (11.0, 27.0),
    (5.0, 29.0),
    (0.0, 30.0),
    (-5.0, 29.0),
    (-11.0, 27.0),
    (-13.0, 22.0),
    (-5.0, 21.0),
    (0.0, 21.0),
    (5.0, 21.0),
    (13.0, 22.0),
    (5.0, 24.0),
    (0.0, 24.0),
    (-5.0, 24.0),
];

fn template() -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(68);
    pts.extend_from_slice(&JAW_LEFT);
    pts.extend(JAW_LEFT[..8].iter().rev().map(|&(x, y)| (-x, y)));
    pts.extend_from_slice(&BROW_LEFT);
    pts.extend(BROW_LEFT.iter().rev().map(|&(x, y)| (-x, y)));
    pts.extend_from_slice(&NOSE);
    pts.extend_from_slice(&EYE_LEFT);
    // 42..47 mirror 39, 38, 37, 36, 41, 40
    pts.extend([3, 2, 1, 0, 5, 4].iter().map(|&i| {
        let (x, y) = EYE_LEFT[i];
        (-x, y)
    }));
    pts.extend_from_slice(&MOUTH);
    pts
}

/// Landmarks symmetric about the vertical line `x = cx`.
pub fn symmetric_landmarks(cx: f64, cy: f64, scale: f64) -> LandmarkSet {
    let pts = template()
        .into_iter()
        .map(|(dx, dy)| Point::new(cx + scale * dx, cy + scale * dy))
        .collect();
    LandmarkSet::new(pts).expect("template is a valid landmark set")
}

/// Patch centers (left side, scale 1) and radius used for band motion.
fn motion_anchor(region: Region) -> ((f64, f64), f64) {
    match region {
        Region::Forehead => ((-18.0, -47.0), 5.0),
        Region::Eye => ((-21.0, -19.0), 4.0),
        Region::Cheek => ((-21.0, 14.0), 6.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFace {
    pub width: usize,
    pub height: usize,
    /// Face center; defaults to the frame's central column so the pixel
    /// grid mirrors onto itself.
    pub center: (f64, f64),
    pub scale: f64,
    pub frames: usize,
    pub texture_seed: u64,
    /// Band containing motion, if any.
    pub motion: Option<Region>,
    /// Restricts motion to one side; `None` moves both sides symmetrically.
    pub motion_side: Option<Side>,
    /// Peak displacement between consecutive frames, in pixels.
    pub step: f64,
}

impl Default for SyntheticFace {
    fn default() -> Self {
        Self::new(160, 160)
    }
}

impl SyntheticFace {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            center: ((width as f64 - 1.0) / 2.0, height as f64 / 2.0),
            scale: 1.0,
            frames: 6,
            texture_seed: 1,
            motion: None,
            motion_side: None,
            step: 1.0,
        }
    }

    pub fn landmarks(&self) -> LandmarkSet {
        symmetric_landmarks(self.center.0, self.center.1, self.scale)
    }

    fn texture(&self, x: f64, y: f64) -> f64 {
        let (cx, cy) = self.center;
        let s = self.scale;
        let dx = (x - cx).abs() / s;
        let dy = (y - cy) / s;

        let coarse = value_noise(dx / 6.0, dy / 6.0, self.texture_seed);
        let fine = value_noise(dx / 3.0, dy / 3.0, self.texture_seed.wrapping_add(0x9e37));
        let skin = 0.35 + 0.25 * coarse + 0.15 * fine;

        // Ellipse slightly taller than the landmark box, soft 3 px edge.
        let ex = dx / 46.0;
        let ey = (dy + 6.0) / 64.0;
        let r = (ex * ex + ey * ey).sqrt();
        let inside = 1.0 - smoothstep(((r - 1.0) * 46.0 / 3.0 + 0.5).clamp(0.0, 1.0));
        0.2 + (skin - 0.2) * inside
    }

    fn displacement(&self, x: f64, y: f64) -> f64 {
        let Some(region) = self.motion else {
            return 0.0;
        };
        let ((ax, ay), radius) = motion_anchor(region);
        let (cx, cy) = self.center;
        let s = self.scale;
        let (py, r) = (cy + ay * s, radius * s);
        let bump = |px: f64| {
            let d2 = (x - px).powi(2) + (y - py).powi(2);
            (-d2 / (2.0 * r * r)).exp()
        };
        let left = bump(cx + ax * s);
        let right = bump(cx - ax * s);
        match self.motion_side {
            None => left + right,
            Some(Side::Left) => left,
            Some(Side::Right) => right,
        }
    }

    pub fn frame(&self, t: usize) -> Frame {
        let amount = self.step * t as f64;
        Frame::from_fn(self.width, self.height, |x, y| {
            let (x, y) = (x as f64, y as f64);
            let shift = amount * self.displacement(x, y);
            self.texture(x, y - shift)
        })
        .expect("synthetic intensities stay in [0, 1]")
    }

    pub fn sequence(&self) -> FrameSequence {
        FrameSequence::from_frames((0..self.frames).map(|t| self.frame(t)).collect())
            .expect("synthetic sequence is valid")
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn hash01(ix: i64, iy: i64, seed: u64) -> f64 {
    let mut z = seed
        ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Smoothly interpolated lattice noise in `[0, 1]`.
fn value_noise(x: f64, y: f64, seed: u64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (smoothstep(x - x0), smoothstep(y - y0));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let v00 = hash01(ix, iy, seed);
    let v10 = hash01(ix + 1, iy, seed);
    let v01 = hash01(ix, iy + 1, seed);
    let v11 = hash01(ix + 1, iy + 1, seed);
    let top = v00 + (v10 - v00) * fx;
    let bottom = v01 + (v11 - v01) * fx;
    top + (bottom - top) * fy
}
