//! Flow-magnitude heatmaps blended over grayscale frames.

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::MagnitudeMap;
use crate::frame::Frame;
use crate::regions::CropRect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlaySpec {
    /// Heatmap weight in the blend.
    pub alpha: f64,
}

impl Default for OverlaySpec {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

impl OverlaySpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }
}

/// Blue at 0, green at 0.5, red at 1, linear in between. Channels in [0, 1].
pub fn colormap(t: f64) -> [f64; 3] {
    let t = t.clamp(0.0, 1.0);
    if t < 0.5 {
        let s = t / 0.5;
        [0.0, s, 1.0 - s]
    } else {
        let s = (t - 0.5) / 0.5;
        [s, 1.0 - s, 0.0]
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn grayscale_rgb(frame: &Frame) -> RgbImage {
    RgbImage::from_fn(frame.width() as u32, frame.height() as u32, |x, y| {
        let g = to_u8(frame.get(x as usize, y as usize));
        Rgb([g, g, g])
    })
}

/// Renders `frame` as RGB with the crop tinted by `mag / max_magnitude`.
///
/// Pixels with zero magnitude, and everything outside the crop, keep the
/// plain gray value. `max_magnitude` is normally the maximum over the whole
/// sequence so colors are comparable between frames.
pub fn render_overlay(
    frame: &Frame,
    mag: &MagnitudeMap,
    crop: &CropRect,
    max_magnitude: f64,
    spec: &OverlaySpec,
) -> Result<RgbImage> {
    if (mag.width(), mag.height()) != (crop.width(), crop.height()) {
        return Err(Error::DimensionMismatch {
            expected: (crop.width(), crop.height()),
            found: (mag.width(), mag.height()),
            context: Some("overlay magnitudes vs crop".into()),
        });
    }
    if crop.x1 > frame.width() || crop.y1 > frame.height() {
        return Err(Error::InvalidParams("crop exceeds frame".into()));
    }
    let mut img = grayscale_rgb(frame);
    if max_magnitude <= 0.0 || spec.alpha == 0.0 {
        return Ok(img);
    }
    let a = spec.alpha;
    for cy in 0..crop.height() {
        for cx in 0..crop.width() {
            let m = mag.get(cx, cy);
            if m == 0.0 {
                continue;
            }
            let (x, y) = (crop.x0 + cx, crop.y0 + cy);
            let gray = frame.get(x, y);
            let color = colormap(m / max_magnitude);
            let px = color.map(|c| to_u8((1.0 - a) * gray + a * c));
            img.put_pixel(x as u32, y as u32, Rgb(px));
        }
    }
    Ok(img)
}

/// Largest magnitude across a sequence of maps.
pub fn sequence_max(mags: &[MagnitudeMap]) -> f64 {
    mags.iter().map(MagnitudeMap::max).fold(0.0, f64::max)
}
