use crate::error::{Error, Result};
use crate::plane::Plane;

pub const MIN_FRAME_SIDE: usize = 16;

/// A grayscale frame with intensities normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    plane: Plane,
}

impl Frame {
    /// Validates dimensions and intensity range.
    pub fn new(plane: Plane) -> Result<Self> {
        let (w, h) = plane.dims();
        if w < MIN_FRAME_SIDE || h < MIN_FRAME_SIDE {
            return Err(Error::InvalidFrame(format!(
                "{w}x{h} is below the {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE} minimum"
            )));
        }
        if let Some(i) = plane
            .data()
            .iter()
            .position(|v| !v.is_finite() || !(0.0..=1.0).contains(v))
        {
            return Err(Error::InvalidFrame(format!(
                "intensity {} at pixel ({}, {}) is outside [0, 1]",
                plane.data()[i],
                i % w,
                i / w
            )));
        }
        Ok(Self { plane })
    }

    pub fn from_fn(width: usize, height: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(Plane::from_fn(width, height, f))
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.plane.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.plane.height()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.plane.get(x, y)
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn into_plane(self) -> Plane {
        self.plane
    }

    pub fn flipped_horizontal(&self) -> Frame {
        Frame {
            plane: self.plane.flipped_horizontal(),
        }
    }
}

/// Frames ordered in time, all with the same dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    source_ids: Vec<String>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, source_ids: Vec<String>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::SequenceTooShort {
                found: frames.len(),
            });
        }
        if source_ids.len() != frames.len() {
            return Err(Error::InvalidParams(format!(
                "{} source ids for {} frames",
                source_ids.len(),
                frames.len()
            )));
        }
        let expected = frames[0].dims();
        for (frame, id) in frames.iter().zip(&source_ids) {
            if frame.dims() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: frame.dims(),
                    context: Some(id.clone()),
                });
            }
        }
        Ok(Self { frames, source_ids })
    }

    /// Builds a sequence with ids `frame_000`, `frame_001`, ...
    pub fn from_frames(frames: Vec<Frame>) -> Result<Self> {
        let ids = (0..frames.len()).map(|i| format!("frame_{i:03}")).collect();
        Self::new(frames, ids)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn source_ids(&self) -> &[String] {
        &self.source_ids
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn flipped_horizontal(&self) -> FrameSequence {
        FrameSequence {
            frames: self.frames.iter().map(Frame::flipped_horizontal).collect(),
            source_ids: self.source_ids.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<Frame>, Vec<String>) {
        (self.frames, self.source_ids)
    }
}
