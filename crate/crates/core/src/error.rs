use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::regions::Region;

/// Pipeline stage an error surfaced in, used to label propagated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Landmarks,
    Crop,
    Regions,
    Flow,
    Scoring,
    Synthesis,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Load => "load",
            Stage::Landmarks => "landmarks",
            Stage::Crop => "crop",
            Stage::Regions => "regions",
            Stage::Flow => "flow",
            Stage::Scoring => "scoring",
            Stage::Synthesis => "synthesis",
            Stage::Write => "write",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("SequenceTooShort: found {found} frame(s), at least 2 are required")]
    SequenceTooShort { found: usize },

    #[error("DimensionMismatch: expected {expected:?}, found {found:?}{}", context_suffix(.context))]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
        context: Option<String>,
    },

    #[error("DecodeError({file}): {reason}")]
    DecodeError { file: PathBuf, reason: String },

    #[error("InvalidFrame: {0}")]
    InvalidFrame(String),

    #[error("LandmarkCountError({found}): expected 68 points")]
    LandmarkCountError { found: usize },

    #[error("InvalidLandmarks: {0}")]
    InvalidLandmarks(String),

    #[error("LandmarkOutOfBounds: point {index} at ({x}, {y}) lies outside {width}x{height}")]
    LandmarkOutOfBounds {
        index: usize,
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("CropTooSmall: {width}x{height} is below the 32x32 minimum")]
    CropTooSmall { width: usize, height: usize },

    #[error("DegenerateRegion({})", region_label(.0))]
    DegenerateRegion(Option<Region>),

    #[error("InvalidParams: {0}")]
    InvalidParams(String),

    #[error("CalibrationUnderdetermined: no sample with delta_v > 0 and expert_score < 1")]
    CalibrationUnderdetermined,

    #[error("WriteError({path}): {source}")]
    WriteError {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("Io({path}): {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

fn region_label(region: &Option<Region>) -> String {
    match region {
        Some(r) => r.to_string(),
        None => "empty mask".to_string(),
    }
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" ({c})"),
        None => String::new(),
    }
}

impl Error {
    /// Labels the error with `stage` unless it already carries a label.
    pub fn in_stage(self, stage: Stage) -> Error {
        match self {
            // keep the innermost label
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The underlying error with any stage labels removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
