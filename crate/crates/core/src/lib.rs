//! Facial motion asymmetry from frontal-face frame sequences.
//!
//! The pipeline crops the face using first-frame landmarks, estimates
//! dense optical flow between consecutive frames, thresholds the flow
//! magnitude against the per-frame crop mean, and compares the mean motion
//! of the left and right halves of three horizontal face bands.
//!
//! ```no_run
//! use facesym_core::{media_io, score_sequence, FlowParams, RegionConfig, ScoreConfig};
//! use std::path::Path;
//!
//! let seq = media_io::load_frame_sequence(Path::new("frames"), "*.png")?;
//! let lm = media_io::parse_landmarks(Path::new("landmarks.json"))?;
//! let report = score_sequence(
//!     &seq,
//!     &lm,
//!     &FlowParams::default(),
//!     &ScoreConfig::default(),
//!     &RegionConfig::default(),
//! )?;
//! print!("{}", report.summary_table());
//! # Ok::<(), facesym_core::Error>(())
//! ```

pub mod error;
pub mod flow;
pub mod frame;
pub mod landmarks;
pub mod media_io;
pub mod overlay;
pub mod plane;
pub mod regions;
pub mod scoring;
pub mod synth;
pub mod synthetic;

pub use error::{Error, Result, Stage};
pub use flow::{estimate_flow_pair, flow_magnitude, FlowEstimator, FlowField, FlowParams, MagnitudeMap};
pub use frame::{Frame, FrameSequence};
pub use landmarks::{LandmarkSet, Point};
pub use overlay::{render_overlay, OverlaySpec};
pub use plane::Plane;
pub use regions::{
    build_regions, compute_midline, face_crop_from_landmarks, CropRect, Region, RegionConfig,
    RegionSet, Side,
};
pub use scoring::{
    analyze_sequence, calibrate_lambda, movement_score, score_sequence, symmetry_score,
    threshold_magnitudes, ScoreConfig, SequenceAnalysis, SymmetryReport,
};
pub use synth::{synthesize_asymmetric, SynthConfig};
