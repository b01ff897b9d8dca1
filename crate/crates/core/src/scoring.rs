//! Movement and symmetry scores.
//!
//! For a region mask with `M` pixels over a sequence of `N` frames, the
//! movement score is the thresholded flow magnitude summed over all mask
//! pixels and all `N − 1` consecutive frame pairs, divided by `M (N − 1)`:
//! the mean motion per pixel per frame. The symmetry score of a region is
//! `clamp(1 − λ |V_left − V_right|, 0, 1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage, StageExt};
use crate::flow::{flow_magnitude, FlowEstimator, FlowField, FlowParams, MagnitudeMap};
use crate::frame::{Frame, FrameSequence};
use crate::landmarks::LandmarkSet;
use crate::plane::Plane;
use crate::regions::{
    build_regions, face_crop_from_landmarks, CropRect, Mask, Region, RegionConfig, RegionSet, Side,
};

pub const DEFAULT_LAMBDA: f64 = 3.8;
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub lambda: f64,
    pub threshold_factor: f64,
    /// Scores are always clamped to `[0, 1]`; echoed in reports.
    #[serde(default = "always")]
    pub clamp: bool,
}

fn always() -> bool {
    true
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            clamp: true,
        }
    }
}

impl ScoreConfig {
    pub fn new(lambda: f64, threshold_factor: f64) -> Result<Self> {
        let cfg = Self {
            lambda,
            threshold_factor,
            clamp: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.threshold_factor.is_finite() && self.threshold_factor >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "threshold factor must be nonnegative, got {}",
                self.threshold_factor
            )));
        }
        if !self.clamp {
            return Err(Error::InvalidParams("clamping cannot be disabled".into()));
        }
        Ok(())
    }
}

/// Zeroes every magnitude strictly below `factor` times the map's mean.
pub fn threshold_magnitudes(mag: &MagnitudeMap, factor: f64) -> MagnitudeMap {
    let mean = mag.plane().mean();
    let cut = factor * mean;
    let data = mag
        .values()
        .iter()
        .map(|&m| if m < cut { 0.0 } else { m })
        .collect();
    MagnitudeMap::from_plane_unchecked(Plane::new(mag.width(), mag.height(), data))
}

/// Mean magnitude per mask pixel per frame pair.
///
/// `mags` holds one map per consecutive pair, so `frame_count` must be
/// `mags.len() + 1`.
pub fn movement_score(mags: &[MagnitudeMap], mask: &Mask, frame_count: usize) -> Result<f64> {
    if frame_count < 2 {
        return Err(Error::SequenceTooShort { found: frame_count });
    }
    if mags.len() != frame_count - 1 {
        return Err(Error::InvalidParams(format!(
            "{} magnitude maps for {frame_count} frames",
            mags.len()
        )));
    }
    let pixels = mask.count();
    if pixels == 0 {
        return Err(Error::DegenerateRegion(None));
    }
    let mut total = 0.0;
    for mag in mags {
        if (mag.width(), mag.height()) != (mask.width(), mask.height()) {
            return Err(Error::DimensionMismatch {
                expected: (mask.width(), mask.height()),
                found: (mag.width(), mag.height()),
                context: Some("magnitude map vs mask".into()),
            });
        }
        total += mag
            .values()
            .iter()
            .zip(mask.bits())
            .filter(|(_, &inside)| inside)
            .map(|(m, _)| m)
            .sum::<f64>();
    }
    Ok(total / (pixels as f64 * (frame_count - 1) as f64))
}

pub fn symmetry_score(v_left: f64, v_right: f64, lambda: f64) -> f64 {
    (1.0 - lambda * (v_left - v_right).abs()).clamp(0.0, 1.0)
}

/// Least-squares fit of `λ` to `(delta_v, expert_score)` pairs, using only
/// samples with `delta_v > 0`.
pub fn calibrate_lambda(samples: &[(f64, f64)]) -> Result<f64> {
    for &(d, e) in samples {
        if !d.is_finite() || d < 0.0 || !(0.0..=1.0).contains(&e) {
            return Err(Error::InvalidParams(format!(
                "sample ({d}, {e}) needs delta_v >= 0 and expert score in [0, 1]"
            )));
        }
    }
    if !samples.iter().any(|&(d, e)| d > 0.0 && e < 1.0) {
        return Err(Error::CalibrationUnderdetermined);
    }
    let (num, den) = samples
        .iter()
        .filter(|(d, _)| *d > 0.0)
        .fold((0.0, 0.0), |(n, s), &(d, e)| (n + d * (1.0 - e), s + d * d));
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionScore {
    pub region: Region,
    pub v_left: f64,
    pub v_right: f64,
    pub delta_v: f64,
    pub s_s: f64,
    pub m_left: usize,
    pub m_right: usize,
}

impl RegionScore {
    pub fn new(region: Region, v_left: f64, v_right: f64, m_left: usize, m_right: usize, lambda: f64) -> Self {
        Self {
            region,
            v_left,
            v_right,
            delta_v: (v_left - v_right).abs(),
            s_s: symmetry_score(v_left, v_right, lambda),
            m_left,
            m_right,
        }
    }
}

/// Settings echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub score: ScoreConfig,
    pub flow: FlowParams,
    pub regions: RegionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Forehead, eye, cheek, in that order.
    pub regions: Vec<RegionScore>,
    pub frames: usize,
    pub crop: CropRect,
    pub midline_x: f64,
    pub config: ReportConfig,
}

impl SymmetryReport {
    pub fn region(&self, region: Region) -> &RegionScore {
        self.regions
            .iter()
            .find(|r| r.region == region)
            .expect("report covers every region")
    }

    /// Fixed-width table, one row per region.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:<9} {:>12} {:>12} {:>12} {:>8}\n",
            "region", "v_left", "v_right", "delta_v", "s_s"
        );
        for r in &self.regions {
            out.push_str(&format!(
                "{:<9} {:>12} {:>12} {:>12} {:>8}\n",
                r.region.name(),
                r.v_left,
                r.v_right,
                r.delta_v,
                r.s_s
            ));
        }
        out
    }
}

/// Everything computed while scoring a sequence.
#[derive(Debug, Clone)]
pub struct SequenceAnalysis {
    pub regions: RegionSet,
    /// Flow for each consecutive frame pair over the face crop.
    pub flows: Vec<FlowField>,
    /// Thresholded magnitudes for each pair.
    pub magnitudes: Vec<MagnitudeMap>,
    pub report: SymmetryReport,
}

pub fn crop_frame(frame: &Frame, crop: &CropRect) -> Result<Frame> {
    Frame::new(
        frame
            .plane()
            .sub_plane(crop.x0, crop.y0, crop.width(), crop.height()),
    )
}

/// Runs crop → flow → magnitude → threshold → movement → symmetry.
pub fn analyze_sequence(
    seq: &FrameSequence,
    lm: &LandmarkSet,
    flow_params: &FlowParams,
    score_config: &ScoreConfig,
    region_config: &RegionConfig,
) -> Result<SequenceAnalysis> {
    score_config.validate().stage(Stage::Scoring)?;
    let (w, h) = seq.dims();
    let crop = face_crop_from_landmarks(lm, w, h, region_config).stage(Stage::Crop)?;
    let regions = build_regions(lm, crop, region_config).stage(Stage::Regions)?;

    let estimator = FlowEstimator::new(*flow_params).stage(Stage::Flow)?;
    let cropped = seq
        .frames()
        .iter()
        .map(|f| crop_frame(f, &crop))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Crop)?;
    let flows = cropped
        .par_windows(2)
        .map(|pair| estimator.estimate(&pair[0], &pair[1]))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Flow)?;

    let magnitudes: Vec<MagnitudeMap> = flows
        .iter()
        .map(|f| threshold_magnitudes(&flow_magnitude(f), score_config.threshold_factor))
        .collect();

    let n = seq.len();
    let mut scores = Vec::with_capacity(3);
    for region in Region::ALL {
        let left = regions.mask(region, Side::Left);
        let right = regions.mask(region, Side::Right);
        let v_left = movement_score(&magnitudes, left, n).stage(Stage::Scoring)?;
        let v_right = movement_score(&magnitudes, right, n).stage(Stage::Scoring)?;
        scores.push(RegionScore::new(
            region,
            v_left,
            v_right,
            left.count(),
            right.count(),
            score_config.lambda,
        ));
    }

    let report = SymmetryReport {
        regions: scores,
        frames: n,
        crop,
        midline_x: regions.midline_x,
        config: ReportConfig {
            score: *score_config,
            flow: *flow_params,
            regions: *region_config,
        },
    };
    Ok(SequenceAnalysis {
        regions,
        flows,
        magnitudes,
        report,
    })
}

pub fn score_sequence(
    seq: &FrameSequence,
    lm: &LandmarkSet,
    flow_params: &FlowParams,
    score_config: &ScoreConfig,
    region_config: &RegionConfig,
) -> Result<SymmetryReport> {
    Ok(analyze_sequence(seq, lm, flow_params, score_config, region_config)?.report)
}
