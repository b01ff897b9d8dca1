//! Frame, landmark, flow and report file formats.

use std::cmp::Ordering;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::frame::{Frame, FrameSequence};
use crate::landmarks::{LandmarkSet, Point, LANDMARK_COUNT};
use crate::plane::Plane;
use crate::scoring::{RegionScore, SymmetryReport};

/// JSON Schema (draft 2020-12) for the landmark files this crate writes.
///
/// The reader also accepts `{"index", "x", "y"}` objects in place of `[x, y]`
/// pairs; the schema describes only the emitted form.
pub const LANDMARK_SCHEMA: &str = include_str!("../schema/landmarks.schema.json");

pub const FLOW_MAGIC: [u8; 4] = *b"PIEH";
pub const REPORT_CSV_HEADER: &str = "region,v_left,v_right,delta_v,s_s";

/// Loads every file in `directory` whose name matches `pattern`, in natural
/// filename order.
pub fn load_frame_sequence(directory: &Path, pattern: &str) -> Result<FrameSequence> {
    let glob = glob::Pattern::new(pattern)
        .map_err(|e| Error::InvalidParams(format!("bad filename pattern {pattern:?}: {e}")))?;
    let entries = fs::read_dir(directory).map_err(|source| Error::Io {
        path: directory.to_path_buf(),
        source,
    })?;

    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: directory.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if glob.matches(name) {
            files.push((name.to_string(), path));
        }
    }
    if files.len() < 2 {
        return Err(Error::SequenceTooShort { found: files.len() });
    }
    files.sort_by(|a, b| natural_cmp(&a.0, &b.0));

    let mut frames = Vec::with_capacity(files.len());
    let mut ids = Vec::with_capacity(files.len());
    for (name, path) in files {
        frames.push(load_frame(&path)?);
        ids.push(name);
    }
    FrameSequence::new(frames, ids)
}

/// Decodes one PGM or PNG file into a normalized frame.
pub fn load_frame(path: &Path) -> Result<Frame> {
    let decode_err = |reason: String| Error::DecodeError {
        file: path.to_path_buf(),
        reason,
    };
    let img = image::ImageReader::open(path)
        .map_err(|e| decode_err(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| decode_err(e.to_string()))?
        .decode()
        .map_err(|e| decode_err(e.to_string()))?;
    let plane = image_to_plane(&img).ok_or_else(|| decode_err("unsupported pixel format".into()))?;
    Frame::new(plane).map_err(|e| decode_err(e.to_string()))
}

fn image_to_plane(img: &DynamicImage) -> Option<Plane> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(g) => g.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect(),
        DynamicImage::ImageLuma16(g) => g
            .as_raw()
            .iter()
            .map(|&v| f64::from(v) / 65535.0)
            .collect(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect(),
        DynamicImage::ImageLumaA16(g) => g.pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect(),
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => img
            .to_rgb8()
            .pixels()
            .map(|p| luma601(p.0.map(|c| f64::from(c) / 255.0)))
            .collect(),
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => img
            .to_rgb16()
            .pixels()
            .map(|p| luma601(p.0.map(|c| f64::from(c) / 65535.0)))
            .collect(),
        _ => return None,
    };
    Some(Plane::new(w, h, data))
}

#[inline]
fn luma601([r, g, b]: [f64; 3]) -> f64 {
    (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0)
}

/// Writes a frame as a 16-bit grayscale PNG.
pub fn write_frame_png16(frame: &Frame, file: &Path) -> Result<()> {
    let data: Vec<u16> = frame
        .plane()
        .data()
        .iter()
        .map(|v| (v * 65535.0).round() as u16)
        .collect();
    let img: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
        image::ImageBuffer::from_raw(frame.width() as u32, frame.height() as u32, data)
            .expect("buffer matches frame size");
    save_image(&DynamicImage::ImageLuma16(img), file)
}

pub fn write_rgb_png(img: &image::RgbImage, file: &Path) -> Result<()> {
    img.save_with_format(file, image::ImageFormat::Png)
        .map_err(|e| Error::WriteError {
            path: file.to_path_buf(),
            source: std::io::Error::other(e),
        })
}

fn save_image(img: &DynamicImage, file: &Path) -> Result<()> {
    img.save_with_format(file, image::ImageFormat::Png)
        .map_err(|e| Error::WriteError {
            path: file.to_path_buf(),
            source: std::io::Error::other(e),
        })
}

/// Compares strings treating runs of ASCII digits as numbers, so
/// `frame2.png` sorts before `frame10.png`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ai, mut bi) = (a.as_bytes(), b.as_bytes());
    loop {
        match (ai.first(), bi.first()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(ca), Some(cb)) if ca.is_ascii_digit() && cb.is_ascii_digit() => {
                let na = ai.iter().take_while(|c| c.is_ascii_digit()).count();
                let nb = bi.iter().take_while(|c| c.is_ascii_digit()).count();
                let (da, db) = (trim_zeros(&ai[..na]), trim_zeros(&bi[..nb]));
                let ord = da.len().cmp(&db.len()).then_with(|| da.cmp(db));
                if ord != Ordering::Equal {
                    return ord;
                }
                ai = &ai[na..];
                bi = &bi[nb..];
            }
            (Some(ca), Some(cb)) => {
                if ca != cb {
                    return ca.cmp(cb);
                }
                ai = &ai[1..];
                bi = &bi[1..];
            }
        }
    }
}

fn trim_zeros(digits: &[u8]) -> &[u8] {
    let start = digits.iter().position(|&c| c != b'0').unwrap_or(digits.len());
    &digits[start..]
}

/// On-disk landmark document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandmarkFile {
    pub image_width: usize,
    pub image_height: usize,
    pub points: Vec<LandmarkEntry>,
}

/// A landmark either given positionally as `[x, y]` or with an explicit
/// index as `{"index": i, "x": .., "y": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LandmarkEntry {
    Pair([f64; 2]),
    Indexed { index: usize, x: f64, y: f64 },
}

impl LandmarkFile {
    pub fn from_landmarks(lm: &LandmarkSet, image_width: usize, image_height: usize) -> Self {
        Self {
            image_width,
            image_height,
            points: lm
                .points()
                .iter()
                .map(|p| LandmarkEntry::Pair([p.x, p.y]))
                .collect(),
        }
    }

    pub fn to_landmarks(&self) -> Result<LandmarkSet> {
        let found = self.points.len();
        if found != LANDMARK_COUNT {
            return Err(Error::LandmarkCountError { found });
        }
        let indexed = self
            .points
            .iter()
            .filter(|e| matches!(e, LandmarkEntry::Indexed { .. }))
            .count();
        let points = if indexed == 0 {
            self.points
                .iter()
                .map(|e| match *e {
                    LandmarkEntry::Pair([x, y]) => Point::new(x, y),
                    LandmarkEntry::Indexed { .. } => unreachable!(),
                })
                .collect()
        } else if indexed == found {
            let mut slots: Vec<Option<Point>> = vec![None; LANDMARK_COUNT];
            for e in &self.points {
                if let LandmarkEntry::Indexed { index, x, y } = *e {
                    let slot = slots.get_mut(index).ok_or_else(|| {
                        Error::InvalidLandmarks(format!("index {index} is outside 0..68"))
                    })?;
                    if slot.replace(Point::new(x, y)).is_some() {
                        return Err(Error::InvalidLandmarks(format!("index {index} repeated")));
                    }
                }
            }
            slots.into_iter().map(|p| p.expect("all 68 slots filled")).collect()
        } else {
            return Err(Error::InvalidLandmarks(
                "points mix indexed and positional entries".into(),
            ));
        };
        LandmarkSet::new(points)
    }
}

/// Reads a landmark JSON file. Bounds are checked later, against the crop.
pub fn parse_landmarks(file: &Path) -> Result<LandmarkSet> {
    read_landmark_file(file)?.to_landmarks()
}

pub fn read_landmark_file(file: &Path) -> Result<LandmarkFile> {
    let text = fs::read_to_string(file).map_err(|source| Error::Io {
        path: file.to_path_buf(),
        source,
    })?;
    parse_landmark_json(&text).map_err(|e| match e {
        Error::InvalidLandmarks(msg) => Error::InvalidLandmarks(format!("{}: {msg}", file.display())),
        e => e,
    })
}

pub fn parse_landmark_json(text: &str) -> Result<LandmarkFile> {
    serde_json::from_str(text).map_err(|e| Error::InvalidLandmarks(e.to_string()))
}

pub fn write_landmarks(lm: &LandmarkSet, image_width: usize, image_height: usize, file: &Path) -> Result<()> {
    let doc = LandmarkFile::from_landmarks(lm, image_width, image_height);
    let text = serde_json::to_string_pretty(&doc).expect("landmark document serializes");
    write_bytes(file, text.as_bytes())
}

/// Serializes a flow field in the Middlebury `.flo` layout.
pub fn encode_flow(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + flow.len() * 8);
    out.extend_from_slice(&FLOW_MAGIC);
    out.extend_from_slice(&(flow.width() as u32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as u32).to_le_bytes());
    for &[u, v] in flow.vectors() {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_flow(bytes: &[u8]) -> Result<FlowField> {
    let bad = |reason: &str| Error::DecodeError {
        file: PathBuf::from("<flow>"),
        reason: reason.to_string(),
    };
    if bytes.len() < 12 || bytes[..4] != FLOW_MAGIC {
        return Err(bad("missing PIEH header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (w, h) = (word(4) as usize, word(8) as usize);
    if bytes.len() != 12 + w * h * 8 {
        return Err(bad("payload length does not match header dimensions"));
    }
    let vectors = bytes[12..]
        .chunks_exact(8)
        .map(|c| {
            [
                f32::from_le_bytes(c[..4].try_into().unwrap()),
                f32::from_le_bytes(c[4..].try_into().unwrap()),
            ]
        })
        .collect();
    Ok(FlowField::new(w, h, vectors))
}

pub fn write_flow_file(flow: &FlowField, file: &Path) -> Result<()> {
    if flow.vectors().iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParams("flow field contains non-finite values".into()));
    }
    write_bytes(file, &encode_flow(flow))
}

pub fn read_flow_file(file: &Path) -> Result<FlowField> {
    let bytes = fs::read(file).map_err(|source| Error::Io {
        path: file.to_path_buf(),
        source,
    })?;
    decode_flow(&bytes).map_err(|e| match e {
        Error::DecodeError { reason, .. } => Error::DecodeError {
            file: file.to_path_buf(),
            reason,
        },
        e => e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    region: &'a str,
    v_left: f64,
    v_right: f64,
    delta_v: f64,
    s_s: f64,
}

pub fn report_to_csv(report: &SymmetryReport) -> String {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for RegionScore {
        region,
        v_left,
        v_right,
        delta_v,
        s_s,
        ..
    } in &report.regions
    {
        wtr.serialize(CsvRow {
            region: region.name(),
            v_left: *v_left,
            v_right: *v_right,
            delta_v: *delta_v,
            s_s: *s_s,
        })
        .expect("in-memory csv write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

pub fn report_to_json(report: &SymmetryReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn report_from_json(text: &str) -> Result<SymmetryReport> {
    serde_json::from_str(text).map_err(|e| Error::DecodeError {
        file: PathBuf::from("<report>"),
        reason: e.to_string(),
    })
}

pub fn render_report(report: &SymmetryReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => report_to_json(report),
        ReportFormat::Csv => report_to_csv(report),
    }
}

pub fn write_report(report: &SymmetryReport, format: ReportFormat, file: &Path) -> Result<()> {
    write_bytes(file, render_report(report, format).as_bytes())
}

#[derive(Debug, Deserialize)]
struct CalibrationRow {
    delta_v: f64,
    expert_score: f64,
}

/// Reads `delta_v,expert_score` rows (with that header) for λ calibration.
pub fn read_calibration_samples(file: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(file)
        .map_err(|e| Error::DecodeError {
            file: file.to_path_buf(),
            reason: e.to_string(),
        })?;
    rdr.deserialize::<CalibrationRow>()
        .map(|row| {
            row.map(|r| (r.delta_v, r.expert_score))
                .map_err(|e| Error::DecodeError {
                    file: file.to_path_buf(),
                    reason: e.to_string(),
                })
        })
        .collect()
}

pub(crate) fn write_bytes(file: &Path, bytes: &[u8]) -> Result<()> {
    let werr = |source| Error::WriteError {
        path: file.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(fs::File::create(file).map_err(werr)?);
    out.write_all(bytes).map_err(werr)?;
    out.flush().map_err(werr)
}
