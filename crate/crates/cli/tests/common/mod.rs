#![allow(dead_code)]

use std::path::{Path, PathBuf};

use facesym_core::media_io::{write_frame_png16, write_landmarks};
use facesym_core::synthetic::SyntheticFace;
use facesym_core::FrameSequence;

/// Writes `seq` as numbered PNG frames plus `lm.json` under `dir`.
pub fn write_case(dir: &Path, face: &SyntheticFace, seq: &FrameSequence) -> (PathBuf, PathBuf) {
    let frames = dir.join("frames");
    std::fs::create_dir_all(&frames).unwrap();
    for (i, f) in seq.frames().iter().enumerate() {
        write_frame_png16(f, &frames.join(format!("{:03}.png", i + 1))).unwrap();
    }
    let lm = dir.join("lm.json");
    write_landmarks(&face.landmarks(), face.width, face.height, &lm).unwrap();
    (frames, lm)
}

pub struct Captured {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[&str]) -> Captured {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("facesym").chain(args.iter().copied());
    let code = facesym_cli::run_with(argv, &mut out, &mut err);
    Captured {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
