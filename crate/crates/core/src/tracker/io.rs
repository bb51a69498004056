//! Frame manifests and trace CSV files.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pgm::{decode_pgm, encode_pgm};
use super::{Frame, FrameSequence, PixelTrace, Result, TrackError};
use crate::scalar::Real;

/// TOML manifest listing frame files relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub fps: f64,
    pub frames: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Vec<f64>>,
}

pub fn load_frames(manifest_path: impl AsRef<Path>) -> Result<FrameSequence> {
    let path = manifest_path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => TrackError::Manifest { path: display.clone(), reason: "not found".into() },
        _ => TrackError::Io(e),
    })?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| TrackError::Manifest { path: display.clone(), reason: e.to_string() })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut frames: Vec<Frame> = Vec::with_capacity(manifest.frames.len());
    for (index, rel) in manifest.frames.iter().enumerate() {
        let file: PathBuf = base.join(rel);
        let bytes = fs::read(&file).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => TrackError::MissingFrame(rel.clone()),
            _ => TrackError::Io(e),
        })?;
        let frame = decode_pgm(&bytes, rel)?;
        if let Some(first) = frames.first() {
            if first.dims() != frame.dims() {
                return Err(TrackError::DimensionMismatch { index, expected: first.dims(), found: frame.dims() });
            }
        }
        frames.push(frame);
    }
    FrameSequence::new(frames, manifest.fps, manifest.timestamps)
}

/// Writes `frames/NNNNNN.pgm` plus `manifest.toml` under `dir` and returns
/// the manifest path.
pub fn save_frames(seq: &FrameSequence, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir.join("frames"))?;
    let mut names = Vec::with_capacity(seq.len());
    for (k, frame) in seq.frames().iter().enumerate() {
        let name = format!("frames/{k:06}.pgm");
        fs::write(dir.join(&name), encode_pgm(frame))?;
        names.push(name);
    }
    let manifest = Manifest { fps: seq.fps(), frames: names, timestamps: seq.timestamps().map(<[f64]>::to_vec) };
    let path = dir.join("manifest.toml");
    let text = toml::to_string(&manifest).map_err(|e| TrackError::InvalidInput(e.to_string()))?;
    fs::write(&path, text)?;
    Ok(path)
}

pub fn write_trace_csv<T: Real, W: Write>(trace: &PixelTrace<T>, mut w: W) -> Result<()> {
    w.write_all(b"frame,u_px,v_px,score\n")?;
    for k in 0..trace.len() {
        writeln!(w, "{k},{},{},{}", trace.u[k], trace.v[k], trace.score[k])?;
    }
    Ok(())
}

pub fn read_trace_csv<T: Real + std::str::FromStr, R: BufRead>(r: R) -> Result<PixelTrace<T>> {
    let mut lines = r.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim_end_matches('\r') == "frame,u_px,v_px,score" => {}
        _ => return Err(TrackError::Csv { line: 1, reason: "expected header `frame,u_px,v_px,score`".into() }),
    }
    let (mut u, mut v, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| TrackError::Csv { line: i + 2, reason: reason.to_string() };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        if cols[0].parse::<usize>().ok() != Some(u.len()) {
            return Err(bad("frame index out of sequence"));
        }
        let num = |c: &str| c.parse::<T>().map_err(|_| bad("non-numeric field"));
        u.push(num(cols[1])?);
        v.push(num(cols[2])?);
        s.push(num(cols[3])?);
    }
    PixelTrace::new(u, v, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(value: u8, w: usize) -> Frame {
        Frame::filled(w, 64, value).unwrap()
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let seq = FrameSequence::new(vec![frame(1, 64), frame(2, 64), frame(3, 64)], 60.0, None).unwrap();
        let manifest = save_frames(&seq, dir.path()).unwrap();
        let back = load_frames(&manifest).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back, seq);
    }

    #[test]
    fn missing_frame_named() {
        let dir = tempfile::tempdir().unwrap();
        let seq = FrameSequence::new(vec![frame(1, 64), frame(2, 64)], 60.0, None).unwrap();
        let manifest = save_frames(&seq, dir.path()).unwrap();
        fs::remove_file(dir.path().join("frames/000001.pgm")).unwrap();
        match load_frames(&manifest) {
            Err(TrackError::MissingFrame(name)) => assert_eq!(name, "frames/000001.pgm"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixed_sizes_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.pgm"), encode_pgm(&frame(1, 64))).unwrap();
        fs::write(dir.path().join("b.pgm"), encode_pgm(&frame(1, 32))).unwrap();
        fs::write(dir.path().join("m.toml"), "fps = 60.0\nframes = [\"a.pgm\", \"a.pgm\", \"b.pgm\"]\n").unwrap();
        assert!(matches!(load_frames(dir.path().join("m.toml")), Err(TrackError::DimensionMismatch { index: 2, .. })));
    }

    #[test]
    fn unsupported_format() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.png"), b"\x89PNG\r\n").unwrap();
        fs::write(dir.path().join("m.toml"), "fps = 30.0\nframes = [\"a.png\"]\n").unwrap();
        assert!(matches!(load_frames(dir.path().join("m.toml")), Err(TrackError::UnsupportedFormat { .. })));
    }

    #[test]
    fn trace_csv_round_trip() {
        let t = PixelTrace::new(vec![0.0, 0.125, -3.5], vec![0.0, 1.0, 2.0], vec![1.0, 0.99, 0.95]).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        assert!(buf.starts_with(b"frame,u_px,v_px,score\n0,0,0,1\n"));
        let back: PixelTrace<f64> = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(back, t);
    }
}
