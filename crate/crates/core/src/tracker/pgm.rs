//! Binary PGM (P5, maxval 255).

use super::{Frame, Result, TrackError};

pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.data());
    out
}

/// Decodes a P5 image. `origin` names the source in error messages.
pub fn decode_pgm(bytes: &[u8], origin: &str) -> Result<Frame> {
    let unsupported = |reason: &str| TrackError::UnsupportedFormat { path: origin.to_string(), reason: reason.to_string() };
    let mut pos = 0usize;
    let mut token = || -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    match token().as_deref() {
        Some("P5") => {}
        Some(m) => return Err(unsupported(&format!("magic {m:?} is not binary PGM (P5)"))),
        None => return Err(unsupported("empty file")),
    }
    let mut number = |what: &str| -> Result<usize> {
        token().and_then(|t| t.parse().ok()).ok_or_else(|| unsupported(&format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(unsupported(&format!("maxval {maxval} (only 255 is supported)")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let start = pos + 1;
    let expected = width * height;
    if bytes.len() < start + expected {
        return Err(unsupported(&format!("raster truncated: {} of {expected} bytes", bytes.len().saturating_sub(start))));
    }
    Frame::new(width, height, bytes[start..start + expected].to_vec())
}
