use std::fmt::Write as _;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use shmcam::signalkit::{find_fundamental, read_spectrum_csv, read_timeseries_csv, Unit};
use shmcam::uavsim::Phase;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("unknown plot kind '{0}' (expected timeseries, spectrum or trajectory)")]
    UnknownKind(String),
    #[error("malformed artifact {path}: {reason}")]
    Malformed { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Timeseries,
    Spectrum,
    Trajectory,
}

impl FromStr for PlotKind {
    type Err = PlotError;
    fn from_str(s: &str) -> Result<Self, PlotError> {
        match s {
            "timeseries" => Ok(PlotKind::Timeseries),
            "spectrum" => Ok(PlotKind::Spectrum),
            "trajectory" => Ok(PlotKind::Trajectory),
            other => Err(PlotError::UnknownKind(other.to_string())),
        }
    }
}

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

/// Linear axis mapping data ranges onto the plot area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: &[f64], ys: &[f64]) -> Self {
        Self { x: padded(xs), y: padded(ys) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn padded(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let d = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - d, hi + d);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(svg: &mut String, f: &Frame, title: &str, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(svg, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(svg, r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(svg, r#"<text x="{px}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, y0 + 18.0, tick(xv));
        let _ = writeln!(svg, r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#, x0 - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn polyline(svg: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str) {
    let mut pts = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let _ = write!(pts, "{:.2},{:.2} ", f.px(*x), f.py(*y));
    }
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, pts.trim_end());
}

fn open_svg() -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n")
}

fn malformed(path: &Path, reason: impl ToString) -> PlotError {
    PlotError::Malformed { path: path.display().to_string(), reason: reason.to_string() }
}

fn series_label(path: &Path) -> &'static str {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    if stem.contains("accel") {
        "acceleration (m/s^2)"
    } else if stem.contains("displacement") || stem.contains("motion") {
        "displacement (m)"
    } else {
        "value"
    }
}

pub fn timeseries_svg(path: &Path, text: &str) -> Result<String, PlotError> {
    let ts = read_timeseries_csv::<f64, _>(BufReader::new(text.as_bytes()), Unit::UNITLESS).map_err(|e| malformed(path, e))?;
    let t: Vec<f64> = ts.times().collect();
    let f = Frame::new(&t, ts.samples());
    let mut svg = open_svg();
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("series");
    axes(&mut svg, &f, name, "time (s)", series_label(path));
    polyline(&mut svg, &f, &t, ts.samples(), "#1f4e9c");
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn spectrum_svg(path: &Path, text: &str) -> Result<String, PlotError> {
    let s = read_spectrum_csv::<f64, _>(BufReader::new(text.as_bytes()), Unit::UNITLESS).map_err(|e| malformed(path, e))?;
    let freqs = s.frequencies();
    let hi = *freqs.last().unwrap_or(&0.0);
    let peak = find_fundamental(&s, (s.resolution(), hi)).map_err(|e| malformed(path, e))?;
    let f = Frame::new(freqs, s.psd());
    let mut svg = open_svg();
    let units = match series_label(path) {
        "value" => "PSD (unit^2/Hz)",
        _ => "PSD (signal^2/Hz)",
    };
    axes(&mut svg, &f, "power spectral density", "frequency (Hz)", units);
    polyline(&mut svg, &f, freqs, s.psd(), "#1f4e9c");
    let (px, py) = (f.px(peak.frequency), f.py(peak.peak_power.min(f.y.1)));
    let _ = writeln!(svg, r##"<circle cx="{px:.2}" cy="{py:.2}" r="4" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##);
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#c0392b">{:.2} Hz</text>"##,
        px + 7.0,
        (py - 6.0).max(TOP + 12.0),
        peak.frequency
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn phase_color(p: Phase) -> &'static str {
    match p {
        Phase::Search => "#8c8c8c",
        Phase::Align => "#e69f00",
        Phase::Hold => "#0072b2",
    }
}

pub fn trajectory_svg(path: &Path, text: &str) -> Result<String, PlotError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("t,x,y,z,yaw,phase,du_px,dv_px") {
        return Err(malformed(path, "expected header `t,x,y,z,yaw,phase,du_px,dv_px`"));
    }
    let mut pts: Vec<(f64, f64, Phase)> = Vec::new();
    for (i, l) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let c: Vec<&str> = l.split(',').collect();
        if c.len() != 8 {
            return Err(malformed(path, format!("line {}: expected 8 columns", i + 2)));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| malformed(path, format!("line {}: bad number '{s}'", i + 2)));
        let phase = c[5].parse::<Phase>().map_err(|e| malformed(path, format!("line {}: {e}", i + 2)))?;
        pts.push((num(c[1])?, num(c[2])?, phase));
    }
    if pts.is_empty() {
        return Err(malformed(path, "no samples"));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let f = Frame::new(&xs, &ys);
    let mut svg = open_svg();
    axes(&mut svg, &f, "camera platform path", "x (m)", "y (m)");
    let mut start = 0;
    for i in 1..=pts.len() {
        if i == pts.len() || pts[i].2 != pts[start].2 {
            let end = i.min(pts.len() - 1);
            polyline(&mut svg, &f, &xs[start..=end], &ys[start..=end], phase_color(pts[start].2));
            start = i;
        }
    }
    for (k, p) in [Phase::Search, Phase::Align, Phase::Hold].into_iter().enumerate() {
        let y = TOP + 10.0 + 16.0 * k as f64;
        let x = W - RIGHT - 90.0;
        let _ = writeln!(svg, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="3"/>"#, x + 20.0, phase_color(p));
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, x + 26.0, y + 4.0, p.as_str());
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders `artifact` as an SVG next to it (same stem, `.svg`) unless `out`
/// is given.
pub fn plot(artifact: &Path, kind: PlotKind, out: Option<&Path>) -> Result<PathBuf, PlotError> {
    let text = std::fs::read_to_string(artifact)?;
    let svg = match kind {
        PlotKind::Timeseries => timeseries_svg(artifact, &text)?,
        PlotKind::Spectrum => spectrum_svg(artifact, &text)?,
        PlotKind::Trajectory => trajectory_svg(artifact, &text)?,
    };
    let dest = out.map(Path::to_path_buf).unwrap_or_else(|| artifact.with_extension("svg"));
    std::fs::write(&dest, svg)?;
    Ok(dest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use shmcam::signalkit::{welch_psd, write_spectrum_csv, TimeSeries, WelchConfig};

    #[test]
    fn spectrum_peak_annotated() {
        let x = TimeSeries::from_fn(4096, 100.0, Unit::METERS, |t| (std::f64::consts::TAU * 5.0 * t).sin()).unwrap();
        let s = welch_psd(&x, &WelchConfig::new(1024)).unwrap();
        let mut csv = Vec::new();
        write_spectrum_csv(&s, &mut csv).unwrap();
        let svg = spectrum_svg(Path::new("spectrum.csv"), std::str::from_utf8(&csv).unwrap()).unwrap();
        assert!(svg.contains(">5.00 Hz<"), "{svg}");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_artifact_is_malformed() {
        for f in [timeseries_svg, spectrum_svg, trajectory_svg] {
            assert!(matches!(f(Path::new("x.csv"), ""), Err(PlotError::Malformed { .. })));
        }
    }

    #[test]
    fn unknown_kind() {
        assert!(matches!("histogram".parse::<PlotKind>(), Err(PlotError::UnknownKind(_))));
    }

    #[test]
    fn trajectory_segments_coloured_by_phase() {
        let text = "t,x,y,z,yaw,phase,du_px,dv_px\n0,0,0,1,0,search,,\n0.05,0,0,1,0.1,align,3,1\n0.1,0.1,0,1,0.1,hold,1,0\n0.15,0.1,0.01,1,0.1,hold,1,0\n";
        let svg = trajectory_svg(Path::new("trajectory.csv"), text).unwrap();
        for p in [Phase::Search, Phase::Align, Phase::Hold] {
            assert!(svg.contains(&format!("stroke=\"{}\" stroke-width=\"1.2\"", phase_color(p))));
        }
    }
}
