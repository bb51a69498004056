use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::SceneConfig;
use super::disturbance::{inject_platform_disturbance, CameraOffset, DisturbanceModel};
use super::{Result, SceneError};
use crate::tracker::{Axis, Frame, FrameSequence};

/// Subsamples per pixel side.
const SUPERSAMPLE: usize = 4;

/// Tag layout on a 6x6 grid: dark outer ring around a fixed 4x4 code.
const TAG_CODE: [[bool; 4]; 4] = [
    [true, false, true, true],
    [false, false, true, false],
    [true, true, false, true],
    [false, true, false, false],
];

/// Exact per-frame positions used to render a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Marker centre in image coordinates, including camera motion.
    pub marker: Vec<(f64, f64)>,
    /// Reference tag centre, when the scene has one.
    pub reference: Option<Vec<(f64, f64)>>,
    pub camera: CameraOffset,
    pub rest_marker: (f64, f64),
    pub meters_per_pixel: f64,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.marker.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marker.is_empty()
    }

    /// Marker displacement relative to frame 0, as a tracker would report it.
    pub fn marker_trace(&self) -> (Vec<f64>, Vec<f64>) {
        relative(&self.marker)
    }

    pub fn reference_trace(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        self.reference.as_ref().map(|r| relative(r))
    }
}

fn relative(points: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let (x0, y0) = points[0];
    points.iter().map(|&(x, y)| (x - x0, y - y0)).unzip()
}

/// `frame,true_u_px,true_v_px,cam_u_px,cam_v_px`, with the true columns
/// measured from the marker's rest position.
pub fn write_ground_truth_csv<W: Write>(gt: &GroundTruth, mut w: W) -> std::io::Result<()> {
    w.write_all(b"frame,true_u_px,true_v_px,cam_u_px,cam_v_px\n")?;
    for (k, &(x, y)) in gt.marker.iter().enumerate() {
        writeln!(
            w,
            "{k},{},{},{},{}",
            x - gt.rest_marker.0,
            y - gt.rest_marker.1,
            gt.camera.u[k],
            gt.camera.v[k]
        )?;
    }
    Ok(())
}

/// Renders structure motion (metres, sampled at the frame rate) with an
/// optional platform disturbance.
pub fn render_frames(
    scene: &SceneConfig,
    structure_motion: &crate::signalkit::TimeSeries<f64>,
    disturbance: Option<&DisturbanceModel>,
) -> Result<(FrameSequence, GroundTruth)> {
    scene.validate()?;
    let n = structure_motion.len();
    let offset = match disturbance {
        Some(d) => inject_platform_disturbance(n, scene.fps, d)?,
        None => CameraOffset::zeros(n, scene.fps),
    };
    render_with_offset(scene, structure_motion, &offset)
}

/// Renders with an explicit per-frame camera offset, e.g. one produced by
/// the hover simulation.
pub fn render_with_offset(
    scene: &SceneConfig,
    structure_motion: &crate::signalkit::TimeSeries<f64>,
    offset: &CameraOffset,
) -> Result<(FrameSequence, GroundTruth)> {
    scene.validate()?;
    let rate = structure_motion.sample_rate();
    if (rate - scene.fps).abs() > 1e-9 * scene.fps {
        return Err(SceneError::RateMismatch { motion: rate, fps: scene.fps });
    }
    let n = structure_motion.len();
    if offset.len() != n {
        return Err(SceneError::InvalidDisturbance(format!("{} camera offsets for {n} frames", offset.len())));
    }

    let mut marker = Vec::with_capacity(n);
    let mut reference = scene.reference_tag.map(|_| Vec::with_capacity(n));
    for (k, &disp) in structure_motion.samples().iter().enumerate() {
        let px = disp / scene.meters_per_pixel;
        let (sx, sy) = match scene.axis {
            Axis::Horizontal => (px, 0.0),
            Axis::Vertical => (0.0, px),
        };
        let (cu, cv) = (offset.u[k], offset.v[k]);
        let m = (scene.marker.center.0 + sx + cu, scene.marker.center.1 + sy + cv);
        if !scene.disc_fits(m) {
            return Err(SceneError::MarkerOutOfFrame { frame: k });
        }
        marker.push(m);
        if let (Some(tag), Some(refs)) = (&scene.reference_tag, reference.as_mut()) {
            let c = (tag.center.0 + cu, tag.center.1 + cv);
            if !scene.tag_fits(c) {
                return Err(SceneError::TagOutOfFrame { frame: k });
            }
            refs.push(c);
        }
    }

    let frames = (0..n)
        .map(|k| render_one(scene, marker[k], reference.as_ref().map(|r| r[k]), k))
        .collect::<Result<Vec<_>>>()?;
    let seq = FrameSequence::new(frames, scene.fps, None)?;
    let truth = GroundTruth {
        marker,
        reference,
        camera: offset.clone(),
        rest_marker: scene.marker.center,
        meters_per_pixel: scene.meters_per_pixel,
    };
    Ok((seq, truth))
}

fn render_one(scene: &SceneConfig, marker: (f64, f64), tag: Option<(f64, f64)>, k: usize) -> Result<Frame> {
    let (w, h) = (scene.width, scene.height);
    let mut coverage = vec![0.0f64; w * h];
    disc_coverage(&mut coverage, w, h, marker, scene.marker.radius, scene.marker.edge_softness);
    if let (Some(style), Some(c)) = (&scene.reference_tag, tag) {
        tag_coverage(&mut coverage, w, h, c, style.size, scene.marker.edge_softness);
    }

    let bg = scene.marker.background as f64;
    let fg = scene.marker.foreground as f64;
    let noise = (scene.noise_sigma > 0.0).then(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        rng.set_stream(k as u64);
        (rng, Normal::new(0.0, scene.noise_sigma).expect("validated sigma"))
    });
    let data: Vec<u8> = match noise {
        None => coverage.iter().map(|&c| quantize(bg + (fg - bg) * c.min(1.0))).collect(),
        Some((mut rng, normal)) => coverage
            .iter()
            .map(|&c| quantize(bg + (fg - bg) * c.min(1.0) + normal.sample(&mut rng)))
            .collect(),
    };
    Ok(Frame::new(w, h, data)?)
}

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Fraction of a blurred step edge covering point `x` for an object that
/// starts at `edge` (inside for `x > edge`).
fn edge(x: f64, edge: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        phi((x - edge) / sigma)
    } else if x >= edge {
        1.0
    } else {
        0.0
    }
}

fn subsample_offsets() -> impl Iterator<Item = f64> + Clone {
    (0..SUPERSAMPLE).map(|i| (i as f64 + 0.5) / SUPERSAMPLE as f64)
}

/// Supersampled radial profile of a Gaussian-blurred disc.
fn disc_coverage(cov: &mut [f64], w: usize, h: usize, c: (f64, f64), radius: f64, sigma: f64) {
    let reach = radius + 4.0 * sigma + 1.0;
    let x_lo = (c.0 - reach).floor().max(0.0) as usize;
    let y_lo = (c.1 - reach).floor().max(0.0) as usize;
    let x_hi = ((c.0 + reach).ceil() as usize).min(w);
    let y_hi = ((c.1 + reach).ceil() as usize).min(h);
    let norm = (SUPERSAMPLE * SUPERSAMPLE) as f64;
    for py in y_lo..y_hi {
        for px in x_lo..x_hi {
            let mut acc = 0.0;
            for oy in subsample_offsets() {
                let dy = py as f64 + oy - c.1;
                for ox in subsample_offsets() {
                    let dx = px as f64 + ox - c.0;
                    let r = (dx * dx + dy * dy).sqrt();
                    acc += edge(-r, -radius, sigma);
                }
            }
            cov[py * w + px] += acc / norm;
        }
    }
}

/// Dark cells of the tag, each a Gaussian-blurred box. Box coverage is
/// separable, so per-pixel averages of the 1-D profiles suffice.
fn tag_coverage(cov: &mut [f64], w: usize, h: usize, c: (f64, f64), size: f64, sigma: f64) {
    const GRID: usize = 6;
    let cell = size / GRID as f64;
    let (x0, y0) = (c.0 - size / 2.0, c.1 - size / 2.0);
    let profile = |len: usize, origin: f64| -> Vec<[f64; GRID]> {
        (0..len)
            .map(|p| {
                let mut out = [0.0; GRID];
                for (i, o) in out.iter_mut().enumerate() {
                    let (a, b) = (origin + i as f64 * cell, origin + (i + 1) as f64 * cell);
                    *o = subsample_offsets()
                        .map(|s| {
                            let x = p as f64 + s;
                            edge(x, a, sigma) - edge(x, b, sigma)
                        })
                        .sum::<f64>()
                        / SUPERSAMPLE as f64;
                }
                out
            })
            .collect()
    };
    let xs = profile(w, x0);
    let ys = profile(h, y0);
    let dark = |i: usize, j: usize| -> bool {
        if i == 0 || j == 0 || i == GRID - 1 || j == GRID - 1 {
            true
        } else {
            TAG_CODE[j - 1][i - 1]
        }
    };
    let reach = size / 2.0 + 4.0 * sigma + 1.0;
    let x_lo = (c.0 - reach).floor().max(0.0) as usize;
    let y_lo = (c.1 - reach).floor().max(0.0) as usize;
    let x_hi = ((c.0 + reach).ceil() as usize).min(w);
    let y_hi = ((c.1 + reach).ceil() as usize).min(h);
    for py in y_lo..y_hi {
        for px in x_lo..x_hi {
            let mut acc = 0.0;
            for (j, &yj) in ys[py].iter().enumerate() {
                if yj == 0.0 {
                    continue;
                }
                for (i, &xi) in xs[px].iter().enumerate() {
                    if dark(i, j) {
                        acc += xi * yj;
                    }
                }
            }
            cov[py * w + px] += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalkit::{TimeSeries, Unit};

    fn still(n: usize, fps: f64) -> TimeSeries<f64> {
        TimeSeries::new(vec![0.0; n], fps, Unit::METERS).unwrap()
    }

    #[test]
    fn static_scene_frames_identical() {
        let scene = SceneConfig::default();
        let (seq, _) = render_frames(&scene, &still(5, 60.0), None).unwrap();
        assert!(seq.frames().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn unit_conversion_in_ground_truth() {
        let scene = SceneConfig::default();
        let motion = TimeSeries::from_fn(60, 60.0, Unit::METERS, |t| 0.006 * (std::f64::consts::TAU * 5.0 * t).sin()).unwrap();
        let (_, gt) = render_frames(&scene, &motion, None).unwrap();
        let (u, _) = gt.marker_trace();
        let amp = u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        assert!((amp - 3.0).abs() < 1e-9, "{amp}");
    }

    #[test]
    fn contrast_conserved_inside_marker() {
        let scene = SceneConfig::default();
        let (seq, gt) = render_frames(&scene, &still(2, 60.0), None).unwrap();
        let f = &seq.frames()[0];
        let (cx, cy) = gt.marker[0];
        let inner = scene.marker.radius - 3.0 * scene.marker.edge_softness - 1.0;
        let vals: Vec<f64> = (0..f.height())
            .flat_map(|y| (0..f.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt() < inner)
            .map(|(x, y)| f.get(x, y) as f64)
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let contrast = scene.marker.background as f64 - scene.marker.foreground as f64;
        assert!((scene.marker.background as f64 - mean - contrast).abs() <= 2.0);
    }

    #[test]
    fn coverage_integrates_to_disc_area() {
        let mut cov = vec![0.0; 64 * 64];
        disc_coverage(&mut cov, 64, 64, (31.3, 30.8), 9.0, 1.2);
        let area: f64 = cov.iter().sum();
        // erfc edge profile: integral is pi (R^2 + sigma^2)
        let expected = std::f64::consts::PI * (81.0 + 1.44);
        assert!((area - expected).abs() / expected < 1e-3, "{area}");
    }

    #[test]
    fn tag_coverage_matches_dark_cells() {
        let mut cov = vec![0.0; 64 * 64];
        tag_coverage(&mut cov, 64, 64, (32.0, 32.0), 24.0, 0.0);
        let dark_cells = 20 + TAG_CODE.iter().flatten().filter(|&&b| b).count();
        let expected = dark_cells as f64 * 16.0;
        assert!((cov.iter().sum::<f64>() - expected).abs() < 1e-9);
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let scene = SceneConfig { noise_sigma: 3.0, seed: 5, ..SceneConfig::default() };
        let d = DisturbanceModel { drift_sigma: 0.1, rotor_amplitude: 1.0, jitter_sigma: 0.2, seed: 2, ..DisturbanceModel::default() };
        let a = render_frames(&scene, &still(4, 60.0), Some(&d)).unwrap();
        let b = render_frames(&scene, &still(4, 60.0), Some(&d)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_ne!(a.0.frames()[0], a.0.frames()[1]);
    }

    #[test]
    fn common_mode_ground_truth() {
        let scene = SceneConfig { fps: 30.0, ..SceneConfig::default() };
        let d = DisturbanceModel { drift_sigma: 0.1, rotor_amplitude: 1.0, jitter_sigma: 0.2, seed: 4, ..DisturbanceModel::default() };
        let (_, gt) = render_frames(&scene, &still(200, 30.0), Some(&d)).unwrap();
        let (mu, mv) = gt.marker_trace();
        let (ru, rv) = gt.reference_trace().unwrap();
        for k in 0..gt.len() {
            assert!((mu[k] - ru[k]).abs() < 1e-12 && (mv[k] - rv[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn marker_exit_reports_frame() {
        let scene = SceneConfig::default();
        let mut xs = vec![0.0; 10];
        xs[7] = 1.0;
        let motion = TimeSeries::new(xs, 60.0, Unit::METERS).unwrap();
        assert!(matches!(render_frames(&scene, &motion, None), Err(SceneError::MarkerOutOfFrame { frame: 7 })));
    }

    #[test]
    fn rate_mismatch_rejected() {
        let scene = SceneConfig::default();
        assert!(matches!(render_frames(&scene, &still(10, 30.0), None), Err(SceneError::RateMismatch { .. })));
    }
}
