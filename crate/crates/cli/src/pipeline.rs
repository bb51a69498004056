use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use shmcam::scenegen::{inject_platform_disturbance, render_with_offset, write_ground_truth_csv, CameraOffset, GroundTruth};
use shmcam::signalkit::{
    differentiate, find_fundamental, percent_error, read_timeseries_csv, welch_psd, write_spectrum_csv,
    write_timeseries_csv, ModalEstimate, TimeSeries, Unit,
};
use shmcam::structsim::{chirp_excitation, natural_frequency, newmark_response, ChirpParams};
use shmcam::tracker::{
    calibrate_trace, compensate_reference, load_frames, read_trace_csv, save_frames, scale_from_marker,
    track_marker, write_trace_csv, FrameSequence, PixelTrace, Template,
};
use shmcam::uavsim::{run_alignment, write_trajectory_csv, UavState};

use crate::config::{AnalysisSignal, Condition, Excitation, ScenarioConfig};
use crate::report::{assess_pair, RunReport};
use crate::{CliError, Result};

pub const MOTION: &str = "motion.csv";
pub const MANIFEST: &str = "manifest.toml";
pub const GROUND_TRUTH: &str = "ground_truth.csv";
pub const TRAJECTORY: &str = "trajectory.csv";
pub const MARKER_TRACE: &str = "marker_trace.csv";
pub const REFERENCE_TRACE: &str = "reference_trace.csv";
pub const TRACE: &str = "trace.csv";
pub const DISPLACEMENT: &str = "displacement.csv";
pub const ACCEL: &str = "accel.csv";
pub const SPECTRUM: &str = "spectrum.csv";
pub const REPORT: &str = "report.json";

pub fn case_dir(out: &Path, cfg: &ScenarioConfig) -> PathBuf {
    out.join(&cfg.case_id)
}

fn stage_err<'a>(stage: &'static str, cfg: &'a ScenarioConfig) -> impl Fn(String) -> CliError + 'a {
    move |message| CliError::Stage { stage, case: cfg.case_id.clone(), message }
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes a file through `f` and flushes it, reporting any failure as text.
fn save<E: ToString>(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::result::Result<(), E>) -> std::result::Result<(), String> {
    let mut w = create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    f(&mut w).map_err(|e| e.to_string())?;
    w.flush().map_err(|e| format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> std::io::Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Structural response at the frame rate, in metres. Integration runs at an
/// integer multiple of the frame rate fine enough for the integrator and is
/// then sampled at frame instants.
pub fn simulate(cfg: &ScenarioConfig, out: &Path) -> Result<TimeSeries<f64>> {
    let fail = stage_err("simulate", cfg);
    let model = cfg.model()?;
    let fps = cfg.camera.fps;
    let over = ((100.0 * natural_frequency(&model) / fps).ceil() as usize).max(1);
    let fs = fps * over as f64;
    let duration = cfg.excitation.duration();
    let base = match cfg.excitation {
        Excitation::FreeVibration { .. } => {
            let n = (duration * fs).round() as usize + 1;
            TimeSeries::new(vec![0.0; n], fs, Unit::METERS_PER_SECOND_SQUARED).map_err(|e| fail(e.to_string()))?
        }
        Excitation::Chirp { amplitude, f_start, f_end, sweep_duration, .. } => {
            let p = ChirpParams { amplitude, f_start, f_end, duration: sweep_duration };
            chirp_excitation(&p, fs, duration).map_err(|e| fail(e.to_string()))?
        }
    };
    let response = newmark_response(&model, &base, &cfg.initial_conditions()).map_err(|e| fail(e.to_string()))?;
    let motion = response.displacement.decimate(over).map_err(|e| fail(e.to_string()))?;

    let dir = case_dir(out, cfg);
    fs::create_dir_all(&dir).map_err(|e| fail(e.to_string()))?;
    save(&dir.join(MOTION), |w| write_timeseries_csv(&motion, w)).map_err(&fail)?;
    Ok(motion)
}

fn read_motion(cfg: &ScenarioConfig, out: &Path, stage: &'static str) -> Result<TimeSeries<f64>> {
    let fail = stage_err(stage, cfg);
    let r = open(&case_dir(out, cfg).join(MOTION)).map_err(|e| fail(e.to_string()))?;
    read_timeseries_csv(r, Unit::METERS).map_err(|e| fail(e.to_string()))
}

/// Camera offset per frame: platform disturbance plus, when a hover phase is
/// configured, the drone's drift after alignment.
fn camera_offset(cfg: &ScenarioConfig, n: usize, dir: &Path) -> Result<(CameraOffset, Option<f64>)> {
    let fail = stage_err("render", cfg);
    let fps = cfg.camera.fps;
    let mut offset = match cfg.disturbance_model() {
        Some(d) => inject_platform_disturbance(n, fps, &d).map_err(|e| fail(e.to_string()))?,
        None => CameraOffset::zeros(n, fps),
    };
    let mut time_to_hold = None;
    if let Some(u) = cfg.uav {
        let tag = cfg.uav_tag();
        let align = cfg.alignment();
        let start = UavState::new(tag.standoff_point(align.standoff), tag.facing_yaw() + u.initial_yaw_deg.to_radians())
            .map_err(|e| fail(e.to_string()))?;
        let max_time = u.max_search_time + n as f64 / fps + 1.0;
        let run = run_alignment(&start, &tag, &align, max_time).map_err(|e| fail(e.to_string()))?;
        save(&dir.join(TRAJECTORY), |w| write_trajectory_csv(&run.trajectory, w)).map_err(&fail)?;
        let hover = run.camera_offset.resample(fps, n);
        offset = offset.plus(&hover).map_err(|e| fail(e.to_string()))?;
        time_to_hold = Some(run.time_to_hold);
    }
    Ok((offset, time_to_hold))
}

pub fn render(cfg: &ScenarioConfig, out: &Path) -> Result<(FrameSequence, GroundTruth)> {
    let fail = stage_err("render", cfg);
    let motion = read_motion(cfg, out, "render")?;
    let dir = case_dir(out, cfg);
    let (offset, _) = camera_offset(cfg, motion.len(), &dir)?;
    let (seq, gt) = render_with_offset(&cfg.scene(), &motion, &offset).map_err(|e| fail(e.to_string()))?;
    let frames_dir = dir.join("frames");
    if frames_dir.exists() {
        fs::remove_dir_all(&frames_dir).map_err(|e| fail(e.to_string()))?;
    }
    save_frames(&seq, &dir).map_err(|e| fail(e.to_string()))?;
    save(&dir.join(GROUND_TRUTH), |w| write_ground_truth_csv(&gt, w)).map_err(&fail)?;
    Ok((seq, gt))
}

/// Tracks the marker and, when the scene has one, the reference tag, and
/// writes the compensated trace.
pub fn track(cfg: &ScenarioConfig, out: &Path) -> Result<PixelTrace<f64>> {
    let fail = stage_err("track", cfg);
    let dir = case_dir(out, cfg);
    let seq = load_frames(dir.join(MANIFEST)).map_err(|e| fail(e.to_string()))?;
    let scene = cfg.scene();
    let tc = cfg.track_config();
    let first = &seq.frames()[0];
    let marker_t = Template::new(first, 0, scene.marker_template_rect()).map_err(|e| fail(e.to_string()))?;
    let marker = track_marker::<f64>(&seq, &marker_t, &tc).map_err(|e| fail(e.to_string()))?;
    let write = |name: &str, t: &PixelTrace<f64>| -> Result<()> {
        save(&dir.join(name), |w| write_trace_csv(t, w)).map_err(&fail)
    };
    write(MARKER_TRACE, &marker)?;
    let trace = match scene.tag_template_rect() {
        Some(rect) => {
            let tag_t = Template::new(first, 0, rect).map_err(|e| fail(e.to_string()))?;
            let reference = track_marker::<f64>(&seq, &tag_t, &tc).map_err(|e| fail(e.to_string()))?;
            write(REFERENCE_TRACE, &reference)?;
            compensate_reference(&marker, &reference).map_err(|e| fail(e.to_string()))?
        }
        None => marker,
    };
    write(TRACE, &trace)?;
    Ok(trace)
}

/// Converts the stored trace to displacement and acceleration, estimates the
/// spectrum and identifies the fundamental. Everything in the returned report
/// is recomputed from `trace.csv`.
pub fn analyze(cfg: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let fail = stage_err("analyze", cfg);
    let dir = case_dir(out, cfg);
    let trace: PixelTrace<f64> =
        read_trace_csv(open(&dir.join(TRACE)).map_err(|e| fail(e.to_string()))?).map_err(|e| fail(e.to_string()))?;
    let modal = analyze_trace(cfg, &trace, &dir)?;
    let reference = cfg.analysis.reference(cfg.condition);
    let err = percent_error(modal.frequency, reference).map_err(|e| fail(e.to_string()))?;
    let time_to_hold = time_to_hold(&dir);
    let report = RunReport::new(cfg, modal, reference, err, time_to_hold, &dir);
    report.write(&dir.join(REPORT)).map_err(|e| fail(e.to_string()))?;
    Ok(report)
}

fn time_to_hold(dir: &Path) -> Option<f64> {
    let text = fs::read_to_string(dir.join(TRAJECTORY)).ok()?;
    text.lines().skip(1).find_map(|l| {
        let cols: Vec<&str> = l.split(',').collect();
        (cols.get(5) == Some(&"hold")).then(|| cols[0].parse().ok()).flatten()
    })
}

fn analyze_trace(cfg: &ScenarioConfig, trace: &PixelTrace<f64>, dir: &Path) -> Result<ModalEstimate<f64>> {
    let fail = stage_err("analyze", cfg);
    let fps = cfg.camera.fps;
    let scene = cfg.scene();
    let scale = scale_from_marker(scene.marker_diameter_m(), 2.0 * scene.marker.radius, scene.axis)
        .map_err(|e| fail(e.to_string()))?;
    let disp = calibrate_trace(trace, &scale, fps).map_err(|e| fail(e.to_string()))?;
    let diff = cfg.analysis.diff(fps);
    let vel = differentiate(&disp, diff).map_err(|e| fail(e.to_string()))?;
    let accel = differentiate(&vel, diff).map_err(|e| fail(e.to_string()))?;
    for (name, ts) in [(DISPLACEMENT, &disp), (ACCEL, &accel)] {
        save(&dir.join(name), |w| write_timeseries_csv(ts, w)).map_err(&fail)?;
    }
    let signal = match cfg.analysis.signal {
        AnalysisSignal::Displacement => &disp,
        AnalysisSignal::Acceleration => &accel,
    };
    let spectrum = welch_psd(signal, &cfg.analysis.welch(signal.len())).map_err(|e| fail(e.to_string()))?;
    save(&dir.join(SPECTRUM), |w| write_spectrum_csv(&spectrum, w)).map_err(&fail)?;
    find_fundamental(&spectrum, cfg.analysis.band(fps)).map_err(|e| fail(e.to_string()))
}

/// Runs every stage for one case.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    simulate(cfg, out)?;
    render(cfg, out)?;
    track(cfg, out)?;
    analyze(cfg, out)
}

/// Runs a set of cases concurrently, then scores each healthy/damaged pair and
/// rewrites the reports with their assessments. Reports come back ordered by
/// case id.
pub fn run_suite(cases: &[ScenarioConfig], out: &Path) -> Result<Vec<RunReport>> {
    let mut reports = cases.par_iter().map(|c| run_scenario(c, out)).collect::<Result<Vec<_>>>()?;
    attach_assessments(cases, &mut reports, out)?;
    reports.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    Ok(reports)
}

/// Pairs reports by label and stores the damage assessment on both members.
pub fn attach_assessments(cases: &[ScenarioConfig], reports: &mut [RunReport], out: &Path) -> Result<()> {
    let find = |pair: &str, cond: Condition| reports.iter().position(|r| r.pair == pair && r.condition == cond);
    let mut updates = Vec::new();
    for cfg in cases.iter().filter(|c| c.condition == Condition::Healthy) {
        let pair = cfg.pair_label();
        let (Some(h), Some(d)) = (find(&pair, Condition::Healthy), find(&pair, Condition::Damaged)) else {
            continue;
        };
        let a = assess_pair(&reports[h], &reports[d], &cfg.analysis).map_err(|e| CliError::Stage {
            stage: "assess",
            case: cfg.case_id.clone(),
            message: e.to_string(),
        })?;
        updates.push((h, a));
        updates.push((d, a));
    }
    for (i, a) in updates {
        reports[i].assessment = Some(a);
        let path = out.join(&reports[i].case_id).join(REPORT);
        reports[i].write(&path).map_err(|e| CliError::Stage {
            stage: "assess",
            case: reports[i].case_id.clone(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

/// Reads back the stored report of each case.
pub fn load_reports(cases: &[ScenarioConfig], out: &Path) -> Result<Vec<RunReport>> {
    let mut reports = cases
        .iter()
        .map(|c| {
            RunReport::read(&case_dir(out, c).join(REPORT)).map_err(|e| CliError::Stage {
                stage: "load report",
                case: c.case_id.clone(),
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    Ok(reports)
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    std::fs::write(path, text)
}
