use shmcam::scenegen::{render_frames, SceneConfig};
use shmcam::signalkit::{
    assess_damage, differentiate, find_fundamental, welch_psd, DiffConfig, ModalEstimate, TimeSeries, Unit, WelchConfig,
};
use shmcam::structsim::{calibrate_to_frequencies, natural_frequency, newmark_response, InitialConditions, SdofModel};
use shmcam::tracker::{calibrate_trace, track_marker, Axis, CalibrationScale, Template, TrackConfig};

const FPS: f64 = 60.0;

/// Simulates free vibration, films it, tracks the marker and identifies the
/// fundamental from the acceleration spectrum.
fn identify(model: &SdofModel<f64>, seconds: f64) -> ModalEstimate<f64> {
    let over = (100.0 * natural_frequency(model) / FPS).ceil() as usize;
    let fs = FPS * over as f64;
    let n = (seconds * fs).round() as usize + 1;
    let quiet = TimeSeries::new(vec![0.0; n], fs, Unit::METERS_PER_SECOND_SQUARED).unwrap();
    let r = newmark_response(model, &quiet, &InitialConditions::displaced(0.012)).unwrap();
    let motion = r.displacement.decimate(over).unwrap();

    let scene = SceneConfig::default();
    let (seq, _) = render_frames(&scene, &motion, None).unwrap();
    let template = Template::new(&seq.frames()[0], 0, scene.marker_template_rect()).unwrap();
    let trace = track_marker::<f64>(&seq, &template, &TrackConfig::default()).unwrap();
    let scale = CalibrationScale::new(scene.meters_per_pixel, Axis::Horizontal).unwrap();
    let disp = calibrate_trace(&trace, &scale, FPS).unwrap();
    let diff = DiffConfig::for_sample_rate(FPS);
    let accel = differentiate(&differentiate(&disp, diff).unwrap(), diff).unwrap();
    let spectrum = welch_psd(&accel, &WelchConfig::new(1024)).unwrap();
    find_fundamental(&spectrum, (0.5, 0.9 * FPS / 2.0)).unwrap()
}

fn frame_model() -> SdofModel<f64> {
    let mut m = calibrate_to_frequencies(5.09, 4.51, 0.240).unwrap();
    m.damping_ratio = 0.01;
    m
}

#[test]
fn healthy_fundamental_within_one_bin() {
    let est = identify(&frame_model(), 60.0);
    println!("healthy {:.4} Hz, resolution {:.4}", est.frequency, est.resolution);
    assert!((est.frequency - 5.09).abs() <= 0.06);
}

#[test]
fn added_mass_detected_and_monotone() {
    let base = frame_model();
    let h = identify(&base, 60.0);
    let d = identify(&base.with_added_mass(0.240), 60.0);
    let a = assess_damage(&h, &d, 5.09, 4.51).unwrap();
    println!("shift {:.4} Hz", a.shift);
    assert!(a.damage_detected);
    assert!((a.shift - 0.58).abs() <= 0.12);

    let freqs: Vec<f64> = [0.1, 0.24, 0.5].iter().map(|&dm| identify(&base.with_added_mass(dm), 60.0).frequency).collect();
    assert!(freqs.windows(2).all(|w| w[1] < w[0]), "{freqs:?}");
}
