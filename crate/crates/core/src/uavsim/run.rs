use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::machine::{alignment_step, Command};
use super::observe::{observe_tag, project, TagObservation};
use super::{AlignmentConfig, Phase, Result, TagPose, UavError, UavState};
use crate::scenegen::CameraOffset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub state: UavState,
    pub observation: TagObservation,
    /// Command issued from this state; zero on the final sample.
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentRun {
    pub trajectory: Vec<TrajectorySample>,
    /// Apparent image motion of the scene over the first hold segment,
    /// relative to hold entry, sampled at the control rate.
    pub camera_offset: CameraOffset,
    pub time_to_hold: f64,
}

impl AlignmentRun {
    /// Fraction of hold samples whose true tag offset is within tolerance.
    pub fn hold_in_band_fraction(&self, tag: &TagPose, cfg: &AlignmentConfig) -> f64 {
        let hold: Vec<_> = self.trajectory.iter().filter(|s| s.state.phase == Phase::Hold).collect();
        if hold.is_empty() {
            return 0.0;
        }
        let inside = hold
            .iter()
            .filter(|s| {
                let o = project(&s.state, tag, cfg);
                o.visible && o.pixel_radius() <= cfg.tolerance_px
            })
            .count();
        inside as f64 / hold.len() as f64
    }
}

/// Worst-case time from first sighting to hold for a start at the standoff
/// point: one step to switch phase, the steps for a bearing at the edge of
/// the field of view to decay under the yaw gain to the pixel tolerance, and
/// the consecutive in-band steps. The search itself adds at most
/// `pi / search_rate` when turning the short way toward the tag.
pub fn settling_bound(cfg: &AlignmentConfig) -> f64 {
    let edge = cfg.fov / 2.0;
    let target = (cfg.tolerance_px / cfg.focal_px()).atan();
    let q = 1.0 - cfg.gains.yaw * cfg.period;
    let decay = if target >= edge {
        0.0
    } else if q <= 0.0 {
        1.0
    } else {
        ((target / edge).ln() / q.ln()).ceil()
    };
    (1.0 + decay + cfg.hold_steps as f64) * cfg.period
}

/// Steps the machine from `initial` for `max_time` seconds. Hold drift is a
/// random walk of the camera position, scaled so one step moves the image
/// by `drift.drift_sigma` px at the current range.
pub fn run_alignment(initial: &UavState, tag: &TagPose, cfg: &AlignmentConfig, max_time: f64) -> Result<AlignmentRun> {
    cfg.validate()?;
    if !(max_time > 0.0 && max_time.is_finite()) {
        return Err(UavError::InvalidConfig(format!("max_time must be positive, got {max_time}")));
    }
    let steps = (max_time / cfg.period + 1e-9).floor() as usize;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut drift_rng = ChaCha8Rng::seed_from_u64(cfg.drift.seed);
    let drift = (cfg.drift.drift_sigma > 0.0).then(|| Normal::new(0.0, cfg.drift.drift_sigma).expect("validated drift"));
    let f = cfg.focal_px();

    let mut trajectory = Vec::with_capacity(steps + 1);
    let mut state = *initial;
    for k in 0..=steps {
        let obs = observe_tag(&state, tag, cfg, noise_rng.next_u64());
        if k == steps {
            trajectory.push(TrajectorySample { state, observation: obs, command: Command::default() });
            break;
        }
        let (mut next, command) = alignment_step(&state, &obs, cfg);
        trajectory.push(TrajectorySample { state, observation: obs, command });
        if let (Some(d), true) = (&drift, next.phase != Phase::Search) {
            let range = project(&next, tag, cfg).range.max(cfg.standoff);
            let m_per_px = range / f;
            let (dl, dz) = (d.sample(&mut drift_rng) * m_per_px, d.sample(&mut drift_rng) * m_per_px);
            let l = next.left();
            next.position[0] += dl * l[0];
            next.position[1] += dl * l[1];
            next.position[2] += dz;
        }
        state = next;
    }

    let Some(entry) = trajectory.iter().position(|s| s.state.phase == Phase::Hold) else {
        return Err(UavError::AlignmentTimeout { max_time, trajectory: Box::new(trajectory) });
    };
    let time_to_hold = trajectory[entry].state.time;
    let base = project(&trajectory[entry].state, tag, cfg).pixel_offset;
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for s in trajectory[entry..].iter().take_while(|s| s.state.phase == Phase::Hold) {
        let o = project(&s.state, tag, cfg);
        let p = if o.visible { o.pixel_offset } else { (*u.last().unwrap_or(&0.0) + base.0, *v.last().unwrap_or(&0.0) + base.1) };
        u.push(p.0 - base.0);
        v.push(p.1 - base.1);
    }
    Ok(AlignmentRun { trajectory, camera_offset: CameraOffset { u, v, rate: 1.0 / cfg.period }, time_to_hold })
}

/// `t,x,y,z,yaw,phase,du_px,dv_px`; pixel columns are empty when the tag is
/// out of view.
pub fn write_trajectory_csv<W: Write>(trajectory: &[TrajectorySample], mut w: W) -> std::io::Result<()> {
    w.write_all(b"t,x,y,z,yaw,phase,du_px,dv_px\n")?;
    for s in trajectory {
        let st = &s.state;
        write!(w, "{},{},{},{},{},{},", st.time, st.position[0], st.position[1], st.position[2], st.yaw, st.phase.as_str())?;
        if s.observation.visible {
            writeln!(w, "{},{}", s.observation.pixel_offset.0, s.observation.pixel_offset.1)?;
        } else {
            writeln!(w, ",")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::scenegen::DisturbanceModel;
    use crate::uavsim::{wrap_angle, SearchDirection};

    fn tag() -> TagPose {
        TagPose { position: [0.0, 0.0, 2.0], normal_yaw: 0.0 }
    }

    #[test]
    fn pre_aligned_start_holds_quickly() {
        let cfg = AlignmentConfig::default();
        let s = UavState::new(tag().standoff_point(cfg.standoff), tag().facing_yaw()).unwrap();
        let run = run_alignment(&s, &tag(), &cfg, 5.0).unwrap();
        assert!(run.time_to_hold <= 2.0, "{}", run.time_to_hold);
        assert!(run.camera_offset.u.iter().chain(&run.camera_offset.v).all(|&x| x == 0.0));
        assert!(!run.camera_offset.is_empty());
    }

    #[test]
    fn turned_away_start_within_bound() {
        let t = tag();
        let cfg = AlignmentConfig { search_direction: SearchDirection::ShortestToward(t.facing_yaw()), ..Default::default() };
        let s = UavState::new(t.standoff_point(cfg.standoff), t.facing_yaw() + PI).unwrap();
        let run = run_alignment(&s, &t, &cfg, 30.0).unwrap();
        assert!(run.time_to_hold <= PI / cfg.search_rate + settling_bound(&cfg) + 1e-9, "{}", run.time_to_hold);

        let align: Vec<_> = run.trajectory.iter().filter(|s| s.state.phase == Phase::Align).collect();
        assert!(!align.is_empty());
        for w in align.windows(2) {
            assert!(w[1].observation.bearing.abs() <= w[0].observation.bearing.abs() + 1e-12);
        }
    }

    #[test]
    fn counter_clockwise_search_still_finds_tag() {
        let t = tag();
        let cfg = AlignmentConfig::default();
        let s = UavState::new(t.standoff_point(cfg.standoff), wrap_angle(t.facing_yaw() + 0.6)).unwrap();
        let run = run_alignment(&s, &t, &cfg, 30.0).unwrap();
        assert!(run.time_to_hold > 2.0 * PI * 0.8 / cfg.search_rate);
    }

    #[test]
    fn timeout_carries_trajectory() {
        let t = tag();
        let cfg = AlignmentConfig::default();
        let s = UavState::new(t.standoff_point(cfg.standoff), t.normal_yaw).unwrap();
        match run_alignment(&s, &t, &cfg, 1.0) {
            Err(UavError::AlignmentTimeout { trajectory, .. }) => assert_eq!(trajectory.len(), 21),
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn drift_is_deterministic_and_visible_in_offset() {
        let t = tag();
        let cfg = AlignmentConfig {
            drift: DisturbanceModel { drift_sigma: 0.3, seed: 9, ..DisturbanceModel::none() },
            pixel_noise: 0.5,
            seed: 4,
            ..Default::default()
        };
        let s = UavState::new(t.standoff_point(cfg.standoff), t.facing_yaw()).unwrap();
        let a = run_alignment(&s, &t, &cfg, 20.0).unwrap();
        let b = run_alignment(&s, &t, &cfg, 20.0).unwrap();
        assert_eq!(a, b);
        assert!(a.camera_offset.u.iter().any(|&x| x.abs() > 0.1));
    }

    #[test]
    fn trajectory_csv_layout() {
        let cfg = AlignmentConfig::default();
        let s = UavState::new(tag().standoff_point(cfg.standoff), tag().normal_yaw).unwrap();
        let Err(UavError::AlignmentTimeout { trajectory, .. }) = run_alignment(&s, &tag(), &cfg, 0.1) else { panic!() };
        let mut out = Vec::new();
        write_trajectory_csv(&trajectory, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,x,y,z,yaw,phase,du_px,dv_px");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with("search,,"));
    }
}
