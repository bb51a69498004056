use super::{wrap_angle, AlignmentConfig, Phase, SearchDirection, TagObservation, UavState};

/// Velocity setpoint in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Command {
    /// m/s along the optical axis.
    pub forward: f64,
    /// m/s to the left.
    pub left: f64,
    /// m/s up.
    pub up: f64,
    /// rad/s, counter-clockwise.
    pub yaw_rate: f64,
}

impl Command {
    pub fn is_zero(&self) -> bool {
        self.forward == 0.0 && self.left == 0.0 && self.up == 0.0 && self.yaw_rate == 0.0
    }
}

fn in_band(obs: &TagObservation, cfg: &AlignmentConfig) -> bool {
    obs.visible && obs.pixel_radius() <= cfg.tolerance_px && (obs.range - cfg.standoff).abs() <= cfg.tolerance_range
}

fn search_sign(state: &UavState, cfg: &AlignmentConfig) -> f64 {
    match cfg.search_direction {
        SearchDirection::CounterClockwise => 1.0,
        SearchDirection::Clockwise => -1.0,
        SearchDirection::ShortestToward(h) => {
            if wrap_angle(h - state.yaw) >= 0.0 {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Proportional pull toward the standoff point, with a yaw feed-forward that
/// cancels the line-of-sight rotation caused by the translation, so the
/// bearing itself decays geometrically.
fn align_command(obs: &TagObservation, cfg: &AlignmentConfig) -> Command {
    let dt = cfg.period;
    let g = cfg.gains;
    let (s, e) = (obs.normal_offset, obs.lateral_offset);
    let ds = -g.range * (s - cfg.standoff) * dt;
    let de = -g.lateral * e * dt;
    // Camera-to-tag direction in the tag frame; its body-frame angle is the
    // bearing, which fixes the tag frame's rotation relative to the body.
    let los = (-e).atan2(-s);
    let theta = obs.bearing - los;
    let (c, sn) = (theta.cos(), theta.sin());
    let los_next = (-(e + de)).atan2(-(s + ds));
    Command {
        forward: (ds * c - de * sn) / dt,
        left: (ds * sn + de * c) / dt,
        up: -g.lateral * obs.vertical_offset,
        yaw_rate: g.yaw * obs.bearing + wrap_angle(los_next - los) / dt,
    }
}

/// One control period of the search/align/hold machine. Kinematics are
/// integrated here; platform drift is left to the caller.
pub fn alignment_step(state: &UavState, obs: &TagObservation, cfg: &AlignmentConfig) -> (UavState, Command) {
    let mut next = *state;
    next.time = state.time + cfg.period;
    let mut cmd = Command::default();
    match state.phase {
        Phase::Search => {
            if obs.visible {
                next.phase = Phase::Align;
                next.in_band_steps = 0;
                next.last_bearing = Some(obs.bearing);
            } else {
                cmd.yaw_rate = search_sign(state, cfg) * cfg.search_rate;
            }
        }
        Phase::Align => {
            if !obs.visible {
                next.in_band_steps = 0;
                let sign = match state.last_bearing {
                    Some(b) if b < 0.0 => -1.0,
                    Some(_) => 1.0,
                    None => search_sign(state, cfg),
                };
                cmd.yaw_rate = sign * cfg.search_rate;
            } else {
                next.last_bearing = Some(obs.bearing);
                next.in_band_steps = if in_band(obs, cfg) { state.in_band_steps + 1 } else { 0 };
                if next.in_band_steps >= cfg.hold_steps {
                    next.phase = Phase::Hold;
                    next.in_band_steps = 0;
                } else {
                    cmd = align_command(obs, cfg);
                }
            }
        }
        Phase::Hold => {
            if !obs.visible || obs.pixel_radius() > cfg.exit_band_px() {
                next.phase = Phase::Align;
                next.in_band_steps = 0;
            } else {
                next.last_bearing = Some(obs.bearing);
            }
        }
    }

    let dt = cfg.period;
    let (f, l) = (state.forward(), state.left());
    next.position[0] += (cmd.forward * f[0] + cmd.left * l[0]) * dt;
    next.position[1] += (cmd.forward * f[1] + cmd.left * l[1]) * dt;
    next.position[2] += cmd.up * dt;
    next.yaw = wrap_angle(state.yaw + cmd.yaw_rate * dt);
    (next, cmd)
}

#[cfg(test)]
mod tests {
    use super::super::observe::project;
    use super::super::TagPose;
    use super::*;

    fn setup() -> (UavState, TagPose, AlignmentConfig) {
        let tag = TagPose { position: [3.0, -1.0, 1.5], normal_yaw: 0.7 };
        let cfg = AlignmentConfig::default();
        let s = UavState::new(tag.standoff_point(cfg.standoff), tag.facing_yaw()).unwrap();
        (s, tag, cfg)
    }

    #[test]
    fn search_yaws_in_place() {
        let (mut s, _, cfg) = setup();
        s.yaw = 0.3;
        let (n, cmd) = alignment_step(&s, &TagObservation::not_visible(), &cfg);
        assert_eq!(n.phase, Phase::Search);
        assert_eq!(n.position, s.position);
        assert!((n.yaw - (0.3 + cfg.search_rate * cfg.period)).abs() < 1e-15);
        assert!((cmd.yaw_rate - cfg.search_rate).abs() < 1e-15);
    }

    #[test]
    fn sighting_enters_align() {
        let (s, tag, cfg) = setup();
        let (n, _) = alignment_step(&s, &project(&s, &tag, &cfg), &cfg);
        assert_eq!(n.phase, Phase::Align);
    }

    #[test]
    fn hold_inside_exit_band_is_passive() {
        let (mut s, _, cfg) = setup();
        s.phase = Phase::Hold;
        let obs = TagObservation { visible: true, bearing: 0.02, range: 1.9, pixel_offset: (30.0, -20.0), normal_offset: 1.9, lateral_offset: 0.3, ..Default::default() };
        let (n, cmd) = alignment_step(&s, &obs, &cfg);
        assert!(cmd.is_zero());
        assert_eq!(n.phase, Phase::Hold);
        assert_eq!(n.position, s.position);
        assert_eq!(n.yaw, s.yaw);
    }

    #[test]
    fn hold_exit_band_violation_realigns() {
        let (mut s, _, cfg) = setup();
        s.phase = Phase::Hold;
        let obs = TagObservation { visible: true, range: 1.5, pixel_offset: (cfg.exit_band_px() + 1.0, 0.0), ..Default::default() };
        assert_eq!(alignment_step(&s, &obs, &cfg).0.phase, Phase::Align);
        assert_eq!(alignment_step(&s, &TagObservation::not_visible(), &cfg).0.phase, Phase::Align);
    }

    #[test]
    fn proportional_yaw_law() {
        let (mut s, tag, cfg) = setup();
        s.phase = Phase::Align;
        s.yaw = wrap_angle(s.yaw + 0.01);
        let obs = project(&s, &tag, &cfg);
        let eps = -obs.bearing;
        let (_, cmd) = alignment_step(&s, &obs, &cfg);
        assert!((cmd.yaw_rate - (-cfg.gains.yaw * eps)).abs() < 1e-12);
        assert!(cmd.forward.abs() < 1e-12 && cmd.left.abs() < 1e-12);
    }

    #[test]
    fn lost_tag_turns_toward_last_side() {
        let (mut s, _, cfg) = setup();
        s.phase = Phase::Align;
        s.last_bearing = Some(-0.4);
        let (n, cmd) = alignment_step(&s, &TagObservation::not_visible(), &cfg);
        assert_eq!(n.phase, Phase::Align);
        assert!(cmd.yaw_rate < 0.0);
    }

    #[test]
    fn hold_after_consecutive_in_band_steps() {
        let (mut s, tag, cfg) = setup();
        s.phase = Phase::Align;
        for k in 0..cfg.hold_steps {
            let obs = project(&s, &tag, &cfg);
            let (n, _) = alignment_step(&s, &obs, &cfg);
            let expect = if k + 1 == cfg.hold_steps { Phase::Hold } else { Phase::Align };
            assert_eq!(n.phase, expect);
            s = n;
        }
    }

    #[test]
    fn noise_free_alignment_contracts() {
        let (_, tag, cfg) = setup();
        let n = tag.normal();
        let t = tag.tangent();
        let p = [
            tag.position[0] + 2.2 * n[0] + 0.5 * t[0],
            tag.position[1] + 2.2 * n[1] + 0.5 * t[1],
            tag.position[2] + 0.2,
        ];
        let mut s = UavState::new(p, tag.facing_yaw() + 0.2).unwrap();
        s.phase = Phase::Align;
        let mut prev = project(&s, &tag, &cfg);
        for _ in 0..200 {
            let (n, _) = alignment_step(&s, &prev, &cfg);
            if n.phase != Phase::Align {
                break;
            }
            let obs = project(&n, &tag, &cfg);
            assert!(obs.bearing.abs() <= prev.bearing.abs() + 1e-12);
            assert!(obs.lateral_offset.abs() <= prev.lateral_offset.abs() + 1e-12);
            let q = 1.0 - cfg.gains.yaw * cfg.period;
            assert!((obs.bearing - q * prev.bearing).abs() < 1e-9);
            s = n;
            prev = obs;
        }
        assert!(prev.pixel_radius() < cfg.tolerance_px);
    }
}
