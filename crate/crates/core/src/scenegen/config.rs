use serde::{Deserialize, Serialize};

use super::{Result, SceneError};
use crate::tracker::{Axis, Rect};

/// Filled dark disc on a light background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerStyle {
    /// Rest position of the disc centre, px.
    pub center: (f64, f64),
    pub radius: f64,
    pub foreground: u8,
    pub background: u8,
    /// Standard deviation of the Gaussian optical blur applied to every edge, px.
    pub edge_softness: f64,
}

/// Square block-pattern fiducial, drawn in the marker's foreground colour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TagStyle {
    pub center: (f64, f64),
    /// Side length, px.
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub meters_per_pixel: f64,
    pub marker: MarkerStyle,
    pub reference_tag: Option<TagStyle>,
    pub axis: Axis,
    /// Gaussian sensor noise, intensity levels.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 160,
            height: 96,
            fps: 60.0,
            meters_per_pixel: 0.002,
            marker: MarkerStyle { center: (56.0, 48.0), radius: 9.0, foreground: 25, background: 225, edge_softness: 1.2 },
            reference_tag: Some(TagStyle { center: (116.0, 48.0), size: 24.0 }),
            axis: Axis::Horizontal,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

/// Margin kept between drawn objects and the frame edge, px.
pub(crate) const MARGIN: f64 = 2.0;

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SceneError::InvalidConfig(msg));
        if self.width < 16 || self.height < 16 {
            return bad(format!("frame {}x{} is smaller than 16x16", self.width, self.height));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        if !(self.meters_per_pixel > 0.0 && self.meters_per_pixel.is_finite()) {
            return bad(format!("meters_per_pixel must be positive, got {}", self.meters_per_pixel));
        }
        let m = &self.marker;
        if (m.foreground as i32 - m.background as i32).abs() < 50 {
            return bad(format!("contrast {} < 50 between marker and background", (m.foreground as i32 - m.background as i32).abs()));
        }
        if !(m.radius >= 3.0) {
            return bad(format!("marker radius must be >= 3 px, got {}", m.radius));
        }
        if !(m.edge_softness >= 0.0 && m.edge_softness.is_finite()) {
            return bad(format!("edge softness must be >= 0, got {}", m.edge_softness));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise sigma must be >= 0, got {}", self.noise_sigma));
        }
        if !self.disc_fits(m.center) {
            return bad("marker does not fit inside the frame at rest".into());
        }
        if let Some(tag) = &self.reference_tag {
            if !(tag.size >= 8.0) {
                return bad(format!("reference tag must be >= 8 px, got {}", tag.size));
            }
            if !self.tag_fits(tag.center) {
                return bad("reference tag does not fit inside the frame at rest".into());
            }
        }
        Ok(())
    }

    /// Physical marker diameter implied by the scale.
    pub fn marker_diameter_m(&self) -> f64 {
        2.0 * self.marker.radius * self.meters_per_pixel
    }

    pub(crate) fn disc_fits(&self, c: (f64, f64)) -> bool {
        let r = self.marker.radius + MARGIN;
        c.0 - r >= 0.0 && c.1 - r >= 0.0 && c.0 + r <= self.width as f64 && c.1 + r <= self.height as f64
    }

    pub(crate) fn tag_fits(&self, c: (f64, f64)) -> bool {
        let Some(tag) = &self.reference_tag else { return true };
        let h = tag.size / 2.0 + MARGIN;
        c.0 - h >= 0.0 && c.1 - h >= 0.0 && c.0 + h <= self.width as f64 && c.1 + h <= self.height as f64
    }

    /// Square template around the marker at rest, including a blurred rim.
    pub fn marker_template_rect(&self) -> Rect {
        let side = (2.0 * (self.marker.radius + 3.0 * self.marker.edge_softness + 3.0)).ceil() as usize;
        let side = side.min(self.width).min(self.height);
        Rect::centered(self.marker.center.0, self.marker.center.1, side, side).unwrap_or(Rect::new(0, 0, side, side))
    }

    /// Square template around the reference tag at rest.
    pub fn tag_template_rect(&self) -> Option<Rect> {
        let tag = self.reference_tag?;
        let side = (tag.size + 2.0 * (3.0 * self.marker.edge_softness + 2.0)).ceil() as usize;
        Rect::centered(tag.center.0, tag.center.1, side, side)
    }
}
