use serde::{Deserialize, Serialize};

use super::ncc::{ncc_prepared, PreparedTemplate};
use super::{Frame, FrameSequence, Rect, Result, TrackError};
use crate::scalar::Real;

/// Region of interest cut from one frame and tracked through the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    origin_frame: usize,
    rect: Rect,
    patch: Vec<u8>,
}

impl Template {
    pub const MIN_SIDE: usize = 8;

    pub fn new(frame: &Frame, origin_frame: usize, rect: Rect) -> Result<Self> {
        if rect.w < Self::MIN_SIDE || rect.h < Self::MIN_SIDE {
            return Err(TrackError::InvalidRegion(format!("template {}x{} is smaller than 8x8", rect.w, rect.h)));
        }
        let patch = frame.crop(rect)?;
        Ok(Self { origin_frame, rect, patch })
    }

    pub fn origin_frame(&self) -> usize {
        self.origin_frame
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn patch(&self) -> &[u8] {
        &self.patch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackConfig {
    /// Half-width of the search window around the previous estimate, px.
    pub search_radius: usize,
    /// Peak scores below this abort the track.
    pub min_score: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self { search_radius: 20, min_score: 0.5 }
    }
}

impl TrackConfig {
    pub fn with_radius(search_radius: usize) -> Self {
        Self { search_radius, ..Self::default() }
    }
}

/// Per-frame displacement of the template centre relative to frame 0, px.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelTrace<T = f64> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub score: Vec<T>,
}

impl<T: Real> PixelTrace<T> {
    pub fn new(u: Vec<T>, v: Vec<T>, score: Vec<T>) -> Result<Self> {
        if u.len() != v.len() || u.len() != score.len() {
            return Err(TrackError::InvalidInput("trace columns differ in length".into()));
        }
        Ok(Self { u, v, score })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn axis(&self, axis: super::Axis) -> &[T] {
        match axis {
            super::Axis::Horizontal => &self.u,
            super::Axis::Vertical => &self.v,
        }
    }
}

/// Follows `template` through `seq`. Each frame is searched within
/// `search_radius` of the previous estimate; the integer correlation peak is
/// refined by a least-squares quadratic surface over its 3x3 neighbourhood.
pub fn track_marker<T: Real>(seq: &FrameSequence, template: &Template, cfg: &TrackConfig) -> Result<PixelTrace<T>> {
    if template.origin_frame != 0 {
        return Err(TrackError::InvalidInput(format!(
            "template must be defined on frame 0, got frame {}",
            template.origin_frame
        )));
    }
    if cfg.search_radius < 2 {
        return Err(TrackError::InvalidInput(format!("search radius must be >= 2, got {}", cfg.search_radius)));
    }
    let prepared = PreparedTemplate::<T>::new(template)?;
    let (fw, fh) = seq.dims();
    let r = cfg.search_radius as i64;
    let (x0, y0) = (template.rect.x as f64, template.rect.y as f64);

    let n = seq.len();
    let mut trace = PixelTrace { u: Vec::with_capacity(n), v: Vec::with_capacity(n), score: Vec::with_capacity(n) };
    trace.u.push(T::zero());
    trace.v.push(T::zero());
    trace.score.push(T::one());

    let (mut px, mut py) = (x0, y0);
    for (k, frame) in seq.frames().iter().enumerate().skip(1) {
        let (cx, cy) = (px.round() as i64, py.round() as i64);
        let lo_x = (cx - r).max(0);
        let lo_y = (cy - r).max(0);
        let hi_x = (cx + r + template.rect.w as i64).min(fw as i64);
        let hi_y = (cy + r + template.rect.h as i64).min(fh as i64);
        let (sw, sh) = (hi_x - lo_x, hi_y - lo_y);
        if sw < template.rect.w as i64 + 2 || sh < template.rect.h as i64 + 2 {
            return Err(TrackError::SearchRadiusExhausted { frame: k });
        }
        let search = Rect::new(lo_x as usize, lo_y as usize, sw as usize, sh as usize);
        let surface = ncc_prepared(frame, &prepared, search)?;
        let (ix, iy) = surface.argmax();
        if ix == 0 || iy == 0 || ix + 1 == surface.width || iy + 1 == surface.height {
            return Err(TrackError::SearchRadiusExhausted { frame: k });
        }
        let peak = surface.at(ix, iy);
        if peak.as_f64() < cfg.min_score {
            return Err(TrackError::TrackLost { frame: k, score: peak.as_f64() });
        }
        let mut patch = [[0.0f64; 3]; 3];
        for (j, row) in patch.iter_mut().enumerate() {
            for (i, z) in row.iter_mut().enumerate() {
                *z = surface.at(ix + i - 1, iy + j - 1).as_f64();
            }
        }
        let (dx, dy) = quadratic_peak(&patch);
        px = (surface.origin.0 + ix) as f64 + dx;
        py = (surface.origin.1 + iy) as f64 + dy;
        trace.u.push(T::lit(px - x0));
        trace.v.push(T::lit(py - y0));
        trace.score.push(peak);
    }
    Ok(trace)
}

/// Vertex of `a + bx + cy + dx² + exy + fy²` fitted to a 3x3 patch indexed
/// `[row][col]` with the centre at (0, 0), clamped to half a pixel.
fn quadratic_peak(z: &[[f64; 3]; 3]) -> (f64, f64) {
    let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, row) in z.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            let (x, y) = (i as f64 - 1.0, j as f64 - 1.0);
            sx += x * v;
            sy += y * v;
            sxy += x * y * v;
            // x² - 2/3 and y² - 2/3 are orthogonal to the constant term.
            sxx += (x * x - 2.0 / 3.0) * v;
            syy += (y * y - 2.0 / 3.0) * v;
        }
    }
    let (b, c, e) = (sx / 6.0, sy / 6.0, sxy / 4.0);
    let (d, f) = (sxx / 2.0, syy / 2.0);
    let det = 4.0 * d * f - e * e;
    let (dx, dy) = if d < 0.0 && det > 0.0 {
        ((-2.0 * f * b + e * c) / det, (-2.0 * d * c + e * b) / det)
    } else {
        (0.0, 0.0)
    };
    (dx.clamp(-0.5, 0.5), dy.clamp(-0.5, 0.5))
}

/// Subtracts a stationary reference target's apparent motion from a target
/// trace. Scores become the per-frame minimum of the two inputs.
pub fn compensate_reference<T: Real>(target: &PixelTrace<T>, reference: &PixelTrace<T>) -> Result<PixelTrace<T>> {
    if target.len() != reference.len() {
        return Err(TrackError::LengthMismatch(target.len(), reference.len()));
    }
    let sub = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x - y).collect::<Vec<T>>();
    Ok(PixelTrace {
        u: sub(&target.u, &reference.u),
        v: sub(&target.v, &reference.v),
        score: target.score.iter().zip(&reference.score).map(|(&a, &b)| a.min(b)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quadratic(dx: f64, dy: f64) -> [[f64; 3]; 3] {
        let mut z = [[0.0; 3]; 3];
        for (j, row) in z.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                let (x, y) = (i as f64 - 1.0 - dx, j as f64 - 1.0 - dy);
                *v = 1.0 - 0.3 * x * x - 0.1 * x * y - 0.2 * y * y;
            }
        }
        z
    }

    #[test]
    fn quadratic_vertex_is_exact_for_quadratics() {
        for (dx, dy) in [(0.0, 0.0), (0.3, -0.2), (-0.45, 0.4)] {
            let (ex, ey) = quadratic_peak(&quadratic(dx, dy));
            assert!((ex - dx).abs() < 1e-12 && (ey - dy).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_patch_gives_zero_offset() {
        assert_eq!(quadratic_peak(&[[1.0; 3]; 3]), (0.0, 0.0));
    }

    fn trace(u: Vec<f64>, v: Vec<f64>) -> PixelTrace<f64> {
        let s = vec![1.0; u.len()];
        PixelTrace::new(u, v, s).unwrap()
    }

    #[test]
    fn zero_reference_is_identity() {
        let t = trace(vec![0.0, 1.5, -2.0], vec![0.0, 0.3, 0.1]);
        let z = trace(vec![0.0; 3], vec![0.0; 3]);
        assert_eq!(compensate_reference(&t, &z).unwrap(), t);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let t = trace(vec![0.0; 3], vec![0.0; 3]);
        let r = trace(vec![0.0; 4], vec![0.0; 4]);
        assert!(matches!(compensate_reference(&t, &r), Err(TrackError::LengthMismatch(3, 4))));
    }

    proptest! {
        #[test]
        fn compensation_cancels_common_mode(
            pairs in prop::collection::vec((-50i32..50, -50i32..50, -50i32..50, -50i32..50), 1..64)
        ) {
            // Quarter-pixel values keep the sums exact in binary floating point.
            let q = |x: i32| x as f64 * 0.25;
            let a = trace(pairs.iter().map(|p| q(p.0)).collect(), pairs.iter().map(|p| q(p.1)).collect());
            let b = trace(pairs.iter().map(|p| q(p.2)).collect(), pairs.iter().map(|p| q(p.3)).collect());
            let sum = trace(
                a.u.iter().zip(&b.u).map(|(x, y)| x + y).collect(),
                a.v.iter().zip(&b.v).map(|(x, y)| x + y).collect(),
            );
            let out = compensate_reference(&sum, &b).unwrap();
            prop_assert_eq!(out.u, a.u);
            prop_assert_eq!(out.v, a.v);
        }
    }
}
