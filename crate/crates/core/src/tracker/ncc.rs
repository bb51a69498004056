use super::{Frame, Rect, Result, Template, TrackError};
use crate::scalar::Real;

/// Zero-normalized cross-correlation scores for every integer placement of a
/// template's top-left corner inside a search region.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSurface<T = f64> {
    /// Frame position of the placement at surface index (0, 0).
    pub origin: (usize, usize),
    pub width: usize,
    pub height: usize,
    pub scores: Vec<T>,
}

impl<T: Real> CorrelationSurface<T> {
    pub fn at(&self, ix: usize, iy: usize) -> T {
        self.scores[iy * self.width + ix]
    }

    /// Surface index of the highest score; the first one in row-major order
    /// on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }
}

/// Zero-mean template values and their norm, prepared once per track.
pub(crate) struct PreparedTemplate<T> {
    pub(crate) w: usize,
    pub(crate) h: usize,
    pub(crate) centred: Vec<T>,
    pub(crate) norm: T,
}

impl<T: Real> PreparedTemplate<T> {
    pub(crate) fn new(t: &Template) -> Result<Self> {
        let n = t.patch().len();
        let mean = t.patch().iter().map(|&p| p as f64).sum::<f64>() / n as f64;
        let centred: Vec<f64> = t.patch().iter().map(|&p| p as f64 - mean).collect();
        let norm = centred.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-9 {
            return Err(TrackError::UntrackableTemplate);
        }
        Ok(Self {
            w: t.rect().w,
            h: t.rect().h,
            centred: centred.into_iter().map(T::lit).collect(),
            norm: T::lit(norm),
        })
    }
}

pub fn ncc<T: Real>(frame: &Frame, template: &Template, search: Rect) -> Result<CorrelationSurface<T>> {
    let prepared = PreparedTemplate::new(template)?;
    ncc_prepared(frame, &prepared, search)
}

pub(crate) fn ncc_prepared<T: Real>(
    frame: &Frame,
    tpl: &PreparedTemplate<T>,
    search: Rect,
) -> Result<CorrelationSurface<T>> {
    if !frame.bounds().contains(&search) {
        return Err(TrackError::InvalidRegion(format!("search region {search:?} leaves the frame")));
    }
    if search.w < tpl.w || search.h < tpl.h {
        return Err(TrackError::InvalidRegion(format!(
            "search region {}x{} is smaller than the {}x{} template",
            search.w, search.h, tpl.w, tpl.h
        )));
    }
    let (sw, sh) = (search.w, search.h);
    // Integer integral images: window sums are exact.
    let mut sum = vec![0u64; (sw + 1) * (sh + 1)];
    let mut sq = vec![0u64; (sw + 1) * (sh + 1)];
    let mut region: Vec<T> = Vec::with_capacity(sw * sh);
    for y in 0..sh {
        let row = &frame.row(search.y + y)[search.x..search.x + sw];
        let (mut rs, mut rq) = (0u64, 0u64);
        for (x, &p) in row.iter().enumerate() {
            rs += p as u64;
            rq += (p as u64) * (p as u64);
            let i = (y + 1) * (sw + 1) + x + 1;
            sum[i] = sum[i - (sw + 1)] + rs;
            sq[i] = sq[i - (sw + 1)] + rq;
            region.push(T::count(p as usize));
        }
    }
    let window = |table: &[u64], x: usize, y: usize| -> u64 {
        let (x1, y1) = (x + tpl.w, y + tpl.h);
        table[y1 * (sw + 1) + x1] + table[y * (sw + 1) + x] - table[y * (sw + 1) + x1] - table[y1 * (sw + 1) + x]
    };

    let (ow, oh) = (sw - tpl.w + 1, sh - tpl.h + 1);
    let count = (tpl.w * tpl.h) as f64;
    let mut scores = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        for x in 0..ow {
            let s = window(&sum, x, y) as f64;
            let q = window(&sq, x, y) as f64;
            let var = q - s * s / count;
            if var <= 1e-9 {
                scores.push(T::zero());
                continue;
            }
            // Σ t'·I equals Σ t'·(I - mean I) because t' has zero mean.
            let mut cross = T::zero();
            for ty in 0..tpl.h {
                let img = &region[(y + ty) * sw + x..(y + ty) * sw + x + tpl.w];
                let t = &tpl.centred[ty * tpl.w..(ty + 1) * tpl.w];
                cross = cross + t.iter().zip(img).map(|(&a, &b)| a * b).sum::<T>();
            }
            let score = cross / (tpl.norm * T::lit(var.sqrt()));
            scores.push(score.max(-T::one()).min(T::one()));
        }
    }
    Ok(CorrelationSurface { origin: (search.x, search.y), width: ow, height: oh, scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smooth blob with an asymmetric ramp so no two placements look alike.
    pub(crate) fn textured_frame(w: usize, h: usize, dx: i64, dy: i64) -> Frame {
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let (xs, ys) = ((x - dx) as f64, (y - dy) as f64);
                let blob = 120.0 * (-((xs - 30.0).powi(2) + (ys - 26.0).powi(2)) / 40.0).exp();
                let ripple = 30.0 * (0.37 * xs + 0.21 * ys).sin() * (0.13 * xs - 0.29 * ys).cos();
                data.push((60.0 + blob + ripple).round().clamp(0.0, 255.0) as u8);
            }
        }
        Frame::new(w, h, data).unwrap()
    }

    fn template_of(f: &Frame, r: Rect) -> Template {
        Template::new(f, 0, r).unwrap()
    }

    #[test]
    fn self_match_scores_one() {
        let f = textured_frame(64, 64, 0, 0);
        let t = template_of(&f, Rect::new(20, 16, 20, 20));
        let s: CorrelationSurface<f64> = ncc(&f, &t, Rect::new(10, 6, 40, 40)).unwrap();
        let (ix, iy) = s.argmax();
        assert_eq!((s.origin.0 + ix, s.origin.1 + iy), (20, 16));
        assert!((s.at(ix, iy) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn integer_shift_found() {
        let f0 = textured_frame(64, 64, 0, 0);
        let f1 = textured_frame(64, 64, 3, -2);
        let t = template_of(&f0, Rect::new(20, 16, 20, 20));
        let s: CorrelationSurface<f64> = ncc(&f1, &t, Rect::new(10, 6, 40, 40)).unwrap();
        let (ix, iy) = s.argmax();
        assert_eq!((s.origin.0 + ix, s.origin.1 + iy), (23, 14));
    }

    #[test]
    fn inverted_frame_anticorrelates() {
        let f = textured_frame(64, 64, 0, 0);
        let t = template_of(&f, Rect::new(20, 16, 20, 20));
        let inv = f.map(|p| 255 - p);
        let s: CorrelationSurface<f64> = ncc(&inv, &t, Rect::new(20, 16, 20, 20)).unwrap();
        assert_eq!(s.scores.len(), 1);
        assert!((s.scores[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn flat_template_rejected() {
        let f = Frame::filled(32, 32, 200).unwrap();
        let err = Template::new(&f, 0, Rect::new(4, 4, 10, 10)).and_then(|t| ncc::<f64>(&f, &t, f.bounds()));
        assert!(matches!(err, Err(TrackError::UntrackableTemplate)));
    }

    #[test]
    fn search_region_checked() {
        let f = textured_frame(64, 64, 0, 0);
        let t = template_of(&f, Rect::new(20, 16, 20, 20));
        assert!(ncc::<f64>(&f, &t, Rect::new(50, 50, 20, 20)).is_err());
        assert!(ncc::<f64>(&f, &t, Rect::new(0, 0, 10, 30)).is_err());
    }

    #[test]
    fn scores_bounded() {
        let f0 = textured_frame(64, 64, 0, 0);
        let f1 = textured_frame(64, 64, 5, 7);
        let t = template_of(&f0, Rect::new(8, 8, 24, 24));
        let s: CorrelationSurface<f32> = ncc(&f1, &t, f1.bounds()).unwrap();
        assert!(s.scores.iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }
}
