use super::{Result, TrackError};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Frame {
    pub const MIN_SIDE: usize = 16;

    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width < Self::MIN_SIDE || height < Self::MIN_SIDE {
            return Err(TrackError::InvalidFrame(format!(
                "{width}x{height} is smaller than {0}x{0}",
                Self::MIN_SIDE
            )));
        }
        if width * height != data.len() {
            return Err(TrackError::InvalidFrame(format!(
                "{width}x{height} needs {} bytes, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    /// Copies the pixels under `r`.
    pub fn crop(&self, r: Rect) -> Result<Vec<u8>> {
        if !self.bounds().contains(&r) {
            return Err(TrackError::InvalidRegion(format!("{r:?} is outside the {}x{} frame", self.width, self.height)));
        }
        let mut out = Vec::with_capacity(r.w * r.h);
        for y in r.y..r.y + r.h {
            out.extend_from_slice(&self.row(y)[r.x..r.x + r.w]);
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(u8) -> u8) -> Frame {
        Frame { width: self.width, height: self.height, data: self.data.iter().map(|&p| f(p)).collect() }
    }
}

/// Axis-aligned pixel rectangle, `x`/`y` at the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    /// Rectangle of size `w`x`h` whose centre is nearest to `(cx, cy)`.
    pub fn centered(cx: f64, cy: f64, w: usize, h: usize) -> Option<Self> {
        let x = (cx - w as f64 / 2.0).round();
        let y = (cy - h as f64 / 2.0).round();
        (x >= 0.0 && y >= 0.0).then(|| Self::new(x as usize, y as usize, w, h))
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.x + other.w <= self.x + self.w
            && other.y + other.h <= self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x as f64 + self.w as f64 / 2.0, self.y as f64 + self.h as f64 / 2.0)
    }
}

/// Frames of identical size plus their timing.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    fps: f64,
    timestamps: Option<Vec<f64>>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: f64, timestamps: Option<Vec<f64>>) -> Result<Self> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(TrackError::InvalidInput(format!("fps must be positive, got {fps}")));
        }
        if frames.is_empty() {
            return Err(TrackError::InvalidInput("frame sequence is empty".into()));
        }
        let expected = frames[0].dims();
        if let Some((index, f)) = frames.iter().enumerate().find(|(_, f)| f.dims() != expected) {
            return Err(TrackError::DimensionMismatch { index, expected, found: f.dims() });
        }
        if let Some(ts) = &timestamps {
            if ts.len() != frames.len() {
                return Err(TrackError::InvalidInput(format!(
                    "{} timestamps for {} frames",
                    ts.len(),
                    frames.len()
                )));
            }
            if ts.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(TrackError::InvalidInput("timestamps must increase strictly".into()));
            }
        }
        Ok(Self { frames, fps, timestamps })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    /// Explicit timestamp, or `k / fps` when none were supplied.
    pub fn timestamp(&self, k: usize) -> f64 {
        match &self.timestamps {
            Some(ts) => ts[k],
            None => k as f64 / self.fps,
        }
    }
}
