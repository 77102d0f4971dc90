//! Data carriers for the encoder stage.

use crate::error::{CoreError, Result};

/// In-memory raster image, row-major, channel-interleaved, values in
/// [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(CoreError::Input(format!("channels must be 1 or 3, got {channels}")));
        }
        if width == 0 || height == 0 {
            return Err(CoreError::Input("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height * channels {
            return Err(CoreError::Shape(format!(
                "pixel count {} does not match {width}x{height}x{channels}",
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(CoreError::Range("pixel values must lie in [0, 1]".into()));
        }
        Ok(Self { width, height, channels, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize, ch: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + ch]
    }

    /// Iterator over one channel's values in row-major order.
    pub fn channel_values(&self, ch: usize) -> impl Iterator<Item = f64> + '_ {
        self.pixels
            .iter()
            .skip(ch)
            .step_by(self.channels)
            .copied()
    }

    /// Copy out the `w x h` sub-image anchored at (x0, y0).
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Image {
        assert!(x0 + w <= self.width && y0 + h <= self.height, "crop out of bounds");
        let mut pixels = Vec::with_capacity(w * h * self.channels);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            pixels.extend_from_slice(&self.pixels[start..start + w * self.channels]);
        }
        Image { width: w, height: h, channels: self.channels, pixels }
    }
}

/// Time-ordered tactile frames with millisecond timestamps.
#[derive(Debug, Clone)]
pub struct TactileClip {
    frames: Vec<Image>,
    timestamps_ms: Vec<i64>,
    sensor_id: String,
}

impl TactileClip {
    pub fn new(frames: Vec<Image>, timestamps_ms: Vec<i64>, sensor_id: String) -> Result<Self> {
        if frames.len() != timestamps_ms.len() {
            return Err(CoreError::Shape(format!(
                "{} frames but {} timestamps",
                frames.len(),
                timestamps_ms.len()
            )));
        }
        if timestamps_ms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::Input("timestamps must be strictly increasing".into()));
        }
        Ok(Self { frames, timestamps_ms, sensor_id })
    }

    /// Deterministic synthetic clip: sliding-gradient frames at the
    /// given frame rate. Useful for tests and self-checks.
    pub fn synthetic(fps: f64, n_frames: usize, width: usize, height: usize, sensor_id: &str) -> Result<Self> {
        if !(fps > 0.0) {
            return Err(CoreError::Input("fps must be positive".into()));
        }
        let mut frames = Vec::with_capacity(n_frames);
        let mut timestamps = Vec::with_capacity(n_frames);
        for i in 0..n_frames {
            let pixels = (0..height)
                .flat_map(|y| {
                    (0..width).map(move |x| ((x + y + i) % 17) as f64 / 16.0)
                })
                .collect();
            frames.push(Image::new(width, height, 1, pixels)?);
            timestamps.push((i as f64 * 1000.0 / fps).round() as i64);
        }
        Self::new(frames, timestamps, sensor_id.to_string())
    }

    pub fn frames(&self) -> &[Image] {
        &self.frames
    }

    pub fn timestamps_ms(&self) -> &[i64] {
        &self.timestamps_ms
    }

    pub fn sensor_id(&self) -> &str {
        &self.sensor_id
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// G x G sub-images in row-major order.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    grid_size: usize,
    regions: Vec<Image>,
}

impl RegionGrid {
    pub fn new(grid_size: usize, regions: Vec<Image>) -> Result<Self> {
        if regions.len() != grid_size * grid_size {
            return Err(CoreError::Shape(format!(
                "{} regions does not match grid {grid_size}x{grid_size}",
                regions.len()
            )));
        }
        Ok(Self { grid_size, regions })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn regions(&self) -> &[Image] {
        &self.regions
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Vision,
    Tactile,
    Text,
}

/// Ordered list of same-dimension embedding vectors from one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    dim: usize,
    modality: Modality,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingSequence {
    pub fn empty(dim: usize, modality: Modality) -> Self {
        Self { dim, modality, vectors: Vec::new() }
    }

    pub fn from_vectors(dim: usize, modality: Modality, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let mut seq = Self::empty(dim, modality);
        for v in vectors {
            seq.push(v)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(CoreError::Shape(format!(
                "embedding length {} does not match sequence dim {}",
                v.len(),
                self.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::Numeric("non-finite embedding entry".into()));
        }
        self.vectors.push(v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Frozen marker embeddings delimiting the vision and tactile spans.
/// Immutable after construction; there are no mutating accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTokens {
    img_start: Vec<f64>,
    img_end: Vec<f64>,
    tact_start: Vec<f64>,
    tact_end: Vec<f64>,
}

impl BoundaryTokens {
    pub fn new(
        img_start: Vec<f64>,
        img_end: Vec<f64>,
        tact_start: Vec<f64>,
        tact_end: Vec<f64>,
    ) -> Result<Self> {
        let d = img_start.len();
        for (name, v) in [
            ("img_start", &img_start),
            ("img_end", &img_end),
            ("tact_start", &tact_start),
            ("tact_end", &tact_end),
        ] {
            if v.len() != d {
                return Err(CoreError::Shape(format!(
                    "boundary token '{name}' has dim {}, expected {d}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(CoreError::Numeric(format!("non-finite entry in token '{name}'")));
            }
        }
        Ok(Self { img_start, img_end, tact_start, tact_end })
    }

    pub fn dim(&self) -> usize {
        self.img_start.len()
    }

    pub fn img_start(&self) -> &[f64] {
        &self.img_start
    }

    pub fn img_end(&self) -> &[f64] {
        &self.img_end
    }

    pub fn tact_start(&self) -> &[f64] {
        &self.tact_start
    }

    pub fn tact_end(&self) -> &[f64] {
        &self.tact_end
    }

    /// Tokens are frozen at initialization; nothing can unfreeze them.
    pub fn frozen(&self) -> bool {
        true
    }
}
