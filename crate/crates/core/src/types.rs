//! Domain types shared by every module: fixations, scanpaths and the
//! pixel grids that metrics operate on.
//!
//! Coordinates follow the on-disk convention: `x` is the horizontal pixel
//! coordinate (column) and `y` the vertical one (row). Coordinates are
//! real-valued; quantization to grid cells happens only where a metric needs
//! it, through [`cell_index`].

use ndarray::{Array2, Array3, ArrayView2};
use thiserror::Error;

/// Errors raised while constructing domain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("scanpath has no fixations")]
    EmptyScanpath,
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: fixation times are not monotonic")]
    NonMonotonicTime { row: usize },
    #[error("fixation map cell ({row}, {col}) holds {value}, expected 0 or 1")]
    NonBinaryCell { row: usize, col: usize, value: u8 },
    #[error(
        "saliency map cell ({row}, {col}) holds {value}, expected a finite non-negative value"
    )]
    InvalidSaliency { row: usize, col: usize, value: f64 },
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
}

/// One fixated location and the time interval (seconds) it was held.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixation {
    x: f64,
    y: f64,
    t_start: f64,
    t_end: f64,
}

impl Fixation {
    pub fn new(x: f64, y: f64, t_start: f64, t_end: f64) -> Result<Self, TypeError> {
        Self::validated(0, x, y, t_start, t_end)
    }

    fn validated(row: usize, x: f64, y: f64, t_start: f64, t_end: f64) -> Result<Self, TypeError> {
        if ![x, y, t_start, t_end].iter().all(|v| v.is_finite()) {
            return Err(TypeError::MalformedRow {
                row,
                reason: "non-finite value".into(),
            });
        }
        if t_end < t_start {
            return Err(TypeError::NonMonotonicTime { row });
        }
        Ok(Self {
            x,
            y,
            t_start,
            t_end,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    /// The row as stored on disk: `[x, y, t_start, t_end]`.
    pub fn to_row(&self) -> [f64; 4] {
        [self.x, self.y, self.t_start, self.t_end]
    }
}

/// Temporally ordered fixations of one subject on one stimulus.
///
/// Non-empty, with non-decreasing `t_start`. Overlapping intervals are
/// accepted since fixation extraction tools disagree on boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Scanpath {
    fixations: Vec<Fixation>,
    subject_id: String,
    stimulus_ref: String,
}

impl Scanpath {
    pub fn new(
        fixations: Vec<Fixation>,
        subject_id: impl Into<String>,
        stimulus_ref: impl Into<String>,
    ) -> Result<Self, TypeError> {
        if fixations.is_empty() {
            return Err(TypeError::EmptyScanpath);
        }
        if let Some(row) = fixations
            .windows(2)
            .position(|w| w[1].t_start < w[0].t_start)
        {
            return Err(TypeError::NonMonotonicTime { row: row + 1 });
        }
        Ok(Self {
            fixations,
            subject_id: subject_id.into(),
            stimulus_ref: stimulus_ref.into(),
        })
    }

    /// Builds a scanpath from `[x, y, t_start, t_end]` rows, keeping row order.
    ///
    /// Errors carry the zero-based index of the offending row.
    pub fn from_rows<R: AsRef<[f64]>>(
        rows: &[R],
        subject_id: impl Into<String>,
        stimulus_ref: impl Into<String>,
    ) -> Result<Self, TypeError> {
        if rows.is_empty() {
            return Err(TypeError::EmptyScanpath);
        }
        let mut fixations = Vec::with_capacity(rows.len());
        for (row, values) in rows.iter().enumerate() {
            let values = values.as_ref();
            if values.len() != 4 {
                return Err(TypeError::MalformedRow {
                    row,
                    reason: format!("expected 4 values, found {}", values.len()),
                });
            }
            let fixation = Fixation::validated(row, values[0], values[1], values[2], values[3])?;
            if let Some(prev) = fixations.last().map(|f: &Fixation| f.t_start) {
                if fixation.t_start < prev {
                    return Err(TypeError::NonMonotonicTime { row });
                }
            }
            fixations.push(fixation);
        }
        Self::new(fixations, subject_id, stimulus_ref)
    }

    /// Scanpath over bare positions, one second per fixation. Handy for
    /// metric work where timing is irrelevant.
    pub fn from_positions(points: &[(f64, f64)]) -> Result<Self, TypeError> {
        let rows: Vec<[f64; 4]> = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| [x, y, i as f64, i as f64 + 1.0])
            .collect();
        Self::from_rows(&rows, "", "")
    }

    pub fn fixations(&self) -> &[Fixation] {
        &self.fixations
    }

    pub fn len(&self) -> usize {
        self.fixations.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.fixations.is_empty()
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn stimulus_ref(&self) -> &str {
        &self.stimulus_ref
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.fixations.iter().map(Fixation::position).collect()
    }

    pub fn rows(&self) -> Vec<[f64; 4]> {
        self.fixations.iter().map(Fixation::to_row).collect()
    }

    /// Time from the first fixation onset to the last fixation offset.
    pub fn span(&self) -> f64 {
        let last_end = self
            .fixations
            .iter()
            .map(|f| f.t_end)
            .fold(f64::NEG_INFINITY, f64::max);
        last_end - self.fixations[0].t_start
    }
}

/// Grid cell `(row, col)` addressed by a real-valued position, clamped to
/// the grid bounds.
pub fn cell_index(x: f64, y: f64, height: usize, width: usize) -> (usize, usize) {
    fn clamp_floor(v: f64, len: usize) -> usize {
        if v <= 0.0 {
            0
        } else {
            (v.floor() as usize).min(len - 1)
        }
    }
    (clamp_floor(y, height), clamp_floor(x, width))
}

/// Binary grid marking fixated pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationMap {
    grid: Array2<u8>,
}

impl FixationMap {
    pub fn new(grid: Array2<u8>) -> Result<Self, TypeError> {
        check_dims(grid.ncols(), grid.nrows())?;
        if let Some(((row, col), &value)) = grid.indexed_iter().find(|(_, &v)| v > 1) {
            return Err(TypeError::NonBinaryCell { row, col, value });
        }
        Ok(Self { grid })
    }

    /// All-zero map of the given size.
    pub fn zeros(height: usize, width: usize) -> Result<Self, TypeError> {
        Self::new(Array2::zeros((height, width)))
    }

    /// Map with every fixation of the given scanpaths marked, using the
    /// clamped lookup of [`cell_index`].
    pub fn from_scanpaths<'a>(
        height: usize,
        width: usize,
        scanpaths: impl IntoIterator<Item = &'a Scanpath>,
    ) -> Result<Self, TypeError> {
        let mut map = Self::zeros(height, width)?;
        for sp in scanpaths {
            for f in sp.fixations() {
                map.grid[cell_index(f.x, f.y, height, width)] = 1;
            }
        }
        Ok(map)
    }

    pub fn grid(&self) -> &Array2<u8> {
        &self.grid
    }

    pub fn height(&self) -> usize {
        self.grid.nrows()
    }

    pub fn width(&self) -> usize {
        self.grid.ncols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.grid.dim()
    }

    pub fn fixated_count(&self) -> usize {
        self.grid.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_fixated(&self, row: usize, col: usize) -> bool {
        self.grid[(row, col)] == 1
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.grid.mapv(f64::from)
    }
}

/// Continuous, non-negative saliency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    grid: Array2<f64>,
}

impl SaliencyMap {
    pub fn new(grid: Array2<f64>) -> Result<Self, TypeError> {
        check_dims(grid.ncols(), grid.nrows())?;
        if let Some(((row, col), &value)) = grid
            .indexed_iter()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(TypeError::InvalidSaliency { row, col, value });
        }
        Ok(Self { grid })
    }

    /// Divides by the maximum so the peak is exactly 1. All-zero grids are
    /// returned unchanged.
    pub fn normalized_max(grid: Array2<f64>) -> Result<Self, TypeError> {
        let mut map = Self::new(grid)?;
        let max = map.max();
        if max > 0.0 {
            map.grid.mapv_inplace(|v| v / max);
        }
        Ok(map)
    }

    pub fn grid(&self) -> &Array2<f64> {
        &self.grid
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.grid.view()
    }

    pub fn into_grid(self) -> Array2<f64> {
        self.grid
    }

    pub fn height(&self) -> usize {
        self.grid.nrows()
    }

    pub fn width(&self) -> usize {
        self.grid.ncols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.grid.dim()
    }

    pub fn max(&self) -> f64 {
        self.grid.iter().copied().fold(0.0, f64::max)
    }
}

/// Decoded stimulus pixels: 2-D for grayscale images, 3-D `(row, col, rgb)`
/// for color ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Pixels {
    Gray(Array2<u8>),
    Rgb(Array3<u8>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StimulusImage {
    pixels: Pixels,
}

impl StimulusImage {
    pub fn new(pixels: Pixels) -> Result<Self, TypeError> {
        let (height, width) = match &pixels {
            Pixels::Gray(g) => g.dim(),
            Pixels::Rgb(c) => (c.shape()[0], c.shape()[1]),
        };
        check_dims(width, height)?;
        Ok(Self { pixels })
    }

    pub fn pixels(&self) -> &Pixels {
        &self.pixels
    }

    /// Horizontal dimension in pixels.
    pub fn width(&self) -> usize {
        match &self.pixels {
            Pixels::Gray(g) => g.ncols(),
            Pixels::Rgb(c) => c.shape()[1],
        }
    }

    /// Vertical dimension in pixels.
    pub fn height(&self) -> usize {
        match &self.pixels {
            Pixels::Gray(g) => g.nrows(),
            Pixels::Rgb(c) => c.shape()[0],
        }
    }

    pub fn is_grayscale(&self) -> bool {
        matches!(self.pixels, Pixels::Gray(_))
    }

    /// RGB value at `(row, col)`; grayscale pixels are replicated.
    pub fn rgb_at(&self, row: usize, col: usize) -> [u8; 3] {
        match &self.pixels {
            Pixels::Gray(g) => {
                let v = g[(row, col)];
                [v, v, v]
            }
            Pixels::Rgb(c) => [c[(row, col, 0)], c[(row, col, 1)], c[(row, col, 2)]],
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<(), TypeError> {
    if width == 0 || height == 0 {
        return Err(TypeError::EmptyImage { width, height });
    }
    Ok(())
}
