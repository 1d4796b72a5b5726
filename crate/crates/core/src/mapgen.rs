//! Saliency maps from fixation maps, visual-angle conversion and collection
//! statistics.

use ndarray::{Array2, ArrayView2, Axis};
use thiserror::Error;

use crate::dataset::{DatasetCatalog, DatasetError};
use crate::types::{FixationMap, SaliencyMap, Scanpath};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapgenError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("sigma must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
    #[error("fixation map has no fixated pixels")]
    EmptyFixationMap,
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("no scanpaths in scope")]
    NoData,
}

fn positive(name: &'static str, value: f64) -> Result<f64, MapgenError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(MapgenError::NonPositiveInput { name, value })
    }
}

/// Pixels spanned by one degree of visual angle at the screen centre.
pub fn pixels_per_degree(
    screen_px_w: f64,
    screen_cm_w: f64,
    distance_cm: f64,
) -> Result<f64, MapgenError> {
    let px_per_cm = positive("screen_px_w", screen_px_w)? / positive("screen_cm_w", screen_cm_w)?;
    let cm_per_degree = 2.0 * positive("distance_cm", distance_cm)? * 0.5f64.to_radians().tan();
    Ok(px_per_cm * cm_per_degree)
}

/// Normalized 1-D Gaussian taps over `[-r, r]`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>, MapgenError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(MapgenError::NonPositiveSigma(sigma));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    Ok(taps.into_iter().map(|t| t / total).collect())
}

/// Mirror index into `0..len` with the edge sample repeated
/// (`d c b a | a b c d | d c b a`).
fn reflect(i: isize, len: usize) -> usize {
    let period = 2 * len as isize;
    let m = i.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn convolve_axis(input: ArrayView2<'_, f64>, taps: &[f64], axis: Axis) -> Array2<f64> {
    let radius = (taps.len() / 2) as isize;
    let mut out = Array2::zeros(input.dim());
    for (src, mut dst) in input.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        let len = src.len();
        for (i, d) in dst.iter_mut().enumerate() {
            *d = taps
                .iter()
                .enumerate()
                .map(|(t, w)| w * src[reflect(i as isize + t as isize - radius, len)])
                .sum();
        }
    }
    out
}

/// Separable Gaussian filter with reflective boundaries; no rescaling.
pub fn gaussian_filter(grid: ArrayView2<'_, f64>, sigma: f64) -> Result<Array2<f64>, MapgenError> {
    let taps = gaussian_kernel(sigma)?;
    let rows = convolve_axis(grid, &taps, Axis(1));
    Ok(convolve_axis(rows.view(), &taps, Axis(0)))
}

/// Blurs the binary map with a Gaussian of standard deviation `sigma_px` and
/// rescales the result to a peak of 1.
pub fn saliency_from_fixations(
    fixmap: &FixationMap,
    sigma_px: f64,
) -> Result<SaliencyMap, MapgenError> {
    if !(sigma_px > 0.0 && sigma_px.is_finite()) {
        return Err(MapgenError::NonPositiveSigma(sigma_px));
    }
    if fixmap.fixated_count() == 0 {
        return Err(MapgenError::EmptyFixationMap);
    }
    let blurred = gaussian_filter(fixmap.to_f64().view(), sigma_px)?;
    Ok(SaliencyMap::normalized_max(blurred)
        .expect("blur of a binary map is finite and non-negative"))
}

/// Fixation rate and saccade length over a set of scanpaths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CollectionStats {
    /// Fixations per second of viewing time.
    pub fixations_per_second: f64,
    /// Mean saccade amplitude in pixels.
    pub avg_saccade_length: f64,
    pub n_scanpaths: usize,
    pub n_fixations: usize,
    pub n_saccades: usize,
    /// Sum over scanpaths of last offset minus first onset, seconds.
    pub viewing_time: f64,
}

impl CollectionStats {
    pub fn from_scanpaths<'a>(
        scanpaths: impl IntoIterator<Item = &'a Scanpath>,
    ) -> Result<Self, StatsError> {
        let mut stats = Self::default();
        let mut saccade_total = 0.0;
        for sp in scanpaths {
            stats.n_scanpaths += 1;
            stats.n_fixations += sp.len();
            stats.viewing_time += sp.span();
            for w in sp.fixations().windows(2) {
                let (a, b) = (w[0].position(), w[1].position());
                saccade_total += (b.0 - a.0).hypot(b.1 - a.1);
                stats.n_saccades += 1;
            }
        }
        if stats.n_scanpaths == 0 {
            return Err(StatsError::NoData);
        }
        stats.fixations_per_second = if stats.viewing_time > 0.0 {
            stats.n_fixations as f64 / stats.viewing_time
        } else {
            0.0
        };
        stats.avg_saccade_length = if stats.n_saccades > 0 {
            saccade_total / stats.n_saccades as f64
        } else {
            0.0
        };
        Ok(stats)
    }
}

/// Statistics over one dataset, or over the whole catalog when `dataset`
/// is `None`. Scanpaths are visited in dataset, stimulus, subject order.
pub fn compute_statistics(
    catalog: &DatasetCatalog,
    dataset: Option<&str>,
) -> Result<CollectionStats, StatsError> {
    let names = match dataset {
        Some(name) => vec![catalog.dataset(name)?.name.clone()],
        None => catalog.list_datasets(),
    };
    let mut all = Vec::new();
    for name in &names {
        for stimulus in catalog.list_stimuli(name)? {
            all.extend(catalog.scanpaths(name, &stimulus)?);
        }
    }
    CollectionStats::from_scanpaths(&all)
}
