//! Scanpath similarity: Euclidean, string-edit, time-delay embedding and
//! scaled time-delay embedding.

use thiserror::Error;

use crate::types::Scanpath;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("scanpaths have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("embedding dimension k must be positive")]
    KNonPositive,
    #[error(
        "embedding dimension k={k} must be smaller than both scanpath lengths (min {min_len})"
    )]
    KTooLarge { k: usize, min_len: usize },
    #[error("scanpaths need at least 2 fixations each, shortest has {min_len}")]
    ScanpathTooShort { min_len: usize },
    #[error("invalid grid: n={n}, image {width}x{height}")]
    InvalidGrid { n: usize, width: f64, height: f64 },
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDims { width: f64, height: f64 },
}

/// Aggregation of window-to-cloud distances in the time-delay embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TdeMode {
    /// Mean over windows of the minimal distance.
    #[default]
    MeanMinimal,
    /// Maximum over windows of the minimal distance.
    Hausdorff,
}

/// Regular `n x n` partition of an image used to tokenize scanpaths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    width: f64,
    height: f64,
}

impl GridSpec {
    pub const DEFAULT_N: usize = 5;

    pub fn new(n: usize, width: f64, height: f64) -> Result<Self, MetricError> {
        if n == 0 || !(width > 0.0 && width.is_finite()) || !(height > 0.0 && height.is_finite()) {
            return Err(MetricError::InvalidGrid { n, width, height });
        }
        Ok(Self { n, width, height })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Token of the cell holding `(x, y)`; positions outside the image map
    /// to the nearest border cell.
    pub fn token(&self, x: f64, y: f64) -> usize {
        let n = self.n;
        let axis = |v: f64, len: f64| -> usize {
            let v = v.clamp(0.0, len);
            ((v * n as f64 / len).floor() as usize).min(n - 1)
        };
        axis(y, self.height) * n + axis(x, self.width)
    }
}

/// Mean Euclidean distance between corresponding fixations.
///
/// Scanpaths must have equal length unless `truncate` is set, in which case
/// both are cut to the shorter length.
pub fn euclidean_distance(s: &Scanpath, h: &Scanpath, truncate: bool) -> Result<f64, MetricError> {
    if s.len() != h.len() && !truncate {
        return Err(MetricError::LengthMismatch {
            left: s.len(),
            right: h.len(),
        });
    }
    let n = s.len().min(h.len());
    let total: f64 = s
        .fixations()
        .iter()
        .zip(h.fixations())
        .map(|(a, b)| dist(a.position(), b.position()))
        .sum();
    Ok(total / n as f64)
}

/// Token sequence of a scanpath on the given grid; one token per fixation.
pub fn quantize_to_tokens(s: &Scanpath, grid: &GridSpec) -> Vec<usize> {
    s.fixations()
        .iter()
        .map(|f| grid.token(f.x(), f.y()))
        .collect()
}

/// Levenshtein distance with unit insertion/deletion cost and the given
/// substitution cost.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T], substitution_cost: f64) -> f64 {
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64).collect();
    let mut curr = vec![0.0; b.len() + 1];
    for (i, ta) in a.iter().enumerate() {
        curr[0] = (i + 1) as f64;
        for (j, tb) in b.iter().enumerate() {
            let sub = if ta == tb { 0.0 } else { substitution_cost };
            curr[j + 1] = (prev[j] + sub).min(prev[j + 1] + 1.0).min(curr[j] + 1.0);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// String-edit distance between the grid tokenizations of two scanpaths
/// over a stimulus of `width x height` pixels.
pub fn string_edit_distance(
    s: &Scanpath,
    h: &Scanpath,
    (width, height): (f64, f64),
    n: usize,
    substitution_cost: f64,
) -> Result<f64, MetricError> {
    let grid = GridSpec::new(n, width, height)?;
    Ok(levenshtein(
        &quantize_to_tokens(s, &grid),
        &quantize_to_tokens(h, &grid),
        substitution_cost,
    ))
}

/// Time-delay embedding distance of `s` from `h` with windows of `k`
/// consecutive fixations.
///
/// Not symmetric: windows of `s` are matched against the cloud of `h`.
pub fn tde_distance(
    s: &Scanpath,
    h: &Scanpath,
    k: usize,
    mode: TdeMode,
) -> Result<f64, MetricError> {
    check_k(k, s.len().min(h.len()))?;
    Ok(tde_points(&s.positions(), &h.positions(), k, mode))
}

fn check_k(k: usize, min_len: usize) -> Result<(), MetricError> {
    if k == 0 {
        return Err(MetricError::KNonPositive);
    }
    if k >= min_len {
        return Err(MetricError::KTooLarge { k, min_len });
    }
    Ok(())
}

fn tde_points(s: &[(f64, f64)], h: &[(f64, f64)], k: usize, mode: TdeMode) -> f64 {
    let minima = s.windows(k).map(|x| {
        h.windows(k)
            .map(|y| window_distance(x, y))
            .fold(f64::INFINITY, f64::min)
    });
    match mode {
        TdeMode::MeanMinimal => {
            let count = s.len() - k + 1;
            minima.sum::<f64>() / count as f64
        }
        TdeMode::Hausdorff => minima.fold(0.0, f64::max),
    }
}

/// Mean of the pointwise distances between two aligned windows.
fn window_distance(x: &[(f64, f64)], y: &[(f64, f64)]) -> f64 {
    let total: f64 = x.iter().zip(y).map(|(&a, &b)| dist(a, b)).sum();
    total / x.len() as f64
}

/// Scaled time-delay embedding similarity in `(0, 1]`.
///
/// Coordinates are divided by the larger image side, then the mean-minimal
/// TDE is averaged over every window length `1..min(n, m)` and mapped
/// through `exp(-mean)`.
pub fn scaled_tde(
    s: &Scanpath,
    h: &Scanpath,
    (width, height): (f64, f64),
) -> Result<f64, MetricError> {
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(MetricError::InvalidDims { width, height });
    }
    let min_len = s.len().min(h.len());
    if min_len < 2 {
        return Err(MetricError::ScanpathTooShort { min_len });
    }
    let scale = width.max(height);
    let normalize = |sp: &Scanpath| -> Vec<(f64, f64)> {
        sp.positions()
            .into_iter()
            .map(|(x, y)| (x / scale, y / scale))
            .collect()
    };
    let (s, h) = (normalize(s), normalize(h));
    let ks = 1..min_len;
    let count = ks.len();
    let total: f64 = ks
        .map(|k| tde_points(&s, &h, k, TdeMode::MeanMinimal))
        .sum();
    Ok((-total / count as f64).exp())
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(points: &[(f64, f64)]) -> Scanpath {
        Scanpath::from_positions(points).unwrap()
    }

    /// Exhaustive recursion over all alignments.
    fn brute_levenshtein(a: &[usize], b: &[usize], sub: f64) -> f64 {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len() as f64,
            (_, None) => a.len() as f64,
            (Some((ha, ra)), Some((hb, rb))) => {
                let cost = if ha == hb { 0.0 } else { sub };
                (brute_levenshtein(ra, rb, sub) + cost)
                    .min(brute_levenshtein(ra, b, sub) + 1.0)
                    .min(brute_levenshtein(a, rb, sub) + 1.0)
            }
        }
    }

    #[test]
    fn euclidean_examples() {
        let a = sp(&[(1.0, 2.0), (3.0, 5.0)]);
        assert_eq!(euclidean_distance(&a, &a, false).unwrap(), 0.0);
        assert_eq!(
            euclidean_distance(&sp(&[(0.0, 0.0)]), &sp(&[(3.0, 4.0)]), false).unwrap(),
            5.0
        );
        assert_eq!(
            euclidean_distance(
                &sp(&[(0.0, 0.0), (2.0, 0.0)]),
                &sp(&[(0.0, 0.0), (0.0, 0.0)]),
                false
            )
            .unwrap(),
            1.0
        );
    }

    #[test]
    fn euclidean_length_mismatch() {
        let a = sp(&[(0.0, 0.0), (2.0, 0.0)]);
        let b = sp(&[(0.0, 0.0)]);
        assert_eq!(
            euclidean_distance(&a, &b, false),
            Err(MetricError::LengthMismatch { left: 2, right: 1 })
        );
        assert_eq!(euclidean_distance(&a, &b, true).unwrap(), 0.0);
    }

    #[test]
    fn tokens() {
        let g1 = GridSpec::new(1, 100.0, 100.0).unwrap();
        assert_eq!(
            quantize_to_tokens(&sp(&[(5.0, 90.0), (99.0, 0.0)]), &g1),
            vec![0, 0]
        );
        let g5 = GridSpec::new(5, 100.0, 100.0).unwrap();
        assert_eq!(g5.token(10.0, 10.0), 0);
        assert_eq!(g5.token(99.9, 50.0), 14);
        assert_eq!(g5.token(100.0, 100.0), 24);
        assert_eq!(g5.token(-5.0, 250.0), 20);
        assert!(GridSpec::new(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein(&[0, 1], &[0, 1], 1.0), 0.0);
        // A=0 ... F=5, Z=6
        assert_eq!(brute_levenshtein(&[0, 1], &[0, 2], 1.0), 1.0);
        assert_eq!(levenshtein(&[0, 1], &[0, 2], 1.0), 1.0);
        let abcdef = [0, 1, 2, 3, 4, 5];
        let zabcde = [6, 0, 1, 2, 3, 4];
        assert_eq!(brute_levenshtein(&abcdef, &zabcde, 1.0), 2.0);
        assert_eq!(levenshtein(&abcdef, &zabcde, 1.0), 2.0);
        assert_eq!(levenshtein::<u8>(&[], &[1, 2], 1.0), 2.0);
        // substitution dearer than delete+insert
        assert_eq!(levenshtein(&[0], &[1], 3.0), 2.0);
    }

    #[test]
    fn string_edit_uses_grid() {
        let a = sp(&[(10.0, 10.0), (60.0, 60.0)]);
        let b = sp(&[(12.0, 15.0), (62.0, 90.0)]);
        assert_eq!(
            string_edit_distance(&a, &b, (100.0, 100.0), 5, 1.0).unwrap(),
            1.0
        );
        assert_eq!(
            string_edit_distance(&a, &b, (100.0, 100.0), 1, 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn tde_examples() {
        let s = sp(&[(0.0, 0.0), (0.0, 0.0)]);
        let h = sp(&[(3.0, 4.0), (3.0, 4.0)]);
        assert_eq!(tde_distance(&s, &h, 1, TdeMode::MeanMinimal).unwrap(), 5.0);

        let s = sp(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)]);
        let h = sp(&[(0.0, 0.0), (10.0, 0.0)]);
        let mm = tde_distance(&s, &h, 1, TdeMode::MeanMinimal).unwrap();
        assert!((mm - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(tde_distance(&s, &h, 1, TdeMode::Hausdorff).unwrap(), 10.0);
        // asymmetry: every window of h has an exact match in s
        assert_eq!(tde_distance(&h, &s, 1, TdeMode::MeanMinimal).unwrap(), 0.0);
    }

    #[test]
    fn tde_k_errors() {
        let s = sp(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let h = sp(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(
            tde_distance(&s, &h, 0, TdeMode::MeanMinimal),
            Err(MetricError::KNonPositive)
        );
        assert_eq!(
            tde_distance(&s, &h, 2, TdeMode::MeanMinimal),
            Err(MetricError::KTooLarge { k: 2, min_len: 2 })
        );
    }

    #[test]
    fn scaled_tde_examples() {
        let s = sp(&[(0.0, 0.0), (3.0, 7.0), (1.0, 1.0)]);
        assert_eq!(scaled_tde(&s, &s, (10.0, 10.0)).unwrap(), 1.0);

        let side = 64.0;
        let s = sp(&[(0.0, 0.0), (0.0, 0.0)]);
        let h = sp(&[(side, 0.0), (side, 0.0)]);
        let v = scaled_tde(&s, &h, (side, side)).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);

        let one = sp(&[(0.0, 0.0)]);
        assert_eq!(
            scaled_tde(&one, &s, (side, side)),
            Err(MetricError::ScanpathTooShort { min_len: 1 })
        );
    }

    fn points(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..640.0, 0.0f64..480.0), 1..=max_len)
    }

    proptest! {
        #[test]
        fn euclidean_properties(
            pairs in prop::collection::vec(
                ((0.0f64..640.0, 0.0f64..480.0), (0.0f64..640.0, 0.0f64..480.0), (0.0f64..640.0, 0.0f64..480.0)),
                1..15),
            shift in (-100.0f64..100.0, -100.0f64..100.0),
        ) {
            let a = sp(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let b = sp(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            let c = sp(&pairs.iter().map(|p| p.2).collect::<Vec<_>>());
            let ab = euclidean_distance(&a, &b, false).unwrap();
            let ba = euclidean_distance(&b, &a, false).unwrap();
            let bc = euclidean_distance(&b, &c, false).unwrap();
            let ac = euclidean_distance(&a, &c, false).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-9);
            let moved = |s: &Scanpath| sp(&s.positions().iter().map(|&(x, y)| (x + shift.0, y + shift.1)).collect::<Vec<_>>());
            let shifted = euclidean_distance(&moved(&a), &moved(&b), false).unwrap();
            prop_assert!((shifted - ab).abs() < 1e-9);
        }

        #[test]
        fn string_edit_properties(a in points(10), b in points(10)) {
            let (a, b) = (sp(&a), sp(&b));
            let d = string_edit_distance(&a, &b, (640.0, 480.0), 5, 1.0).unwrap();
            let r = string_edit_distance(&b, &a, (640.0, 480.0), 5, 1.0).unwrap();
            prop_assert_eq!(d, r);
            prop_assert_eq!(d.fract(), 0.0);
            prop_assert!(d <= a.len().max(b.len()) as f64);
            let grid = GridSpec::new(5, 640.0, 480.0).unwrap();
            let ta = quantize_to_tokens(&a, &grid);
            prop_assert_eq!(ta.len(), a.len());
            prop_assert!(ta.iter().all(|&t| t < 25));
            prop_assert_eq!(d == 0.0, ta == quantize_to_tokens(&b, &grid));
        }

        #[test]
        fn tde_properties(a in points(8), b in points(8), k in 1usize..7) {
            prop_assume!(k < a.len().min(b.len()));
            let (a, b) = (sp(&a), sp(&b));
            let mm = tde_distance(&a, &b, k, TdeMode::MeanMinimal).unwrap();
            let hd = tde_distance(&a, &b, k, TdeMode::Hausdorff).unwrap();
            prop_assert!(mm >= 0.0);
            prop_assert!(mm <= hd + 1e-12);
            prop_assert_eq!(tde_distance(&a, &a, k, TdeMode::Hausdorff).unwrap(), 0.0);
        }

        #[test]
        fn scaled_tde_properties(a in points(8), b in points(8)) {
            prop_assume!(a.len().min(b.len()) >= 2);
            let (sa, sb) = (sp(&a), sp(&b));
            let v = scaled_tde(&sa, &sb, (640.0, 480.0)).unwrap();
            prop_assert!(v > 0.0 && v <= 1.0);
            let up = |p: &[(f64, f64)]| sp(&p.iter().map(|&(x, y)| (x * 3.0, y * 3.0)).collect::<Vec<_>>());
            let scaled = scaled_tde(&up(&a), &up(&b), (1920.0, 1440.0)).unwrap();
            prop_assert!((scaled - v).abs() < 1e-12);
        }
    }
}
