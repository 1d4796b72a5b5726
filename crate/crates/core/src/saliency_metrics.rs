//! Saliency evaluation: KL divergence, AUC (Judd thresholds) and NSS.
//!
//! Saliency inputs are plain grid views so that arbitrary model outputs,
//! including affinely shifted ones, can be scored. Fixated pixels always
//! come from a binary [`FixationMap`].

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::types::FixationMap;

/// Default KL regularizer (`f64::EPSILON`).
pub const KL_EPSILON: f64 = f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SaliencyError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("map has no positive mass")]
    AllZeroMap,
    #[error("saliency map holds negative or non-finite values")]
    InvalidValue,
    #[error("fixation map has no fixated pixels")]
    NoFixations,
    #[error("every pixel is fixated, no negatives to rank against")]
    AllPixelsFixated,
    #[error("saliency map is constant and jitter is disabled")]
    ConstantMapWithoutJitter,
    #[error("saliency map has zero variance")]
    ZeroVariance,
    #[error("jitter scale must be positive and finite")]
    InvalidJitterScale,
}

/// Parameters of [`auc_judd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucParams {
    pub jitter: bool,
    pub jitter_scale: f64,
    pub seed: u64,
}

impl Default for AucParams {
    fn default() -> Self {
        Self {
            jitter: true,
            jitter_scale: 1e-7,
            seed: 0,
        }
    }
}

fn check_dims(left: (usize, usize), right: (usize, usize)) -> Result<(), SaliencyError> {
    if left != right {
        return Err(SaliencyError::DimensionMismatch { left, right });
    }
    Ok(())
}

/// `D(p || q)` in nats after normalizing both maps to unit mass.
pub fn kl_divergence(
    p: ArrayView2<'_, f64>,
    q: ArrayView2<'_, f64>,
    epsilon: f64,
) -> Result<f64, SaliencyError> {
    check_dims(p.dim(), q.dim())?;
    let mass = |m: &ArrayView2<'_, f64>| -> Result<f64, SaliencyError> {
        if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SaliencyError::InvalidValue);
        }
        let sum = m.sum();
        if sum <= 0.0 {
            return Err(SaliencyError::AllZeroMap);
        }
        Ok(sum)
    };
    let (p_sum, q_sum) = (mass(&p)?, mass(&q)?);
    Ok(p.iter()
        .zip(q.iter())
        .map(|(&pv, &qv)| {
            let (pv, qv) = (pv / p_sum, qv / q_sum);
            pv * ((pv + epsilon) / (qv + epsilon)).ln()
        })
        .sum())
}

/// Area under the ROC curve with thresholds at the saliency values of the
/// fixated pixels.
///
/// The map is optionally jittered with seeded uniform noise in
/// `[0, jitter_scale)` and min-max normalized. At each threshold both the
/// strict and the inclusive operating point enter the curve, so ties between
/// fixated and non-fixated pixels get half credit and the area equals the
/// pairwise ranking probability.
pub fn auc_judd(
    saliency: ArrayView2<'_, f64>,
    fixations: &FixationMap,
    params: &AucParams,
) -> Result<f64, SaliencyError> {
    check_dims(saliency.dim(), fixations.dims())?;
    if saliency.iter().any(|v| !v.is_finite()) {
        return Err(SaliencyError::InvalidValue);
    }
    let n_fix = fixations.fixated_count();
    if n_fix == 0 {
        return Err(SaliencyError::NoFixations);
    }
    let n_other = saliency.len() - n_fix;
    if n_other == 0 {
        return Err(SaliencyError::AllPixelsFixated);
    }
    if params.jitter && !(params.jitter_scale > 0.0 && params.jitter_scale.is_finite()) {
        return Err(SaliencyError::InvalidJitterScale);
    }

    let mut values: Array2<f64> = saliency.to_owned();
    if params.jitter {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        for v in values.iter_mut() {
            *v += rng.random::<f64>() * params.jitter_scale;
        }
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi <= lo {
        return Err(SaliencyError::ConstantMapWithoutJitter);
    }
    let range = hi - lo;
    values.mapv_inplace(|v| (v - lo) / range);

    let mut fixated = Vec::with_capacity(n_fix);
    let mut others = Vec::with_capacity(n_other);
    for (v, &f) in values.iter().zip(fixations.grid().iter()) {
        if f == 1 {
            fixated.push(*v);
        } else {
            others.push(*v);
        }
    }
    let descending = |a: &f64, b: &f64| b.total_cmp(a);
    fixated.sort_by(descending);
    others.sort_by(descending);
    let (nf, no) = (n_fix as f64, n_other as f64);

    // Pointers into the descending lists: counts strictly above and at-or-above.
    let (mut fix_gt, mut fix_ge, mut oth_gt, mut oth_ge) = (0usize, 0usize, 0usize, 0usize);
    let mut curve = vec![(0.0, 0.0)];
    let mut i = 0;
    while i < fixated.len() {
        let thresh = fixated[i];
        while fix_gt < fixated.len() && fixated[fix_gt] > thresh {
            fix_gt += 1;
        }
        while oth_gt < others.len() && others[oth_gt] > thresh {
            oth_gt += 1;
        }
        fix_ge = fix_ge.max(fix_gt);
        while fix_ge < fixated.len() && fixated[fix_ge] >= thresh {
            fix_ge += 1;
        }
        oth_ge = oth_ge.max(oth_gt);
        while oth_ge < others.len() && others[oth_ge] >= thresh {
            oth_ge += 1;
        }
        curve.push((oth_gt as f64 / no, fix_gt as f64 / nf));
        curve.push((oth_ge as f64 / no, fix_ge as f64 / nf));
        i = fix_ge;
    }
    curve.push((1.0, 1.0));

    Ok(curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum())
}

/// Normalized scanpath saliency: mean z-scored saliency over fixated pixels,
/// with the population standard deviation over the whole map.
pub fn nss(saliency: ArrayView2<'_, f64>, fixations: &FixationMap) -> Result<f64, SaliencyError> {
    check_dims(saliency.dim(), fixations.dims())?;
    if saliency.iter().any(|v| !v.is_finite()) {
        return Err(SaliencyError::InvalidValue);
    }
    let n_fix = fixations.fixated_count();
    if n_fix == 0 {
        return Err(SaliencyError::NoFixations);
    }
    let n = saliency.len() as f64;
    let mean = saliency.sum() / n;
    let var = saliency.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Err(SaliencyError::ZeroVariance);
    }
    let total: f64 = saliency
        .iter()
        .zip(fixations.grid().iter())
        .filter(|(_, &f)| f == 1)
        .map(|(v, _)| (v - mean) / std)
        .sum();
    Ok(total / n_fix as f64)
}
