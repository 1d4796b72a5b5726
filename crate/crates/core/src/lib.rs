//! Access to human fixation collections and the metrics used to compare
//! scanpaths and evaluate saliency models.
//!
//! - [`dataset`]: catalog of the on-disk layout and the list/get API.
//! - [`scanpath_metrics`]: Euclidean, string-edit and time-delay embedding
//!   distances, plus the scaled similarity.
//! - [`saliency_metrics`]: KL divergence, AUC (Judd) and NSS.
//! - [`mapgen`]: Gaussian saliency generation and collection statistics.
//! - [`render`]: PNG overlays, animation frames and map panels.

pub mod dataset;
pub mod mapgen;
pub mod render;
pub mod saliency_metrics;
pub mod scanpath_metrics;
pub mod types;

pub use dataset::{DatasetCatalog, DatasetConfig, DatasetEntry, DatasetError, StimulusEntry};
pub use mapgen::{compute_statistics, pixels_per_degree, saliency_from_fixations, CollectionStats};
pub use saliency_metrics::{auc_judd, kl_divergence, nss, AucParams, SaliencyError};
pub use scanpath_metrics::{
    euclidean_distance, quantize_to_tokens, scaled_tde, string_edit_distance, tde_distance,
    GridSpec, MetricError, TdeMode,
};
pub use types::{Fixation, FixationMap, Pixels, SaliencyMap, Scanpath, StimulusImage, TypeError};
