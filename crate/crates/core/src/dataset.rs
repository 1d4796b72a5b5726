//! On-disk collection layout, catalog and the list/get API.
//!
//! ```text
//! ROOT/
//!   DATASET/
//!     dataset.toml            optional setup parameters
//!     STIMULI/<image>         original images
//!     SCANPATHS/<image id>/   one text file per subject
//!     FIXATION_MAPS/<image>   binary fixation maps
//!     SALIENCY_MAPS/<image>   saliency maps
//! ```
//!
//! Image ids under `SCANPATHS` and map files may use either the full
//! stimulus filename or its stem. Subject ids are scanpath filenames without
//! extension.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageReader};
use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::mapgen;
use crate::types::{FixationMap, Pixels, SaliencyMap, Scanpath, StimulusImage, TypeError};

pub const STIMULI_DIR: &str = "STIMULI";
pub const SCANPATHS_DIR: &str = "SCANPATHS";
pub const FIXATION_MAPS_DIR: &str = "FIXATION_MAPS";
pub const SALIENCY_MAPS_DIR: &str = "SALIENCY_MAPS";
pub const CONFIG_FILE: &str = "dataset.toml";

/// 8-bit values above this are fixated.
pub const FIXATION_THRESHOLD: u8 = 127;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("collection root not found: {0}")]
    RootNotFound(PathBuf),
    #[error("malformed layout at {path}: {reason}")]
    MalformedLayout { path: PathBuf, reason: String },
    #[error("cannot parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("unknown dataset: {0}")]
    UnknownDataset(String),
    #[error("unknown stimulus {stimulus} in dataset {dataset}")]
    UnknownStimulus { dataset: String, stimulus: String },
    #[error("unknown subject {subject} for stimulus {stimulus}")]
    UnknownSubject { stimulus: String, subject: String },
    #[error("no scanpaths for stimulus {0}")]
    NoScanpaths(String),
    #[error("no {kind} available for stimulus {stimulus}")]
    MissingMap {
        kind: &'static str,
        stimulus: String,
    },
    #[error("{what} is {found:?} (height, width), stimulus is {expected:?}")]
    DimensionMismatch {
        what: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Scanpath {
        path: PathBuf,
        #[source]
        source: TypeError,
    },
    #[error("invalid data: {0}")]
    Invalid(#[from] TypeError),
    #[error("cannot generate saliency map: {0}")]
    Generation(#[from] mapgen::MapgenError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Physical viewing setup of a dataset; every present value is positive.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DatasetConfig {
    pub pixels_per_degree: Option<f64>,
    /// `(width, height)` in pixels.
    pub screen_px: Option<(f64, f64)>,
    /// `(width, height)` in centimetres.
    pub screen_cm: Option<(f64, f64)>,
    pub eye_screen_distance_cm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    pixels_per_degree: Option<f64>,
    screen_px_w: Option<f64>,
    screen_px_h: Option<f64>,
    screen_cm_w: Option<f64>,
    screen_cm_h: Option<f64>,
    distance_cm: Option<f64>,
}

impl DatasetConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        let checked = |name: &str, v: Option<f64>| -> Result<Option<f64>, String> {
            match v {
                Some(v) if !(v > 0.0 && v.is_finite()) => {
                    Err(format!("{name} must be positive, got {v}"))
                }
                v => Ok(v),
            }
        };
        let pair = |w: &str,
                    wv: Option<f64>,
                    h: &str,
                    hv: Option<f64>|
         -> Result<Option<(f64, f64)>, String> {
            match (checked(w, wv)?, checked(h, hv)?) {
                (Some(w), Some(h)) => Ok(Some((w, h))),
                (None, None) => Ok(None),
                _ => Err(format!("{w} and {h} must be given together")),
            }
        };
        Ok(Self {
            pixels_per_degree: checked("pixels_per_degree", raw.pixels_per_degree)?,
            screen_px: pair(
                "screen_px_w",
                raw.screen_px_w,
                "screen_px_h",
                raw.screen_px_h,
            )?,
            screen_cm: pair(
                "screen_cm_w",
                raw.screen_cm_w,
                "screen_cm_h",
                raw.screen_cm_h,
            )?,
            eye_screen_distance_cm: checked("distance_cm", raw.distance_cm)?,
        })
    }

    /// Pixels per degree, given directly or derived from the horizontal
    /// screen geometry and viewing distance.
    pub fn resolved_pixels_per_degree(&self) -> Option<f64> {
        if let Some(ppd) = self.pixels_per_degree {
            return Some(ppd);
        }
        let (px_w, _) = self.screen_px?;
        let (cm_w, _) = self.screen_cm?;
        mapgen::pixels_per_degree(px_w, cm_w, self.eye_screen_distance_cm?).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StimulusEntry {
    pub stimulus_path: PathBuf,
    pub fixation_map_path: Option<PathBuf>,
    pub saliency_map_path: Option<PathBuf>,
    /// subject id -> scanpath file
    pub scanpaths: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub name: String,
    pub stimuli: BTreeMap<String, StimulusEntry>,
    pub config: DatasetConfig,
}

/// Immutable index of a collection root.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetCatalog {
    root: PathBuf,
    datasets: BTreeMap<String, DatasetEntry>,
}

fn is_hidden(name: &str) -> bool {
    name.starts_with('.')
}

/// Sorted `(name, path)` of the non-hidden entries of `dir` that pass `keep`.
fn list_dir(dir: &Path, keep: fn(&Path) -> bool) -> Result<Vec<(String, PathBuf)>, DatasetError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        let Some(name) = entry.file_name().to_str().map(str::to_owned) else {
            continue;
        };
        if is_hidden(&name) || !keep(&path) {
            continue;
        }
        out.push((name, path));
    }
    out.sort();
    Ok(out)
}

fn stem(name: &str) -> &str {
    Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name)
}

/// Finds the entry named exactly `stimulus`, or else one sharing its stem.
fn match_stimulus<'a>(stimulus: &str, candidates: &'a [(String, PathBuf)]) -> Option<&'a PathBuf> {
    candidates
        .iter()
        .find(|(n, _)| n == stimulus)
        .or_else(|| candidates.iter().find(|(n, _)| stem(n) == stem(stimulus)))
        .map(|(_, p)| p)
}

fn load_dataset(name: &str, dir: &Path) -> Result<DatasetEntry, DatasetError> {
    let stimuli_dir = dir.join(STIMULI_DIR);
    if !stimuli_dir.is_dir() {
        return Err(DatasetError::MalformedLayout {
            path: dir.to_path_buf(),
            reason: format!("missing {STIMULI_DIR} directory"),
        });
    }
    let config_path = dir.join(CONFIG_FILE);
    let config = if config_path.is_file() {
        let text = fs::read_to_string(&config_path).map_err(io_err(&config_path))?;
        DatasetConfig::parse(&text).map_err(|message| DatasetError::ConfigParse {
            path: config_path.clone(),
            message,
        })?
    } else {
        DatasetConfig::default()
    };

    let optional_files = |sub: &str| -> Result<Vec<(String, PathBuf)>, DatasetError> {
        let d = dir.join(sub);
        if d.is_dir() {
            list_dir(&d, Path::is_file)
        } else {
            Ok(Vec::new())
        }
    };
    let fixation_maps = optional_files(FIXATION_MAPS_DIR)?;
    let saliency_maps = optional_files(SALIENCY_MAPS_DIR)?;
    let scanpath_dirs = {
        let d = dir.join(SCANPATHS_DIR);
        if d.is_dir() {
            list_dir(&d, Path::is_dir)?
        } else {
            Vec::new()
        }
    };

    let mut stimuli = BTreeMap::new();
    for (stim, stimulus_path) in list_dir(&stimuli_dir, Path::is_file)? {
        let mut scanpaths = BTreeMap::new();
        if let Some(sp_dir) = match_stimulus(&stim, &scanpath_dirs) {
            for (file, path) in list_dir(sp_dir, Path::is_file)? {
                let subject = stem(&file).to_owned();
                if scanpaths.insert(subject.clone(), path).is_some() {
                    return Err(DatasetError::MalformedLayout {
                        path: sp_dir.clone(),
                        reason: format!("duplicate subject id {subject}"),
                    });
                }
            }
        }
        stimuli.insert(
            stim.clone(),
            StimulusEntry {
                stimulus_path,
                fixation_map_path: match_stimulus(&stim, &fixation_maps).cloned(),
                saliency_map_path: match_stimulus(&stim, &saliency_maps).cloned(),
                scanpaths,
            },
        );
    }
    for (id, path) in &scanpath_dirs {
        if !stimuli.keys().any(|s| s == id || stem(s) == id) {
            return Err(DatasetError::MalformedLayout {
                path: path.clone(),
                reason: format!("scanpath folder {id} has no matching stimulus"),
            });
        }
    }

    Ok(DatasetEntry {
        name: name.to_owned(),
        stimuli,
        config,
    })
}

/// Parses scanpath text: one fixation per line, four numbers separated by
/// commas and/or whitespace, blank lines ignored.
pub fn parse_scanpath_text(
    text: &str,
    subject_id: &str,
    stimulus_ref: &str,
) -> Result<Scanpath, TypeError> {
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row = rows.len();
        let values = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| TypeError::MalformedRow {
                    row,
                    reason: format!("not a number: {t:?}"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(values);
    }
    Scanpath::from_rows(&rows, subject_id, stimulus_ref)
}

/// Loads a scanpath file; the subject id is the file stem.
pub fn load_scanpath_file(path: &Path, stimulus_ref: &str) -> Result<Scanpath, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let subject = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    parse_scanpath_text(&text, subject, stimulus_ref).map_err(|source| DatasetError::Scanpath {
        path: path.to_path_buf(),
        source,
    })
}

fn decode(path: &Path) -> Result<DynamicImage, DatasetError> {
    let decode_err = |source| DatasetError::Decode {
        path: path.to_path_buf(),
        source,
    };
    ImageReader::open(path)
        .map_err(io_err(path))?
        .with_guessed_format()
        .map_err(io_err(path))?
        .decode()
        .map_err(decode_err)
}

fn image_dims(path: &Path) -> Result<(usize, usize), DatasetError> {
    let (w, h) = image::image_dimensions(path).map_err(|source| DatasetError::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((h as usize, w as usize))
}

/// Decodes an image as a stimulus: grayscale images give 2-D pixels, all
/// others RGB.
pub fn load_stimulus_image(path: &Path) -> Result<StimulusImage, DatasetError> {
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = if img.color().has_color() {
        let rgb = img.to_rgb8();
        Pixels::Rgb(Array3::from_shape_vec((h, w, 3), rgb.into_raw()).expect("rgb buffer"))
    } else {
        let gray = img.to_luma8();
        Pixels::Gray(Array2::from_shape_vec((h, w), gray.into_raw()).expect("gray buffer"))
    };
    Ok(StimulusImage::new(pixels)?)
}

/// Binarizes a stored fixation map at [`FIXATION_THRESHOLD`].
pub fn load_fixation_map(path: &Path) -> Result<FixationMap, DatasetError> {
    let gray = decode(path)?.to_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let grid = Array2::from_shape_vec((h, w), gray.into_raw())
        .expect("gray buffer")
        .mapv(|v| u8::from(v > FIXATION_THRESHOLD));
    Ok(FixationMap::new(grid)?)
}

/// Reads a stored saliency map and rescales it so the maximum is 1.
pub fn load_saliency_map(path: &Path) -> Result<SaliencyMap, DatasetError> {
    let gray = decode(path)?.to_luma16();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let grid = Array2::from_shape_vec((h, w), gray.into_raw())
        .expect("gray buffer")
        .mapv(f64::from);
    Ok(SaliencyMap::normalized_max(grid)?)
}

impl DatasetCatalog {
    /// Indexes every dataset directory under `root`.
    pub fn load(root: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(DatasetError::RootNotFound(root.to_path_buf()));
        }
        let mut datasets = BTreeMap::new();
        for (name, dir) in list_dir(root, Path::is_dir)? {
            let entry = load_dataset(&name, &dir)?;
            datasets.insert(name, entry);
        }
        Ok(Self {
            root: root.to_path_buf(),
            datasets,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn datasets(&self) -> impl Iterator<Item = &DatasetEntry> {
        self.datasets.values()
    }

    pub fn dataset(&self, name: &str) -> Result<&DatasetEntry, DatasetError> {
        self.datasets
            .get(name)
            .ok_or_else(|| DatasetError::UnknownDataset(name.to_owned()))
    }

    pub fn stimulus(&self, dataset: &str, stimulus: &str) -> Result<&StimulusEntry, DatasetError> {
        self.dataset(dataset)?
            .stimuli
            .get(stimulus)
            .ok_or_else(|| DatasetError::UnknownStimulus {
                dataset: dataset.to_owned(),
                stimulus: stimulus.to_owned(),
            })
    }

    pub fn list_datasets(&self) -> Vec<String> {
        self.datasets.keys().cloned().collect()
    }

    pub fn list_stimuli(&self, dataset: &str) -> Result<Vec<String>, DatasetError> {
        Ok(self.dataset(dataset)?.stimuli.keys().cloned().collect())
    }

    pub fn list_subjects(
        &self,
        dataset: &str,
        stimulus: &str,
    ) -> Result<Vec<String>, DatasetError> {
        Ok(self
            .stimulus(dataset, stimulus)?
            .scanpaths
            .keys()
            .cloned()
            .collect())
    }

    /// `(width, height)` of a stimulus, read from the image header.
    pub fn stimulus_dims(
        &self,
        dataset: &str,
        stimulus: &str,
    ) -> Result<(usize, usize), DatasetError> {
        let (h, w) = image_dims(&self.stimulus(dataset, stimulus)?.stimulus_path)?;
        Ok((w, h))
    }

    pub fn get_stimulus(
        &self,
        dataset: &str,
        stimulus: &str,
    ) -> Result<StimulusImage, DatasetError> {
        load_stimulus_image(&self.stimulus(dataset, stimulus)?.stimulus_path)
    }

    /// Stored fixation map, checked against the stimulus dimensions.
    pub fn get_fixation_map(
        &self,
        dataset: &str,
        stimulus: &str,
    ) -> Result<FixationMap, DatasetError> {
        let entry = self.stimulus(dataset, stimulus)?;
        let path = entry
            .fixation_map_path
            .as_ref()
            .ok_or_else(|| DatasetError::MissingMap {
                kind: "fixation map",
                stimulus: stimulus.to_owned(),
            })?;
        let map = load_fixation_map(path)?;
        check_against_stimulus(entry, "fixation map", map.dims())?;
        Ok(map)
    }

    /// Stored saliency map, or one generated from the fixation map with a
    /// one-degree Gaussian when the dataset config allows it.
    pub fn get_saliency_map(
        &self,
        dataset: &str,
        stimulus: &str,
    ) -> Result<SaliencyMap, DatasetError> {
        let entry = self.stimulus(dataset, stimulus)?;
        if let Some(path) = &entry.saliency_map_path {
            let map = load_saliency_map(path)?;
            check_against_stimulus(entry, "saliency map", map.dims())?;
            return Ok(map);
        }
        let sigma = self.dataset(dataset)?.config.resolved_pixels_per_degree();
        match (sigma, entry.fixation_map_path.is_some()) {
            (Some(sigma), true) => {
                let fixmap = self.get_fixation_map(dataset, stimulus)?;
                Ok(mapgen::saliency_from_fixations(&fixmap, sigma)?)
            }
            _ => Err(DatasetError::MissingMap {
                kind: "saliency map",
                stimulus: stimulus.to_owned(),
            }),
        }
    }

    /// Scanpath of `subject`, or of a subject drawn uniformly with a
    /// generator seeded by `seed` when none is given.
    pub fn get_scanpath(
        &self,
        dataset: &str,
        stimulus: &str,
        subject: Option<&str>,
        seed: u64,
    ) -> Result<Scanpath, DatasetError> {
        let entry = self.stimulus(dataset, stimulus)?;
        let path = match subject {
            Some(subject) => {
                entry
                    .scanpaths
                    .get(subject)
                    .ok_or_else(|| DatasetError::UnknownSubject {
                        stimulus: stimulus.to_owned(),
                        subject: subject.to_owned(),
                    })?
            }
            None => {
                if entry.scanpaths.is_empty() {
                    return Err(DatasetError::NoScanpaths(stimulus.to_owned()));
                }
                let idx = ChaCha8Rng::seed_from_u64(seed).random_range(0..entry.scanpaths.len());
                entry.scanpaths.values().nth(idx).expect("index in range")
            }
        };
        load_scanpath_file(path, stimulus)
    }

    /// All scanpaths of a stimulus in subject order.
    pub fn scanpaths(&self, dataset: &str, stimulus: &str) -> Result<Vec<Scanpath>, DatasetError> {
        self.stimulus(dataset, stimulus)?
            .scanpaths
            .values()
            .map(|p| load_scanpath_file(p, stimulus))
            .collect()
    }
}

fn check_against_stimulus(
    entry: &StimulusEntry,
    what: &str,
    found: (usize, usize),
) -> Result<(), DatasetError> {
    let expected = image_dims(&entry.stimulus_path)?;
    if expected != found {
        return Err(DatasetError::DimensionMismatch {
            what: what.to_owned(),
            expected,
            found,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_separators() {
        let text = "10, 20, 0.0, 0.2\n\n30 40\t0.25 ,0.5\n   \n";
        let sp = parse_scanpath_text(text, "s01", "img").unwrap();
        assert_eq!(
            sp.rows(),
            vec![[10.0, 20.0, 0.0, 0.2], [30.0, 40.0, 0.25, 0.5]]
        );
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_scanpath_text("\n\n", "s", "i").unwrap_err(),
            TypeError::EmptyScanpath
        );
        assert!(matches!(
            parse_scanpath_text("1,2,0,1\n1,2,x,1\n", "s", "i"),
            Err(TypeError::MalformedRow { row: 1, .. })
        ));
        assert!(matches!(
            parse_scanpath_text("1,2,0,1,5\n", "s", "i"),
            Err(TypeError::MalformedRow { row: 0, .. })
        ));
        assert!(matches!(
            parse_scanpath_text("1,2,0,1\n1,2,inf,9\n", "s", "i"),
            Err(TypeError::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn config_parsing() {
        let c = DatasetConfig::parse(
            "screen_px_w = 1024\nscreen_px_h = 768\nscreen_cm_w = 51\nscreen_cm_h = 31\ndistance_cm = 72\n",
        )
        .unwrap();
        assert_eq!(c.screen_px, Some((1024.0, 768.0)));
        assert_eq!(c.pixels_per_degree, None);
        let ppd = c.resolved_pixels_per_degree().unwrap();
        assert!((ppd - 25.2).abs() < 0.1);

        let direct = DatasetConfig::parse("pixels_per_degree = 4.5").unwrap();
        assert_eq!(direct.resolved_pixels_per_degree(), Some(4.5));
        assert_eq!(DatasetConfig::parse("").unwrap(), DatasetConfig::default());

        assert!(DatasetConfig::parse("pixels_per_degree = -1.0").is_err());
        assert!(DatasetConfig::parse("screen_px_w = 10").is_err());
        assert!(DatasetConfig::parse("colour = 3").is_err());
        assert!(DatasetConfig::parse("pixels_per_degree = [").is_err());
    }
}
