//! Headless rendering: scanpath overlays, animation frames and map panels.

use std::path::Path;

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use thiserror::Error;

use crate::types::{FixationMap, SaliencyMap, Scanpath, StimulusImage};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("scanpath has no fixations")]
    EmptyScanpath,
    #[error("nothing to show: neither saliency nor fixation map given")]
    NothingToShow,
    #[error("{what} is {found:?} (height, width), stimulus is {expected:?}")]
    DimensionMismatch {
        what: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub put_numbers: bool,
    /// Longest output side in pixels; 0 keeps the original size.
    pub plot_max_dim: u32,
    pub line_color: [u8; 3],
    pub dot_color: [u8; 3],
    /// Render the scanpath as a frame sequence instead of one image.
    pub as_frames: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            put_numbers: true,
            plot_max_dim: 0,
            line_color: [255, 255, 0],
            dot_color: [255, 0, 0],
            as_frames: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rendered {
    Image(RgbImage),
    Frames(Vec<RgbImage>),
}

pub fn stimulus_to_rgb(stimulus: &StimulusImage) -> RgbImage {
    RgbImage::from_fn(stimulus.width() as u32, stimulus.height() as u32, |x, y| {
        Rgb(stimulus.rgb_at(y as usize, x as usize))
    })
}

/// Size with the longer side equal to `max_dim`, aspect preserved.
pub fn fitted_size(width: u32, height: u32, max_dim: u32) -> (u32, u32) {
    if max_dim == 0 {
        return (width, height);
    }
    let scale = f64::from(max_dim) / f64::from(width.max(height));
    let fit = |v: u32| ((f64::from(v) * scale).round() as u32).max(1);
    (fit(width), fit(height))
}

fn fit(img: RgbImage, max_dim: u32) -> RgbImage {
    let (w, h) = fitted_size(img.width(), img.height(), max_dim);
    if (w, h) == img.dimensions() {
        img
    } else {
        imageops::resize(&img, w, h, FilterType::Triangle)
    }
}

/// Stimulus with fixation dots, saccade lines and optional ordinals.
///
/// With `as_frames`, frame `i` shows the first `i` fixations and the last
/// frame equals the static render.
pub fn render_scanpath(
    stimulus: &StimulusImage,
    scanpath: &Scanpath,
    opts: &RenderOptions,
) -> Result<Rendered, RenderError> {
    if scanpath.is_empty() {
        return Err(RenderError::EmptyScanpath);
    }
    let base = fit(stimulus_to_rgb(stimulus), opts.plot_max_dim);
    let sx = f64::from(base.width()) / stimulus.width() as f64;
    let sy = f64::from(base.height()) / stimulus.height() as f64;
    let points: Vec<(i64, i64)> = scanpath
        .positions()
        .into_iter()
        .map(|(x, y)| {
            let px = (x * sx).floor().clamp(0.0, f64::from(base.width() - 1));
            let py = (y * sy).floor().clamp(0.0, f64::from(base.height() - 1));
            (px as i64, py as i64)
        })
        .collect();
    let radius = dot_radius(base.width(), base.height());

    if opts.as_frames {
        let frames = (1..=points.len())
            .map(|i| overlay(&base, &points[..i], radius, opts))
            .collect();
        Ok(Rendered::Frames(frames))
    } else {
        Ok(Rendered::Image(overlay(&base, &points, radius, opts)))
    }
}

/// One hundredth of the diagonal, at least 3 px.
pub fn dot_radius(width: u32, height: u32) -> i64 {
    let diag = f64::from(width).hypot(f64::from(height));
    ((diag / 100.0).round() as i64).max(3)
}

fn overlay(base: &RgbImage, points: &[(i64, i64)], radius: i64, opts: &RenderOptions) -> RgbImage {
    let mut img = base.clone();
    for w in points.windows(2) {
        draw_line(&mut img, w[0], w[1], Rgb(opts.line_color));
    }
    for &p in points {
        draw_disc(&mut img, p, radius, Rgb(opts.dot_color));
    }
    if opts.put_numbers {
        let scale = (radius / 3).max(1);
        for (i, &p) in points.iter().enumerate() {
            draw_number(&mut img, p, i + 1, scale, contrast(opts.dot_color));
        }
    }
    img
}

fn contrast([r, g, b]: [u8; 3]) -> Rgb<u8> {
    let luma = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    if luma > 128.0 {
        Rgb([0, 0, 0])
    } else {
        Rgb([255, 255, 255])
    }
}

fn put(img: &mut RgbImage, x: i64, y: i64, color: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, color);
    }
}

// Bresenham
fn draw_line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: Rgb<u8>) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (stepx, stepy) = ((x1 - x0).signum(), (y1 - y0).signum());
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        put(img, x, y, color);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += stepx;
        }
        if e2 <= dx {
            err += dx;
            y += stepy;
        }
    }
}

fn draw_disc(img: &mut RgbImage, (cx, cy): (i64, i64), radius: i64, color: Rgb<u8>) {
    for y in -radius..=radius {
        for x in -radius..=radius {
            if x * x + y * y <= radius * radius {
                put(img, cx + x, cy + y, color);
            }
        }
    }
}

/// 3x5 digit glyphs, one row per byte, bit 2 is the leftmost column.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b010, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

/// Draws `value` centred on `center`.
fn draw_number(img: &mut RgbImage, (cx, cy): (i64, i64), value: usize, scale: i64, color: Rgb<u8>) {
    let digits: Vec<usize> = value
        .to_string()
        .bytes()
        .map(|b| usize::from(b - b'0'))
        .collect();
    let glyph_w = 4 * scale;
    let total_w = glyph_w * digits.len() as i64 - scale;
    let left = cx - total_w / 2;
    let top = cy - 5 * scale / 2;
    for (i, &d) in digits.iter().enumerate() {
        let ox = left + i as i64 * glyph_w;
        for (row, bits) in DIGITS[d].iter().enumerate() {
            for col in 0..3 {
                if bits & (0b100 >> col) != 0 {
                    for py in 0..scale {
                        for px in 0..scale {
                            put(
                                img,
                                ox + col * scale + px,
                                top + row as i64 * scale + py,
                                color,
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Jet-style colour map on `[0, 1]`.
pub fn heat_color(v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    let channel = |center: f64| -> u8 {
        let c = (1.5 - (4.0 * v - center).abs()).clamp(0.0, 1.0);
        (c * 255.0).round() as u8
    };
    [channel(3.0), channel(2.0), channel(1.0)]
}

/// Stimulus followed horizontally by the saliency heat map and/or the
/// fixation map.
pub fn render_map_panel(
    stimulus: &StimulusImage,
    saliency: Option<&SaliencyMap>,
    fixmap: Option<&FixationMap>,
    opts: &RenderOptions,
) -> Result<RgbImage, RenderError> {
    if saliency.is_none() && fixmap.is_none() {
        return Err(RenderError::NothingToShow);
    }
    let expected = (stimulus.height(), stimulus.width());
    let (w, h) = (stimulus.width() as u32, stimulus.height() as u32);
    let mut panels = vec![stimulus_to_rgb(stimulus)];
    if let Some(s) = saliency {
        if s.dims() != expected {
            return Err(RenderError::DimensionMismatch {
                what: "saliency map",
                expected,
                found: s.dims(),
            });
        }
        let g = s.grid();
        panels.push(RgbImage::from_fn(w, h, |x, y| {
            Rgb(heat_color(g[(y as usize, x as usize)]))
        }));
    }
    if let Some(f) = fixmap {
        if f.dims() != expected {
            return Err(RenderError::DimensionMismatch {
                what: "fixation map",
                expected,
                found: f.dims(),
            });
        }
        panels.push(RgbImage::from_fn(w, h, |x, y| {
            let v = if f.is_fixated(y as usize, x as usize) {
                255
            } else {
                0
            };
            Rgb([v, v, v])
        }));
    }
    let mut out = RgbImage::new(w * panels.len() as u32, h);
    for (i, p) in panels.iter().enumerate() {
        imageops::replace(&mut out, p, i64::from(w) * i as i64, 0);
    }
    Ok(fit(out, opts.plot_max_dim))
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<(), RenderError> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| RenderError::Write {
            path: path.display().to_string(),
            source,
        })
}

/// Writes frames as `frame_000.png`, `frame_001.png`, ... into `dir` and
/// returns the written paths.
pub fn save_frames(
    frames: &[RgbImage],
    dir: &Path,
) -> Result<Vec<std::path::PathBuf>, RenderError> {
    std::fs::create_dir_all(dir)?;
    let width = frames.len().saturating_sub(1).to_string().len().max(3);
    frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(format!("frame_{i:0width$}.png"));
            save_png(f, &path)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Pixels;
    use ndarray::{Array2, Array3};

    fn gray(w: usize, h: usize) -> StimulusImage {
        StimulusImage::new(Pixels::Gray(Array2::from_elem((h, w), 90))).unwrap()
    }

    fn image_of(r: Rendered) -> RgbImage {
        match r {
            Rendered::Image(i) => i,
            Rendered::Frames(_) => panic!("expected single image"),
        }
    }

    #[test]
    fn single_fixation_is_local() {
        let stim = gray(64, 48);
        let sp = Scanpath::from_positions(&[(20.0, 30.0)]).unwrap();
        let opts = RenderOptions {
            put_numbers: false,
            ..Default::default()
        };
        let out = image_of(render_scanpath(&stim, &sp, &opts).unwrap());
        let base = stimulus_to_rgb(&stim);
        let r = dot_radius(64, 48);
        for (x, y, p) in out.enumerate_pixels() {
            if p != base.get_pixel(x, y) {
                let (dx, dy) = (i64::from(x) - 20, i64::from(y) - 30);
                assert!(dx * dx + dy * dy <= r * r);
            }
        }
        assert_ne!(out, base);
    }

    #[test]
    fn frames_end_with_static_render() {
        let stim = gray(40, 30);
        let sp = Scanpath::from_positions(&[(5.0, 5.0), (30.0, 10.0), (20.0, 25.0)]).unwrap();
        let still = image_of(render_scanpath(&stim, &sp, &RenderOptions::default()).unwrap());
        let frames = match render_scanpath(
            &stim,
            &sp,
            &RenderOptions {
                as_frames: true,
                ..Default::default()
            },
        )
        .unwrap()
        {
            Rendered::Frames(f) => f,
            Rendered::Image(_) => panic!("expected frames"),
        };
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[2], still);
        assert_ne!(frames[0], frames[1]);
    }

    #[test]
    fn resize_is_proportional() {
        assert_eq!(fitted_size(1000, 800, 500), (500, 400));
        assert_eq!(fitted_size(1000, 800, 0), (1000, 800));
        assert_eq!(fitted_size(300, 600, 900), (450, 900));
        let stim = StimulusImage::new(Pixels::Rgb(Array3::zeros((800, 1000, 3)))).unwrap();
        let sp = Scanpath::from_positions(&[(999.0, 799.0), (0.0, 0.0)]).unwrap();
        let out = image_of(
            render_scanpath(
                &stim,
                &sp,
                &RenderOptions {
                    plot_max_dim: 500,
                    ..Default::default()
                },
            )
            .unwrap(),
        );
        assert_eq!(out.dimensions(), (500, 400));
    }

    #[test]
    fn deterministic() {
        let stim = gray(50, 50);
        let sp = Scanpath::from_positions(&[(5.0, 5.0), (40.0, 45.0), (60.0, -3.0)]).unwrap();
        let a = render_scanpath(&stim, &sp, &RenderOptions::default()).unwrap();
        let b = render_scanpath(&stim, &sp, &RenderOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn panel_widths() {
        let stim = gray(20, 10);
        let sal = SaliencyMap::new(Array2::from_shape_fn((10, 20), |(r, c)| {
            (r * c) as f64 / 200.0
        }))
        .unwrap();
        let fix = FixationMap::zeros(10, 20).unwrap();
        let opts = RenderOptions::default();
        assert_eq!(
            render_map_panel(&stim, Some(&sal), None, &opts)
                .unwrap()
                .dimensions(),
            (40, 10)
        );
        assert_eq!(
            render_map_panel(&stim, Some(&sal), Some(&fix), &opts)
                .unwrap()
                .dimensions(),
            (60, 10)
        );
        assert_eq!(
            render_map_panel(&stim, None, Some(&fix), &opts)
                .unwrap()
                .dimensions(),
            (40, 10)
        );
        assert!(matches!(
            render_map_panel(&stim, None, None, &opts),
            Err(RenderError::NothingToShow)
        ));
        let wrong = FixationMap::zeros(11, 20).unwrap();
        assert!(matches!(
            render_map_panel(&stim, None, Some(&wrong), &opts),
            Err(RenderError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn heat_map_ends() {
        assert_eq!(heat_color(0.0), [0, 0, 128]);
        assert_eq!(heat_color(1.0), [128, 0, 0]);
    }
}
