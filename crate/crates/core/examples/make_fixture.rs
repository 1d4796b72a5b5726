//! Regenerates the bundled test collection and model predictions.
//!
//! ```text
//! cargo run -p fixatons --example make_fixture -- crates/core/tests/fixtures
//! ```

use std::fs;
use std::path::Path;

use fixatons::dataset::parse_scanpath_text;
use fixatons::{saliency_from_fixations, FixationMap, SaliencyMap};
use image::{GrayImage, Luma, Rgb, RgbImage};
use ndarray::Array2;

const WIDTH: u32 = 64;
const HEIGHT: u32 = 48;
const SIGMA: f64 = 4.0;

const SCANPATHS: &[(&str, &str, &str)] = &[
    (
        "img_a",
        "s01",
        "10.5,12.0,0.000,0.210\n30.25,20.5,0.250,0.480\n50.0,30.0,0.520,0.900\n",
    ),
    (
        "img_a",
        "s02",
        "12 14 0.0 0.3\n40 8 0.35 0.6\n\n55.5 40.25 0.66 0.95\n20 36 1.0 1.4\n",
    ),
    (
        "img_b",
        "s01",
        "5 5 0.0 0.2\n32 24 0.3 0.6\n60 44 0.7 1.0\n",
    ),
    (
        "img_b",
        "s02",
        "8, 40 0.0 0.25\n16, 30, 0.3, 0.5\n24,20,0.55,0.8\n40, 12 0.9 1.2\n58.75, 6.5, 1.25, 1.6\n",
    ),
];

const MODEL_SCANPATHS: &[(&str, &str)] = &[
    (
        "img_a",
        "11 13 0.0 0.2\n31 21 0.25 0.5\n48 33 0.55 0.9\n20 30 0.95 1.2\n",
    ),
    ("img_b", "6 8 0.0 0.3\n30 26 0.35 0.7\n45 14 0.75 1.0\n"),
];

fn write(path: &Path, text: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}

fn save_gray(grid: &Array2<f64>, path: &Path) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    let img = GrayImage::from_fn(WIDTH, HEIGHT, |x, y| {
        Luma([(grid[(y as usize, x as usize)] * 255.0).round() as u8])
    });
    img.save(path).unwrap();
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/tests/fixtures".into());
    let out = Path::new(&out);
    let dataset = out.join("collection").join("FIXTURE01");

    write(
        &dataset.join("dataset.toml"),
        "# bundled synthetic dataset\npixels_per_degree = 4.0\n",
    );

    let stimuli = dataset.join("STIMULI");
    fs::create_dir_all(&stimuli).unwrap();
    RgbImage::from_fn(WIDTH, HEIGHT, |x, y| {
        Rgb([(x * 4) as u8, (y * 5) as u8, 128])
    })
    .save(stimuli.join("img_a.png"))
    .unwrap();
    GrayImage::from_fn(WIDTH, HEIGHT, |x, y| Luma([((x + y) * 2) as u8]))
        .save(stimuli.join("img_b.png"))
        .unwrap();

    for image_id in ["img_a", "img_b"] {
        let mut scanpaths = Vec::new();
        for &(id, subject, text) in SCANPATHS.iter().filter(|s| s.0 == image_id) {
            write(
                &dataset
                    .join("SCANPATHS")
                    .join(id)
                    .join(format!("{subject}.txt")),
                text,
            );
            scanpaths.push(parse_scanpath_text(text, subject, id).unwrap());
        }
        let fixmap =
            FixationMap::from_scanpaths(HEIGHT as usize, WIDTH as usize, &scanpaths).unwrap();
        save_gray(
            &fixmap.to_f64(),
            &dataset
                .join("FIXATION_MAPS")
                .join(format!("{image_id}.png")),
        );
        // img_b is left without a stored saliency map so it is generated on demand
        if image_id == "img_a" {
            let sal = saliency_from_fixations(&fixmap, SIGMA).unwrap();
            save_gray(sal.grid(), &dataset.join("SALIENCY_MAPS").join("img_a.png"));
        }
    }

    let predictions = out.join("predictions");
    for &(id, text) in MODEL_SCANPATHS {
        write(
            &predictions.join("SCANPATHS").join(id).join("model.txt"),
            text,
        );
    }
    // centre-biased model saliency
    let (cx, cy) = (f64::from(WIDTH) / 2.0, f64::from(HEIGHT) / 2.0);
    for (id, spread) in [("img_a", 12.0), ("img_b", 20.0)] {
        let grid = Array2::from_shape_fn((HEIGHT as usize, WIDTH as usize), |(r, c)| {
            let d2 = (c as f64 - cx).powi(2) + (r as f64 - cy).powi(2);
            (-d2 / (2.0 * spread * spread)).exp()
        });
        let sal = SaliencyMap::normalized_max(grid).unwrap();
        save_gray(
            sal.grid(),
            &predictions.join("SALIENCY_MAPS").join(format!("{id}.png")),
        );
    }
    println!("fixture written to {}", out.display());
}
