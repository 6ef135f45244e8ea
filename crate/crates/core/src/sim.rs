//! Synthetic piecewise-constant scenes and the metrics used to score
//! filters on them.
//!
//! A scene is a set of rectangles tiling the image, each with its own true
//! covariance `Σ`. Every pixel is an independent Wishart draw with the
//! scene's number of looks; row `r` uses random substream `(seed, r)` so
//! generation is parallel and still reproducible.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{CovarianceImage, Rect};
use crate::linalg::HermitianMatrix3;
use crate::wishart::{substream, WishartModel};

/// Pixels on each side of a region boundary excluded from evaluation
/// rectangles (the half-width of the filtering window).
pub const EVAL_MARGIN: usize = 2;

/// Smallest rectangle accepted by [`enl`].
pub const MIN_ENL_PIXELS: usize = 16;

/// Columns on either side of an edge excluded from the plateau estimates
/// in [`edge_width`].
pub const PLATEAU_GAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRegion {
    pub rect: Rect,
    pub sigma: HermitianMatrix3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub looks: u32,
    pub seed: u64,
    pub regions: Vec<SceneRegion>,
}

/// Default bright-region covariance of the two-region fixture, contrast 4
/// against the identity on the co-polar channels.
pub fn default_sigma_b() -> HermitianMatrix3 {
    HermitianMatrix3::new(
        [4.0, 2.0, 4.0],
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

pub fn default_sigma_a() -> HermitianMatrix3 {
    HermitianMatrix3::identity()
}

impl SceneSpec {
    pub fn homogeneous(
        height: usize,
        width: usize,
        looks: u32,
        sigma: HermitianMatrix3,
        seed: u64,
    ) -> Self {
        Self {
            height,
            width,
            looks,
            seed,
            regions: vec![SceneRegion {
                rect: Rect::new(0, 0, height, width),
                sigma,
            }],
        }
    }

    /// Columns `< edge_col` get `left`, the rest `right`.
    pub fn vertical_edge(
        height: usize,
        width: usize,
        edge_col: usize,
        looks: u32,
        left: HermitianMatrix3,
        right: HermitianMatrix3,
        seed: u64,
    ) -> Self {
        Self {
            height,
            width,
            looks,
            seed,
            regions: vec![
                SceneRegion {
                    rect: Rect::new(0, 0, height, edge_col),
                    sigma: left,
                },
                SceneRegion {
                    rect: Rect::new(0, edge_col, height, width - edge_col),
                    sigma: right,
                },
            ],
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Region index of every pixel, after checking that the rectangles tile
    /// the image and that every `Σ` is HPD.
    pub fn region_map(&self) -> Result<Vec<usize>> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidScene("dimensions must be positive".into()));
        }
        if self.looks == 0 {
            return Err(Error::InvalidScene("looks must be at least 1".into()));
        }
        const UNSET: usize = usize::MAX;
        let mut map = vec![UNSET; self.height * self.width];
        for (k, region) in self.regions.iter().enumerate() {
            let rect = region.rect;
            if rect.area() == 0 || !rect.fits_in(self.height, self.width) {
                return Err(Error::InvalidScene(format!(
                    "region {k} {rect:?} is empty or outside the {}x{} image",
                    self.height, self.width
                )));
            }
            if !region.sigma.is_hpd() {
                return Err(Error::InvalidScene(format!(
                    "region {k} covariance is not positive definite"
                )));
            }
            for (r, c) in rect.pixels() {
                let slot = &mut map[r * self.width + c];
                if *slot != UNSET {
                    return Err(Error::InvalidScene(format!(
                        "regions {} and {k} overlap at ({r}, {c})",
                        *slot
                    )));
                }
                *slot = k;
            }
        }
        if let Some(idx) = map.iter().position(|&k| k == UNSET) {
            return Err(Error::InvalidScene(format!(
                "pixel ({}, {}) is not covered by any region",
                idx / self.width,
                idx % self.width
            )));
        }
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        self.region_map().map(|_| ())
    }

    /// True covariance image (every pixel equal to its region's `Σ`).
    pub fn truth(&self) -> Result<CovarianceImage> {
        let map = self.region_map()?;
        let pixels = map.iter().map(|&k| self.regions[k].sigma).collect();
        CovarianceImage::new(self.height, self.width, f64::from(self.looks), pixels)
    }

    /// The vertical boundary between a full-height left and right region,
    /// if the scene is exactly such a pair.
    pub fn vertical_edge_column(&self) -> Option<usize> {
        let [a, b] = self.regions.as_slice() else {
            return None;
        };
        let full = |r: &Rect| r.row == 0 && r.height == self.height;
        if !full(&a.rect) || !full(&b.rect) {
            return None;
        }
        let (left, right) = if a.rect.col < b.rect.col {
            (a, b)
        } else {
            (b, a)
        };
        (left.rect.col == 0 && left.rect.col + left.rect.width == right.rect.col)
            .then_some(right.rect.col)
    }
}

pub fn generate_scene(spec: &SceneSpec) -> Result<CovarianceImage> {
    let map = spec.region_map()?;
    let looks = f64::from(spec.looks);
    let models = spec
        .regions
        .iter()
        .map(|r| WishartModel::new(r.sigma, looks))
        .collect::<Result<Vec<_>>>()?;

    let width = spec.width;
    let mut pixels = vec![HermitianMatrix3::zero(); spec.height * width];
    pixels
        .par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(row, out)| -> Result<()> {
            let mut rng = substream(spec.seed, row as u64);
            for (col, slot) in out.iter_mut().enumerate() {
                *slot = models[map[row * width + col]].sample(&mut rng)?;
            }
            Ok(())
        })?;
    CovarianceImage::new(spec.height, width, looks, pixels)
}

fn channel_index(channel: usize) -> Result<usize> {
    match channel {
        1..=3 => Ok(channel - 1),
        _ => Err(Error::InvalidImage(format!(
            "channel must be 1, 2 or 3, got {channel}"
        ))),
    }
}

/// Equivalent number of looks `mean² / variance` of one diagonal intensity
/// channel (1-based) over `rect`.
pub fn enl(image: &CovarianceImage, rect: &Rect, channel: usize) -> Result<f64> {
    let k = channel_index(channel)?;
    if !rect.fits_in(image.height(), image.width()) {
        return Err(Error::InvalidImage(format!(
            "{rect:?} is outside the image"
        )));
    }
    if rect.area() < MIN_ENL_PIXELS {
        return Err(Error::InvalidImage(format!(
            "{rect:?} has fewer than {MIN_ENL_PIXELS} pixels"
        )));
    }
    let n = rect.area() as f64;
    let values = || rect.pixels().map(|(r, c)| image.get(r, c).diag()[k]);
    let mean = values().sum::<f64>() / n;
    let var = values().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::DegenerateRegion);
    }
    Ok(mean * mean / var)
}

/// Column profile of a diagonal channel, averaged over all rows.
pub fn column_profile(image: &CovarianceImage, channel: usize) -> Result<Vec<f64>> {
    let k = channel_index(channel)?;
    let mut profile = vec![0.0; image.width()];
    for r in 0..image.height() {
        for (p, px) in profile.iter_mut().zip(image.row(r)) {
            *p += px.diag()[k];
        }
    }
    let h = image.height() as f64;
    Ok(profile.into_iter().map(|p| p / h).collect())
}

/// Width in pixels of the 25%–75% transition of the row-averaged profile
/// across a vertical edge whose first right-hand column is `edge_col`.
///
/// Plateau levels are the mean profile at least [`PLATEAU_GAP`] columns
/// away from the edge; crossings are located by linear interpolation
/// between neighbouring columns.
pub fn edge_width(image: &CovarianceImage, edge_col: usize, channel: usize) -> Result<f64> {
    let profile = column_profile(image, channel)?;
    edge_width_of_profile(&profile, edge_col)
}

pub fn edge_width_of_profile(profile: &[f64], edge_col: usize) -> Result<f64> {
    let width = profile.len();
    if edge_col < PLATEAU_GAP + 1 || edge_col + PLATEAU_GAP >= width {
        return Err(Error::NoEdgeDetected(format!(
            "edge column {edge_col} leaves no plateau in a profile of width {width}"
        )));
    }
    let left = &profile[..edge_col - PLATEAU_GAP];
    let right = &profile[edge_col + PLATEAU_GAP..];
    let lo = left.iter().sum::<f64>() / left.len() as f64;
    let hi = right.iter().sum::<f64>() / right.len() as f64;
    let contrast = hi - lo;
    if !(contrast.abs() > 1e-12 * lo.abs().max(hi.abs())) {
        return Err(Error::NoEdgeDetected("plateaus are equal".into()));
    }

    let start = edge_col - PLATEAU_GAP - 1;
    let end = edge_col + PLATEAU_GAP;
    let norm: Vec<f64> = profile[start..=end]
        .iter()
        .map(|p| (p - lo) / contrast)
        .collect();
    let crossing = |level: f64, from: f64| -> Option<f64> {
        norm.windows(2).enumerate().find_map(|(j, w)| {
            let x = if w[0] < level && level <= w[1] {
                j as f64 + (level - w[0]) / (w[1] - w[0])
            } else {
                return None;
            };
            (x >= from).then_some(x)
        })
    };
    let q25 = crossing(0.25, f64::NEG_INFINITY)
        .ok_or_else(|| Error::NoEdgeDetected("profile never crosses 25%".into()))?;
    let q75 = crossing(0.75, q25)
        .ok_or_else(|| Error::NoEdgeDetected("profile never crosses 75%".into()))?;
    Ok(q75 - q25)
}

/// Mean squared Frobenius distance to the true covariance.
pub fn mse_to_truth(image: &CovarianceImage, truth: &CovarianceImage) -> Result<f64> {
    if image.height() != truth.height() || image.width() != truth.width() {
        return Err(Error::InvalidImage(format!(
            "image {}x{} does not match truth {}x{}",
            image.height(),
            image.width(),
            truth.height(),
            truth.width()
        )));
    }
    let total: f64 = image
        .pixels()
        .iter()
        .zip(truth.pixels())
        .map(|(a, b)| (*a - *b).frobenius_sqr())
        .sum();
    Ok(total / image.pixels().len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub region: usize,
    /// Evaluation rectangle: the region shrunk by [`EVAL_MARGIN`].
    pub rect: Option<Rect>,
    /// ENL of channels 1..3; `None` where undefined.
    pub enl: [Option<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub regions: Vec<RegionMetrics>,
    pub edge_column: Option<usize>,
    pub edge_channel: Option<usize>,
    pub edge_width: Option<f64>,
    pub mse_to_truth: f64,
}

/// Scores `image` against the scene it was generated from.
pub fn evaluate(image: &CovarianceImage, spec: &SceneSpec) -> Result<MetricsReport> {
    let truth = spec.truth()?;
    let mse = mse_to_truth(image, &truth)?;

    let regions = spec
        .regions
        .iter()
        .enumerate()
        .map(|(k, region)| {
            let rect = region
                .rect
                .shrink(EVAL_MARGIN)
                .filter(|r| r.area() >= MIN_ENL_PIXELS);
            let enl = match rect {
                Some(r) => [1, 2, 3].map(|ch| enl(image, &r, ch).ok()),
                None => [None; 3],
            };
            RegionMetrics {
                region: k,
                rect,
                enl,
            }
        })
        .collect();

    let edge_column = spec.vertical_edge_column();
    let (edge_channel, edge_width) = match edge_column {
        Some(col) => {
            let channel =
                strongest_contrast_channel(&spec.regions[0].sigma, &spec.regions[1].sigma);
            (Some(channel), edge_width(image, col, channel).ok())
        }
        None => (None, None),
    };

    Ok(MetricsReport {
        regions,
        edge_column,
        edge_channel,
        edge_width,
        mse_to_truth: mse,
    })
}

// 1-based channel with the largest intensity ratio between two regions.
fn strongest_contrast_channel(a: &HermitianMatrix3, b: &HermitianMatrix3) -> usize {
    let (da, db) = (a.diag(), b.diag());
    let ratio = |k: usize| {
        let (x, y) = (da[k].max(f64::MIN_POSITIVE), db[k].max(f64::MIN_POSITIVE));
        (x / y).max(y / x)
    };
    let mut best = 0;
    for k in 1..3 {
        if ratio(k) > ratio(best) {
            best = k;
        }
    }
    best + 1
}
