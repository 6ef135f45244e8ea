//! False-colour rendering of covariance images.
//!
//! Channels are second moments of the scattering vector `[S_VV, S_VH, S_HH]`
//! expanded from the covariance matrix:
//!
//! | mode     | red                 | green          | blue                |
//! |----------|---------------------|----------------|---------------------|
//! | Pauli    | `E|S_HH − S_VV|²`   | `E|2 S_HV|²`   | `E|S_HH + S_VV|²`   |
//! | Sinclair | `√E|S_VV|²`         | `2 √E|S_HV|²`  | `√E|S_HH|²`         |
//!
//! Each raw channel is clipped at an empirical quantile and mapped linearly
//! to 8 bits.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::CovarianceImage;
use crate::linalg::HermitianMatrix3;

pub const DEFAULT_CLIP_QUANTILE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decomposition {
    Pauli,
    Sinclair,
}

impl Decomposition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decomposition::Pauli => "pauli",
            Decomposition::Sinclair => "sinclair",
        }
    }

    pub fn channels(&self, pixel: &HermitianMatrix3) -> [f64; 3] {
        match self {
            Decomposition::Pauli => pauli_channels(pixel),
            Decomposition::Sinclair => sinclair_channels(pixel),
        }
    }
}

impl std::str::FromStr for Decomposition {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pauli" => Ok(Decomposition::Pauli),
            "sinclair" => Ok(Decomposition::Sinclair),
            other => Err(format!("unknown decomposition `{other}`")),
        }
    }
}

/// Pauli channels in the horizontal basis.
pub fn pauli_channels(pixel: &HermitianMatrix3) -> [f64; 3] {
    let [vv, hv, hh] = pixel.diag();
    let cross = pixel.offdiag()[1].re; // Re E{S_VV S_HH*}
    let sum = hh + vv;
    [
        (sum - 2.0 * cross).max(0.0),
        (4.0 * hv).max(0.0),
        (sum + 2.0 * cross).max(0.0),
    ]
}

pub fn sinclair_channels(pixel: &HermitianMatrix3) -> [f64; 3] {
    let [vv, hv, hh] = pixel.diag();
    [
        vv.max(0.0).sqrt(),
        2.0 * hv.max(0.0).sqrt(),
        hh.max(0.0).sqrt(),
    ]
}

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    /// Binary PPM (P6) encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + 3 * self.pixels.len());
        out.extend_from_slice(header.as_bytes());
        for px in &self.pixels {
            out.extend_from_slice(px);
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(&self.to_ppm())?;
        file.flush()?;
        Ok(())
    }
}

/// Per-channel clipping bounds used by a rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub clip_low: [f64; 3],
    pub clip_high: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub mode: Decomposition,
    pub clip_quantile: f64,
    /// Display gamma: normalised values are raised to `1 / gamma`.
    pub gamma: Option<f64>,
}

impl RenderOptions {
    pub fn new(mode: Decomposition) -> Self {
        Self {
            mode,
            clip_quantile: DEFAULT_CLIP_QUANTILE,
            gamma: None,
        }
    }
}

/// Nearest-rank quantile of an unsorted sample.
pub fn nearest_rank_quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn render(
    image: &CovarianceImage,
    mode: Decomposition,
    clip_quantile: f64,
) -> Result<RgbImage> {
    render_with(
        image,
        &RenderOptions {
            mode,
            clip_quantile,
            gamma: None,
        },
    )
    .map(|(rgb, _)| rgb)
}

/// Renders and also returns the clipping bounds that were applied.
pub fn render_with(
    image: &CovarianceImage,
    options: &RenderOptions,
) -> Result<(RgbImage, ChannelStats)> {
    let q = options.clip_quantile;
    if !(q > 0.5 && q <= 1.0) {
        return Err(Error::InvalidQuantile(q));
    }
    if let Some(g) = options.gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "gamma must be positive, got {g}"
            )));
        }
    }
    let raw: Vec<[f64; 3]> = image
        .pixels()
        .par_iter()
        .map(|p| options.mode.channels(p))
        .collect();

    let mut clip_high = [0.0; 3];
    for (k, high) in clip_high.iter_mut().enumerate() {
        let channel: Vec<f64> = raw.iter().map(|v| v[k]).collect();
        *high = nearest_rank_quantile(&channel, q);
    }
    let stats = ChannelStats {
        clip_low: [0.0; 3],
        clip_high,
    };

    let inv_gamma = options.gamma.map(|g| 1.0 / g);
    let pixels = raw
        .par_iter()
        .map(|v| {
            let mut px = [0u8; 3];
            for k in 0..3 {
                px[k] = to_byte(v[k], clip_high[k], inv_gamma);
            }
            px
        })
        .collect();

    Ok((
        RgbImage {
            height: image.height(),
            width: image.width(),
            pixels,
        },
        stats,
    ))
}

fn to_byte(value: f64, high: f64, inv_gamma: Option<f64>) -> u8 {
    if !(high > 0.0) {
        return 0;
    }
    let mut x = value.clamp(0.0, high) / high;
    if let Some(e) = inv_gamma {
        x = x.powf(e);
    }
    (255.0 * x).round() as u8
}
