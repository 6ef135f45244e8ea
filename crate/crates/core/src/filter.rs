//! Adaptive smoothing over Nagao-Matsuyama neighbourhoods, plus the boxcar
//! mean used as a baseline.
//!
//! Each filtered pixel sits at the centre of a 5×5 window holding nine
//! overlapping regions: the central 3×3 block (region 1) and eight
//! directional regions of seven pixels each (regions 2..9). The Wishart ML
//! estimate of every directional region is tested against the estimate of
//! the central block with the Hellinger statistic. The output is the mean
//! of the pixels of the central block and of every region the test does not
//! reject. When all eight are rejected only the central block is averaged.
//!
//! Pixels without full 5×5 support (the two-pixel frame) are copied through
//! unchanged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::CovarianceImage;
use crate::linalg::{self, HermitianMatrix3};
use crate::stats::{self, PreparedCovariance, TestConfig};

/// Half-width of the filtering window.
pub const RADIUS: usize = 2;

/// Side of the filtering window.
pub const WINDOW: usize = 2 * RADIUS + 1;

/// Identifier recorded in run metadata for the mask geometry below.
pub const MASK_SET_ID: &str = "nagao-matsuyama-classic-9";

/// One region of the 5×5 window as `(drow, dcol)` offsets from the centre.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    pub id: u8,
    pub offsets: Vec<(isize, isize)>,
}

impl RegionMask {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

const CENTRE: [(isize, isize); 9] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 0),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

const NORTH: [(isize, isize); 7] = [
    (0, 0),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (-2, -1),
    (-2, 0),
    (-2, 1),
];

const NORTH_EAST: [(isize, isize); 7] =
    [(0, 0), (0, 1), (-1, 0), (-1, 1), (-1, 2), (-2, 1), (-2, 2)];

/// Quarter turn `(dr, dc) -> (dc, -dr)`: north becomes east, east south.
pub fn rotate_quarter((dr, dc): (isize, isize)) -> (isize, isize) {
    (dc, -dr)
}

/// The nine regions in a fixed order: 1 centre, then N, NE, E, SE, S, SW,
/// W, NW as ids 2..9.
pub fn nagao_masks() -> Vec<RegionMask> {
    let mut masks = vec![RegionMask {
        id: 1,
        offsets: CENTRE.to_vec(),
    }];
    let mut edge = NORTH.to_vec();
    let mut corner = NORTH_EAST.to_vec();
    for k in 0..4u8 {
        masks.push(RegionMask {
            id: 2 + 2 * k,
            offsets: edge.clone(),
        });
        masks.push(RegionMask {
            id: 3 + 2 * k,
            offsets: corner.clone(),
        });
        edge = edge.into_iter().map(rotate_quarter).collect();
        corner = corner.into_iter().map(rotate_quarter).collect();
    }
    masks
}

/// How pixels shared by several accepted regions enter the final mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    /// Once per region that contains them (size-weighted mean of region means).
    #[default]
    PerRegion,
    /// Once, regardless of how many accepted regions contain them.
    SetUnion,
}

impl OverlapMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            OverlapMode::PerRegion => "per-region",
            OverlapMode::SetUnion => "set-union",
        }
    }
}

impl std::str::FromStr for OverlapMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "per-region" => Ok(OverlapMode::PerRegion),
            "set-union" => Ok(OverlapMode::SetUnion),
            other => Err(format!("unknown overlap mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterConfig {
    pub test: TestConfig,
    pub overlap: OverlapMode,
}

impl From<TestConfig> for FilterConfig {
    fn from(test: TestConfig) -> Self {
        Self {
            test,
            overlap: OverlapMode::default(),
        }
    }
}

/// Per-pixel diagnostics of one filtering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterReport {
    pub height: usize,
    pub width: usize,
    /// Non-rejected directional regions per pixel, 0..=8. Zero on the border.
    pub accepted_counts: Vec<u8>,
    pub total_pixels: usize,
    pub filtered_pixels: usize,
    /// Regional estimates outside the HPD cone, counted as rejections.
    pub degenerate_regions: usize,
}

impl FilterReport {
    /// `histogram[k]` = number of filtered pixels with `k` accepted regions.
    pub fn acceptance_histogram(&self) -> [usize; 9] {
        let mut hist = [0usize; 9];
        for r in RADIUS..self.height.saturating_sub(RADIUS) {
            for c in RADIUS..self.width.saturating_sub(RADIUS) {
                hist[self.accepted_counts[r * self.width + c] as usize] += 1;
            }
        }
        hist
    }

    pub fn mean_accepted(&self) -> f64 {
        if self.filtered_pixels == 0 {
            return 0.0;
        }
        let hist = self.acceptance_histogram();
        let total: usize = hist.iter().enumerate().map(|(k, n)| k * n).sum();
        total as f64 / self.filtered_pixels as f64
    }
}

/// Outcome for one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelOutcome {
    pub value: HermitianMatrix3,
    /// Bit `i - 2` set when directional region `i` was accepted.
    pub accepted: u8,
    pub degenerate: u8,
}

impl PixelOutcome {
    pub fn accepted_count(&self) -> u8 {
        self.accepted.count_ones() as u8
    }

    pub fn is_accepted(&self, region_id: u8) -> bool {
        (2..=9).contains(&region_id) && self.accepted & (1 << (region_id - 2)) != 0
    }
}

struct Engine<'a> {
    image: &'a CovarianceImage,
    masks: Vec<RegionMask>,
    level: f64,
    dof: usize,
    overlap: OverlapMode,
}

impl<'a> Engine<'a> {
    fn new(image: &'a CovarianceImage, config: &FilterConfig) -> Result<Self> {
        config.test.validate()?;
        let looks = image.looks();
        if !(looks > 2.0) {
            return Err(Error::InvalidLooks(looks));
        }
        Ok(Self {
            image,
            masks: nagao_masks(),
            level: config.test.corrected_level()?,
            dof: config.test.dof,
            overlap: config.overlap,
        })
    }

    fn at(&self, row: usize, col: usize, (dr, dc): (isize, isize)) -> &'a HermitianMatrix3 {
        let r = row.wrapping_add_signed(dr);
        let c = col.wrapping_add_signed(dc);
        self.image.get(r, c)
    }

    fn region<'s>(
        &'s self,
        row: usize,
        col: usize,
        mask: &'s RegionMask,
    ) -> impl Iterator<Item = &'a HermitianMatrix3> + 's {
        mask.offsets.iter().map(move |&o| self.at(row, col, o))
    }

    fn pixel(&self, row: usize, col: usize) -> PixelOutcome {
        let looks = self.image.looks();
        let centre_mask = &self.masks[0];
        let centre_mean =
            linalg::mean(self.region(row, col, centre_mask)).expect("masks are non-empty");

        let mut accepted = 0u8;
        let mut degenerate = 0u8;
        match PreparedCovariance::new(centre_mean) {
            Ok(centre) => {
                for (bit, mask) in self.masks[1..].iter().enumerate() {
                    let estimate =
                        linalg::mean(self.region(row, col, mask)).expect("masks are non-empty");
                    let Ok(other) = PreparedCovariance::new(estimate) else {
                        degenerate += 1;
                        continue;
                    };
                    let decision = stats::test_prepared(
                        &centre,
                        &other,
                        centre_mask.len(),
                        mask.len(),
                        looks,
                        self.level,
                        self.dof,
                    );
                    match decision {
                        Ok(d) if !d.reject => accepted |= 1 << bit,
                        Ok(_) => {}
                        Err(_) => degenerate += 1,
                    }
                }
            }
            // A degenerate centre cannot be compared with anything.
            Err(_) => degenerate = 8,
        }

        let value = if accepted == 0 {
            centre_mean
        } else {
            self.combine(row, col, accepted)
        };
        PixelOutcome {
            value,
            accepted,
            degenerate,
        }
    }

    fn combine(&self, row: usize, col: usize, accepted: u8) -> HermitianMatrix3 {
        let chosen = || {
            self.masks
                .iter()
                .enumerate()
                .filter(move |(k, _)| *k == 0 || accepted & (1 << (k - 1)) != 0)
                .map(|(_, m)| m)
        };
        match self.overlap {
            OverlapMode::PerRegion => {
                let pixels = chosen().flat_map(|m| self.region(row, col, m));
                linalg::mean(pixels).expect("centre is always included")
            }
            OverlapMode::SetUnion => {
                let mut covered = [[false; WINDOW]; WINDOW];
                for mask in chosen() {
                    for &(dr, dc) in &mask.offsets {
                        covered[(dr + RADIUS as isize) as usize][(dc + RADIUS as isize) as usize] =
                            true;
                    }
                }
                let pixels = (0..WINDOW)
                    .flat_map(|r| (0..WINDOW).map(move |c| (r, c)))
                    .filter(|&(r, c)| covered[r][c])
                    .map(|(r, c)| {
                        self.at(
                            row,
                            col,
                            (r as isize - RADIUS as isize, c as isize - RADIUS as isize),
                        )
                    });
                linalg::mean(pixels).expect("centre is always included")
            }
        }
    }
}

fn has_support(image: &CovarianceImage, row: usize, col: usize) -> bool {
    row >= RADIUS && col >= RADIUS && row + RADIUS < image.height() && col + RADIUS < image.width()
}

/// Filters a single pixel with full 5×5 support, returning the diagnostics
/// as well as the value.
pub fn filter_pixel_outcome(
    image: &CovarianceImage,
    row: usize,
    col: usize,
    config: &FilterConfig,
) -> Result<PixelOutcome> {
    if !has_support(image, row, col) {
        return Err(Error::OutOfBounds {
            row,
            col,
            height: image.height(),
            width: image.width(),
        });
    }
    Ok(Engine::new(image, config)?.pixel(row, col))
}

pub fn filter_pixel(
    image: &CovarianceImage,
    row: usize,
    col: usize,
    config: &FilterConfig,
) -> Result<HermitianMatrix3> {
    filter_pixel_outcome(image, row, col, config).map(|o| o.value)
}

/// One pass of the stochastic-distance filter over the whole image.
///
/// Rows are processed in parallel on the current rayon pool; each output
/// pixel depends only on the input, so the result does not depend on the
/// number of workers.
pub fn filter_image(
    image: &CovarianceImage,
    config: &FilterConfig,
) -> Result<(CovarianceImage, FilterReport)> {
    let (height, width) = (image.height(), image.width());
    if height < WINDOW || width < WINDOW {
        return Err(Error::ImageTooSmall {
            height,
            width,
            required: WINDOW,
        });
    }
    let engine = Engine::new(image, config)?;

    let mut pixels = image.pixels().to_vec();
    let mut counts = vec![0u8; height * width];
    let degenerate: usize = pixels
        .par_chunks_mut(width)
        .zip(counts.par_chunks_mut(width))
        .enumerate()
        .filter(|(row, _)| (RADIUS..height - RADIUS).contains(row))
        .map(|(row, (out, count))| {
            let mut degenerate = 0usize;
            for col in RADIUS..width - RADIUS {
                let outcome = engine.pixel(row, col);
                out[col] = outcome.value;
                count[col] = outcome.accepted_count();
                degenerate += outcome.degenerate as usize;
            }
            degenerate
        })
        .sum();

    let report = FilterReport {
        height,
        width,
        accepted_counts: counts,
        total_pixels: height * width,
        filtered_pixels: (height - 2 * RADIUS) * (width - 2 * RADIUS),
        degenerate_regions: degenerate,
    };
    Ok((image.with_pixels(pixels), report))
}

/// Applies [`filter_image`] `iterations` times (at least once) and returns
/// the report of every pass.
pub fn filter_image_repeated(
    image: &CovarianceImage,
    config: &FilterConfig,
    iterations: usize,
) -> Result<(CovarianceImage, Vec<FilterReport>)> {
    let (mut current, first) = filter_image(image, config)?;
    let mut reports = vec![first];
    for _ in 1..iterations {
        let (next, report) = filter_image(&current, config)?;
        current = next;
        reports.push(report);
    }
    Ok((current, reports))
}

/// Unweighted mean over a `window × window` neighbourhood, truncated to the
/// in-bounds part near the image border.
pub fn boxcar_filter(image: &CovarianceImage, window: usize) -> Result<CovarianceImage> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidWindow(window));
    }
    let (height, width) = (image.height(), image.width());
    if height < window || width < window {
        return Err(Error::ImageTooSmall {
            height,
            width,
            required: window,
        });
    }
    let half = window / 2;
    let mut pixels = vec![HermitianMatrix3::zero(); height * width];
    pixels
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, out)| {
            let rows = row.saturating_sub(half)..(row + half + 1).min(height);
            for (col, slot) in out.iter_mut().enumerate() {
                let cols = col.saturating_sub(half)..(col + half + 1).min(width);
                let window = rows.clone().flat_map(|r| image.row(r)[cols.clone()].iter());
                *slot = linalg::mean(window).expect("window is non-empty");
            }
        });
    Ok(image.with_pixels(pixels))
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
