use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix3;

/// A multilook PolSAR image: one covariance matrix per pixel, row-major.
///
/// Pixels are Hermitian by construction but need not be positive definite;
/// single-look or degenerate pixels can be singular.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceImage {
    height: usize,
    width: usize,
    looks: f64,
    pixels: Vec<HermitianMatrix3>,
}

impl CovarianceImage {
    pub fn new(
        height: usize,
        width: usize,
        looks: f64,
        pixels: Vec<HermitianMatrix3>,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        if pixels.len() != height * width {
            return Err(Error::InvalidImage(format!(
                "{} pixels for a {height}x{width} image",
                pixels.len()
            )));
        }
        if !(looks.is_finite() && looks > 0.0) {
            return Err(Error::InvalidLooks(looks));
        }
        Ok(Self {
            height,
            width,
            looks,
            pixels,
        })
    }

    pub fn constant(
        height: usize,
        width: usize,
        looks: f64,
        value: HermitianMatrix3,
    ) -> Result<Self> {
        Self::new(height, width, looks, vec![value; height * width])
    }

    pub fn from_fn<F>(height: usize, width: usize, looks: f64, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> HermitianMatrix3,
    {
        let mut pixels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(height, width, looks, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn looks(&self) -> f64 {
        self.looks
    }

    pub fn pixels(&self) -> &[HermitianMatrix3] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<HermitianMatrix3> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> &HermitianMatrix3 {
        &self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[HermitianMatrix3] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Applies `f` to every pixel, keeping dimensions and looks.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(&HermitianMatrix3) -> HermitianMatrix3,
    {
        Self {
            height: self.height,
            width: self.width,
            looks: self.looks,
            pixels: self.pixels.iter().map(f).collect(),
        }
    }

    pub(crate) fn with_pixels(&self, pixels: Vec<HermitianMatrix3>) -> Self {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Self {
            height: self.height,
            width: self.width,
            looks: self.looks,
            pixels,
        }
    }
}

/// Axis-aligned pixel rectangle `[row, row + height) × [col, col + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn new(row: usize, col: usize, height: usize, width: usize) -> Self {
        Self {
            row,
            col,
            height,
            width,
        }
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row
            && row < self.row + self.height
            && col >= self.col
            && col < self.col + self.width
    }

    pub fn fits_in(&self, height: usize, width: usize) -> bool {
        self.row + self.height <= height && self.col + self.width <= width
    }

    /// Shrinks every side by `margin`, or `None` if nothing is left.
    pub fn shrink(&self, margin: usize) -> Option<Self> {
        if self.height <= 2 * margin || self.width <= 2 * margin {
            return None;
        }
        Some(Self::new(
            self.row + margin,
            self.col + margin,
            self.height - 2 * margin,
            self.width - 2 * margin,
        ))
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.row..self.row + self.height)
            .flat_map(move |r| (self.col..self.col + self.width).map(move |c| (r, c)))
    }
}
