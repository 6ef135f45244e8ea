//! The `PCOV1` covariance raster container and run-metadata sidecars.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "PCOV1\n"               6 bytes
//! header_length           u32
//! header                  JSON, header_length bytes
//! payload                 height × width × 9 f64
//! ```
//!
//! The header is written with a fixed key order and no timestamps, so the
//! same image always serialises to the same bytes. Each pixel stores
//! `[Σ11, Σ22, Σ33, ReΣ12, ImΣ12, ReΣ13, ImΣ13, ReΣ23, ImΣ23]` with the
//! channel order `VV, VH, HH`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::CovarianceImage;
use crate::linalg::HermitianMatrix3;

pub const MAGIC: &[u8; 6] = b"PCOV1\n";
const PIXEL_BYTES: usize = 9 * 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovHeader {
    pub height: usize,
    pub width: usize,
    pub looks: f64,
    pub layout: String,
    pub order: String,
    pub dtype: String,
    pub channels: usize,
}

impl CovHeader {
    pub fn for_image(image: &CovarianceImage) -> Self {
        Self {
            height: image.height(),
            width: image.width(),
            looks: image.looks(),
            layout: "row-major".into(),
            order: "VV,VH,HH".into(),
            dtype: "f64le".into(),
            channels: 9,
        }
    }

    fn check(&self) -> Result<()> {
        let expect = |field: &'static str, got: &str, want: &str| {
            if got == want {
                Ok(())
            } else {
                Err(Error::HeaderMismatch {
                    field,
                    detail: format!("expected {want:?}, found {got:?}"),
                })
            }
        };
        expect("layout", &self.layout, "row-major")?;
        expect("order", &self.order, "VV,VH,HH")?;
        expect("dtype", &self.dtype, "f64le")?;
        if self.channels != 9 {
            return Err(Error::HeaderMismatch {
                field: "channels",
                detail: format!("expected 9, found {}", self.channels),
            });
        }
        for (field, v) in [("height", self.height), ("width", self.width)] {
            if v == 0 {
                return Err(Error::HeaderMismatch {
                    field,
                    detail: "must be positive".into(),
                });
            }
        }
        if !(self.looks.is_finite() && self.looks > 0.0) {
            return Err(Error::HeaderMismatch {
                field: "looks",
                detail: format!("must be positive, found {}", self.looks),
            });
        }
        Ok(())
    }
}

pub fn encode_cov(image: &CovarianceImage) -> Vec<u8> {
    let header = serde_json::to_vec(&CovHeader::for_image(image)).expect("header serialises");
    let mut out =
        Vec::with_capacity(MAGIC.len() + 4 + header.len() + image.pixels().len() * PIXEL_BYTES);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for px in image.pixels() {
        for v in px.to_reals() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_cov(bytes: &[u8]) -> Result<CovarianceImage> {
    if bytes.len() < MAGIC.len() {
        return if MAGIC.starts_with(bytes) && !bytes.is_empty() {
            Err(Error::TruncatedPayload("file ends inside the magic".into()))
        } else {
            Err(Error::BadMagic)
        };
    }
    let (magic, rest) = bytes.split_at(MAGIC.len());
    if magic != MAGIC {
        return Err(Error::BadMagic);
    }
    if rest.len() < 4 {
        return Err(Error::TruncatedPayload(
            "file ends inside header_length".into(),
        ));
    }
    let (len, rest) = rest.split_at(4);
    let header_len = u32::from_le_bytes(len.try_into().expect("4 bytes")) as usize;
    if rest.len() < header_len {
        return Err(Error::TruncatedPayload(format!(
            "header needs {header_len} bytes, {} available",
            rest.len()
        )));
    }
    let (header, payload) = rest.split_at(header_len);
    let header: CovHeader = serde_json::from_slice(header).map_err(|e| Error::HeaderMismatch {
        field: "header",
        detail: e.to_string(),
    })?;
    header.check()?;

    if payload.len() % PIXEL_BYTES != 0 {
        return Err(Error::TruncatedPayload(format!(
            "{} payload bytes is not a whole number of {PIXEL_BYTES}-byte pixels",
            payload.len()
        )));
    }
    let count = payload.len() / PIXEL_BYTES;
    let expected = header.height.checked_mul(header.width);
    if expected != Some(count) {
        return Err(Error::HeaderMismatch {
            field: "height*width",
            detail: format!(
                "header declares {}x{} pixels, payload holds {count}",
                header.height, header.width
            ),
        });
    }
    let pixels = payload
        .chunks_exact(PIXEL_BYTES)
        .map(|chunk| {
            let mut v = [0.0; 9];
            for (slot, b) in v.iter_mut().zip(chunk.chunks_exact(8)) {
                *slot = f64::from_le_bytes(b.try_into().expect("8 bytes"));
            }
            HermitianMatrix3::from_reals(v)
        })
        .collect();
    CovarianceImage::new(header.height, header.width, header.looks, pixels)
}

pub fn write_cov(image: &CovarianceImage, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&encode_cov(image))?;
    file.flush()?;
    Ok(())
}

pub fn read_cov(path: &Path) -> Result<CovarianceImage> {
    decode_cov(&std::fs::read(path)?)
}

/// Provenance written next to every output artifact.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub command_line: Vec<String>,
    pub software_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub output: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_tests: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_set: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_quantile: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip_high: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_accepted_regions: Option<Vec<f64>>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

/// `<output>.meta.json`
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_metadata(output: &Path, meta: &RunMetadata) -> Result<PathBuf> {
    let path = sidecar_path(output);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
