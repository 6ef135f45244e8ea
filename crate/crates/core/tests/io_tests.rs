mod common;

use std::path::PathBuf;

use common::*;
use polsmooth::io::{
    decode_cov, encode_cov, read_cov, sidecar_path, write_cov, write_metadata, RunMetadata,
};
use polsmooth::linalg::HermitianMatrix3;
use polsmooth::CovarianceImage;
use proptest::prelude::*;

fn small_image() -> CovarianceImage {
    CovarianceImage::from_fn(2, 3, 4.0, |r, col| {
        let k = (r * 3 + col) as f64;
        HermitianMatrix3::new(
            [1.0 + k, 0.5, 2.0 - 0.25 * k],
            [c(0.1 * k, -0.1), c(0.0, 0.2), c(-0.3, 0.01 * k)],
        )
    })
    .unwrap()
}

/// Byte layout written out by hand from the format description.
fn expected_bytes(img: &CovarianceImage) -> Vec<u8> {
    let header = format!(
        r#"{{"height":{},"width":{},"looks":4.0,"layout":"row-major","order":"VV,VH,HH","dtype":"f64le","channels":9}}"#,
        img.height(),
        img.width()
    );
    let mut out = b"PCOV1\n".to_vec();
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for p in img.pixels() {
        let a = p.to_full();
        let vals = [
            a[0][0].re, a[1][1].re, a[2][2].re, a[0][1].re, a[0][1].im, a[0][2].re, a[0][2].im,
            a[1][2].re, a[1][2].im,
        ];
        for v in vals {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

#[test]
fn encoding_matches_hand_written_layout() {
    let img = small_image();
    assert_eq!(encode_cov(&img), expected_bytes(&img));
}

#[test]
fn golden_file_matches() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_2x3.pcov");
    let bytes = encode_cov(&small_image());
    if std::env::var_os("POLSMOOTH_BLESS").is_some() {
        std::fs::write(&path, &bytes).unwrap();
    }
    let golden = std::fs::read(&path).unwrap();
    assert_eq!(bytes, golden);
    assert_eq!(decode_cov(&golden).unwrap(), small_image());
}

#[test]
fn encoding_is_deterministic() {
    let img = small_image();
    let first = encode_cov(&img);
    for _ in 0..10 {
        assert_eq!(encode_cov(&img.clone()), first);
    }
}

#[test]
fn files_round_trip_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.pcov");
    let img = small_image();
    write_cov(&img, &path).unwrap();
    assert_eq!(read_cov(&path).unwrap(), img);

    let meta = RunMetadata {
        command: "filter".into(),
        output: path.display().to_string(),
        alpha: Some(0.8),
        ..RunMetadata::default()
    };
    let side = write_metadata(&path, &meta).unwrap();
    assert_eq!(side, sidecar_path(&path));
    assert!(side.to_string_lossy().ends_with("scene.pcov.meta.json"));
    let back: RunMetadata = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert_eq!(back, meta);
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert!(value.get("seed").is_none());
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        read_cov(&dir.path().join("nope.pcov")).unwrap_err().kind(),
        "IoFailure"
    );
}

#[test]
fn corrupted_inputs_are_classified() {
    let good = encode_cov(&small_image());
    let kind = |bytes: &[u8]| decode_cov(bytes).unwrap_err().kind();

    assert_eq!(kind(b""), "BadMagic");
    assert_eq!(kind(b"PCOV2\nxxxx"), "BadMagic");
    assert_eq!(kind(&good[..3]), "TruncatedPayload");
    assert_eq!(kind(&good[..8]), "TruncatedPayload");
    assert_eq!(kind(&good[..20]), "TruncatedPayload");
    assert_eq!(kind(&good[..good.len() - 1]), "TruncatedPayload");
    assert_eq!(kind(&good[..good.len() - 72]), "HeaderMismatch");

    let mut extra = good.clone();
    extra.extend_from_slice(&[0u8; 72]);
    assert_eq!(kind(&extra), "HeaderMismatch");

    let text = String::from_utf8_lossy(&good[10..]).into_owned();
    for (from, to) in [
        ("row-major", "col-major"),
        ("f64le", "f32le"),
        ("\"channels\":9", "\"channels\":6"),
    ] {
        let header_len = u32::from_le_bytes(good[6..10].try_into().unwrap()) as usize;
        let header = text[..header_len].replacen(from, to, 1);
        let mut bytes = b"PCOV1\n".to_vec();
        bytes.extend_from_slice(&(header.len() as u32).to_le_bytes());
        bytes.extend_from_slice(header.as_bytes());
        bytes.extend_from_slice(&good[10 + header_len..]);
        assert_eq!(kind(&bytes), "HeaderMismatch", "{from} -> {to}");
    }
}

fn image_strategy() -> impl Strategy<Value = CovarianceImage> {
    (1usize..6, 1usize..6, 1u32..16).prop_flat_map(|(h, w, looks)| {
        prop::collection::vec(prop::array::uniform9(-1e6f64..1e6), h * w).prop_map(move |px| {
            let pixels = px.into_iter().map(HermitianMatrix3::from_reals).collect();
            CovarianceImage::new(h, w, f64::from(looks), pixels).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn decode_inverts_encode(img in image_strategy()) {
        let bytes = encode_cov(&img);
        let back = decode_cov(&bytes).unwrap();
        prop_assert_eq!(&back, &img);
        prop_assert_eq!(encode_cov(&back), bytes);
    }
}
