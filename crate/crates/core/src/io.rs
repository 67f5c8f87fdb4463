//! Raster and mask file formats.
//!
//! Float rasters use a small container: the magic `FRAS`, a version byte (1),
//! width and height as little-endian `u32`, then `width * height` little-endian
//! IEEE-754 `f32` values in row-major order. Interchange with annotated corpora
//! goes through single-channel PNG.

use std::fs;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMask, Raster, MAX_LABEL};
use crate::scalar::Scalar;
use crate::IntensityRaster;

pub const FRAS_MAGIC: &[u8; 4] = b"FRAS";
pub const FRAS_VERSION: u8 = 1;
pub const FRAS_HEADER_LEN: usize = 13;

/// Largest pixel count accepted from a file header (1 Gi pixels).
const MAX_PIXELS: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    FloatRaster,
    /// Single-channel PNG written at 8 bits; either depth is accepted on load.
    GrayPng8,
    /// Single-channel PNG written at 16 bits; either depth is accepted on load.
    GrayPng16,
}

impl RasterFormat {
    /// `.fras` → float raster, `.png` → 8-bit gray PNG.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "fras" => Some(Self::FloatRaster),
            "png" => Some(Self::GrayPng8),
            _ => None,
        }
    }
}

fn format_err(path: &Path, offset: u64, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        offset,
        reason: reason.into(),
    }
}

/// Serialize a raster into the float-raster container.
pub fn encode_fras<T: Scalar>(raster: &Raster<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAS_HEADER_LEN + 4 * raster.len());
    out.extend_from_slice(FRAS_MAGIC);
    out.push(FRAS_VERSION);
    out.extend_from_slice(&(raster.width() as u32).to_le_bytes());
    out.extend_from_slice(&(raster.height() as u32).to_le_bytes());
    for &v in raster.pixels() {
        out.extend_from_slice(&(v.f64() as f32).to_le_bytes());
    }
    out
}

/// Parse a float-raster container. Errors carry the byte offset of the problem.
pub fn decode_fras(bytes: &[u8]) -> std::result::Result<IntensityRaster, (u64, String)> {
    if bytes.len() < FRAS_HEADER_LEN {
        return Err((bytes.len() as u64, "truncated header".into()));
    }
    if &bytes[..4] != FRAS_MAGIC {
        return Err((0, "bad magic, expected FRAS".into()));
    }
    if bytes[4] != FRAS_VERSION {
        return Err((4, format!("unsupported version {}", bytes[4])));
    }
    let width = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as u64;
    let height = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as u64;
    if width == 0 || height == 0 {
        return Err((5, format!("zero dimension {width}x{height}")));
    }
    let n = width * height;
    if n > MAX_PIXELS {
        return Err((5, format!("dimensions {width}x{height} exceed the pixel limit")));
    }
    let expected = FRAS_HEADER_LEN as u64 + 4 * n;
    if bytes.len() as u64 != expected {
        return Err((
            (bytes.len() as u64).min(expected),
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let mut data = Vec::with_capacity(n as usize);
    for (i, chunk) in bytes[FRAS_HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        let offset = (FRAS_HEADER_LEN + 4 * i) as u64;
        if !v.is_finite() {
            return Err((offset, format!("non-finite value at pixel {i}")));
        }
        if v < 0.0 {
            return Err((offset, format!("negative value {v} at pixel {i}")));
        }
        data.push(v);
    }
    Ok(Raster::from_vec_unchecked(width as usize, height as usize, data))
}

fn open_png(path: &Path) -> Result<DynamicImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Png)
        .map_err(|e| format_err(path, 0, format!("png decode: {e}")))
}

fn write_png(path: &Path, img: DynamicImage) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Codec {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })
}

pub fn load_raster(path: &Path, format: RasterFormat) -> Result<IntensityRaster> {
    match format {
        RasterFormat::FloatRaster => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_fras(&bytes).map_err(|(offset, reason)| format_err(path, offset, reason))
        }
        RasterFormat::GrayPng8 | RasterFormat::GrayPng16 => {
            let (w, h, data) = match open_png(path)? {
                DynamicImage::ImageLuma8(img) => {
                    let (w, h) = img.dimensions();
                    let data = img.into_raw().into_iter().map(|c| c as f32 / 255.0).collect();
                    (w, h, data)
                }
                DynamicImage::ImageLuma16(img) => {
                    let (w, h) = img.dimensions();
                    let data = img.into_raw().into_iter().map(|c| c as f32 / 65535.0).collect();
                    (w, h, data)
                }
                other => {
                    return Err(format_err(
                        path,
                        0,
                        format!("expected single-channel 8/16-bit png, got {:?}", other.color()),
                    ))
                }
            };
            Raster::new(w as usize, h as usize, data).map_err(|e| format_err(path, 0, e.to_string()))
        }
    }
}

/// Load by extension (`.fras` or `.png`).
pub fn load_raster_auto(path: &Path) -> Result<IntensityRaster> {
    let format = RasterFormat::from_path(path)
        .ok_or_else(|| Error::Precondition(format!("{}: unknown raster extension", path.display())))?;
    load_raster(path, format)
}

pub fn save_raster<T: Scalar>(raster: &Raster<T>, path: &Path, format: RasterFormat) -> Result<()> {
    match format {
        RasterFormat::FloatRaster => fs::write(path, encode_fras(raster)).map_err(|e| Error::io(path, e)),
        RasterFormat::GrayPng8 => {
            let data = raster
                .pixels()
                .iter()
                .map(|&v| quantize(v.f64(), 255.0) as u8)
                .collect();
            let img = GrayImage::from_raw(raster.width() as u32, raster.height() as u32, data)
                .expect("buffer matches dimensions");
            write_png(path, DynamicImage::ImageLuma8(img))
        }
        RasterFormat::GrayPng16 => {
            let data = raster
                .pixels()
                .iter()
                .map(|&v| quantize(v.f64(), 65535.0) as u16)
                .collect();
            let img: ImageBuffer<Luma<u16>, Vec<u16>> =
                ImageBuffer::from_raw(raster.width() as u32, raster.height() as u32, data)
                    .expect("buffer matches dimensions");
            write_png(path, DynamicImage::ImageLuma16(img))
        }
    }
}

/// Clamp to [0, 1] and scale to an integer code.
pub fn quantize(v: f64, max_code: f64) -> u32 {
    (v.clamp(0.0, 1.0) * max_code).round() as u32
}

fn load_gray8(path: &Path) -> Result<GrayImage> {
    match open_png(path)? {
        DynamicImage::ImageLuma8(img) => Ok(img),
        other => Err(format_err(
            path,
            0,
            format!("expected 8-bit single-channel png, got {:?}", other.color()),
        )),
    }
}

/// Binary masks: 8-bit PNG, nonzero is set (written as 0/255).
pub fn load_binary_mask(path: &Path) -> Result<BinaryMask> {
    let img = load_gray8(path)?;
    let (w, h) = img.dimensions();
    BinaryMask::new(
        w as usize,
        h as usize,
        img.into_raw().into_iter().map(|c| c != 0).collect(),
    )
}

pub fn save_binary_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let data = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, data).expect("buffer matches dimensions");
    write_png(path, DynamicImage::ImageLuma8(img))
}

/// Label masks: 8-bit PNG with raw class codes 0..=4.
pub fn load_label_mask(path: &Path) -> Result<LabelMask> {
    let img = load_gray8(path)?;
    let (w, h) = img.dimensions();
    let raw = img.into_raw();
    if let Some(i) = raw.iter().position(|&l| l > MAX_LABEL) {
        return Err(format_err(
            path,
            0,
            format!("label {} at pixel {i} is outside 0..=4", raw[i]),
        ));
    }
    LabelMask::new(w as usize, h as usize, raw)
}

pub fn save_label_mask(labels: &LabelMask, path: &Path) -> Result<()> {
    let img = GrayImage::from_raw(labels.width() as u32, labels.height() as u32, labels.labels().to_vec())
        .expect("buffer matches dimensions");
    write_png(path, DynamicImage::ImageLuma8(img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::tempdir;

    #[test]
    fn png_endpoints_map_to_unit_interval() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("two.png");
        GrayImage::from_raw(2, 1, vec![0, 255]).unwrap().save(&p).unwrap();
        let r = load_raster(&p, RasterFormat::GrayPng8).unwrap();
        assert_eq!(r.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn png16_endpoints_map_to_unit_interval() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("two16.png");
        let r = Raster::new(2, 1, vec![0.0f32, 1.0]).unwrap();
        save_raster(&r, &p, RasterFormat::GrayPng16).unwrap();
        let back = load_raster(&p, RasterFormat::GrayPng8).unwrap();
        assert_eq!(back.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn fras_round_trip_is_identity() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("a.fras");
        let r = Raster::new(3, 2, vec![0.0f32, 1.5, 2.25, 1e-30, 7.0, 3.0e30]).unwrap();
        save_raster(&r, &p, RasterFormat::FloatRaster).unwrap();
        let back = load_raster(&p, RasterFormat::FloatRaster).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.width(), 3);
        assert_eq!(back.height(), 2);
    }

    #[test]
    fn fras_layout_is_bit_exact() {
        let r = Raster::new(1, 1, vec![1.0f32]).unwrap();
        let bytes = encode_fras(&r);
        assert_eq!(
            bytes,
            vec![b'F', b'R', b'A', b'S', 1, 1, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0x80, 0x3f]
        );
    }

    #[test]
    fn fras_nan_reports_pixel_offset() {
        let mut bytes = encode_fras(&Raster::new(3, 1, vec![1.0f32, 2.0, 3.0]).unwrap());
        bytes[FRAS_HEADER_LEN + 4..FRAS_HEADER_LEN + 8].copy_from_slice(&f32::NAN.to_le_bytes());
        let (offset, reason) = decode_fras(&bytes).unwrap_err();
        assert_eq!(offset, (FRAS_HEADER_LEN + 4) as u64);
        assert!(reason.contains("pixel 1"), "{reason}");
    }

    #[test]
    fn fras_rejects_malformed_headers() {
        assert_eq!(decode_fras(b"FRA").unwrap_err().0, 3);
        let mut bad_magic = encode_fras(&Raster::new(1, 1, vec![0.0f32]).unwrap());
        bad_magic[0] = b'X';
        assert_eq!(decode_fras(&bad_magic).unwrap_err().0, 0);
        let mut bad_version = encode_fras(&Raster::new(1, 1, vec![0.0f32]).unwrap());
        bad_version[4] = 9;
        assert_eq!(decode_fras(&bad_version).unwrap_err().0, 4);
        let mut huge = Vec::from(&FRAS_MAGIC[..]);
        huge.push(1);
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        assert_eq!(decode_fras(&huge).unwrap_err().0, 5);
        let mut negative = encode_fras(&Raster::new(2, 1, vec![0.0f32, 1.0]).unwrap());
        negative[FRAS_HEADER_LEN + 4..].copy_from_slice(&(-1.0f32).to_le_bytes());
        assert_eq!(decode_fras(&negative).unwrap_err().0, (FRAS_HEADER_LEN + 4) as u64);
        let truncated = &encode_fras(&Raster::new(2, 1, vec![0.0f32, 1.0]).unwrap())[..15];
        assert!(decode_fras(truncated).is_err());
    }

    #[test]
    fn png_quantization_rounds_and_clamps() {
        assert_eq!(quantize(0.5, 255.0), 128);
        assert_eq!(quantize(1.7, 255.0), 255);
        assert_eq!(quantize(0.0, 255.0), 0);

        let dir = tempdir().unwrap();
        let p = dir.path().join("q.png");
        let r = Raster::new(2, 1, vec![0.5f32, 1.7]).unwrap();
        save_raster(&r, &p, RasterFormat::GrayPng8).unwrap();
        let img = image::open(&p).unwrap().into_luma8();
        assert_eq!(img.into_raw(), vec![128, 255]);
    }

    #[test]
    fn masks_round_trip() {
        let dir = tempdir().unwrap();
        let m = BinaryMask::from_fn(5, 3, |x, y| (x * y) % 3 == 1);
        let p = dir.path().join("m.png");
        save_binary_mask(&m, &p).unwrap();
        assert_eq!(load_binary_mask(&p).unwrap(), m);
        let raw = image::open(&p).unwrap().into_luma8().into_raw();
        assert!(raw.iter().all(|&c| c == 0 || c == 255));

        let l = LabelMask::new(3, 2, vec![0, 1, 2, 3, 4, 0]).unwrap();
        let lp = dir.path().join("l.png");
        save_label_mask(&l, &lp).unwrap();
        assert_eq!(load_label_mask(&lp).unwrap(), l);
    }

    #[test]
    fn label_png_out_of_range_is_format_error() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("bad.png");
        GrayImage::from_raw(2, 1, vec![0, 7]).unwrap().save(&p).unwrap();
        assert!(matches!(load_label_mask(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let r = load_raster(Path::new("/nonexistent/x.fras"), RasterFormat::FloatRaster);
        assert!(matches!(r, Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn fras_round_trip_any_valid_raster(
            w in 1usize..12,
            h in 1usize..12,
            seed in any::<u64>(),
        ) {
            let r = Raster::from_fn(w, h, |x, y| {
                let bits = crate::seed::key(&[seed, x as u64, y as u64]) as u32;
                let v = f32::from_bits(bits & 0x7fff_ffff);
                if v.is_finite() { v } else { 0.0 }
            });
            let back = decode_fras(&encode_fras(&r)).unwrap();
            prop_assert_eq!(back.pixels().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            r.pixels().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }
}
