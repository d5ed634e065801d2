//! PNG / binary PGM (P5) / binary PPM (P6) readers and writers.
//!
//! Samples are treated as linear intensities and quantized to 8 bits on
//! output (16 bits for label maps). Writes go through a temporary file in
//! the destination directory followed by a rename.

use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use super::{rgb_to_gray, Grid, Image, Layout, RoiMask};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FileKind {
    Png,
    Pgm,
    Ppm,
}

fn kind_of(path: &Path) -> Result<FileKind> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(FileKind::Png),
        Some("pgm") => Ok(FileKind::Pgm),
        Some("ppm") | Some("pnm") => Ok(FileKind::Ppm),
        _ => Err(invalid(format!(
            "unsupported image extension: {}",
            path.display()
        ))),
    }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    kind_of(path)?;
    Ok(ImageReader::open(path)?.with_guessed_format()?.decode()?)
}

fn planes_from_dynamic(img: &DynamicImage) -> Result<Image> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let wide = matches!(
        img,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    let has_color = img.color().has_color();
    match (has_color, wide) {
        (false, false) => {
            let buf = img.to_luma8();
            let g = buf.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
            Image::gray(Grid::from_vec(w, h, g)?)
        }
        (false, true) => {
            let buf = img.to_luma16();
            let g = buf.as_raw().iter().map(|&v| v as f64 / 65535.0).collect();
            Image::gray(Grid::from_vec(w, h, g)?)
        }
        (true, false) => {
            let raw = img.to_rgb8().into_raw();
            let chan = |c: usize| {
                raw.iter()
                    .skip(c)
                    .step_by(3)
                    .map(|&v| v as f64 / 255.0)
                    .collect()
            };
            Image::rgb(
                Grid::from_vec(w, h, chan(0))?,
                Grid::from_vec(w, h, chan(1))?,
                Grid::from_vec(w, h, chan(2))?,
            )
        }
        (true, true) => {
            let raw = img.to_rgb16().into_raw();
            let chan = |c: usize| {
                raw.iter()
                    .skip(c)
                    .step_by(3)
                    .map(|&v| v as f64 / 65535.0)
                    .collect()
            };
            Image::rgb(
                Grid::from_vec(w, h, chan(0))?,
                Grid::from_vec(w, h, chan(1))?,
                Grid::from_vec(w, h, chan(2))?,
            )
        }
    }
}

/// Read a PNG / PGM / PPM file as a gray or RGB image.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    planes_from_dynamic(&decode(path.as_ref())?)
}

/// Read a single-channel map; color files are reduced to intensity.
pub fn read_grid(path: impl AsRef<Path>) -> Result<Grid> {
    let img = read_image(path)?;
    match img.layout() {
        Layout::Gray => Ok(img.plane(0).clone()),
        _ => rgb_to_gray(&img.to_rgb()),
    }
}

/// Read a binary mask: 8-bit samples `>= 128` are inside.
pub fn read_mask(path: impl AsRef<Path>) -> Result<RoiMask> {
    let g = read_grid(path)?;
    Ok(RoiMask::from_fn(g.width(), g.height(), |x, y| {
        (g.get(x, y) * 255.0).round() >= 128.0
    }))
}

/// Integer label raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
}

/// Read an 8- or 16-bit gray file as raw integer labels.
pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let img = decode(path.as_ref())?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let labels = match &img {
        DynamicImage::ImageLuma8(b) => b.as_raw().iter().map(|&v| v as u32).collect(),
        DynamicImage::ImageLuma16(b) => b.as_raw().iter().map(|&v| v as u32).collect(),
        _ => return Err(invalid("label maps must be single-channel 8 or 16 bit")),
    };
    Ok(LabelMap {
        width: w,
        height: h,
        labels,
    })
}

#[inline]
fn quantize8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode_gray8(kind: FileKind, w: usize, h: usize, data: &[u8]) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    match kind {
        FileKind::Png => PngEncoder::new(&mut buf).write_image(
            data,
            w as u32,
            h as u32,
            ExtendedColorType::L8,
        )?,
        _ => PnmEncoder::new(&mut buf)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(data, w as u32, h as u32, ExtendedColorType::L8)?,
    }
    Ok(buf.into_inner())
}

/// Encode an image for the format implied by `path`'s extension.
pub fn encode_image(path: impl AsRef<Path>, img: &Image) -> Result<Vec<u8>> {
    let kind = kind_of(path.as_ref())?;
    let (w, h) = img.dims();
    let gray_out = kind == FileKind::Pgm || (kind == FileKind::Png && img.layout() == Layout::Gray);
    if gray_out {
        let g = match img.layout() {
            Layout::Gray => img.plane(0).clone(),
            _ => rgb_to_gray(&img.to_rgb())?,
        };
        let data: Vec<u8> = g.data().iter().map(|&v| quantize8(v)).collect();
        return encode_gray8(kind, w, h, &data);
    }
    let rgb = img.to_rgb();
    let mut data = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        for c in 0..3 {
            data.push(quantize8(rgb.plane(c).data()[i]));
        }
    }
    let mut buf = Cursor::new(Vec::new());
    match kind {
        FileKind::Png => PngEncoder::new(&mut buf).write_image(
            &data,
            w as u32,
            h as u32,
            ExtendedColorType::Rgb8,
        )?,
        _ => PnmEncoder::new(&mut buf)
            .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
            .write_image(&data, w as u32, h as u32, ExtendedColorType::Rgb8)?,
    }
    Ok(buf.into_inner())
}

/// Write `bytes` to a sibling temporary file, then rename over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| invalid(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let bytes = encode_image(path.as_ref(), img)?;
    write_atomic(path, &bytes)
}

/// Write a scalar map in `[0, 1]` as an 8-bit gray file.
pub fn write_grid(path: impl AsRef<Path>, grid: &Grid) -> Result<()> {
    let kind = kind_of(path.as_ref())?;
    if kind == FileKind::Ppm {
        return Err(invalid("scalar maps are written as PGM or PNG"));
    }
    let data: Vec<u8> = grid.data().iter().map(|&v| quantize8(v)).collect();
    let bytes = encode_gray8(kind, grid.width(), grid.height(), &data)?;
    write_atomic(path, &bytes)
}

/// Write a label map as a 16-bit binary PGM.
pub fn write_labels(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    if labels.labels.iter().any(|&l| l > u16::MAX as u32) {
        return Err(invalid(
            "labels above 65535 cannot be stored in a 16-bit PGM",
        ));
    }
    let mut bytes = format!("P5\n{} {}\n65535\n", labels.width, labels.height).into_bytes();
    for &l in &labels.labels {
        bytes.extend_from_slice(&(l as u16).to_be_bytes());
    }
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_and_rgb_round_trip_through_all_formats() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::from_fn(7, 5, |x, y| ((x * 5 + y * 3) % 256) as f64 / 255.0);
        let rgb = Image::rgb(g.clone(), g.map(|v| 1.0 - v), g.map(|v| v * 0.5)).unwrap();
        for name in ["a.png", "a.ppm"] {
            let p = dir.path().join(name);
            write_image(&p, &rgb).unwrap();
            let back = read_image(&p).unwrap();
            assert_eq!(back.layout(), Layout::Rgb);
            for c in 0..3 {
                for (a, b) in rgb.plane(c).data().iter().zip(back.plane(c).data()) {
                    assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
                }
            }
        }
        for name in ["g.png", "g.pgm"] {
            let p = dir.path().join(name);
            write_grid(&p, &g).unwrap();
            let back = read_grid(&p).unwrap();
            assert_eq!(back.dims(), (7, 5));
            assert!(g
                .data()
                .iter()
                .zip(back.data())
                .all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }

    #[test]
    fn pgm_header_is_binary_graymap() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        write_grid(&p, &Grid::filled(3, 2, 1.0)).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(&bytes[bytes.len() - 6..], &[255u8; 6]);
    }

    #[test]
    fn mask_threshold_is_128() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        let g = Grid::from_fn(3, 1, |x, _| [127.0, 128.0, 255.0][x] / 255.0);
        write_grid(&p, &g).unwrap();
        let m = read_mask(&p).unwrap();
        assert_eq!(m.data(), &[false, true, true]);
    }

    #[test]
    fn sixteen_bit_labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.pgm");
        let lm = LabelMap {
            width: 4,
            height: 2,
            labels: vec![1, 2, 3, 300, 1, 1, 65535, 2],
        };
        write_labels(&p, &lm).unwrap();
        assert_eq!(read_labels(&p).unwrap(), lm);
    }

    #[test]
    fn unknown_extension_rejected() {
        let img = Image::rgb_filled(2, 2, [0.1, 0.2, 0.3]);
        assert!(encode_image("x.tiff", &img).is_err());
    }
}
