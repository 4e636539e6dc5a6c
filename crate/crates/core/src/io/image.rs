//! 8-bit RGB images and grayscale masks, as PNG or binary PPM.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use super::IoError;
use crate::grid::{Cell, LatentGrid};
use crate::mask::MaskBitmap;

/// Gray levels at or above this mark a masked cell.
pub const MASK_THRESHOLD: u8 = 128;

fn format_for(path: &Path) -> Result<ImageFormat, IoError> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => Ok(ImageFormat::Png),
        Some("ppm" | "pgm" | "pnm") => Ok(ImageFormat::Pnm),
        _ => Err(IoError::UnsupportedFormat(path.display().to_string())),
    }
}

fn decode(bytes: &[u8]) -> Result<DynamicImage, IoError> {
    let format = image::guess_format(bytes).map_err(|_| IoError::UnsupportedFormat("unrecognized header".into()))?;
    match format {
        ImageFormat::Png | ImageFormat::Pnm => Ok(image::load_from_memory_with_format(bytes, format)?),
        other => Err(IoError::UnsupportedFormat(format!("{other:?}"))),
    }
}

fn rgb_to_grid(img: &RgbImage) -> LatentGrid {
    let (w, h) = img.dimensions();
    let data = img.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    LatentGrid::from_vec(w as usize, h as usize, 3, data).expect("decoded image is non-empty")
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// RGB image of a 3-channel grid, values clamped to `[0, 1]` and rounded.
pub fn grid_to_rgb(grid: &LatentGrid) -> Result<RgbImage, IoError> {
    if grid.channels() != 3 {
        return Err(IoError::Channels(grid.channels()));
    }
    let mut raw = Vec::with_capacity(grid.width() * grid.height() * 3);
    for cell in grid.cells() {
        raw.extend(grid.raw(cell).iter().map(|&v| quantize(v)));
    }
    Ok(RgbImage::from_raw(grid.width() as u32, grid.height() as u32, raw).expect("buffer sized to image"))
}

pub fn decode_image(bytes: &[u8]) -> Result<LatentGrid, IoError> {
    let img = decode(bytes)?;
    if img.width() == 0 || img.height() == 0 {
        return Err(IoError::EmptyImage);
    }
    Ok(rgb_to_grid(&img.to_rgb8()))
}

pub fn load_image(path: &Path) -> Result<LatentGrid, IoError> {
    decode_image(&std::fs::read(path)?)
}

pub fn encode_png(grid: &LatentGrid) -> Result<Vec<u8>, IoError> {
    let mut out = Cursor::new(Vec::new());
    grid_to_rgb(grid)?.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

/// Writes PNG or PPM depending on the extension.
pub fn save_image(grid: &LatentGrid, path: &Path) -> Result<(), IoError> {
    let format = format_for(path)?;
    let mut out = Cursor::new(Vec::new());
    grid_to_rgb(grid)?.write_to(&mut out, format)?;
    std::fs::write(path, out.into_inner())?;
    Ok(())
}

pub fn decode_mask(bytes: &[u8]) -> Result<MaskBitmap, IoError> {
    let gray = decode(bytes)?.to_luma8();
    let (w, h) = gray.dimensions();
    Ok(MaskBitmap::from_fn(w as usize, h as usize, |x, y| {
        gray.get_pixel(x as u32, y as u32)[0] >= MASK_THRESHOLD
    }))
}

pub fn load_mask(path: &Path) -> Result<MaskBitmap, IoError> {
    decode_mask(&std::fs::read(path)?)
}

/// Black/white PNG of a mask.
pub fn encode_mask_png(mask: &MaskBitmap) -> Result<Vec<u8>, IoError> {
    let raw = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, raw).expect("buffer sized to mask");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

/// 8-bit quantization, as applied on save.
pub fn quantize_grid(grid: &LatentGrid) -> LatentGrid {
    let mut out = grid.clone();
    for cell in grid.cells() {
        let v: Vec<f64> = grid.raw(cell).iter().map(|&v| quantize(v) as f64 / 255.0).collect();
        out.set(cell, &v);
    }
    out
}

/// Number of cells whose 8-bit values differ between two grids.
pub fn differing_pixels(a: &LatentGrid, b: &LatentGrid) -> usize {
    a.cells()
        .filter(|&c: &Cell| {
            a.raw(c)
                .iter()
                .zip(b.raw(c))
                .any(|(x, y)| quantize(*x) != quantize(*y))
        })
        .count()
}
