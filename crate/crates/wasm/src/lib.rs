//! wasm-bindgen exports for the demo page in `www/`.
//!
//! Images cross the boundary as RGBA bytes, masks as one byte per pixel
//! (nonzero = editable).

use dragwarp_core::pipeline::edit_pixel;
use dragwarp_core::synthetic::{plant_blob, textured_background};
use dragwarp_core::warpage::compute_warpage_field;
use dragwarp_core::{build_mask_point_set, DragMode, DragSet, EditConfig, LatentGrid, MaskBitmap, Point};
use wasm_bindgen::prelude::*;

fn to_grid(rgba: &[u8], width: usize, height: usize) -> Result<LatentGrid, String> {
    if rgba.len() != width * height * 4 {
        return Err(format!("expected {} RGBA bytes, got {}", width * height * 4, rgba.len()));
    }
    LatentGrid::from_fn(width, height, 3, |x, y, c| rgba[(y * width + x) * 4 + c] as f64 / 255.0).map_err(|e| e.to_string())
}

fn to_rgba(grid: &LatentGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(grid.width() * grid.height() * 4);
    for cell in grid.cells() {
        let v = grid.raw(cell);
        out.extend(v.iter().map(|x| (x.clamp(0.0, 1.0) * 255.0).round() as u8));
        out.push(255);
    }
    out
}

fn to_mask(bytes: &[u8], width: usize, height: usize) -> Result<MaskBitmap, String> {
    MaskBitmap::new(width, height, bytes.iter().map(|&b| b != 0).collect()).map_err(|e| e.to_string())
}

fn parse_mode(mode: &str) -> Result<DragMode, String> {
    match mode {
        "stretch" => Ok(DragMode::Stretch),
        "object-move" | "move" => Ok(DragMode::Move),
        "object-replicate" | "replicate" => Ok(DragMode::Replicate),
        other => Err(format!("unknown mode {other:?}")),
    }
}

pub fn scene_rgba(width: usize, height: usize, seed: u64) -> Vec<u8> {
    let mut grid = textured_background(width, height, seed);
    plant_blob(&mut grid, Point::new(width as f64 / 2.0, height as f64 / 2.0));
    to_rgba(&grid)
}

#[allow(clippy::too_many_arguments)]
pub fn edit_rgba(
    rgba: &[u8],
    width: usize,
    height: usize,
    mask: &[u8],
    handle: Point,
    target: Point,
    mode: &str,
) -> Result<Vec<u8>, String> {
    let image = to_grid(rgba, width, height)?;
    let mask = to_mask(mask, width, height)?;
    let drags = DragSet::single(handle, target, parse_mode(mode)?);
    let outcome = edit_pixel(&image, &mask, &drags, &EditConfig::default()).map_err(|e| e.to_string())?;
    Ok(to_rgba(&outcome.output))
}

/// Per-pixel warp magnitude, zero outside the mask.
pub fn field_magnitude(width: usize, height: usize, mask: &[u8], handle: Point, target: Point) -> Result<Vec<f32>, String> {
    let set = build_mask_point_set(&to_mask(mask, width, height)?).map_err(|e| e.to_string())?;
    let drags = DragSet::single(handle, target, DragMode::Stretch);
    let field = compute_warpage_field(&set, &drags, &set.circle()).map_err(|e| e.to_string())?;
    let mut out = vec![0.0f32; width * height];
    for (cell, v) in field.iter() {
        out[cell.y * width + cell.x] = v.norm() as f32;
    }
    Ok(out)
}

/// Synthetic test scene: textured background with a blob in the middle.
#[wasm_bindgen(js_name = blobScene)]
pub fn blob_scene(width: usize, height: usize, seed: u32) -> Vec<u8> {
    scene_rgba(width, height, seed as u64)
}

/// One drag edit on the pixel backend; returns the edited RGBA image.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = dragEdit)]
pub fn drag_edit(
    rgba: &[u8],
    width: usize,
    height: usize,
    mask: &[u8],
    hx: f64,
    hy: f64,
    tx: f64,
    ty: f64,
    mode: &str,
) -> Result<Vec<u8>, JsError> {
    edit_rgba(rgba, width, height, mask, Point::new(hx, hy), Point::new(tx, ty), mode).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = warpMagnitude)]
pub fn warp_magnitude(width: usize, height: usize, mask: &[u8], hx: f64, hy: f64, tx: f64, ty: f64) -> Result<Vec<f32>, JsError> {
    field_magnitude(width, height, mask, Point::new(hx, hy), Point::new(tx, ty)).map_err(|e| JsError::new(&e))
}
